"""Decay-curve fitting and infidelity estimation.

Sequence-fidelity means follow f_l = c0 + Σ_i c_i·λ_i^l.  Fitting such curves
is multimodal in the decay bases, so both fitters run a coarse grid over the
λs — solving the then-linear (c0, c_i) subproblem at every grid point — and
polish the best grid candidate with a damped Gauss–Newton loop.  Everything is
deterministic; grid ties break toward the smallest λ.

Standard errors come from the local quadratic model at the optimum: the
unscaled inverse normal matrix when per-length standard errors supply absolute
weights, or the residual-scaled version for unweighted fits.  An optional
bootstrap (resampling sequences) is available for small sequence counts.

``estimate_infidelity`` turns fitted λs into entanglement-infidelity bounds
via :func:`subrb.channels.infidelity_bounds`, propagating only the fit
uncertainty to the interval endpoints (first order); SPAM uncertainty beyond
that is not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    VARIANT_CNOT_L3,
    VARIANT_CNOT_L12,
    VARIANT_REAL,
    infidelity_bounds,
    worst_case_factor,
)
from .engine import DecayData
from .errors import ConfigError, DegenerateFitError

_GRID_SINGLE = np.concatenate([np.arange(0.01, 1.00, 0.01), [0.999]])
_GRID_PAIR = np.concatenate([np.arange(0.02, 1.00, 0.02), [0.999]])
_MAX_ITER = 200
_LAMBDA_FLOOR = -0.999999
_NEAR_DEGENERATE_GAP = 0.01


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay model f_l = offset + Σ amplitudes[i] · lambdas[i]^l."""

    order: int
    offset: float
    amplitudes: tuple[float, ...]
    lambdas: tuple[float, ...]
    offset_stderr: float
    amplitude_stderrs: tuple[float, ...]
    lambda_stderrs: tuple[float, ...]
    residual_norm: float
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.amplitudes) != self.order or len(self.lambdas) != self.order:
            raise ConfigError("component count does not match model order")
        for lam in self.lambdas:
            if not (-1.0 < lam <= 1.0):
                raise ConfigError(f"decay base {lam} outside (-1, 1]")

    def predict(self, lengths) -> np.ndarray:
        l = np.asarray(lengths, dtype=np.float64)
        out = np.full_like(l, self.offset)
        for c, lam in zip(self.amplitudes, self.lambdas):
            out = out + c * np.power(lam, l)
        return out

    def to_dict(self) -> dict:
        return {
            "model": f"{self.order}-exponential",
            "order": self.order,
            "offset": self.offset,
            "amplitudes": list(self.amplitudes),
            "lambdas": list(self.lambdas),
            "offset_stderr": self.offset_stderr,
            "amplitude_stderrs": list(self.amplitude_stderrs),
            "lambda_stderrs": list(self.lambda_stderrs),
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "diagnostics": dict(self.diagnostics),
        }


# -- shared machinery ---------------------------------------------------------


def _prepare(d: DecayData, min_lengths: int):
    lengths = np.asarray(d.lengths, dtype=np.float64)
    if len(set(d.lengths)) < min_lengths:
        raise DegenerateFitError(
            f"need at least {min_lengths} distinct lengths, got {len(set(d.lengths))}"
        )
    y = d.mean
    scale = max(1.0, float(np.max(np.abs(y))))
    if float(np.ptp(y)) <= 1e-14 * scale:
        raise DegenerateFitError(
            "fidelity means are constant across lengths; decay base unidentifiable"
        )
    se = d.stderr
    # Deterministic lengths report stderr at float-noise level; weighting by
    # 1/stderr² is only meaningful when every length has a real error bar.
    floor = 1e-12 * np.maximum(1.0, np.abs(y))
    weighted = bool(np.all(se > floor) and np.all(np.isfinite(se)))
    sw = 1.0 / se if weighted else None
    return lengths, y, sw, weighted


def _design(lengths, lams):
    cols = [np.ones_like(lengths)]
    for lam in lams:
        cols.append(np.power(lam, lengths))
    return np.column_stack(cols)


def _linear_solve(lengths, y, sw, lams):
    a = _design(lengths, lams)
    b = y
    if sw is not None:
        a = a * sw[:, None]
        b = y * sw
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    r = a @ coef - b
    return coef, float(r @ r)


def _residual_jacobian(theta, k, lengths, y, sw):
    c0 = theta[0]
    cs = theta[1 : 1 + k]
    lams = theta[1 + k :]
    powers = [np.power(lam, lengths) for lam in lams]
    model = c0 + sum(c * p for c, p in zip(cs, powers))
    r = model - y
    cols = [np.ones_like(lengths)]
    cols.extend(powers)
    for c, lam in zip(cs, lams):
        cols.append(c * lengths * np.power(lam, lengths - 1.0))
    j = np.column_stack(cols)
    if sw is not None:
        r = r * sw
        j = j * sw[:, None]
    return r, j


def _clamp_lambdas(theta, k):
    theta[1 + k :] = np.clip(theta[1 + k :], _LAMBDA_FLOOR, 1.0)


def _gauss_newton(theta0, k, lengths, y, sw):
    """Levenberg-style damped Gauss–Newton; returns (theta, sse, iters, ok)."""
    theta = np.array(theta0, dtype=np.float64)
    _clamp_lambdas(theta, k)
    r, j = _residual_jacobian(theta, k, lengths, y, sw)
    sse = float(r @ r)
    mu = 1e-6
    converged = False
    it = 0
    for it in range(1, _MAX_ITER + 1):
        jtj = j.T @ j
        g = j.T @ r
        damp = np.diag(np.maximum(np.diag(jtj), 1e-12))
        try:
            step = np.linalg.solve(jtj + mu * damp, -g)
        except np.linalg.LinAlgError:
            mu *= 10.0
            continue
        cand = theta + step
        _clamp_lambdas(cand, k)
        rc, jc = _residual_jacobian(cand, k, lengths, y, sw)
        sse_c = float(rc @ rc)
        if sse_c <= sse:
            improved = sse - sse_c
            theta, r, j, sse = cand, rc, jc, sse_c
            mu = max(mu / 3.0, 1e-12)
            if improved <= 1e-15 * max(sse, 1e-30) or np.max(np.abs(step)) < 1e-12:
                converged = True
                break
        else:
            mu *= 4.0
            if mu > 1e12:
                break
    return theta, sse, it, converged, j


def _stderr(j, sse, n_points, n_params, weighted):
    dof = n_points - n_params
    jtj = j.T @ j
    try:
        cov = np.linalg.inv(jtj)
        singular = False
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
        singular = True
    if not weighted:
        if dof > 0:
            cov = cov * (sse / dof)
        else:
            cov = np.full_like(cov, np.nan)
    err = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return err, dof, singular, float(np.linalg.cond(jtj))


def _bootstrap_lambda_stderr(d: DecayData, k, fit_fn, samples, seed):
    if d.sequences_per_length < 2:
        return None
    rng = np.random.default_rng(seed)
    m = d.sequences_per_length
    draws = []
    for _ in range(samples):
        idx = rng.integers(0, m, size=m)
        resampled = DecayData(d.lengths, d.fidelities[:, idx])
        try:
            refit = fit_fn(resampled)
        except DegenerateFitError:
            continue
        draws.append(refit.lambdas)
    if len(draws) < 2:
        return None
    arr = np.array(draws)
    return tuple(float(v) for v in arr.std(axis=0, ddof=1))


# -- public fitters -----------------------------------------------------------


def fit_single_exponential(
    d: DecayData, bootstrap: int = 0, bootstrap_seed: int = 0
) -> DecayFit:
    """Fit f_l = c0 + c1·λ^l by grid search plus damped Gauss–Newton.

    Weighted by 1/stderr² whenever every length has a positive standard
    error; otherwise ordinary least squares with residual-scaled errors.
    """
    lengths, y, sw, weighted = _prepare(d, 3)
    best = None
    for lam in _GRID_SINGLE:
        coef, sse = _linear_solve(lengths, y, sw, [lam])
        if best is None or sse < best[0] - 1e-18:
            best = (sse, lam, coef)
    _, lam0, coef0 = best
    theta0 = np.array([coef0[0], coef0[1], lam0])
    theta, sse, iters, converged, j = _gauss_newton(theta0, 1, lengths, y, sw)
    err, dof, singular, cond = _stderr(j, sse, len(lengths), 3, weighted)
    diagnostics = {
        "weighted": weighted,
        "grid_lambda": float(lam0),
        "dof": dof,
        "condition_number": cond,
        "negative_lambda": bool(theta[2] < 0),
        "singular_normal_matrix": singular,
    }
    if bootstrap > 0:
        bs = _bootstrap_lambda_stderr(
            d, 1, fit_single_exponential, bootstrap, bootstrap_seed
        )
        if bs is not None:
            diagnostics["bootstrap_lambda_stderr"] = list(bs)
    return DecayFit(
        order=1,
        offset=float(theta[0]),
        amplitudes=(float(theta[1]),),
        lambdas=(float(theta[2]),),
        offset_stderr=float(err[0]),
        amplitude_stderrs=(float(err[1]),),
        lambda_stderrs=(float(err[2]),),
        residual_norm=math.sqrt(sse),
        iterations=iters,
        converged=converged,
        diagnostics=diagnostics,
    )


def fit_two_exponentials(
    d: DecayData, bootstrap: int = 0, bootstrap_seed: int = 0
) -> DecayFit:
    """Fit f_l = c0 + c1·λ1^l + c2·λ2^l (λ1 > λ2), variable-projection style.

    The 2-D λ grid solves the linear (c0, c1, c2) subproblem at each point;
    the best candidate is refined over all five parameters.  A near-equal λ
    pair is flagged (the problem is ill-conditioned there; the normal-matrix
    condition number is always reported), and an amplitude compatible with
    zero is flagged as a redundant component.
    """
    lengths, y, sw, weighted = _prepare(d, 5)
    best = None
    for i, lam1 in enumerate(_GRID_PAIR):
        for lam2 in _GRID_PAIR[:i]:  # lam2 < lam1
            coef, sse = _linear_solve(lengths, y, sw, [lam1, lam2])
            if best is None or sse < best[0] - 1e-18:
                best = (sse, lam1, lam2, coef)
    _, lam1_0, lam2_0, coef0 = best
    theta0 = np.array([coef0[0], coef0[1], coef0[2], lam1_0, lam2_0])
    theta, sse, iters, converged, j = _gauss_newton(theta0, 2, lengths, y, sw)
    # Canonical order: descending λ.
    if theta[4] > theta[3]:
        theta = theta[[0, 2, 1, 4, 3]]
        _, j = _residual_jacobian(theta, 2, lengths, y, sw)
    err, dof, singular, cond = _stderr(j, sse, len(lengths), 5, weighted)
    amp_scale = max(abs(theta[1]), abs(theta[2]), 1e-12)
    near_degenerate = bool(abs(theta[3] - theta[4]) < _NEAR_DEGENERATE_GAP)
    tiny_second = bool(
        abs(theta[2]) <= max(3.0 * err[2], 1e-8 * amp_scale)
        if np.isfinite(err[2])
        else abs(theta[2]) <= 1e-8 * amp_scale
    )
    collapsed = False
    if near_degenerate or tiny_second:
        # The second component may be redundant: if one exponential explains
        # the data equally well, return the canonical collapsed solution
        # (c2 = 0, λ2 = λ1) instead of an arbitrary point on the degenerate
        # optimum manifold.
        single = fit_single_exponential(d)
        sse_single = single.residual_norm**2
        if sse_single <= sse + max(1e-18, 1e-9 * max(sse, sse_single)):
            collapsed = True
            theta = np.array(
                [
                    single.offset,
                    single.amplitudes[0],
                    0.0,
                    single.lambdas[0],
                    single.lambdas[0],
                ]
            )
            sse = sse_single
            iters += single.iterations
            converged = single.converged
            err = np.array(
                [
                    single.offset_stderr,
                    single.amplitude_stderrs[0],
                    np.nan,
                    single.lambda_stderrs[0],
                    np.nan,
                ]
            )
            near_degenerate = True
    redundant = tiny_second or collapsed
    diagnostics = {
        "weighted": weighted,
        "grid_lambdas": [float(lam1_0), float(lam2_0)],
        "dof": dof,
        "condition_number": cond,
        "near_degenerate": near_degenerate,
        "redundant_component": redundant,
        "collapsed_to_single": collapsed,
        "negative_lambda": bool(min(theta[3], theta[4]) < 0),
        "singular_normal_matrix": singular,
    }
    if bootstrap > 0:
        bs = _bootstrap_lambda_stderr(
            d, 2, fit_two_exponentials, bootstrap, bootstrap_seed
        )
        if bs is not None:
            diagnostics["bootstrap_lambda_stderr"] = list(bs)
    return DecayFit(
        order=2,
        offset=float(theta[0]),
        amplitudes=(float(theta[1]), float(theta[2])),
        lambdas=(float(theta[3]), float(theta[4])),
        offset_stderr=float(err[0]),
        amplitude_stderrs=(float(err[1]), float(err[2])),
        lambda_stderrs=(float(err[3]), float(err[4])),
        residual_norm=math.sqrt(sse),
        iterations=iters,
        converged=converged,
        diagnostics=diagnostics,
    )


# -- infidelity estimation ----------------------------------------------------


@dataclass(frozen=True)
class InfidelityReport:
    """Entanglement-infidelity interval derived from fitted decay bases."""

    variant: str
    n_qubits: int
    lambdas: tuple[float, ...]
    lambda_stderrs: tuple[float, ...]
    lower: float
    upper: float
    point_estimate: float
    lower_stderr: float
    upper_stderr: float
    worst_case_factor: float

    @property
    def point_stderr(self) -> float:
        return self.upper_stderr

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "n_qubits": self.n_qubits,
            "lambdas": list(self.lambdas),
            "lambda_stderrs": list(self.lambda_stderrs),
            "lower": self.lower,
            "upper": self.upper,
            "point_estimate": self.point_estimate,
            "lower_stderr": self.lower_stderr,
            "upper_stderr": self.upper_stderr,
            "worst_case_factor": self.worst_case_factor,
        }


_VARIANT_GROUPS = {
    VARIANT_REAL: "REAL_CLIFFORD",
    VARIANT_CNOT_L12: "CNOT_PAULI",
    VARIANT_CNOT_L3: "CNOT_PAULI",
}


def _dominant_lambda(fit: DecayFit) -> tuple[float, float]:
    return fit.lambdas[0], fit.lambda_stderrs[0]


def estimate_infidelity(
    fits, group_name: str, variant: str, n_qubits: int
) -> InfidelityReport:
    """Convert fitted decay bases into an infidelity interval for ``variant``.

    ``fits`` is one DecayFit (real / λ3 variants) or a pair (λ1 then λ2 run).
    Fit standard errors propagate to the endpoints at first order; the point
    estimate is the conservative upper endpoint.
    """
    from .tableau import group_by_name

    if variant not in _VARIANT_GROUPS:
        raise ConfigError(
            f"unknown estimator variant {variant!r}; choose from "
            f"{sorted(_VARIANT_GROUPS)}"
        )
    expected_group = _VARIANT_GROUPS[variant]
    actual_group = group_by_name(group_name).name
    if actual_group != expected_group:
        raise ConfigError(
            f"variant {variant!r} applies to {expected_group}, not {actual_group}"
        )
    if variant == VARIANT_CNOT_L12:
        if isinstance(fits, DecayFit) or len(tuple(fits)) != 2:
            raise ConfigError(f"{variant!r} needs a pair of fits (λ1 run, λ2 run)")
        pair = tuple(fits)
        lams, errs = zip(*(_dominant_lambda(f) for f in pair))
    else:
        if not isinstance(fits, DecayFit):
            raise ConfigError(f"{variant!r} takes a single fit")
        lam, err = _dominant_lambda(fits)
        lams, errs = (lam,), (err,)
    bounds = infidelity_bounds(variant, n_qubits, lams)

    # Endpoints are linear in the λs, so first-order propagation is exact:
    # perturb each λ by its stderr and combine in quadrature.
    def propagated(endpoint_index):
        acc = 0.0
        for i, sigma in enumerate(errs):
            if not np.isfinite(sigma):
                return float("nan")
            bumped = list(lams)
            bumped[i] += 1e-6
            shifted = infidelity_bounds(variant, n_qubits, bumped)[endpoint_index]
            slope = (shifted - bounds[endpoint_index]) / 1e-6
            acc += (slope * sigma) ** 2
        return math.sqrt(acc)

    return InfidelityReport(
        variant=variant,
        n_qubits=n_qubits,
        lambdas=tuple(float(v) for v in lams),
        lambda_stderrs=tuple(float(v) for v in errs),
        lower=bounds.lower,
        upper=bounds.upper,
        point_estimate=bounds.point_estimate,
        lower_stderr=propagated(0),
        upper_stderr=propagated(1),
        worst_case_factor=worst_case_factor(variant, n_qubits),
    )
