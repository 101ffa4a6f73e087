"""Decay-curve fitting and infidelity estimation."""

import numpy as np
import pytest

from subrb.analysis import (
    DecayFit,
    InfidelityReport,
    estimate_infidelity,
    fit_single_exponential,
    fit_two_exponentials,
)
from subrb.channels import infidelity_bounds
from subrb.engine import DecayData
from subrb.errors import ConfigError, DegenerateFitError


def synth_single(c0, c1, lam, lengths, n_seq=12, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    lengths = np.asarray(lengths)
    truth = c0 + c1 * lam ** lengths.astype(float)
    fid = truth[:, None] + noise * rng.standard_normal((len(lengths), n_seq))
    return DecayData(tuple(int(l) for l in lengths), fid)


def synth_double(c0, c1, lam1, c2, lam2, lengths, n_seq=12, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    lengths = np.asarray(lengths, dtype=float)
    truth = c0 + c1 * lam1**lengths + c2 * lam2**lengths
    fid = truth[:, None] + noise * rng.standard_normal((len(lengths), n_seq))
    return DecayData(tuple(int(l) for l in lengths), fid)


LENGTHS = [1, 2, 4, 8, 16, 32, 64, 128]


def test_single_fit_recovers_noiseless_parameters():
    data = synth_single(0.5, 0.45, 0.97, LENGTHS)
    fit = fit_single_exponential(data)
    assert fit.converged
    assert fit.order == 1
    assert fit.offset == pytest.approx(0.5, abs=1e-7)
    assert fit.amplitudes[0] == pytest.approx(0.45, abs=1e-7)
    assert fit.lambdas[0] == pytest.approx(0.97, abs=1e-8)
    assert fit.residual_norm < 1e-10


def test_single_fit_noisy_recovery_within_errorbars():
    data = synth_single(0.5, 0.5, 0.95, LENGTHS, n_seq=80, noise=0.01, seed=5)
    fit = fit_single_exponential(data)
    assert fit.diagnostics["weighted"]
    assert abs(fit.lambdas[0] - 0.95) < 4 * fit.lambda_stderrs[0]
    assert fit.lambda_stderrs[0] < 5e-3


def test_single_fit_predict_matches_model():
    data = synth_single(0.48, 0.5, 0.9, LENGTHS)
    fit = fit_single_exponential(data)
    lens = np.array([1.0, 10.0, 50.0])
    np.testing.assert_allclose(
        fit.predict(lens), 0.48 + 0.5 * 0.9**lens, atol=1e-6
    )


def test_single_fit_stderr_shrinks_with_more_sequences():
    small = synth_single(0.5, 0.5, 0.95, LENGTHS, n_seq=20, noise=0.02, seed=1)
    large = synth_single(0.5, 0.5, 0.95, LENGTHS, n_seq=500, noise=0.02, seed=2)
    f_small = fit_single_exponential(small)
    f_large = fit_single_exponential(large)
    assert f_large.lambda_stderrs[0] < f_small.lambda_stderrs[0]
    # ~ sqrt(25) ratio, loosely
    assert f_large.lambda_stderrs[0] < 0.4 * f_small.lambda_stderrs[0]


def test_constant_data_raises_degenerate():
    flat = DecayData((1, 2, 4), np.full((3, 5), 0.75))
    with pytest.raises(DegenerateFitError):
        fit_single_exponential(flat)


def test_too_few_lengths_raises_degenerate():
    data = synth_single(0.5, 0.4, 0.9, [1, 2])
    with pytest.raises(DegenerateFitError):
        fit_single_exponential(data)
    data5 = synth_single(0.5, 0.4, 0.9, [1, 2, 4, 8])
    with pytest.raises(DegenerateFitError):
        fit_two_exponentials(data5)  # needs five distinct lengths


def test_double_fit_recovers_two_rates():
    data = synth_double(0.25, 0.4, 0.97, 0.35, 0.80, LENGTHS)
    fit = fit_two_exponentials(data)
    assert fit.order == 2
    assert fit.converged
    assert fit.lambdas[0] > fit.lambdas[1]  # canonical descending order
    assert fit.lambdas[0] == pytest.approx(0.97, abs=1e-6)
    assert fit.lambdas[1] == pytest.approx(0.80, abs=1e-6)
    assert fit.amplitudes[0] == pytest.approx(0.4, abs=1e-5)
    assert fit.amplitudes[1] == pytest.approx(0.35, abs=1e-5)
    assert not fit.diagnostics["collapsed_to_single"]


def test_double_fit_noisy_recovery():
    data = synth_double(
        0.25, 0.4, 0.96, 0.3, 0.7, LENGTHS, n_seq=200, noise=0.004, seed=9
    )
    fit = fit_two_exponentials(data)
    assert abs(fit.lambdas[0] - 0.96) < 5 * fit.lambda_stderrs[0]
    assert abs(fit.lambdas[1] - 0.7) < 5 * fit.lambda_stderrs[1]


def test_double_fit_collapses_on_single_exponential_data():
    data = synth_single(0.5, 0.45, 0.93, LENGTHS, n_seq=40, noise=1e-4, seed=3)
    fit = fit_two_exponentials(data)
    assert fit.diagnostics["redundant_component"]
    assert fit.diagnostics["collapsed_to_single"]
    assert fit.amplitudes[1] == 0.0
    assert fit.lambdas[0] == fit.lambdas[1]
    assert fit.lambdas[0] == pytest.approx(0.93, abs=1e-3)
    assert np.isnan(fit.lambda_stderrs[1])
    single = fit_single_exponential(data)
    assert fit.lambdas[0] == pytest.approx(single.lambdas[0], abs=1e-12)


def test_fit_to_dict_shape():
    fit = fit_single_exponential(synth_single(0.5, 0.4, 0.9, LENGTHS))
    d = fit.to_dict()
    assert d["model"] == "1-exponential"
    assert set(d) >= {
        "model",
        "offset",
        "amplitudes",
        "lambdas",
        "offset_stderr",
        "amplitude_stderrs",
        "lambda_stderrs",
        "residual_norm",
        "iterations",
        "converged",
        "diagnostics",
    }
    d2 = fit_two_exponentials(
        synth_double(0.25, 0.4, 0.95, 0.3, 0.7, LENGTHS)
    ).to_dict()
    assert d2["model"] == "2-exponential"
    assert len(d2["lambdas"]) == 2


def test_bootstrap_stderr_is_comparable_to_analytic():
    data = synth_single(0.5, 0.5, 0.95, LENGTHS, n_seq=60, noise=0.01, seed=12)
    fit = fit_single_exponential(data, bootstrap=60, bootstrap_seed=4)
    bs = fit.diagnostics["bootstrap_lambda_stderr"]
    assert len(bs) == 1
    ratio = bs[0] / fit.lambda_stderrs[0]
    assert 0.3 < ratio < 3.0


def test_fit_validates_lambda_domain():
    with pytest.raises(ConfigError):
        DecayFit(
            order=1,
            offset=0.5,
            amplitudes=(0.5,),
            lambdas=(1.5,),
            offset_stderr=0.0,
            amplitude_stderrs=(0.0,),
            lambda_stderrs=(0.0,),
            residual_norm=0.0,
            iterations=1,
            converged=True,
            diagnostics={},
        )


def synth_fit(lam, err=1e-4):
    data = synth_single(0.5, 0.5, lam, LENGTHS, n_seq=30, noise=0.002, seed=17)
    return fit_single_exponential(data)


def test_estimate_infidelity_real_variant():
    fit = synth_fit(0.99)
    rep = estimate_infidelity(fit, "real", "real_from_lambda1", 2)
    lam = fit.lambdas[0]
    lo, hi, point = infidelity_bounds("real_from_lambda1", 2, [lam])
    assert rep.lower == pytest.approx(lo)
    assert rep.upper == pytest.approx(hi)
    assert rep.point_estimate == pytest.approx(hi)
    assert rep.point_stderr == rep.upper_stderr
    # first-order propagation: endpoint slope x lambda error
    slope = 18 / 16  # (4^n + 2^n - 2)/4^n at n = 2
    assert rep.upper_stderr == pytest.approx(slope * fit.lambda_stderrs[0], rel=1e-3)
    d = rep.to_dict()
    assert d["variant"] == "real_from_lambda1"
    assert d["n_qubits"] == 2


def test_estimate_infidelity_pair_variant():
    f1 = synth_fit(0.99)
    f2 = synth_fit(0.985)
    rep = estimate_infidelity((f1, f2), "cnot-pauli", "cnotpauli_from_lambda1_lambda2", 2)
    lo, hi, _ = infidelity_bounds(
        "cnotpauli_from_lambda1_lambda2", 2, [f1.lambdas[0], f2.lambdas[0]]
    )
    assert rep.lower == pytest.approx(lo)
    assert rep.upper == pytest.approx(hi)
    assert len(rep.lambdas) == 2


def test_estimate_infidelity_validation():
    fit = synth_fit(0.99)
    with pytest.raises(ConfigError):
        estimate_infidelity(fit, "real", "nope", 2)
    with pytest.raises(ConfigError):
        estimate_infidelity(fit, "cnot-pauli", "real_from_lambda1", 2)  # wrong group
    with pytest.raises(ConfigError):
        estimate_infidelity(
            fit, "cnot-pauli", "cnotpauli_from_lambda1_lambda2", 2
        )  # needs a pair
    with pytest.raises(ConfigError):
        estimate_infidelity(
            (fit, fit), "cnot-pauli", "cnotpauli_from_lambda3", 3
        )  # needs a single fit
    with pytest.raises(ConfigError):
        estimate_infidelity(fit, "cnot-pauli", "cnotpauli_from_lambda3", 2)  # n > 2


def test_estimate_uses_collapsed_dominant_lambda():
    data = synth_single(0.5, 0.45, 0.93, LENGTHS, n_seq=40, noise=1e-4, seed=21)
    fit2 = fit_two_exponentials(data)
    assert fit2.diagnostics["collapsed_to_single"]
    rep = estimate_infidelity(fit2, "real", "real_from_lambda1", 2)
    lo, hi, _ = infidelity_bounds("real_from_lambda1", 2, [fit2.lambdas[0]])
    assert rep.upper == pytest.approx(hi)
    assert np.isfinite(rep.upper_stderr)


def test_unweighted_path_on_deterministic_data():
    # per-length scatter is exactly zero: weighting must fall back to OLS
    data = synth_single(0.5, 0.45, 0.9, LENGTHS, n_seq=5, noise=0.0)
    fit = fit_single_exponential(data)
    assert not fit.diagnostics["weighted"]
    assert fit.lambdas[0] == pytest.approx(0.9, abs=1e-8)
