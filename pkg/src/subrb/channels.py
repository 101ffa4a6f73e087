"""Pauli error channels, block twirls, decay eigenvalues, and infidelity bounds.

A Pauli channel is a probability vector over the ``4**n`` Pauli indices:
``E(ρ) = Σ_μ w_μ P_μ ρ P_μ``.  Every Pauli is an eigenoperator of such a
channel with eigenvalue

    λ(P) = Σ_{μ commuting with P} w_μ − Σ_{μ anticommuting} w_μ = 1 − 2·(anticommuting weight),

and the entanglement infidelity is simply ``p = 1 − w_identity``.

Averaging the channel over conjugation by a gate-set group flattens the
weights within each orbit block (``twirl_to_blocks``); the decay eigenvalue
attached to block j then follows from the anticommutation census:

    λ_j = 1 − 2 Σ_i p_i · A[i][j] / N_i.

Closed forms of these eigenvalues for the real-Clifford and CNOT+Pauli sets,
their large-n expansions, the depolarizing eigenvalue of the full set, and
two-sided bounds recovering p from measured eigenvalues are provided as plain
arithmetic — they are compared against the census route in the tests and the
acceptance suite.

``DenseChi`` is a deliberately brute-force process-matrix oracle (n ≤ 2) used
to cross-check the index arithmetic: Pauli twirling kills its off-diagonal
entries literally, by averaging over all ``4**n`` sign conjugations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError
from .orbits import AnticommutationCensus, BlockDecomposition
from .pauli import PauliOperator

NORMALIZATION_TOL = 1e-12
WEIGHT_CLAMP = 1e-15

VARIANT_REAL = "real_from_lambda1"
VARIANT_CNOT_L12 = "cnotpauli_from_lambda1_lambda2"
VARIANT_CNOT_L3 = "cnotpauli_from_lambda3"
BOUND_VARIANTS = (VARIANT_REAL, VARIANT_CNOT_L12, VARIANT_CNOT_L3)


@dataclass(frozen=True, eq=False)
class PauliChannel:
    """Probability weights over the canonical Pauli indices."""

    n_qubits: int
    weights: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, PauliChannel):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash((self.n_qubits, self.weights.tobytes()))

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).copy()
        size = 1 << (2 * self.n_qubits)
        if w.shape != (size,):
            raise ConfigError(
                f"channel weight vector must have length {size}, got {w.shape}"
            )
        w[np.abs(w) < WEIGHT_CLAMP] = 0.0
        if (w < 0).any():
            raise ConfigError("channel weights must be non-negative")
        if abs(w.sum() - 1.0) > NORMALIZATION_TOL:
            raise ConfigError(
                f"channel weights must sum to 1 within {NORMALIZATION_TOL:g} "
                f"(got {w.sum()!r})"
            )
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliChannel":
        w = np.zeros(1 << (2 * n_qubits))
        w[0] = 1.0
        return cls(n_qubits, w)

    @classmethod
    def depolarizing(cls, n_qubits: int, p: float) -> "PauliChannel":
        """Weight p spread uniformly over the non-identity Paulis."""
        size = 1 << (2 * n_qubits)
        w = np.full(size, p / (size - 1))
        w[0] = 1.0 - p
        return cls(n_qubits, w)

    @classmethod
    def from_weight_map(
        cls, n_qubits: int, weights: dict[str, float]
    ) -> "PauliChannel":
        """Build from a {pauli string: weight} map; identity weight is inferred
        from normalization when absent."""
        size = 1 << (2 * n_qubits)
        w = np.zeros(size)
        for text, val in weights.items():
            p = PauliOperator.from_string(text)
            if p.n_qubits != n_qubits:
                raise ConfigError(
                    f"weight entry {text!r} has {p.n_qubits} qubits, expected {n_qubits}"
                )
            if p.sign < 0:
                raise ConfigError(f"weight entry {text!r} must be unsigned")
            w[p.index] += float(val)
        if w[0] == 0.0:
            w[0] = 1.0 - w[1:].sum()
        return cls(n_qubits, w)

    @classmethod
    def from_json_dict(cls, payload: dict) -> "PauliChannel":
        try:
            n = int(payload["n"])
            entries = payload["weights"]
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"channel JSON missing field: {exc}") from exc
        wmap: dict[str, float] = {}
        for e in entries:
            try:
                wmap[e["pauli"]] = wmap.get(e["pauli"], 0.0) + float(e["w"])
            except (KeyError, TypeError) as exc:
                raise ConfigError(
                    f"channel weight entry must have 'pauli' and 'w': {e!r}"
                ) from exc
        return cls.from_weight_map(n, wmap)

    def to_json_dict(self) -> dict:
        entries = [
            {"pauli": PauliOperator.from_index(self.n_qubits, i).to_string(), "w": float(w)}
            for i, w in enumerate(self.weights)
            if w != 0.0
        ]
        return {"n": self.n_qubits, "weights": entries}

    @classmethod
    def load(cls, path) -> "PauliChannel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)
            fh.write("\n")

    # -- basic quantities ---------------------------------------------------

    @property
    def infidelity(self) -> float:
        """Entanglement infidelity p = total non-identity weight."""
        return float(1.0 - self.weights[0])


def pauli_eigenvalue(c: PauliChannel, p: PauliOperator) -> float:
    """Channel eigenvalue of one Pauli: commuting minus anticommuting weight."""
    if p.n_qubits != c.n_qubits:
        raise ConfigError("size mismatch between channel and Pauli")
    support = np.flatnonzero(c.weights)
    n = c.n_qubits
    xs = support >> n
    zs = support & ((1 << n) - 1)
    anti = _kernels.anticommute(
        xs.astype(np.int64), zs.astype(np.int64), p.x_bits, p.z_bits
    )
    return float(1.0 - 2.0 * c.weights[support[anti.astype(bool)]].sum())


def eigenvalue_table(c: PauliChannel) -> np.ndarray:
    """λ for every Pauli index at once (loops over the channel's support)."""
    n = c.n_qubits
    size = 1 << (2 * n)
    idx = np.arange(size, dtype=np.int64)
    xs = idx >> n
    zs = idx & ((1 << n) - 1)
    anti_weight = np.zeros(size)
    for nu in np.flatnonzero(c.weights):
        wv = c.weights[nu]
        anti = _kernels.anticommute(xs, zs, int(nu) >> n, int(nu) & ((1 << n) - 1))
        anti_weight += wv * anti
    return 1.0 - 2.0 * anti_weight


def average_infidelity(p: float, n_qubits: int) -> float:
    """Average gate infidelity from entanglement infidelity: 2**n p / (2**n + 1)."""
    two_n = 2**n_qubits
    return two_n * p / (two_n + 1)


# -- block channels -----------------------------------------------------------


@dataclass(frozen=True)
class BlockChannel:
    """Total error weight per orbit block (the twirl of a Pauli channel)."""

    decomposition: BlockDecomposition
    identity_weight: float
    block_weights: tuple[float, ...]  # non-identity blocks, in block order

    def __post_init__(self):
        d = self.decomposition
        if len(self.block_weights) != d.block_count - 1:
            raise ConfigError(
                f"expected {d.block_count - 1} block weights, got {len(self.block_weights)}"
            )
        for bw, members in zip(self.block_weights, d.blocks[1:]):
            if bw < 0:
                raise ConfigError("block weights must be non-negative")
            if not members and bw != 0.0:
                raise ConfigError("empty block cannot carry weight")
        total = self.identity_weight + sum(self.block_weights)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ConfigError(f"block weights must sum to 1 (got {total!r})")

    @property
    def infidelity(self) -> float:
        return float(sum(self.block_weights))

    def uniform_channel(self) -> PauliChannel:
        """Materialize as a Pauli channel with weight p_i/N_i on each member."""
        d = self.decomposition
        w = np.zeros(d.size)
        w[0] = self.identity_weight
        for bw, members in zip(self.block_weights, d.blocks[1:]):
            if members:
                for m in members:
                    w[m] = bw / len(members)
        return PauliChannel(d.n_qubits, w)


def twirl_to_blocks(c: PauliChannel, d: BlockDecomposition) -> BlockChannel:
    """Sum the channel weights over each orbit block."""
    if c.n_qubits != d.n_qubits:
        raise ConfigError("size mismatch between channel and decomposition")
    sums = [float(sum(c.weights[m] for m in members)) for members in d.blocks]
    return BlockChannel(d, sums[0], tuple(sums[1:]))


def block_eigenvalue(
    b: BlockChannel, census: AnticommutationCensus, block: int
) -> float:
    """Decay eigenvalue of the given block via the census formula.

    Returns NaN for an empty block (no Pauli carries that eigenvalue).
    """
    d = b.decomposition
    if census.decomposition is not d and census.decomposition != d:
        raise ConfigError("census was computed for a different decomposition")
    if not 1 <= block < d.block_count:
        raise ConfigError(f"block must be 1..{d.block_count - 1}, got {block}")
    if not d.blocks[block]:
        return math.nan
    acc = 0.0
    for i in range(1, d.block_count):
        n_i = len(d.blocks[i])
        if n_i == 0:
            continue
        acc += b.block_weights[i - 1] * census.count(i, block) / n_i
    return 1.0 - 2.0 * acc


# -- closed forms -------------------------------------------------------------


def _as_name(gset) -> str:
    if isinstance(gset, str):
        from .tableau import group_by_name

        return group_by_name(gset).name
    return gset.name


def closed_form_lambdas(gset, n_qubits: int, p_list) -> list[float]:
    """Exact decay eigenvalues from block weights for the standard gate sets.

    REAL_CLIFFORD expects two weights, CNOT_PAULI four (λ3 is NaN at n = 1,
    where that block is empty and p3 must be 0), FULL_CLIFFORD one.
    """
    name = _as_name(gset)
    four_n, two_n = 4**n_qubits, 2**n_qubits
    p = list(map(float, p_list))
    if name == "REAL_CLIFFORD":
        if len(p) != 2:
            raise ConfigError("REAL_CLIFFORD takes two block weights")
        p1, p2 = p
        lam1 = 1.0 - p1 * four_n / (four_n + two_n - 2) - p2 * two_n / (two_n - 1)
        lam2 = (
            1.0
            - p1 * two_n / (two_n - 1)
            - p2 * (four_n - 2 * two_n) / (four_n - two_n)
        )
        return [lam1, lam2]
    if name == "CNOT_PAULI":
        if len(p) != 4:
            raise ConfigError("CNOT_PAULI takes four block weights")
        p1, p2, p3, p4 = p
        k = two_n / (two_n - 1)
        lam1 = 1.0 - (p2 + p3 + p4) * k
        lam2 = 1.0 - (p1 + p3 + p4) * k
        if n_qubits == 1:
            if p3 != 0.0:
                raise ConfigError("third block is empty at n=1; p3 must be 0")
            lam3 = math.nan
        else:
            lam3 = (
                1.0
                - (p1 + p2 + p4) * k
                - p3 * (four_n - 4 * two_n) / (four_n - 3 * two_n + 2)
            )
        lam4 = 1.0 - (p1 + p2 + p3) * k - p4 * (two_n - 2) / (two_n - 1)
        return [lam1, lam2, lam3, lam4]
    if name == "FULL_CLIFFORD":
        if len(p) != 1:
            raise ConfigError("FULL_CLIFFORD takes one block weight")
        return [depolarizing_lambda(n_qubits, p[0])]
    raise ConfigError(f"no closed-form eigenvalues for gate set {name!r}")


def asymptotic_lambdas(gset, n_qubits: int, p_list) -> list[float]:
    """Large-n expansions of the closed forms, truncated after the 2**-n term.

    The truncation error shrinks like 4**-n; the acceptance suite checks that
    scaling by regression.
    """
    name = _as_name(gset)
    inv = 2.0**-n_qubits
    p = list(map(float, p_list))
    if name == "REAL_CLIFFORD":
        p1, p2 = p
        return [
            1.0 - p1 - p2 + (p1 - p2) * inv,
            1.0 - p1 - p2 + (p2 - p1) * inv,
        ]
    if name == "CNOT_PAULI":
        p1, p2, p3, p4 = p
        tot = p1 + p2 + p3 + p4
        return [
            1.0 - (p2 + p3 + p4) * (1.0 + inv),
            1.0 - (p1 + p3 + p4) * (1.0 + inv),
            1.0 - tot + (p3 - p1 - p2 - p4) * inv,
            1.0 - tot + (p4 - p1 - p2 - p3) * inv,
        ]
    raise ConfigError(f"no asymptotic expansion for gate set {name!r}")


def depolarizing_lambda(n_qubits: int, p: float) -> float:
    """Single decay eigenvalue of a depolarizing channel: 1 − p·4**n/(4**n−1)."""
    four_n = 4**n_qubits
    return 1.0 - p * four_n / (four_n - 1)


# -- infidelity bounds --------------------------------------------------------


class BoundsResult(tuple):
    """(lower, upper, point_estimate) with the point estimate at the upper bound."""

    __slots__ = ()

    def __new__(cls, lower: float, upper: float):
        return super().__new__(cls, (lower, upper, upper))

    @property
    def lower(self) -> float:
        return self[0]

    @property
    def upper(self) -> float:
        return self[1]

    @property
    def point_estimate(self) -> float:
        return self[2]


def infidelity_bounds(variant: str, n_qubits: int, lambdas) -> BoundsResult:
    """Two-sided recovery of the entanglement infidelity from decay eigenvalues.

    ``variant`` selects which eigenvalues are supplied:

    * ``real_from_lambda1`` — [λ1] of the real-Clifford set;
    * ``cnotpauli_from_lambda1_lambda2`` — [λ1, λ2] of the CNOT+Pauli set;
    * ``cnotpauli_from_lambda3`` — [λ3] of the CNOT+Pauli set, n > 2 only.
    """
    lams = list(map(float, lambdas))
    four_n, two_n = 4**n_qubits, 2**n_qubits
    if variant == VARIANT_REAL:
        if len(lams) != 1:
            raise ConfigError("real_from_lambda1 takes one eigenvalue")
        gap = 1.0 - lams[0]
        return BoundsResult(
            (two_n - 1) / two_n * gap, (four_n + two_n - 2) / four_n * gap
        )
    if variant == VARIANT_CNOT_L12:
        if len(lams) != 2:
            raise ConfigError("cnotpauli_from_lambda1_lambda2 takes two eigenvalues")
        gap = 2.0 - lams[0] - lams[1]
        return BoundsResult(
            (two_n - 1) / (2 * two_n) * gap, (two_n - 1) / two_n * gap
        )
    if variant == VARIANT_CNOT_L3:
        if n_qubits <= 2:
            raise ConfigError("cnotpauli_from_lambda3 requires n > 2")
        if len(lams) != 1:
            raise ConfigError("cnotpauli_from_lambda3 takes one eigenvalue")
        gap = 1.0 - lams[0]
        return BoundsResult(
            (two_n - 1) / two_n * gap,
            (four_n - 3 * two_n + 2) / (four_n - 4 * two_n) * gap,
        )
    raise ConfigError(f"unknown bounds variant {variant!r}")


def worst_case_factor(variant: str, n_qubits: int) -> float:
    """Largest possible ratio upper/true p for each bounds variant."""
    two_n = 2**n_qubits
    if variant == VARIANT_REAL:
        return (two_n + 2) / two_n
    if variant == VARIANT_CNOT_L12:
        return 2.0
    if variant == VARIANT_CNOT_L3:
        if n_qubits <= 2:
            raise ConfigError("cnotpauli_from_lambda3 requires n > 2")
        return (two_n - 2) / (two_n - 4)
    raise ConfigError(f"unknown bounds variant {variant!r}")


# -- dense process-matrix oracle ----------------------------------------------

DENSE_MAX_QUBITS = 2


@dataclass(frozen=True)
class DenseChi:
    """Full process matrix x_{μν} in the Pauli basis; brute-force oracle, n ≤ 2."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n_qubits > DENSE_MAX_QUBITS:
            raise ConfigError(
                f"DenseChi is an oracle for n <= {DENSE_MAX_QUBITS}, got n={self.n_qubits}"
            )
        m = np.asarray(self.matrix, dtype=np.complex128).copy()
        size = 1 << (2 * self.n_qubits)
        if m.shape != (size, size):
            raise ConfigError(f"chi matrix must be {size}x{size}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ConfigError("chi matrix must be Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-12 or abs(np.trace(m).imag) > 1e-12:
            raise ConfigError("chi diagonal must sum to 1")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_pauli_channel(cls, c: PauliChannel) -> "DenseChi":
        return cls(c.n_qubits, np.diag(c.weights.astype(np.complex128)))

    def diagonal_channel(self, tol: float = 1e-12) -> PauliChannel:
        """Interpret as a Pauli channel; requires off-diagonals below ``tol``."""
        off = self.matrix - np.diag(np.diag(self.matrix))
        if np.abs(off).max() > tol:
            raise ConfigError("chi matrix has non-negligible off-diagonal entries")
        diag = np.diag(self.matrix)
        if np.abs(diag.imag).max() > tol:
            raise ConfigError("chi diagonal must be real")
        return PauliChannel(self.n_qubits, np.clip(diag.real, 0.0, None))


def dense_pauli_twirl(chi: DenseChi) -> DenseChi:
    """Average chi over conjugation by all ``4**n`` Paulis (kills off-diagonals).

    Conjugating by P multiplies entry (μ, ν) by the relative commutation signs
    of μ and ν with P; the literal average over every P is taken here so this
    stays an independent oracle for the index-arithmetic route.
    """
    n = chi.n_qubits
    size = 1 << (2 * n)
    idx = np.arange(size, dtype=np.int64)
    xs = idx >> n
    zs = idx & ((1 << n) - 1)
    acc = np.zeros_like(chi.matrix)
    for v in range(size):
        sign = 1.0 - 2.0 * _kernels.anticommute(
            xs, zs, v >> n, v & ((1 << n) - 1)
        ).astype(np.float64)
        acc += np.outer(sign, sign) * chi.matrix
    return DenseChi(n, acc / size)


def dense_group_twirl(c: PauliChannel, perms) -> PauliChannel:
    """Average a Pauli channel over an explicit group action.

    ``perms`` is an iterable of Pauli-index permutation arrays (e.g. the values
    of :func:`subrb.tableau.unsigned_action_index`).
    """
    perm_list = list(perms.values()) if isinstance(perms, dict) else list(perms)
    if not perm_list:
        raise ConfigError("dense_group_twirl needs at least one permutation")
    table = np.asarray(perm_list, dtype=np.int64)
    acc = np.zeros_like(c.weights)
    np.add.at(acc, table.ravel(), np.broadcast_to(c.weights, table.shape).ravel())
    return PauliChannel(c.n_qubits, acc / table.shape[0])
