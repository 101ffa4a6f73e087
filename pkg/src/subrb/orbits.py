"""Conjugation orbits of Pauli indices under a gate set, and what they imply.

The non-identity Paulis split into orbit blocks under conjugation by the
generated group.  For the two restricted sets of interest the blocks are:

* real Clifford set: strings with an even number of Y letters vs. odd;
* CNOT+Pauli set: Z/I strings, X/I strings, mixed X/Z strings with even
  Y count, and odd-Y strings (the third class is empty at n = 1).

Block numbering is deterministic: block 0 is the identity; for the two named
sets above the textbook order just listed is hard-coded (the generic
smallest-index rule would swap the last two CNOT+Pauli blocks), and any other
set orders blocks by their smallest contained Pauli index.

The anticommutation census counts, for a representative of block j, how many
Paulis of block i anticommute with it.  For genuine orbits the count cannot
depend on the representative; this is verified exhaustively and violations
raise :class:`~subrb.errors.NonUniformCensusError`.  The census is what turns
block weights into decay eigenvalues (see :mod:`subrb.channels`).

``two_design_moments`` measures how far a gate set is from a unitary 2-design
through the first and second moments of the conjugation coefficients
``a_{μν}(U)`` (±1 if U maps P_μ to ±P_ν, else 0): a 2-design forces first
moments 0 and second moments 1/(4**n − 1); orbit-restricted sets show exact
zeros for cross-block pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CapExceededError, ConfigError, NonUniformCensusError
from .pauli import PauliOperator, classify_cnot_pauli_block, y_count_parity
from .tableau import (
    CliffordTableau,
    GeneratorSet,
    compose,
    enumerate_group,
    group_action_tables,
)

ORBIT_CAP = 8  # largest n for index-space orbit sweeps (4**8 = 65536 indices)


@dataclass(frozen=True)
class BlockDecomposition:
    """Partition of all ``4**n`` Pauli indices into conjugation blocks."""

    n_qubits: int
    group_name: str | None
    blocks: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return 1 << (2 * self.n_qubits)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> list[int]:
        """Sizes of the non-identity blocks, in block order."""
        return [len(b) for b in self.blocks[1:]]

    def block_of(self) -> np.ndarray:
        """Array mapping Pauli index -> block number."""
        out = np.full(self.size, -1, dtype=np.int64)
        for i, members in enumerate(self.blocks):
            for m in members:
                out[m] = i
        return out

    def block_of_pauli(self, p: PauliOperator) -> int:
        if p.n_qubits != self.n_qubits:
            raise ConfigError("size mismatch between Pauli and decomposition")
        for i, members in enumerate(self.blocks):
            if p.index in members:
                return i
        raise AssertionError("blocks do not cover the index space")

    def representative(self, block: int) -> PauliOperator:
        members = self.blocks[block]
        if not members:
            raise ConfigError(f"block {block} is empty")
        return PauliOperator.from_index(self.n_qubits, min(members))


def compute_blocks(
    gset: GeneratorSet, n_qubits: int, cap: int = ORBIT_CAP
) -> BlockDecomposition:
    """Orbit blocks of the Pauli indices under the gate set's conjugation action."""
    if n_qubits > cap:
        raise CapExceededError(
            f"compute_blocks: n={n_qubits} exceeds cap {cap}", count=0
        )
    size = 1 << (2 * n_qubits)
    perms = [t.unsigned_permutation() for _, t in gset.generators(n_qubits)]
    visited = np.zeros(size, dtype=bool)
    orbits: list[tuple[int, ...]] = []
    for start in range(size):
        if visited[start]:
            continue
        members = [start]
        visited[start] = True
        stack = [start]
        while stack:
            i = stack.pop()
            for perm in perms:
                j = int(perm[i])
                if not visited[j]:
                    visited[j] = True
                    members.append(j)
                    stack.append(j)
        orbits.append(tuple(sorted(members)))

    identity_block = (0,)
    rest = [b for b in orbits if b != identity_block]
    ordered = _order_blocks(gset.name, n_qubits, rest)
    return BlockDecomposition(n_qubits, gset.name, (identity_block, *ordered))


def _order_blocks(group_name, n_qubits, blocks):
    """Apply the hard-coded textbook numbering for the named sets."""
    by_min = sorted(blocks, key=min)
    if group_name == "REAL_CLIFFORD":
        slots: list[list[tuple[int, ...]]] = [[], []]
        for b in by_min:
            rep = PauliOperator.from_index(n_qubits, min(b))
            slots[0 if y_count_parity(rep) == "even" else 1].append(b)
        return [blk for slot in slots for blk in slot]
    if group_name == "CNOT_PAULI":
        slots = [[], [], [], []]
        for b in by_min:
            rep = PauliOperator.from_index(n_qubits, min(b))
            slots[classify_cnot_pauli_block(rep) - 1].append(b)
        out = []
        for slot in slots:
            out.extend(slot if slot else [()])  # keep empty class as empty block
        return out
    return by_min


def closed_form_sizes(gset: GeneratorSet | str, n_qubits: int) -> list[int]:
    """Predicted non-identity block sizes for the four standard gate sets."""
    name = gset if isinstance(gset, str) else gset.name
    four_n, two_n = 4**n_qubits, 2**n_qubits
    if name == "PAULI":
        return [1] * (four_n - 1)
    if name == "CNOT_PAULI":
        return [
            two_n - 1,
            two_n - 1,
            (four_n - 3 * two_n) // 2 + 1,
            (four_n - two_n) // 2,
        ]
    if name == "REAL_CLIFFORD":
        return [(four_n + two_n) // 2 - 1, (four_n - two_n) // 2]
    if name == "FULL_CLIFFORD":
        return [four_n - 1]
    raise ConfigError(f"no closed-form block sizes for gate set {name!r}")


# -- anticommutation census ---------------------------------------------------


@dataclass(frozen=True)
class AnticommutationCensus:
    """Per-block anticommutation counts ``matrix[i][j]`` (uniform over block j)."""

    decomposition: BlockDecomposition
    matrix: tuple[tuple[int, ...], ...]  # block_count x block_count

    def count(self, i: int, j: int) -> int:
        return self.matrix[i][j]


def anticommutation_census(d: BlockDecomposition) -> AnticommutationCensus:
    """Count how many Paulis of each block anticommute with each block's members.

    Every member of every block is tried as the representative; if any two
    disagree the decomposition is not census-uniform and a diagnostic
    :class:`NonUniformCensusError` is raised (impossible for true group orbits).
    """
    n = d.n_qubits
    size = d.size
    idx = np.arange(size, dtype=np.int64)
    xs = idx >> n
    zs = idx & ((1 << n) - 1)
    block_of = d.block_of()
    k = d.block_count
    cols: list[tuple[int, ...]] = []
    for j in range(k):
        members = d.blocks[j]
        if not members:
            cols.append((0,) * k)
            continue
        col = None
        for rep_idx in members:
            px, pz = rep_idx >> n, rep_idx & ((1 << n) - 1)
            anti = _kernels.anticommute(xs, zs, px, pz).astype(bool)
            counts = np.bincount(block_of[anti], minlength=k)
            this = tuple(int(c) for c in counts)
            if col is None:
                col = this
            elif col != this:
                raise NonUniformCensusError(
                    f"block {j} is not census-uniform: representative "
                    f"{PauliOperator.from_index(n, rep_idx)} disagrees"
                )
        cols.append(col)
    matrix = tuple(
        tuple(cols[j][i] for j in range(k)) for i in range(k)
    )
    return AnticommutationCensus(d, matrix)


# -- 2-design moment check ----------------------------------------------------


@dataclass(frozen=True)
class MomentReport:
    """First/second moments of conjugation coefficients over a gate ensemble."""

    group_name: str
    n_qubits: int
    mode: str  # "exact" or "word_sampled"
    ensemble_size: int  # group order (exact) or sample count
    word_length: int | None
    second_moment_target: float
    first_moments: np.ndarray = field(repr=False)  # (4**n, 4**n)
    second_moments: np.ndarray = field(repr=False)
    plus_counts: np.ndarray = field(repr=False)
    minus_counts: np.ndarray = field(repr=False)
    max_abs_first: float
    max_second_deviation: float
    statistical_tolerance: float | None

    @property
    def zero_second_pairs(self) -> int:
        """Number of non-identity (μ, ν) pairs with an exactly-zero second moment."""
        tot = self.plus_counts[1:, 1:] + self.minus_counts[1:, 1:]
        return int(np.count_nonzero(tot == 0))

    def to_dict(self) -> dict:
        return {
            "group": self.group_name,
            "n_qubits": self.n_qubits,
            "mode": self.mode,
            "ensemble_size": self.ensemble_size,
            "word_length": self.word_length,
            "second_moment_target": self.second_moment_target,
            "max_abs_first_moment": self.max_abs_first,
            "max_second_moment_deviation": self.max_second_deviation,
            "zero_second_moment_pairs": self.zero_second_pairs,
            "statistical_tolerance": self.statistical_tolerance,
        }


def default_word_length(gset: GeneratorSet, n_qubits: int) -> int:
    return 10 * n_qubits * len(gset.generators(n_qubits))


def sample_generator_word(
    gset: GeneratorSet, n_qubits: int, word_length: int, rng: np.random.Generator
) -> CliffordTableau:
    """Product of ``word_length`` uniformly drawn generators."""
    gens = [t for _, t in gset.generators(n_qubits)]
    acc = CliffordTableau.identity(n_qubits)
    for k in rng.integers(0, len(gens), size=word_length):
        acc = compose(gens[int(k)], acc)
    return acc


def two_design_moments(
    gset: GeneratorSet,
    n_qubits: int,
    mode: str = "exact",
    samples: int = 2000,
    word_length: int | None = None,
    seed: int = 0,
    cap: int | None = None,
) -> MomentReport:
    """Moments of ``a_{μν}(U)`` over the group (exact) or over sampled words.

    Exact mode enumerates the group and accumulates integer ± counts, so the
    2-design identities can be checked with no floating-point slack.  Word
    mode draws ``samples`` generator words of the given length (default
    ``10 * n * |generators|``) and reports a ~3/sqrt(samples) tolerance.
    """
    if mode == "exact":
        kwargs = {} if cap is None else {"cap": cap}
        elements = enumerate_group(gset, n_qubits, **kwargs)
        ensemble: list[CliffordTableau] = list(elements)
        wl = None
    elif mode == "word_sampled":
        wl = word_length or default_word_length(gset, n_qubits)
        rng = np.random.default_rng(seed)
        ensemble = [
            sample_generator_word(gset, n_qubits, wl, rng) for _ in range(samples)
        ]
    else:
        raise ConfigError(f"unknown moment mode {mode!r}")

    size = 1 << (2 * n_qubits)
    perms, signs = group_action_tables(ensemble, n_qubits)
    g_count = len(ensemble)
    plus = np.zeros((size, size), dtype=np.int64)
    minus = np.zeros((size, size), dtype=np.int64)
    for mu in range(size):
        cols = perms[:, mu]
        sg = signs[:, mu]
        np.add.at(plus[mu], cols[sg > 0], 1)
        np.add.at(minus[mu], cols[sg < 0], 1)
    first = (plus - minus) / g_count
    second = (plus + minus) / g_count
    target = 1.0 / (size - 1)
    max_first = float(np.abs(first[1:, 1:]).max())
    max_second = float(np.abs(second[1:, 1:] - target).max())
    return MomentReport(
        group_name=gset.name,
        n_qubits=n_qubits,
        mode=mode,
        ensemble_size=g_count,
        word_length=wl,
        second_moment_target=target,
        first_moments=first,
        second_moments=second,
        plus_counts=plus,
        minus_counts=minus,
        max_abs_first=max_first,
        max_second_deviation=max_second,
        statistical_tolerance=None if mode == "exact" else 3.0 / samples**0.5,
    )


# -- report assembly ----------------------------------------------------------


def decomposition_report(
    d: BlockDecomposition, census: AnticommutationCensus | None = None
) -> dict:
    """JSON-ready summary of a block decomposition (and census, if given)."""
    n = d.n_qubits
    out: dict = {
        "group": d.group_name,
        "n_qubits": n,
        "block_sizes": d.sizes,
        "blocks": [
            [PauliOperator.from_index(n, i).to_string() for i in members]
            for members in d.blocks
        ],
    }
    try:
        out["closed_form_sizes"] = closed_form_sizes(d.group_name or "", n)
    except ConfigError:
        out["closed_form_sizes"] = None
    if census is not None:
        out["census"] = [list(row) for row in census.matrix]
    return out
