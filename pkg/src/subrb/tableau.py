"""Symplectic tableau representation of Clifford conjugation maps.

A Clifford unitary U (modulo global phase) is stored by the signed Paulis it
conjugates the generators onto: entry j < n is the image ``U X_j U†``, entry
n + q is ``U Z_q U†``.  Signs are tracked exactly: conjugating any signed Pauli
decomposes it into generator factors, multiplies their images with i-phase
bookkeeping (``Y = iXZ``), and re-extracts a real ±1 sign — the imaginary part
provably cancels for symplectically valid data, and this is asserted.

Generator sign conventions (locked by dense-matrix oracle tests):

    ========  =======================================
    gate      action on generators
    ========  =======================================
    X         X -> +X,  Z -> -Z
    Y         X -> -X,  Z -> -Z
    Z         X -> -X,  Z -> +Z
    H         X -> +Z,  Z -> +X       (hence Y -> -Y)
    S         X -> +Y,  Z -> +Z       (S = diag(1, i))
    CNOT c,t  X_c -> X_c X_t,  Z_t -> Z_c Z_t,
              X_t -> X_t,      Z_c -> Z_c
    ========  =======================================

Group enumeration is a breadth-first closure over a generator set,
deduplicated on the full signed tableau, with a hard element cap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import CapExceededError, ConfigError
from .pauli import PauliOperator, phase_exponent

GROUP_ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class CliffordTableau:
    """Conjugation action of one Clifford element on the Pauli generators."""

    n_qubits: int
    x_images: tuple[int, ...]  # x-mask of image of X_0..X_{n-1}, Z_0..Z_{n-1}
    z_images: tuple[int, ...]
    sign_bits: tuple[int, ...]  # 1 = image carries a minus sign

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "CliffordTableau":
        xs = [0] * (2 * n_qubits)
        zs = [0] * (2 * n_qubits)
        for q in range(n_qubits):
            xs[q] = 1 << q
            zs[n_qubits + q] = 1 << q
        return cls(n_qubits, tuple(xs), tuple(zs), (0,) * (2 * n_qubits))

    @classmethod
    def from_images(
        cls, images: list[PauliOperator]
    ) -> "CliffordTableau":
        """Build from the 2n generator images (X_0..X_{n-1}, Z_0..Z_{n-1}); validates."""
        n = images[0].n_qubits
        if len(images) != 2 * n:
            raise ConfigError(f"expected {2 * n} generator images, got {len(images)}")
        t = cls(
            n,
            tuple(p.x_bits for p in images),
            tuple(p.z_bits for p in images),
            tuple(0 if p.sign > 0 else 1 for p in images),
        )
        t.validate()
        return t

    # -- structure ----------------------------------------------------------

    def image(self, j: int) -> PauliOperator:
        """Image of generator j (j < n: X_j, else Z_{j-n}) as a signed Pauli."""
        return PauliOperator(
            self.n_qubits,
            self.x_images[j],
            self.z_images[j],
            -1 if self.sign_bits[j] else 1,
        )

    def validate(self) -> None:
        """Check the symplectic condition and sign-bit domain; raise ConfigError."""
        n = self.n_qubits
        if not (
            len(self.x_images) == len(self.z_images) == len(self.sign_bits) == 2 * n
        ):
            raise ConfigError("tableau image tuples must have length 2n")
        top = 1 << n
        for j in range(2 * n):
            if not (0 <= self.x_images[j] < top and 0 <= self.z_images[j] < top):
                raise ConfigError(f"image {j} mask out of range")
            if self.sign_bits[j] not in (0, 1):
                raise ConfigError(f"sign bit {j} must be 0 or 1")
        for j in range(2 * n):
            for k in range(j + 1, 2 * n):
                want = 1 if k == j + n else 0  # X_j anticommutes only with Z_j
                got = (
                    (self.x_images[j] & self.z_images[k]).bit_count()
                    + (self.z_images[j] & self.x_images[k]).bit_count()
                ) % 2
                if got != want:
                    raise ConfigError(
                        f"not symplectic: images {j} and {k} have wrong commutation"
                    )

    # -- action -------------------------------------------------------------

    def apply(self, p: PauliOperator) -> PauliOperator:
        """Conjugate a signed Pauli: returns the signed image ``U p U†``."""
        if p.n_qubits != self.n_qubits:
            raise ConfigError(
                f"size mismatch: tableau on {self.n_qubits}, Pauli on {p.n_qubits}"
            )
        n = self.n_qubits
        cur_x = cur_z = 0
        exp = 0
        neg = 0
        for j in _factor_columns(n, p.x_bits, p.z_bits):
            fx = self.x_images[j]
            fz = self.z_images[j]
            exp += phase_exponent(cur_x, cur_z, fx, fz)
            neg ^= self.sign_bits[j]
            cur_x ^= fx
            cur_z ^= fz
        total = (exp + (p.x_bits & p.z_bits).bit_count()) % 4
        assert total % 2 == 0, "imaginary phase from a valid tableau"
        sign = p.sign * (-1 if neg else 1) * (-1 if total == 2 else 1)
        return PauliOperator(n, cur_x, cur_z, sign)

    def compose(self, other: "CliffordTableau") -> "CliffordTableau":
        """Tableau of ``self ∘ other`` — i.e. apply ``other`` first, then ``self``."""
        if other.n_qubits != self.n_qubits:
            raise ConfigError("size mismatch in compose")
        images = [self.apply(other.image(j)) for j in range(2 * self.n_qubits)]
        return CliffordTableau(
            self.n_qubits,
            tuple(p.x_bits for p in images),
            tuple(p.z_bits for p in images),
            tuple(0 if p.sign > 0 else 1 for p in images),
        )

    def inverse(self) -> "CliffordTableau":
        """Inverse map, via the symplectic block-transpose identity plus sign fix."""
        n = self.n_qubits
        inv_x = [0] * (2 * n)
        inv_z = [0] * (2 * n)
        # Unsigned part: M^-1 = J M^T J for the symplectic form J = [[0,I],[I,0]].
        for j in range(n):
            for q in range(n):
                inv_x[j] |= ((self.z_images[n + q] >> j) & 1) << q
                inv_z[j] |= ((self.z_images[q] >> j) & 1) << q
                inv_x[n + j] |= ((self.x_images[n + q] >> j) & 1) << q
                inv_z[n + j] |= ((self.x_images[q] >> j) & 1) << q
        signs = [0] * (2 * n)
        basis = CliffordTableau.identity(n)
        for j in range(2 * n):
            probe = PauliOperator(n, inv_x[j], inv_z[j], 1)
            back = self.apply(probe)
            if (back.x_bits, back.z_bits) != (basis.x_images[j], basis.z_images[j]):
                raise ConfigError("tableau is not symplectic; cannot invert")
            signs[j] = 0 if back.sign > 0 else 1
        return CliffordTableau(n, tuple(inv_x), tuple(inv_z), tuple(signs))

    def unsigned_permutation(self) -> np.ndarray:
        """Permutation of all ``4**n`` Pauli indices under conjugation (signs dropped)."""
        n = self.n_qubits
        basis = np.empty(2 * n, dtype=np.int64)
        for k in range(n):  # index bit k (k < n) is z-bit k -> generator Z_k
            basis[k] = (self.x_images[n + k] << n) | self.z_images[n + k]
        for k in range(n):  # index bit n+k is x-bit k -> generator X_k
            basis[n + k] = (self.x_images[k] << n) | self.z_images[k]
        return _kernels.xor_permutation(basis, 2 * n)

    def describe(self) -> str:
        """Human-readable per-generator lines, e.g. ``X0 -> +XZ``."""
        n = self.n_qubits
        lines = []
        for q in range(n):
            lines.append(f"X{q} -> {self.image(q).to_string(explicit_plus=True)}")
        for q in range(n):
            lines.append(f"Z{q} -> {self.image(n + q).to_string(explicit_plus=True)}")
        return "\n".join(lines)


def _factor_columns(n: int, px: int, pz: int) -> list[int]:
    cols = [q for q in range(n) if (px >> q) & 1]
    cols += [n + q for q in range(n) if (pz >> q) & 1]
    return cols


# -- free-function conveniences ----------------------------------------------


def apply_to_pauli(t: CliffordTableau, p: PauliOperator) -> PauliOperator:
    return t.apply(p)


def compose(a: CliffordTableau, b: CliffordTableau) -> CliffordTableau:
    """Tableau applying ``b`` first and then ``a``."""
    return a.compose(b)


def invert(t: CliffordTableau) -> CliffordTableau:
    return t.inverse()


# -- gate factories ----------------------------------------------------------


def _embed(n: int, q: int, x_img_x: int, x_img_z: int, x_neg: int,
           z_img_x: int, z_img_z: int, z_neg: int) -> CliffordTableau:
    """Single-qubit gate at position q: images given as 1-qubit masks."""
    base = CliffordTableau.identity(n)
    xs = list(base.x_images)
    zs = list(base.z_images)
    ss = list(base.sign_bits)
    xs[q], zs[q], ss[q] = x_img_x << q, x_img_z << q, x_neg
    xs[n + q], zs[n + q], ss[n + q] = z_img_x << q, z_img_z << q, z_neg
    return CliffordTableau(n, tuple(xs), tuple(zs), tuple(ss))


def x_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, q, 1, 0, 0, 0, 1, 1)


def y_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, q, 1, 0, 1, 0, 1, 1)


def z_gate(n: int, q: int) -> CliffordTableau:
    return _embed(n, q, 1, 0, 1, 0, 1, 0)


def hadamard(n: int, q: int) -> CliffordTableau:
    return _embed(n, q, 0, 1, 0, 1, 0, 0)


def phase_gate(n: int, q: int) -> CliffordTableau:
    """S = diag(1, i): X -> Y, Z -> Z."""
    return _embed(n, q, 1, 1, 0, 0, 1, 0)


def cnot(n: int, control: int, target: int) -> CliffordTableau:
    if control == target:
        raise ConfigError("cnot control and target must differ")
    base = CliffordTableau.identity(n)
    xs = list(base.x_images)
    zs = list(base.z_images)
    xs[control] |= 1 << target  # X_c -> X_c X_t
    zs[n + target] |= 1 << control  # Z_t -> Z_c Z_t
    return CliffordTableau(n, tuple(xs), tuple(zs), tuple(base.sign_bits))


# -- generator sets ----------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSet:
    """A named family of gate factories defining one benchmarking gate set."""

    name: str
    with_cnot: bool = False
    with_h: bool = False
    with_s: bool = False

    def generators(self, n: int) -> list[tuple[str, CliffordTableau]]:
        """Labelled generator tableaus for n qubits, in a fixed order."""
        gens: list[tuple[str, CliffordTableau]] = []
        for q in range(n):
            gens.append((f"X{q}", x_gate(n, q)))
            gens.append((f"Y{q}", y_gate(n, q)))
            gens.append((f"Z{q}", z_gate(n, q)))
        if self.with_cnot:
            for c in range(n):
                for t in range(n):
                    if c != t:
                        gens.append((f"CNOT{c}-{t}", cnot(n, c, t)))
        if self.with_h:
            for q in range(n):
                gens.append((f"H{q}", hadamard(n, q)))
        if self.with_s:
            for q in range(n):
                gens.append((f"S{q}", phase_gate(n, q)))
        return gens


PAULI = GeneratorSet("PAULI")
CNOT_PAULI = GeneratorSet("CNOT_PAULI", with_cnot=True)
REAL_CLIFFORD = GeneratorSet("REAL_CLIFFORD", with_cnot=True, with_h=True)
FULL_CLIFFORD = GeneratorSet("FULL_CLIFFORD", with_cnot=True, with_h=True, with_s=True)

_GROUPS = {
    "pauli": PAULI,
    "cnot_pauli": CNOT_PAULI,
    "cnotpauli": CNOT_PAULI,
    "real": REAL_CLIFFORD,
    "real_clifford": REAL_CLIFFORD,
    "full": FULL_CLIFFORD,
    "full_clifford": FULL_CLIFFORD,
    "clifford": FULL_CLIFFORD,
}


def group_by_name(name: str) -> GeneratorSet:
    key = name.strip().lower().replace(" ", "_").replace("-", "_")
    if key not in _GROUPS:
        raise ConfigError(
            f"unknown gate set {name!r}; choose from pauli, cnot-pauli, real, full"
        )
    return _GROUPS[key]


# -- group enumeration -------------------------------------------------------

_GROUP_CACHE: dict[tuple[str, int], tuple[CliffordTableau, ...]] = {}


def _tableaus_to_arrays(elements) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xs = np.array([t.x_images for t in elements], dtype=np.int64)
    zs = np.array([t.z_images for t in elements], dtype=np.int64)
    ss = np.array([t.sign_bits for t in elements], dtype=np.uint8)
    return xs, zs, ss


def _batch_compose_with(gen: CliffordTableau, xs, zs, ss):
    """Compose every tableau row with a fixed right factor: rows ∘ gen."""
    n = gen.n_qubits
    cols = 2 * n
    out_x = np.empty_like(xs)
    out_z = np.empty_like(zs)
    out_s = np.empty_like(ss)
    for j in range(cols):
        rx, rz, rs, bad = _kernels.batch_apply(
            xs, zs, ss, n, gen.x_images[j], gen.z_images[j]
        )
        if bad.any():
            raise AssertionError("imaginary phase in batch compose")
        out_x[:, j] = rx
        out_z[:, j] = rz
        out_s[:, j] = rs ^ gen.sign_bits[j]
    return out_x, out_z, out_s


def _pack_rows(xs, zs, ss) -> np.ndarray:
    """uint16 row matrix used for dedup keys (masks fit in 16 bits for n <= 12)."""
    return np.concatenate(
        [xs.astype(np.uint16), zs.astype(np.uint16), ss.astype(np.uint16)], axis=1
    )


def enumerate_group(
    gset: GeneratorSet, n_qubits: int, cap: int = GROUP_ENUMERATION_CAP
) -> list[CliffordTableau]:
    """Every element of the generated group, as signed tableaus, via BFS closure.

    Elements are deduplicated on the full signed tableau (= the group of
    Clifford conjugation maps, i.e. the unitary group modulo global phase).
    Raises :class:`CapExceededError` with the count reached if the closure
    passes ``cap`` elements.  Results are cached per (set, n).
    """
    key = (gset.name, n_qubits)
    cached = _GROUP_CACHE.get(key)
    if cached is not None:
        if len(cached) > cap:
            raise CapExceededError(
                f"group enumeration for {gset.name} n={n_qubits} "
                f"exceeded cap {cap}",
                count=len(cached),
            )
        return list(cached)

    gens = [t for _, t in gset.generators(n_qubits)]
    ident = CliffordTableau.identity(n_qubits)
    xs, zs, ss = _tableaus_to_arrays([ident])
    seen: set[bytes] = {_pack_rows(xs, zs, ss).tobytes()}
    layers = [(xs, zs, ss)]
    frontier = (xs, zs, ss)
    total = 1
    chunk = 1 << 16  # bounds candidate-batch memory for large closures
    while True:
        fx, fz, fs = frontier
        new_x, new_z, new_s = [], [], []
        for start in range(0, fx.shape[0], chunk):
            sl = slice(start, start + chunk)
            for g in gens:
                cx, cz, cs = _batch_compose_with(g, fx[sl], fz[sl], fs[sl])
                packed = _pack_rows(cx, cz, cs)
                fresh_rows = []
                for i, row in enumerate(packed):
                    b = row.tobytes()
                    if b not in seen:
                        seen.add(b)
                        fresh_rows.append(i)
                        total += 1
                        if total > cap:
                            raise CapExceededError(
                                f"group enumeration for {gset.name} "
                                f"n={n_qubits} exceeded cap {cap}",
                                count=total,
                            )
                if fresh_rows:
                    idx = np.array(fresh_rows, dtype=np.int64)
                    new_x.append(cx[idx])
                    new_z.append(cz[idx])
                    new_s.append(cs[idx])
        if not new_x:
            break
        frontier = (
            np.concatenate(new_x),
            np.concatenate(new_z),
            np.concatenate(new_s),
        )
        layers.append(frontier)

    elements = []
    for lx, lz, ls in layers:
        for i in range(lx.shape[0]):
            elements.append(
                CliffordTableau(
                    n_qubits,
                    tuple(int(v) for v in lx[i]),
                    tuple(int(v) for v in lz[i]),
                    tuple(int(v) for v in ls[i]),
                )
            )
    _GROUP_CACHE[key] = tuple(elements)
    return elements


def inverse_table(elements: list[CliffordTableau]) -> list[CliffordTableau]:
    """Inverse of each element, index-aligned with the input list."""
    return [t.inverse() for t in elements]


def unsigned_action_index(
    gset: GeneratorSet, n_qubits: int, cap: int = GROUP_ENUMERATION_CAP
) -> dict[CliffordTableau, np.ndarray]:
    """Map each group element to its permutation of the ``4**n`` Pauli indices."""
    return {
        t: t.unsigned_permutation() for t in enumerate_group(gset, n_qubits, cap)
    }


def group_action_tables(
    elements: list[CliffordTableau], n_qubits: int
) -> tuple[np.ndarray, np.ndarray]:
    """Dense conjugation tables over a list of tableaus.

    Returns ``(perms, signs)`` of shapes (G, 4**n): ``perms[g, i]`` is the image
    index of Pauli i under element g and ``signs[g, i]`` its ±1 sign.
    """
    xs, zs, ss = _tableaus_to_arrays(elements)
    g_count = len(elements)
    size = 1 << (2 * n_qubits)
    mask = (1 << n_qubits) - 1
    perms = np.empty((g_count, size), dtype=np.int64)
    signs = np.empty((g_count, size), dtype=np.int8)
    perms[:, 0] = 0
    signs[:, 0] = 1
    for idx in range(1, size):
        px, pz = idx >> n_qubits, idx & mask
        rx, rz, rs, bad = _kernels.batch_apply(xs, zs, ss, n_qubits, px, pz)
        if bad.any():
            raise AssertionError("imaginary phase in group action table")
        perms[:, idx] = (rx << n_qubits) | rz
        signs[:, idx] = 1 - 2 * rs.astype(np.int8)
    return perms, signs
