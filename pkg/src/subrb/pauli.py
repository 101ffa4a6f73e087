"""Signed n-qubit Pauli operators in a packed symplectic encoding.

A Pauli is stored as two bit masks plus a sign: bit q of ``x_bits`` / ``z_bits``
says whether the letter on qubit q contains an X / Z part, decoding as

    (0, 0) -> I      (1, 0) -> X      (0, 1) -> Z      (1, 1) -> Y

with the overall operator ``sign * (letter_0 ⊗ letter_1 ⊗ ...)``; qubit 0 is
the leftmost letter in text form.  Only real signs exist at this level —
products that would pick up ±i are not representable and are handled by the
tableau layer's phase bookkeeping.

The canonical index of a Pauli is ``(x_bits << n) | z_bits``; enumeration in
index order therefore starts with the identity and, for one qubit, runs
``[I, Z, X, Y]``.

Two Paulis commute iff the symplectic product ``|x_a & z_b| + |z_a & x_b|`` is
even.  The letter census used for the CNOT+Pauli orbit classes is:

    block 0: identity
    block 1: nonempty Z/I strings (x_bits == 0)
    block 2: nonempty X/I strings (z_bits == 0)
    block 3: mixed X/Z strings with an even number of Y letters
    block 4: strings with an odd number of Y letters
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import CapExceededError, ConfigError

_LETTER_OF_BITS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS_OF_LETTER = {v: k for k, v in _LETTER_OF_BITS.items()}
_STRING_RE = re.compile(r"^([+-]?)([IXYZ]+)$")

ENUMERATION_CAP = 12


@dataclass(frozen=True)
class PauliOperator:
    """A signed Pauli string on ``n_qubits`` qubits."""

    n_qubits: int
    x_bits: int
    z_bits: int
    sign: int = 1

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ConfigError(f"n_qubits must be positive, got {self.n_qubits}")
        top = 1 << self.n_qubits
        if not (0 <= self.x_bits < top and 0 <= self.z_bits < top):
            raise ConfigError(
                f"bit masks out of range for {self.n_qubits} qubit(s): "
                f"x={self.x_bits:#x} z={self.z_bits:#x}"
            )
        if self.sign not in (1, -1):
            raise ConfigError(f"sign must be +1 or -1, got {self.sign!r}")

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliOperator":
        return cls(n_qubits, 0, 0, 1)

    @classmethod
    def from_index(cls, n_qubits: int, index: int, sign: int = 1) -> "PauliOperator":
        """Inverse of :attr:`index`: ``index = (x_bits << n) | z_bits``."""
        if not 0 <= index < 1 << (2 * n_qubits):
            raise ConfigError(f"Pauli index {index} out of range for n={n_qubits}")
        mask = (1 << n_qubits) - 1
        return cls(n_qubits, index >> n_qubits, index & mask, sign)

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse text like ``"XI"``, ``"+ZZ"`` or ``"-XIZY"`` (leftmost = qubit 0)."""
        m = _STRING_RE.match(text.strip())
        if not m:
            raise ConfigError(f"not a Pauli string: {text!r}")
        sign = -1 if m.group(1) == "-" else 1
        letters = m.group(2)
        x = z = 0
        for q, letter in enumerate(letters):
            xb, zb = _BITS_OF_LETTER[letter]
            x |= xb << q
            z |= zb << q
        return cls(len(letters), x, z, sign)

    # -- views --------------------------------------------------------------

    @property
    def index(self) -> int:
        """Canonical index: lexicographic on (x_bits, z_bits)."""
        return (self.x_bits << self.n_qubits) | self.z_bits

    def letter(self, q: int) -> str:
        return _LETTER_OF_BITS[((self.x_bits >> q) & 1, (self.z_bits >> q) & 1)]

    def to_string(self, explicit_plus: bool = False) -> str:
        body = "".join(self.letter(q) for q in range(self.n_qubits))
        if self.sign < 0:
            return "-" + body
        return "+" + body if explicit_plus else body

    def __str__(self) -> str:
        return self.to_string()

    @property
    def is_identity(self) -> bool:
        """True for the identity string regardless of sign."""
        return self.x_bits == 0 and self.z_bits == 0

    def with_sign(self, sign: int) -> "PauliOperator":
        return PauliOperator(self.n_qubits, self.x_bits, self.z_bits, sign)

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x_bits | self.z_bits).bit_count()


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """Whether the two Paulis commute (signs are irrelevant)."""
    if a.n_qubits != b.n_qubits:
        raise ConfigError(
            f"size mismatch: {a.n_qubits} vs {b.n_qubits} qubits"
        )
    return ((a.x_bits & b.z_bits).bit_count() + (a.z_bits & b.x_bits).bit_count()) % 2 == 0


def y_count_parity(p: PauliOperator) -> str:
    """``"even"`` or ``"odd"`` number of Y letters.

    The identity counts as even; under conjugation by real Clifford gates this
    parity is preserved, which is what splits the non-identity Paulis into the
    two real-group orbit blocks.
    """
    return "odd" if (p.x_bits & p.z_bits).bit_count() % 2 else "even"


def classify_cnot_pauli_block(p: PauliOperator) -> int:
    """Letter-census class 0..4 of a Pauli (see module docstring).

    These five classes are exactly the conjugation orbits of the CNOT+Pauli
    generated group for n >= 2 (class 3 is empty at n = 1).
    """
    if p.x_bits == 0 and p.z_bits == 0:
        return 0
    if p.x_bits == 0:
        return 1
    if p.z_bits == 0:
        return 2
    if (p.x_bits & p.z_bits).bit_count() % 2:
        return 4
    return 3


def enumerate_paulis(n_qubits: int, cap: int = ENUMERATION_CAP) -> list[PauliOperator]:
    """All ``4**n`` unsigned Paulis in canonical index order.

    Refuses n beyond ``cap`` (the list gets large fast).
    """
    if n_qubits > cap:
        raise CapExceededError(
            f"enumerate_paulis: n={n_qubits} exceeds cap {cap}", count=0
        )
    return [PauliOperator.from_index(n_qubits, i) for i in range(1 << (2 * n_qubits))]


def index_to_string(n_qubits: int, index: int) -> str:
    return PauliOperator.from_index(n_qubits, index).to_string()


def phase_exponent(x1: int, z1: int, x2: int, z2: int) -> int:
    """i-exponent g (mod 4) in ``P(x1,z1) · P(x2,z2) = i^g · P(x1^x2, z1^z2)``.

    ``P(x, z)`` denotes the Hermitian letter string with sign +1.  Used by the
    tableau layer; g is even exactly when the two letter strings commute.
    """
    return (
        (x1 & z1).bit_count()
        + (x2 & z2).bit_count()
        - ((x1 ^ x2) & (z1 ^ z2)).bit_count()
        + 2 * (z1 & x2).bit_count()
    ) % 4
