"""Backend parity for the packed-integer kernels.

Every kernel ships in a numba flavour and a pure-numpy flavour; these tests
drive both off the same inputs and require identical outputs, so either one
can serve as the oracle for the other.  When numba is unavailable (or
disabled via SUBRB_DISABLE_NUMBA) the numpy backend is still exercised
against slow reference implementations written inline here.
"""

import numpy as np
import pytest

from subrb import _kernels


BACKENDS = _kernels.available_backends()


def ref_popcount(a):
    return np.array([bin(int(v)).count("1") for v in np.ravel(a)], dtype=np.int64).reshape(
        np.shape(a)
    )


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_popcount(name):
    rng = np.random.default_rng(10)
    a = rng.integers(0, 1 << 62, size=257, dtype=np.int64)
    got = BACKENDS[name]["popcount"](a)
    np.testing.assert_array_equal(got, ref_popcount(a))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_xor_permutation_matches_explicit_xor(name):
    rng = np.random.default_rng(11)
    nbits = 6
    basis = rng.integers(0, 1 << nbits, size=nbits, dtype=np.int64)
    table = BACKENDS[name]["xor_permutation"](basis, nbits)
    assert table.shape == (1 << nbits,)
    for s in range(1 << nbits):
        expect = 0
        for k in range(nbits):
            if (s >> k) & 1:
                expect ^= int(basis[k])
        assert table[s] == expect
    assert table[0] == 0


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_anticommute(name):
    rng = np.random.default_rng(12)
    n = 3
    xs = rng.integers(0, 1 << n, size=500, dtype=np.int64)
    zs = rng.integers(0, 1 << n, size=500, dtype=np.int64)
    px, pz = 0b101, 0b011
    got = BACKENDS[name]["anticommute"](xs, zs, px, pz)
    ref = (ref_popcount(xs & pz) + ref_popcount(zs & px)) % 2
    np.testing.assert_array_equal(got.astype(np.int64), ref)


def test_backends_agree_pairwise():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    rng = np.random.default_rng(13)
    a = rng.integers(0, 1 << 50, size=1000, dtype=np.int64)
    outs = [BACKENDS[k]["popcount"](a) for k in sorted(BACKENDS)]
    np.testing.assert_array_equal(outs[0], outs[1])


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_batch_apply_identity_tableaus(name):
    # a stack of identity tableaus maps any Pauli to itself with + sign
    n = 2
    f_count = 7
    bx = np.zeros((f_count, 2 * n), dtype=np.int64)
    bz = np.zeros((f_count, 2 * n), dtype=np.int64)
    bs = np.zeros((f_count, 2 * n), dtype=np.uint8)
    for q in range(n):
        bx[:, q] = 1 << q           # X_q -> X_q
        bz[:, n + q] = 1 << q       # Z_q -> Z_q
    for px, pz in [(0b01, 0b00), (0b11, 0b01), (0b10, 0b10)]:
        rx, rz, rs, bad = BACKENDS[name]["batch_apply"](bx, bz, bs, n, px, pz)
        np.testing.assert_array_equal(rx, np.full(f_count, px))
        np.testing.assert_array_equal(rz, np.full(f_count, pz))
        np.testing.assert_array_equal(rs, np.zeros(f_count, dtype=np.uint8))
        np.testing.assert_array_equal(bad, np.zeros(f_count, dtype=np.uint8))


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_batch_apply_single_qubit_oracle(name):
    # one-qubit S gate: X -> Y, Z -> Z; conjugating Y must give -X
    n = 1
    bx = np.array([[1, 0]], dtype=np.int64)   # X -> x-mask of Y = 1
    bz = np.array([[1, 1]], dtype=np.int64)   # X -> z-mask of Y = 1; Z -> Z
    bs = np.zeros((1, 2), dtype=np.uint8)
    rx, rz, rs, bad = BACKENDS[name]["batch_apply"](bx, bz, bs, n, 1, 1)  # input Y
    assert (int(rx[0]), int(rz[0])) == (1, 0)  # letter X
    assert int(rs[0]) == 1                     # minus sign
    assert int(bad[0]) == 0


def test_batch_apply_backends_agree_on_random_symplectic_data():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    from subrb.tableau import enumerate_group, group_by_name

    group = group_by_name("real")
    elements = enumerate_group(group, 2)
    n = 2
    bx = np.array([[e.x_images[j] for j in range(2 * n)] for e in elements], dtype=np.int64)
    bz = np.array([[e.z_images[j] for j in range(2 * n)] for e in elements], dtype=np.int64)
    bs = np.array([[e.sign_bits[j] for j in range(2 * n)] for e in elements], dtype=np.uint8)
    names = sorted(BACKENDS)
    for px, pz in [(1, 0), (3, 3), (2, 1), (1, 2)]:
        results = [BACKENDS[k]["batch_apply"](bx, bz, bs, n, px, pz) for k in names]
        for a, b in zip(results[0], results[1]):
            np.testing.assert_array_equal(a, b)
        assert not results[0][3].any()


@pytest.mark.parametrize("name", sorted(BACKENDS))
def test_mc_plus_counts_searchsorted_semantics(name):
    # two locations, trivial channels: location 0 always flips iff u >= 0.5,
    # location 1 never flips.  cdf row [0.5, 1.0]: u < 0.5 -> bin 0, else bin 1.
    cdfs = np.array([[0.5, 1.0]], dtype=np.float64)
    chan_ids = np.zeros(2, dtype=np.int64)
    flips = np.array([[0, 1], [0, 0]], dtype=np.uint8)
    u = np.array(
        [
            [0.2, 0.9],   # no flip -> plus
            [0.5, 0.1],   # boundary u == cdf edge falls in bin 1 -> flip
            [0.7, 0.7],   # flip
            [0.49999, 0.0],  # no flip
        ],
        dtype=np.float64,
    )
    plus = BACKENDS[name]["mc_plus_counts"](u, cdfs, chan_ids, flips)
    assert plus == 2


def test_mc_plus_counts_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    rng = np.random.default_rng(14)
    locs, shots = 9, 4000
    w = rng.random((3, 16))
    w /= w.sum(axis=1, keepdims=True)
    cdfs = np.cumsum(w, axis=1)
    cdfs[:, -1] = 1.0
    chan_ids = rng.integers(0, 3, size=locs, dtype=np.int64)
    flips = rng.integers(0, 2, size=(locs, 16), dtype=np.int64).astype(np.uint8)
    u = rng.random((shots, locs))
    names = sorted(BACKENDS)
    counts = [BACKENDS[k]["mc_plus_counts"](u, cdfs, chan_ids, flips) for k in names]
    assert counts[0] == counts[1]


def test_active_backend_exports():
    assert _kernels.BACKEND_NAME in BACKENDS
    assert _kernels.popcount is BACKENDS[_kernels.BACKEND_NAME]["popcount"]
