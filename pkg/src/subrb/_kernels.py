"""Hot numeric kernels with two interchangeable backends.

Everything here operates on the packed integer encoding of Paulis: an n-qubit
Pauli is a pair of bit masks ``(x, z)`` (bit q set = X / Z part acts on qubit
q), flattened to the canonical index ``(x << n) | z``.  Because conjugation by
a Clifford is linear over GF(2) on ``(x, z)``, whole-group sweeps reduce to
XOR/popcount arithmetic on int64 arrays — which is what lives here.

Two implementations are provided for each kernel:

* a numba ``@njit`` version (default when numba imports cleanly), and
* a pure-numpy version with identical semantics.

Set ``SUBRB_DISABLE_NUMBA=1`` in the environment to force the numpy path.
``BACKEND_NAME`` reports which one is active; ``available_backends()`` exposes
both for side-by-side benchmarking (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("SUBRB_DISABLE_NUMBA", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

if hasattr(np, "bitwise_count"):

    def _np_popcount(a):
        """Bit count of each element of an int64 array (values must be >= 0)."""
        return np.bitwise_count(a).astype(np.int64)

else:  # pragma: no cover - numpy < 2.0
    _POP16 = np.array([bin(i).count("1") for i in range(1 << 16)], dtype=np.int64)

    def _np_popcount(a):
        a = np.asarray(a, dtype=np.int64)
        return (
            _POP16[a & 0xFFFF]
            + _POP16[(a >> 16) & 0xFFFF]
            + _POP16[(a >> 32) & 0xFFFF]
            + _POP16[(a >> 48) & 0xFFFF]
        )


def _np_xor_permutation(basis_images, nbits):
    """Table of the GF(2)-linear map sending index ``1 << k`` to ``basis_images[k]``.

    Returns an int64 array ``t`` of size ``2**nbits`` with
    ``t[s] = XOR of basis_images[k] over the set bits k of s``.
    """
    table = np.zeros(1 << nbits, dtype=np.int64)
    for k in range(nbits):
        step = 1 << k
        table[step : 2 * step] = table[:step] ^ np.int64(basis_images[k])
    return table


def _np_anticommute(xs, zs, px, pz):
    """Symplectic-product parity of each array Pauli against a fixed ``(px, pz)``.

    Returns uint8, 1 where they anticommute.
    """
    return ((_np_popcount(xs & np.int64(pz)) + _np_popcount(zs & np.int64(px))) & 1).astype(np.uint8)


def _np_batch_apply(bx, bz, bs, n, px, pz):
    """Conjugate the fixed Pauli ``(px, pz, +1)`` by every tableau in a batch.

    ``bx``/``bz`` are int64 arrays of shape (F, 2n): column j < n holds the
    image mask of X_j, column n + q that of Z_q.  ``bs`` is uint8 (1 = minus
    sign).  Returns ``(rx, rz, rs, bad)``: image masks, sign bits, and a flag
    that is nonzero where the accumulated phase came out imaginary (impossible
    for valid symplectic data; surfaced for assertions).
    """
    f_count = bx.shape[0]
    cur_x = np.zeros(f_count, dtype=np.int64)
    cur_z = np.zeros(f_count, dtype=np.int64)
    sgn = np.zeros(f_count, dtype=np.uint8)
    exp = np.zeros(f_count, dtype=np.int64)
    for j in _factor_columns(n, px, pz):
        fx = bx[:, j]
        fz = bz[:, j]
        exp += (
            _np_popcount(cur_x & cur_z)
            + _np_popcount(fx & fz)
            - _np_popcount((cur_x ^ fx) & (cur_z ^ fz))
            + 2 * _np_popcount(cur_z & fx)
        )
        sgn ^= bs[:, j]
        cur_x = cur_x ^ fx
        cur_z = cur_z ^ fz
    total = (exp + int(px & pz).bit_count()) % 4
    rs = (sgn ^ (total >> 1).astype(np.uint8)) & 1
    bad = (total & 1).astype(np.uint8)
    return cur_x, cur_z, rs.astype(np.uint8), bad


def _np_mc_plus_counts(u, cdfs, chan_ids, flips):
    """Count shots whose sampled error word commutes (even flip parity) overall.

    ``u``: float64 (shots, locations) uniforms in [0, 1).
    ``cdfs``: float64 (channels, 4**n) cumulative weights.
    ``chan_ids``: int64 (locations,) row of ``cdfs`` used at each location.
    ``flips``: uint8 (locations, 4**n); 1 where error index k anticommutes with
    the back-propagated Pauli at that location.
    """
    shots, locs = u.shape
    parity = np.zeros(shots, dtype=np.uint8)
    for loc in range(locs):
        idx = np.searchsorted(cdfs[chan_ids[loc]], u[:, loc], side="right")
        parity ^= flips[loc, idx]
    return int(np.count_nonzero(parity == 0))


def _factor_columns(n, px, pz):
    """Column order for expanding a Pauli into X then Z generator factors."""
    cols = []
    for q in range(n):
        if (px >> q) & 1:
            cols.append(q)
    for q in range(n):
        if (pz >> q) & 1:
            cols.append(n + q)
    return cols


_NUMPY_BACKEND = {
    "popcount": _np_popcount,
    "xor_permutation": _np_xor_permutation,
    "anticommute": _np_anticommute,
    "batch_apply": _np_batch_apply,
    "mc_plus_counts": _np_mc_plus_counts,
}

# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

_NUMBA_BACKEND = None

if not _DISABLE:
    try:
        from numba import njit

        @njit(cache=True)
        def _nb_scalar_pop(v):
            c = 0
            while v:
                v &= v - 1
                c += 1
            return c

        @njit(cache=True)
        def _nb_popcount(a):
            out = np.empty(a.size, dtype=np.int64)
            flat = a.ravel()
            for i in range(flat.size):
                out[i] = _nb_scalar_pop(flat[i])
            return out.reshape(a.shape)

        @njit(cache=True)
        def _nb_xor_permutation(basis_images, nbits):
            table = np.zeros(1 << nbits, dtype=np.int64)
            for k in range(nbits):
                step = 1 << k
                m = basis_images[k]
                for s in range(step):
                    table[step + s] = table[s] ^ m
            return table

        @njit(cache=True)
        def _nb_anticommute(xs, zs, px, pz):
            out = np.empty(xs.shape, dtype=np.uint8)
            fo = out.ravel()
            fx, fz = xs.ravel(), zs.ravel()
            for i in range(fo.size):
                fo[i] = (_nb_scalar_pop(fx[i] & pz) + _nb_scalar_pop(fz[i] & px)) & 1
            return out

        @njit(cache=True)
        def _nb_batch_apply_inner(bx, bz, bs, cols, y_in, f_count):
            cur_x = np.zeros(f_count, dtype=np.int64)
            cur_z = np.zeros(f_count, dtype=np.int64)
            rs = np.zeros(f_count, dtype=np.uint8)
            bad = np.zeros(f_count, dtype=np.uint8)
            for i in range(f_count):
                cx = np.int64(0)
                cz = np.int64(0)
                sgn = 0
                exp = 0
                for jj in range(cols.size):
                    j = cols[jj]
                    fx = bx[i, j]
                    fz = bz[i, j]
                    exp += (
                        _nb_scalar_pop(cx & cz)
                        + _nb_scalar_pop(fx & fz)
                        - _nb_scalar_pop((cx ^ fx) & (cz ^ fz))
                        + 2 * _nb_scalar_pop(cz & fx)
                    )
                    sgn ^= bs[i, j]
                    cx ^= fx
                    cz ^= fz
                total = (exp + y_in) % 4
                cur_x[i] = cx
                cur_z[i] = cz
                rs[i] = (sgn ^ (total >> 1)) & 1
                bad[i] = total & 1
            return cur_x, cur_z, rs, bad

        def _nb_batch_apply(bx, bz, bs, n, px, pz):
            cols = np.array(_factor_columns(n, px, pz), dtype=np.int64)
            y_in = int(px & pz).bit_count()
            return _nb_batch_apply_inner(bx, bz, bs, cols, y_in, bx.shape[0])

        @njit(cache=True)
        def _nb_mc_plus_counts(u, cdfs, chan_ids, flips):
            shots, locs = u.shape
            plus = 0
            for s in range(shots):
                parity = 0
                for loc in range(locs):
                    row = cdfs[chan_ids[loc]]
                    v = u[s, loc]
                    lo = 0
                    hi = row.size
                    while lo < hi:
                        mid = (lo + hi) >> 1
                        if v < row[mid]:
                            hi = mid
                        else:
                            lo = mid + 1
                    parity ^= flips[loc, lo]
                if parity == 0:
                    plus += 1
            return plus

        _NUMBA_BACKEND = {
            "popcount": _nb_popcount,
            "xor_permutation": _nb_xor_permutation,
            "anticommute": _nb_anticommute,
            "batch_apply": _nb_batch_apply,
            "mc_plus_counts": _nb_mc_plus_counts,
        }
    except ImportError:  # pragma: no cover - numba genuinely missing
        _NUMBA_BACKEND = None

if _NUMBA_BACKEND is not None:
    BACKEND_NAME = "numba"
    _ACTIVE = _NUMBA_BACKEND
else:
    BACKEND_NAME = "numpy"
    _ACTIVE = _NUMPY_BACKEND

popcount = _ACTIVE["popcount"]
xor_permutation = _ACTIVE["xor_permutation"]
anticommute = _ACTIVE["anticommute"]
batch_apply = _ACTIVE["batch_apply"]
mc_plus_counts = _ACTIVE["mc_plus_counts"]


def available_backends():
    """Mapping backend name -> kernel dict, for benchmarks and parity tests."""
    out = {"numpy": _NUMPY_BACKEND}
    if _NUMBA_BACKEND is not None:
        out["numba"] = _NUMBA_BACKEND
    return out
