"""Compare the numpy and numba kernel backends on realistic workloads.

Run with ``python3 benchmarks/bench_kernels.py``.  Results are also checked
for agreement between backends, so this doubles as a coarse parity check.
Set ``SUBRB_DISABLE_NUMBA=1`` before importing subrb to force the pure-numpy
backend inside the library itself; this script always times both via
``available_backends()``.
"""

import time

import numpy as np

from subrb._kernels import BACKEND_NAME, available_backends


def _time(fn, *args, repeat=5):
    fn(*args)  # warm-up (JIT compilation for the numba variants)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    rng = np.random.default_rng(7)
    backends = available_backends()
    print(f"active backend: {BACKEND_NAME}; timing: {', '.join(backends)}")

    n = 3
    size = 1 << (2 * n)

    workloads = {}
    v = rng.integers(0, 1 << 60, size=2_000_000)
    workloads["popcount (2e6 ints)"] = ("popcount", (v,))

    images = rng.integers(0, size, size=2 * n)
    workloads["xor_permutation (4^3 table x 20k)"] = None  # built below

    xs = rng.integers(0, 1 << n, size=500_000)
    zs = rng.integers(0, 1 << n, size=500_000)
    workloads["anticommute (5e5 rows)"] = ("anticommute", (xs, zs, 3, 5))

    bx = rng.integers(0, 1 << n, size=(200_000, 2 * n))
    bz = rng.integers(0, 1 << n, size=(200_000, 2 * n))
    bs = rng.integers(0, 2, size=(200_000, 2 * n)).astype(np.uint8)
    workloads["batch_apply (2e5 tableaus)"] = ("batch_apply", (bx, bz, bs, n, 3, 5))

    shots, locs = 40_000, 34
    u = rng.random((shots, locs))
    cdfs = np.sort(rng.random((3, size)), axis=1)
    cdfs[:, -1] = 1.0
    chan_ids = rng.integers(0, 3, size=locs)
    flips = rng.integers(0, 2, size=(locs, size)).astype(np.uint8)
    workloads["mc_plus_counts (4e4 shots x 34 locs)"] = (
        "mc_plus_counts",
        (u, cdfs, chan_ids, flips),
    )

    header = f"{'workload':38s}" + "".join(f"{name:>12s}" for name in backends)
    print(header)
    print("-" * len(header))

    for label, spec in workloads.items():
        if spec is None:
            # xor_permutation needs a loop to be a fair workload
            def run_xor(kernels):
                out = None
                for _ in range(20_000):
                    out = kernels["xor_permutation"](images, n)
                return out

            times, outs = [], []
            for name, kernels in backends.items():
                run_xor(kernels)
                t0 = time.perf_counter()
                outs.append(run_xor(kernels))
                times.append(time.perf_counter() - t0)
        else:
            fn_name, args = spec
            times, outs = [], []
            for name, kernels in backends.items():
                t, out = _time(kernels[fn_name], *args)
                times.append(t)
                outs.append(out)
        line = f"{label:38s}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(outs) == 2:
            a, b = outs
            if isinstance(a, tuple):
                agree = all(np.array_equal(x, y) for x, y in zip(a, b))
            else:
                agree = np.array_equal(a, b)
            line += "   " + ("agree" if agree else "DISAGREE!")
        print(line)


if __name__ == "__main__":
    main()
