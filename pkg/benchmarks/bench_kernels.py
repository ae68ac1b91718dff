"""Time the numba and pure-numpy flavours of each hot kernel side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--size 256]

Both flavours are imported directly, so ULGFBP_DISABLE_NUMBA does not matter
here.  The first numba call (compilation) is excluded from the timings.
"""

import argparse
import timeit

import numpy as np

from ulgfbp import kernels
from ulgfbp.gabor import build_filter_bank


def cases(size, rng):
    img = rng.standard_normal((size, size))
    bank = build_filter_bank()
    k = bank[0]
    padded = np.pad(rng.standard_normal((size // 4, size // 4)), k.radius, mode="symmetric")
    q = rng.random((20, 3186))
    t = rng.random((160, 3186))
    return [
        ("lbp_codes R=1", lambda f: f(img, 1), kernels.lbp_codes_numba, kernels.lbp_codes_numpy),
        ("lbp_codes R=2", lambda f: f(img, 2), kernels.lbp_codes_numba, kernels.lbp_codes_numpy),
        (f"convolve_valid r={k.radius}", lambda f: f(padded, k.values),
         kernels.convolve_valid_numba, kernels.convolve_valid_numpy),
        ("chi2_distances 20x160", lambda f: f(q, t),
         kernels.chi2_distances_numba, kernels.chi2_distances_numpy),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=256)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, call, fast, slow in cases(args.size, rng):
        a, b = call(fast), call(slow)  # warm-up + agreement check
        if not np.allclose(a, b, rtol=1e-10, atol=1e-12):
            raise SystemExit(f"{name}: numba and numpy results differ")
        tf = min(timeit.repeat(lambda: call(fast), number=1, repeat=args.repeat)) * 1e3
        ts = min(timeit.repeat(lambda: call(slow), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:28s} {tf:10.2f} {ts:10.2f} {ts / tf:7.1f}x")


if __name__ == "__main__":
    main()
