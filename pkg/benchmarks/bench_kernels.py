"""Time the numba and numpy kernels side by side.

    python benchmarks/bench_kernels.py [--n 10] [--frames 2000]
"""

import argparse
import time

import numpy as np

from nspolar import _accel, codec, kernels
from nspolar.channels import ChannelModel
from nspolar.construction import build_code


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    N = 1 << args.n
    rng = np.random.default_rng(0)
    chans = [ChannelModel.bsc(p) for p in np.linspace(0.095, 0.005, N)]
    spec = build_code(chans, N // 2, "bitreversal")
    u = rng.integers(0, 2, (args.frames, N), dtype=np.uint8)
    x = codec.encode(u)
    y = x ^ (rng.random(x.shape) < 0.05).astype(np.uint8)
    llr = np.where(y == 0, 1.0, -1.0) * np.log(0.95 / 0.05)
    frozen, fword = spec.frozen_mask, spec.frozen_word

    print(f"N={N} frames={args.frames} numba available: {_accel.HAVE_NUMBA}")
    paths = [("numpy", False)] + ([("numba", True)] if _accel.HAVE_NUMBA else [])
    for name, flag in paths:
        # warm up (JIT compile) on a small batch
        kernels.polar_transform(u[:2], flag)
        kernels.sc_decode(llr[:2], frozen, fword, numba=flag)
        t_enc = best_of(lambda: kernels.polar_transform(u, flag), args.repeat)
        t_dec = best_of(lambda: kernels.sc_decode(llr, frozen, fword, numba=flag), args.repeat)
        print(
            f"{name:>6}: transform {1e6 * t_enc / args.frames:8.2f} us/frame   "
            f"SC decode {1e3 * t_dec / args.frames:8.4f} ms/frame"
        )


if __name__ == "__main__":
    main()
