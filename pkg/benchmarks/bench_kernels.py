#!/usr/bin/env python3
"""Time the compiled kernels against the numpy fallback.

Also asserts that both backends return identical bits, since the rest of
the package relies on the two being interchangeable.

Run: python benchmarks/bench_kernels.py [--width 1216 --height 256 ...]
"""

import argparse
import time

import numpy as np

from depthproj._kernels import backends


def time_call(fn, *args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=1216)
    ap.add_argument("--height", type=int, default=256)
    ap.add_argument("--boxes", type=int, default=6)
    ap.add_argument("--points", type=int, default=30000)
    ap.add_argument("--window", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.width * args.height

    origin = np.zeros(3)
    dirs = np.empty((n, 3))
    dirs[:, 0] = rng.uniform(-0.9, 0.9, n)
    dirs[:, 1] = rng.uniform(-0.2, 0.4, n)
    dirs[:, 2] = 1.0
    lo = np.stack([rng.uniform(-6, 5, args.boxes),
                   rng.uniform(-1, 1, args.boxes),
                   rng.uniform(4, 8, args.boxes)], axis=1)
    boxes = np.ascontiguousarray(np.concatenate([lo, lo + rng.uniform(0.2, 2.0, (args.boxes, 3))], axis=1))

    ui = rng.integers(0, args.width, args.points)
    vi = rng.integers(0, args.height, args.points)
    zs = rng.uniform(1.0, 60.0, args.points)

    values = rng.uniform(1.0, 60.0, (args.height, args.width))
    valid = rng.random((args.height, args.width)) < 0.07

    impls = backends()
    if "c" not in impls:
        print("compiled backend not built; showing numpy fallback only")

    cases = [
        ("raycast", lambda impl: (impl.raycast, (origin, dirs, 20.0, boxes))),
        ("scatter_min", lambda impl: (impl.scatter_min,
                                      (np.ascontiguousarray(ui.astype(np.int64)),
                                       np.ascontiguousarray(vi.astype(np.int64)),
                                       np.ascontiguousarray(zs),
                                       args.height, args.width))),
        ("tile_min", lambda impl: (impl.tile_min,
                                   (np.ascontiguousarray(values),
                                    np.ascontiguousarray(valid).view(np.uint8),
                                    args.window))),
    ]

    print(f"{'kernel':<12} {'python':>10} {'c':>10} {'speedup':>8}  identical")
    for name, make in cases:
        fn, call_args = make(impls["python"])
        t_py, out_py = time_call(fn, *call_args, repeat=args.repeat)
        if "c" in impls:
            fn_c, call_args_c = make(impls["c"])
            t_c, out_c = time_call(fn_c, *call_args_c, repeat=args.repeat)
            same = np.array_equal(out_py, out_c)
            print(f"{name:<12} {t_py*1e3:>8.2f}ms {t_c*1e3:>8.2f}ms {t_py/t_c:>7.1f}x  {same}")
            assert same, f"{name}: backends disagree"
        else:
            print(f"{name:<12} {t_py*1e3:>8.2f}ms {'-':>10} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
