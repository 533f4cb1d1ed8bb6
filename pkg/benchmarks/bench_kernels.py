"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from mequilibrium import kernels


def _cases(rng):
    pts = rng.dirichlet(np.ones(3), size=2000)
    init = pts[rng.choice(len(pts), size=7, replace=False)]
    vals = rng.normal(size=(200_000, 3))
    return {
        "lloyd (2000 pts, k=7)": lambda b: kernels.lloyd(pts, init, 300, backend=b),
        "order_codes (200k x 3)": lambda b: kernels.order_codes(vals, 1e-9, backend=b),
    }


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (import default: {kernels.BACKEND})")
    for name, fn in _cases(rng).items():
        ref = fn("numpy")
        times = {}
        for b in backends:
            out = fn(b)
            same = all(np.allclose(np.asarray(x), np.asarray(y)) for x, y in zip(
                out if isinstance(out, tuple) else (out,), ref if isinstance(ref, tuple) else (ref,)))
            times[b] = min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat))
            print(f"{name:28s} {b:9s} {times[b] * 1e3:9.2f} ms  agrees={same}")
        if "compiled" in times:
            print(f"{'':28s} speedup   {times['numpy'] / times['compiled']:9.1f}x")


if __name__ == "__main__":
    main()
