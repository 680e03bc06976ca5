"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json]
"""
import argparse
import json
import timeit

import numpy as np

from ergolab import kernels
from ergolab.mixing_lab.walks import lazy_codes
from ergolab.rng import make_rng


def cases():
    rng = make_rng(1, "bench")
    codes2 = lazy_codes(rng, 2, 1_000_000, 0.2)
    codes4 = lazy_codes(rng, 4, 1_000_000, 0.2)
    cps = np.array([1_000, 10_000, 100_000, 1_000_000])
    P, N = 100, 32
    a = rng.integers(0, 2, size=(P, N), dtype=np.uint8)
    b = rng.integers(0, 2, size=(P, N), dtype=np.uint8)
    a[:, -4:] = 0  # keep clear of overflow
    b[:, -4:] = 0
    return {
        "return_counts Z^2, 1e6 steps": lambda k: k.lattice_return_counts(codes2, 2, cps),
        "return_counts Z^4, 1e6 steps": lambda k: k.lattice_return_counts(codes4, 4, cps),
        "excursions Z^2, 1e6 steps": lambda k: k.lattice_excursions(codes2, 2, 10_000),
        "odometer_square 100 x 1e4 steps": lambda k: k.odometer_square(a.copy(), b.copy(), 10_000, 1_000),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    rows = []
    for name, fn in cases().items():
        row = {"case": name}
        for impl_name, impl in sorted(kernels.IMPLEMENTATIONS.items()):
            row[impl_name] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=args.repeat))
        if "cython" in row:
            row["speedup"] = row["python"] / row["cython"]
        rows.append(row)
    if args.json:
        print(json.dumps({"active": kernels.BACKEND, "results": rows}, indent=2))
        return
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':34s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for r in rows:
        cy = f"{r['cython']:10.4f}" if "cython" in r else f"{'n/a':>10s}"
        sp = f"{r['speedup']:7.1f}x" if "speedup" in r else f"{'':>8s}"
        print(f"{r['case']:34s} {r['python']:10.4f} {cy} {sp}")


if __name__ == "__main__":
    main()
