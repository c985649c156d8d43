"""Time the enumeration kernels under both backends.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from jointspec import _kernels as K
from jointspec.matgroup import CARTAN, JORDAN, GroupFrame
from jointspec.scenarios import triangular_set, triangle_T1
from jointspec.spectrum import FULL, NECKLACE, enumerate_level

CASES = [
    ("ex33 cartan full n=12", triangular_set(), GroupFrame.GL(2), 12, CARTAN, FULL),
    ("ex33 jordan necklace n=14", triangular_set(), GroupFrame.GL(2), 14, JORDAN, NECKLACE),
    ("T1 jordan necklace n=12", triangle_T1(), GroupFrame.product(2), 12, JORDAN, NECKLACE),
    ("gl3 cartan full n=8", list(np.random.default_rng(0).standard_normal((3, 3, 3))),
     GroupFrame.GL(3), 8, CARTAN, FULL),
]


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numba", "numpy"] if K.HAVE_NUMBA else ["numpy"]
    print(f"{'case':32s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, S, fr, n, kind, mode in CASES:
        times = []
        for b in backends:
            K.set_backend(b)
            run = lambda: enumerate_level(S, n, kind, mode, frame=fr, keep_words=False)
            run()  # warm-up (jit compilation)
            times.append(best_of(run, args.repeat))
        sp = times[1] / times[0] if len(times) == 2 else float("nan")
        print(f"{name:32s} " + " ".join(f"{t:9.3f}s" for t in times) + f"   {sp:6.1f}x")


if __name__ == "__main__":
    main()
