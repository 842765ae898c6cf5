"""Compiled versus pure-Python chain kernel.

Runs the same replicas through ``run_chain`` and through its uncompiled
``py_func`` with identical seeds, checks the outputs agree, and reports
steps per second for each path.

    python benchmarks/bench_chain.py [--steps 200000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from evlab import _chain
from evlab._accel import HAVE_NUMBA, backend_name
from evlab.experiments import replica_rng

CASES = [
    # (label, start word, beta, p)
    ("symmetric exclusion", "", 0.0, 0.5),
    ("transient exclusion", "01", 0.0, 0.3),
    ("mixed", "0011", 0.4, 0.5),
    ("voter", "01", 1.0, 0.0),
]


def _run(fn, word, beta, p, steps, seed):
    times = np.array([steps], dtype=np.int64)
    return fn(_chain.word_array(word), beta, p, steps, False, times, False, False,
              replica_rng(seed, 0))


def _time(fn, word, beta, p, steps, repeat):
    best = float("inf")
    out = None
    for r in range(repeat):
        t0 = time.perf_counter()
        out = _run(fn, word, beta, p, steps, r)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    compiled = _chain.run_chain
    python = getattr(compiled, "py_func", compiled)
    if not HAVE_NUMBA or python is compiled:
        print(f"backend is {backend_name()}: nothing compiled to compare against")

    # warm-up so compilation is not timed
    _run(compiled, "01", 0.5, 0.5, 10, 0)

    print(f"{'case':<22}{'compiled steps/s':>18}{'python steps/s':>18}{'speed-up':>10}")
    for label, word, beta, p in CASES:
        tc, _ = _time(compiled, word, beta, p, args.steps, args.repeat)
        tp, op = _time(python, word, beta, p, args.steps, 1)
        # the last compiled repeat used seed repeat-1, the python run seed 0
        ref = _run(compiled, word, beta, p, args.steps, 0)
        assert np.array_equal(ref[2], op[2]), f"paths disagree on {label}"
        print(f"{label:<22}{args.steps / tc:>18,.0f}{args.steps / tp:>18,.0f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
