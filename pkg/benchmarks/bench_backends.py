"""Row-kernel backend shootout: numba JIT vs pure numpy.

Runs the same exact-norm box sweep with each kernel passed explicitly to
sweep_sum, so both backends are timed in one process no matter what
NORMSIEVE_BACKEND says.  The JIT is warmed up (compiled) on a tiny box
before timing.  Counts from the two backends are asserted equal.

Usage:
    python3 benchmarks/bench_backends.py [--B 1024,2048,4096] [--repeat 3]
"""

import argparse
import time

from normsieve import _kernels
from normsieve.engine import SweepConfig, sweep_sum
from normsieve.fields import FieldSpec
from normsieve.forms import FormSpec

L9 = FieldSpec(9, (1, 8), True)
F2 = FormSpec(1, 0, -2)


def run_once(B: int, kernel) -> tuple[int, float]:
    cfg = SweepConfig(B=B, strategy="row_sieve")
    t0 = time.perf_counter()
    val = sweep_sum(L9, F2, B, "exact_norm", config=cfg, kernel=kernel)
    return val, time.perf_counter() - t0


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--B", default="1024,2048,4096",
                    help="comma list of box sizes")
    ap.add_argument("--repeat", type=int, default=3,
                    help="timed repetitions per backend (best is kept)")
    args = ap.parse_args()
    sizes = [int(tok) for tok in args.B.split(",") if tok.strip()]

    backends = [("numpy", _kernels.row_kernel_numpy)]
    try:
        import numba  # noqa: F401

        run_once(64, _kernels.row_kernel_numba)  # compile outside the timer
        backends.append(("numba", _kernels.row_kernel_numba))
    except ImportError:
        print("numba not importable; timing the numpy backend only")

    print(f"{'B':>6}  {'backend':>8}  {'best':>10}  {'count':>12}")
    for B in sizes:
        results = {}
        for name, kernel in backends:
            best, count = float("inf"), None
            for _ in range(max(1, args.repeat)):
                val, dt = run_once(B, kernel)
                best = min(best, dt)
                count = val
            results[name] = (best, count)
            print(f"{B:>6}  {name:>8}  {best:>9.3f}s  {count:>12}")
        counts = {c for _, c in results.values()}
        assert len(counts) == 1, f"backend mismatch at B={B}: {results}"
        if len(results) == 2:
            speedup = results["numpy"][0] / results["numba"][0]
            print(f"{'':>6}  numba is {speedup:.1f}x faster at B={B}")


if __name__ == "__main__":
    main()
