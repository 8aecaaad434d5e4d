"""Timing comparison of the compiled kernels against the numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--max-qubits 12]
"""

import argparse
import time

import numpy as np

from rksign.kernels import _fallback

try:
    from rksign.kernels import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_wht(n):
    rng = np.random.default_rng(0)
    v = rng.normal(size=1 << n)
    rows = {"numpy": timeit(lambda: _fallback.wht_inplace(v.copy()))}
    if _core is not None:
        rows["compiled"] = timeit(lambda: _core.wht_inplace_f64(v.copy()))
    return rows

def bench_moments(n):
    rng = np.random.default_rng(1)
    psi = rng.normal(size=1 << n)
    psi /= np.linalg.norm(psi)
    rows = {"numpy": timeit(lambda: _fallback.pauli_moment_sums(psi), repeat=1)}
    if _core is not None:
        rows["compiled"] = timeit(
            lambda: _core.pauli_moment_sums_f64(psi, True), repeat=1
        )
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--max-qubits", type=int, default=12)
    args = parser.parse_args()

    if _core is None:
        print("compiled extension not built; timing the numpy fallback only\n")

    print(f"{'kernel':<26}{'N':>4}{'numpy':>12}{'compiled':>12}{'speedup':>9}")
    for n in range(8, args.max_qubits + 1, 2):
        rows = bench_wht(n)
        _report("walsh-hadamard (2^N)", n, rows)
    for n in range(6, min(args.max_qubits, 12) + 1, 2):
        rows = bench_moments(n)
        _report("pauli moment sums (4^N)", n, rows)


def _report(name, n, rows):
    numpy_t = rows["numpy"]
    if "compiled" in rows:
        ext_t = rows["compiled"]
        print(f"{name:<26}{n:>4}{numpy_t:>11.4f}s{ext_t:>11.4f}s{numpy_t / ext_t:>8.1f}x")
    else:
        print(f"{name:<26}{n:>4}{numpy_t:>11.4f}s{'-':>12}{'-':>9}")


if __name__ == "__main__":
    main()
