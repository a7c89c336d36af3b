#!/usr/bin/env python3
"""Benchmark the compiled Pauli kernels against the pure-numpy fallback.

Usage: python benchmarks/bench_kernels.py [--qubits 4 6 8 10] [--terms 2000]

Times the two hot kernels (exponential-sequence application and dense term
accumulation) on random inputs and prints the per-term cost and speedup.
"""

import argparse
import time

import numpy as np

from hamsim import _kernels_np

try:
    from hamsim import _pauli_kernels
except ImportError:
    _pauli_kernels = None


def bench_apply(impl, n_qubits, n_terms, repeats, rng):
    dim = 1 << n_qubits
    xs = rng.integers(1, dim, n_terms).astype(np.uint64)
    zs = rng.integers(0, dim, n_terms).astype(np.uint64)
    angles = rng.normal(size=n_terms)
    best = float("inf")
    for _ in range(repeats):
        u = np.eye(dim, dtype=np.complex128)
        started = time.perf_counter()
        impl.apply_pauli_exp_sequence(u, xs, zs, angles)
        best = min(best, time.perf_counter() - started)
    return best / n_terms


def bench_accumulate(impl, n_qubits, n_terms, repeats, rng):
    dim = 1 << n_qubits
    xs = rng.integers(0, dim, n_terms).astype(np.uint64)
    zs = rng.integers(0, dim, n_terms).astype(np.uint64)
    coeffs = rng.normal(size=n_terms)
    best = float("inf")
    for _ in range(repeats):
        out = np.zeros((dim, dim), dtype=np.complex128)
        started = time.perf_counter()
        impl.accumulate_pauli_terms(out, xs, zs, coeffs)
        best = min(best, time.perf_counter() - started)
    return best / n_terms


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--qubits", type=int, nargs="+",
                        default=[4, 6, 8, 10])
    parser.add_argument("--terms", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _pauli_kernels is None:
        print("compiled kernels unavailable; showing numpy fallback only")
    header = f"{'kernel':<12} {'qubits':>6} {'numpy us/term':>14}"
    if _pauli_kernels:
        header += f" {'cython us/term':>15} {'speedup':>8}"
    print(header)
    rng = np.random.default_rng(0)
    for bench, name in ((bench_apply, "exp-apply"),
                        (bench_accumulate, "accumulate")):
        for n in args.qubits:
            terms = args.terms if n <= 8 else max(args.terms // 4, 100)
            np_cost = bench(_kernels_np, n, terms, args.repeats, rng)
            line = f"{name:<12} {n:>6} {np_cost * 1e6:>14.2f}"
            if _pauli_kernels:
                cy_cost = bench(_pauli_kernels, n, terms, args.repeats, rng)
                line += f" {cy_cost * 1e6:>15.2f} {np_cost / cy_cost:>7.1f}x"
            print(line)


if __name__ == "__main__":
    main()
