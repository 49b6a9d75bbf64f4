"""Compare the compiled MinHash kernel against the pure-Python fallback.

Usage: python3 benchmarks/bench_minhash.py [--signatures N] [--shingles M]
"""

import argparse
import time

import numpy as np

import crisismine.kernels as kernels
from crisismine.kernels.minhash_py import minhash_signature_kernel as py_kernel

try:
    from crisismine.kernels._minhash import minhash_signature_kernel as c_kernel
except ImportError:
    c_kernel = None


def bench(kernel, batches, a, b):
    start = time.perf_counter()
    for hashes in batches:
        kernel(hashes, a, b)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--signatures", type=int, default=2000)
    parser.add_argument("--shingles", type=int, default=60)
    parser.add_argument("--perms", type=int, default=128)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    a = rng.integers(1, 2**63, size=args.perms, dtype=np.uint64) | 1
    b = rng.integers(0, 2**63, size=args.perms, dtype=np.uint64)
    batches = [rng.integers(0, 2**63, size=args.shingles, dtype=np.uint64)
               for _ in range(args.signatures)]

    print(f"active backend: {kernels.KERNEL_BACKEND}")
    print(f"{args.signatures} signatures, {args.shingles} shingles, "
          f"{args.perms} permutations")

    t_py = bench(py_kernel, batches, a, b)
    print(f"python  : {t_py:.3f}s ({args.signatures / t_py:.0f} sig/s)")
    if c_kernel is not None:
        sample = batches[0]
        assert np.array_equal(np.asarray(c_kernel(sample, a, b)),
                              np.asarray(py_kernel(sample, a, b)))
        t_c = bench(c_kernel, batches, a, b)
        print(f"compiled: {t_c:.3f}s ({args.signatures / t_c:.0f} sig/s, "
              f"{t_py / t_c:.1f}x speedup)")
    else:
        print("compiled kernel not available; skipping")


if __name__ == "__main__":
    main()
