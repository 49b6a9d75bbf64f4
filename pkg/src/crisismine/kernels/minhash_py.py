"""Numpy fallback for the MinHash signature kernel."""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)


def minhash_signature_kernel(shingle_hashes: np.ndarray, a: np.ndarray,
                             b: np.ndarray) -> np.ndarray:
    """Min over permuted hashes, one 64-bit value per permutation.

    Permutation i maps x -> (a[i]*x + b[i]) mod 2^64 (a odd). Works in
    blocks to keep the num_perm x n intermediate bounded.
    """
    n = shingle_hashes.shape[0]
    num_perm = a.shape[0]
    if n == 0:
        raise ValueError("no shingle hashes")
    out = np.full(num_perm, _MASK, dtype=np.uint64)
    block = max(1, 1_000_000 // max(1, num_perm))
    with np.errstate(over="ignore"):
        for start in range(0, n, block):
            x = shingle_hashes[start:start + block]
            permuted = a[:, None] * x[None, :] + b[:, None]
            np.minimum(out, permuted.min(axis=1), out=out)
    return out
