"""Corpus mining, dataset construction, and evaluation toolkit for
crisis-domain machine translation."""

from crisismine.kernels import KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
