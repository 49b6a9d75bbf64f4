"""Hot-kernel selection: compiled extension when available, numpy otherwise."""

try:
    from crisismine.kernels._minhash import minhash_signature_kernel

    KERNEL_BACKEND = "compiled"
except ImportError:
    from crisismine.kernels.minhash_py import minhash_signature_kernel

    KERNEL_BACKEND = "python"

__all__ = ["minhash_signature_kernel", "KERNEL_BACKEND"]
