"""Integrator kernel selection.

The compiled kernel is preferred when its extension built; the pure-Python
twin is the fallback and the reference.  ``TELESIM_KERNEL=python|cython``
forces a choice (useful for the equivalence tests and the benchmark).
Both produce bit-identical trajectories.
"""

import os

from . import py_plant

try:
    from . import _plant_cy
except ImportError:
    _plant_cy = None


def available_kernels() -> dict:
    kernels = {"python": py_plant}
    if _plant_cy is not None:
        kernels["cython"] = _plant_cy
    return kernels


def select_kernel(name: str | None = None):
    """Return the kernel module; explicit name > env var > best available."""
    kernels = available_kernels()
    choice = name or os.environ.get("TELESIM_KERNEL")
    if choice:
        if choice not in kernels:
            raise ValueError(
                f"kernel {choice!r} not available (have: {', '.join(sorted(kernels))})"
            )
        return kernels[choice]
    return kernels.get("cython", py_plant)


active_kernel = select_kernel()
