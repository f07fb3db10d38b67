"""Kernel backend selection: compiled extension if built, numpy otherwise."""

from __future__ import annotations

try:
    from . import _kernels as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from . import _kernels_py as _impl

    BACKEND = "numpy"

min_pairwise_distance = _impl.min_pairwise_distance
min_image_distance_matrix = _impl.min_image_distance_matrix


def backend() -> str:
    """Name of the active kernel implementation."""
    return BACKEND
