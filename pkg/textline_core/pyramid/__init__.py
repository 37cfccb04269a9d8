"""Gaussian linear pyramids."""
from .gaussian_pyramid import MAX_PYRAMID_LEVELS, GaussianPyramid, build_pyramid, reduce

__all__ = ["MAX_PYRAMID_LEVELS", "GaussianPyramid", "build_pyramid", "reduce"]
