"""
The six-kernel filter bank and 2-D convolution.

Convolution is cross-correlation (no kernel flip) with replicate-border padding.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..raster.raster_image import FilteredPlane, RasterImage, to_grayscale
from ..utils.errors import FilterError

BANK_ORDER = ("laplacian", "sobel_x", "sobel_y", "small_blur", "large_blur", "sharpen")


@dataclass(frozen=True, eq=False)
class Kernel:
    """Named odd-sized coefficient grid."""

    name: str
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=np.float64)
        if coeffs.ndim != 2:
            raise FilterError(f"kernel {self.name!r} must be 2-D, got shape {coeffs.shape}")
        rows, cols = coeffs.shape
        if rows < 1 or cols < 1 or rows % 2 == 0 or cols % 2 == 0:
            raise FilterError(f"kernel {self.name!r} must have odd dimensions, got {rows}x{cols}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def rows(self):
        return self.coeffs.shape[0]

    @property
    def cols(self):
        return self.coeffs.shape[1]


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Ordered kernels: laplacian, sobel_x, sobel_y, small_blur, large_blur, sharpen."""

    kernels: Tuple[Kernel, ...]

    def __post_init__(self):
        kernels = tuple(self.kernels)
        names = tuple(k.name for k in kernels)
        if names != BANK_ORDER:
            raise FilterError(f"filter bank must be {BANK_ORDER}, got {names}")
        object.__setattr__(self, "kernels", kernels)

    def __len__(self):
        return len(self.kernels)

    def __iter__(self):
        return iter(self.kernels)

    def __getitem__(self, name):
        for kernel in self.kernels:
            if kernel.name == name:
                return kernel
        raise KeyError(name)

    @property
    def plane_count(self):
        """Planes produced per image: grayscale plus one per kernel."""
        return len(self.kernels) + 1


def default_bank():
    """Return the fixed six-kernel bank."""
    sobel_x = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    return FilterBank((
        Kernel("laplacian", [[0, 1, 0], [1, -4, 1], [0, 1, 0]]),
        Kernel("sobel_x", sobel_x),
        Kernel("sobel_y", sobel_x.T),
        Kernel("small_blur", np.full((3, 3), 1.0 / 9.0)),
        Kernel("large_blur", np.full((5, 5), 1.0 / 25.0)),
        Kernel("sharpen", [[0, -1, 0], [-1, 5, -1], [0, -1, 0]]),
    ))


def _as_plane_values(plane):
    if isinstance(plane, FilteredPlane):
        return plane.values
    if isinstance(plane, RasterImage):
        if plane.channels != 1:
            raise FilterError(f"convolve2d needs a 1-channel image, got {plane.channels} channels")
        return plane.pixels[:, :, 0]
    values = np.asarray(plane, dtype=np.float64)
    if values.ndim != 2 or values.size == 0:
        raise FilterError(f"plane must be a non-empty 2-D array, got shape {values.shape}")
    return values


def convolve2d(plane, kernel):
    """
    Correlate a plane with a kernel, replicate border, same-size signed output.

    Args:
        plane: FilteredPlane, 1-channel RasterImage or 2-D array
        kernel: Kernel (odd dimensions)

    Returns:
        FilteredPlane of the input's size
    """
    if not isinstance(kernel, Kernel):
        kernel = Kernel("custom", kernel)
    values = _as_plane_values(plane)
    return FilteredPlane(ndimage.correlate(values, kernel.coeffs, mode="nearest"))


def apply_bank(img, bank=None):
    """
    Grayscale plane followed by one response plane per bank kernel.

    Args:
        img: RasterImage (1 or 3 channels)
        bank: FilterBank (defaults to default_bank())

    Returns:
        List of 1 + len(bank) FilteredPlane
    """
    bank = bank or default_bank()
    gray = to_grayscale(img).channel_plane(0)
    return [gray] + [convolve2d(gray, kernel) for kernel in bank]
