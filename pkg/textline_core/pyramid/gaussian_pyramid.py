"""
Gaussian (linear) image pyramid: base image plus smoothed-and-halved reductions.
"""
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..raster.raster_image import RasterImage
from ..utils.errors import PyramidError
from ..utils.logger import get_logger

logger = get_logger(__name__)

MAX_PYRAMID_LEVELS = 6
BINOMIAL_5 = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


@dataclass(frozen=True, eq=False)
class GaussianPyramid:
    """Ordered pyramid levels, index 0 = base (largest)."""

    levels: Tuple[RasterImage, ...]

    def __post_init__(self):
        levels = tuple(self.levels)
        if not 1 <= len(levels) <= MAX_PYRAMID_LEVELS:
            raise PyramidError(f"pyramid must hold 1..{MAX_PYRAMID_LEVELS} levels, got {len(levels)}")
        for k in range(len(levels) - 1):
            upper, lower = levels[k], levels[k + 1]
            if (lower.width, lower.height) != (math.ceil(upper.width / 2), math.ceil(upper.height / 2)):
                raise PyramidError(
                    f"level {k + 1} is {lower.width}x{lower.height}, "
                    f"expected ceil-half of {upper.width}x{upper.height}"
                )
        object.__setattr__(self, "levels", levels)

    @property
    def level_count(self):
        return len(self.levels)

    @property
    def base(self):
        return self.levels[0]

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, index):
        return self.levels[index]

    def __iter__(self):
        return iter(self.levels)


def reduce(img):
    """
    Smooth with the separable binomial kernel [1,4,6,4,1]/16 and keep even rows/columns.

    Args:
        img: RasterImage at least 2x2

    Returns:
        RasterImage of size ceil(width/2) x ceil(height/2)
    """
    if img.width < 2 or img.height < 2:
        raise PyramidError(f"cannot reduce a {img.width}x{img.height} image (minimum 2x2)")
    smoothed = ndimage.correlate1d(img.pixels, BINOMIAL_5, axis=1, mode="nearest")
    smoothed = ndimage.correlate1d(smoothed, BINOMIAL_5, axis=0, mode="nearest")
    # Convex combination of in-range values; clip only removes rounding excursions.
    return RasterImage(np.clip(smoothed[::2, ::2, :], 0.0, 1.0))


def build_pyramid(img, max_levels=MAX_PYRAMID_LEVELS, min_height=30):
    """
    Build a Gaussian pyramid, stopping early at the level or height limit.

    Args:
        img: Base RasterImage (level 0)
        max_levels: Maximum number of levels including the base, 1..6
        min_height: Height floor; a reduction is kept only if its height >= min_height

    Returns:
        GaussianPyramid with 1..max_levels levels
    """
    if not 1 <= max_levels <= MAX_PYRAMID_LEVELS:
        raise PyramidError(f"max_levels must be in [1, {MAX_PYRAMID_LEVELS}], got {max_levels}")
    if min_height < 2:
        raise PyramidError(f"min_height must be >= 2, got {min_height}")

    levels = [img]
    current = img
    while len(levels) < max_levels:
        if current.width < 2 or current.height < 2:
            break
        if math.ceil(current.height / 2) < min_height:
            break
        current = reduce(current)
        levels.append(current)

    logger.debug(
        f"Pyramid built: {len(levels)} levels, heights {[level.height for level in levels]}"
    )
    return GaussianPyramid(tuple(levels))
