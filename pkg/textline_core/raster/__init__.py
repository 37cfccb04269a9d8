"""Image representation, file IO and resampling."""
from .raster_image import (
    FilteredPlane,
    RasterImage,
    load_image,
    normalize_height,
    resample_plane,
    resize_bilinear,
    save_image,
    scaled_width,
    to_grayscale,
)

__all__ = [
    "FilteredPlane",
    "RasterImage",
    "load_image",
    "normalize_height",
    "resample_plane",
    "resize_bilinear",
    "save_image",
    "scaled_width",
    "to_grayscale",
]
