"""
Raster images: decoding/encoding, grayscale conversion and bilinear resampling.

Intensities are float64 in [0, 1]; 8-bit values exist only at file boundaries.
"""
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from ..utils.errors import RasterFormatError

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_PNG_GRAY = 0
_PNG_RGB = 2


def _freeze(array):
    array = np.ascontiguousarray(array, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RasterImage:
    """
    Immutable 2-D pixel grid with 1 (gray) or 3 (RGB) channels.

    ``pixels`` has shape (height, width, channels); ``data`` is the same values
    flattened row-major.
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim == 2:
            pixels = pixels[:, :, None]
        if pixels.ndim != 3 or pixels.shape[2] not in (1, 3):
            raise RasterFormatError(f"pixels must be (height, width, 1|3), got shape {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise RasterFormatError(f"image dimensions must be >= 1, got {pixels.shape[1]}x{pixels.shape[0]}")
        if not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0:
            raise RasterFormatError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", _freeze(pixels))

    @classmethod
    def from_data(cls, width, height, channels, data):
        """Build an image from a flat row-major intensity list."""
        data = np.asarray(data, dtype=np.float64)
        if data.size != width * height * channels:
            raise RasterFormatError(
                f"data length {data.size} != {width}*{height}*{channels}"
            )
        return cls(data.reshape(height, width, channels))

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def channels(self):
        return self.pixels.shape[2]

    @property
    def data(self):
        return self.pixels.reshape(-1)

    def channel_plane(self, index):
        """One channel as a FilteredPlane."""
        return FilteredPlane(self.pixels[:, :, index])


@dataclass(frozen=True, eq=False)
class FilteredPlane:
    """Single-channel plane of unclamped signed values (filter responses)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise RasterFormatError(f"plane must be a non-empty 2-D array, got shape {values.shape}")
        object.__setattr__(self, "values", _freeze(values))

    @property
    def width(self):
        return self.values.shape[1]

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def data(self):
        return self.values.reshape(-1)


def _check_png_header(header, path):
    """Reject PNG variants other than 8-bit non-interlaced gray or RGB."""
    if len(header) < 29 or header[12:16] != b"IHDR":
        raise RasterFormatError(f"{path}: truncated PNG header")
    width, height, bit_depth, color_type, _, _, interlace = struct.unpack(">IIBBBBB", header[16:29])
    if width == 0 or height == 0:
        raise RasterFormatError(f"{path}: dimension fields must be > 0")
    if bit_depth != 8:
        raise RasterFormatError(f"{path}: unsupported PNG bit depth {bit_depth}")
    if color_type not in (_PNG_GRAY, _PNG_RGB):
        raise RasterFormatError(f"{path}: unsupported PNG color type {color_type} (gray or RGB only)")
    if interlace != 0:
        raise RasterFormatError(f"{path}: interlaced PNG is not supported")


def _check_pnm_header(raw, path):
    """Validate the P5/P6 width/height/maxval fields, skipping comments."""
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(raw):
        char = raw[pos:pos + 1]
        if char == b"#":
            end = raw.find(b"\n", pos)
            pos = len(raw) if end < 0 else end + 1
        elif char.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(raw) and not raw[pos:pos + 1].isspace():
                pos += 1
            tokens.append(raw[start:pos])
    if len(tokens) < 3:
        raise RasterFormatError(f"{path}: truncated PNM header")
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as e:
        raise RasterFormatError(f"{path}: non-numeric PNM header field") from e
    if width <= 0 or height <= 0:
        raise RasterFormatError(f"{path}: dimension fields must be > 0, got {width}x{height}")
    if not 0 < maxval <= 255:
        raise RasterFormatError(f"{path}: unsupported max value {maxval} (8-bit only)")


def load_image(path):
    """
    Load a binary PGM (P5), binary PPM (P6) or 8-bit gray/RGB PNG.

    Args:
        path: Image file path

    Returns:
        RasterImage with intensities = stored 8-bit value / 255
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise RasterFormatError(f"{path}: unreadable file ({e})") from e

    if raw[:2] in (b"P5", b"P6"):
        _check_pnm_header(raw[:1024], path)
    elif raw[:8] == PNG_SIGNATURE:
        _check_png_header(raw[:29], path)
    else:
        raise RasterFormatError(f"{path}: unsupported format (binary PGM/PPM or PNG only)")

    try:
        with Image.open(path) as im:
            im.load()
            if im.mode not in ("L", "RGB"):
                raise RasterFormatError(f"{path}: unsupported pixel mode {im.mode}")
            values = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as e:
        if isinstance(e, RasterFormatError):
            raise
        raise RasterFormatError(f"{path}: cannot decode image ({e})") from e

    return RasterImage(values.astype(np.float64) / 255.0)


def save_image(img, path):
    """
    Write an image as binary PGM (1 channel) or PPM (3 channels), max value 255.

    Args:
        img: RasterImage
        path: Output file path

    Returns:
        Path written
    """
    path = Path(path)
    quantized = np.rint(img.pixels * 255.0).astype(np.uint8)
    if img.channels == 1:
        quantized = quantized[:, :, 0]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(quantized).save(path, format="PPM")
    except OSError as e:
        raise RasterFormatError(f"{path}: cannot write image ({e})") from e
    return path


def to_grayscale(img):
    """Convert to one channel with BT.601 luma; gray input is returned unchanged."""
    if img.channels == 1:
        return img
    gray = img.pixels @ LUMA_WEIGHTS
    return RasterImage(np.clip(gray, 0.0, 1.0))


def sample_coordinates(in_size, out_size):
    """Half-pixel-center source coordinates for each output index, clamped to the source grid."""
    scale = in_size / out_size
    coords = (np.arange(out_size, dtype=np.float64) + 0.5) * scale - 0.5
    return np.clip(coords, 0.0, in_size - 1)


def resample_plane(values, out_w, out_h):
    """
    Bilinear resampling of a 2-D array without clamping the output range.

    Args:
        values: 2-D float array (height, width)
        out_w: Output width
        out_h: Output height

    Returns:
        2-D float64 array (out_h, out_w)
    """
    if out_w < 1 or out_h < 1:
        raise RasterFormatError(f"output size must be >= 1, got {out_w}x{out_h}")
    values = np.asarray(values, dtype=np.float64)
    in_h, in_w = values.shape
    if (in_h, in_w) == (out_h, out_w):
        return values.copy()
    rows = sample_coordinates(in_h, out_h)
    cols = sample_coordinates(in_w, out_w)
    grid_r, grid_c = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(values, [grid_r, grid_c], order=1, mode="nearest")


def resize_bilinear(img, out_w, out_h):
    """
    Bilinear resize with half-pixel-center mapping; channels preserved.

    Args:
        img: RasterImage
        out_w: Output width (>= 1)
        out_h: Output height (>= 1)

    Returns:
        RasterImage of size out_w x out_h, intensities clamped to [0, 1]
    """
    planes = [resample_plane(img.pixels[:, :, c], out_w, out_h) for c in range(img.channels)]
    return RasterImage(np.clip(np.stack(planes, axis=2), 0.0, 1.0))


def scaled_width(width, height, target_h):
    """Aspect-preserving width for a target height: max(1, round-half-up(width * target_h / height))."""
    return max(1, int(math.floor(width * target_h / height + 0.5)))


def normalize_height(img, target_h):
    """
    Rescale to a fixed height, preserving aspect ratio.

    Args:
        img: RasterImage
        target_h: Output height (>= 1)

    Returns:
        RasterImage of height target_h
    """
    if target_h < 1:
        raise RasterFormatError(f"target height must be >= 1, got {target_h}")
    return resize_bilinear(img, scaled_width(img.width, img.height, target_h), target_h)
