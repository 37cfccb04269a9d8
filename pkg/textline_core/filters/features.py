"""
Column-frame serialization of filtered pyramid levels.

Frames run right-to-left over the x-height-normalized image; each frame is the
plane-major concatenation of one column from every filtered plane.
"""
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..pyramid.gaussian_pyramid import build_pyramid
from ..raster.raster_image import normalize_height, resample_plane, scaled_width
from ..utils.errors import FilterError
from .filter_bank import apply_bank, default_bank

FSEQ_MAGIC = b"FSEQ1"
VARIANCE_FLOOR = 1e-8
FEATURE_MODES = ("per_level", "whole")


@dataclass(frozen=True, eq=False)
class FeatureSequence:
    """
    T x D frame matrix plus the layout it was serialized from.

    ``level`` is the pyramid level index, or ``"whole"`` for the
    concatenation of every level. ``channels`` is the number of planes per
    column, so D = channels * frame_height.
    """

    frames: np.ndarray
    level: Union[int, str, None] = None
    channels: Optional[int] = None
    frame_height: Optional[int] = None

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1 or frames.shape[1] < 1:
            raise FilterError(f"frames must be a non-empty T x D matrix, got shape {frames.shape}")
        if not np.all(np.isfinite(frames)):
            raise FilterError("frames contain non-finite values")
        if self.channels is not None and self.frame_height is not None:
            if self.channels * self.frame_height != frames.shape[1]:
                raise FilterError(
                    f"frame_dim {frames.shape[1]} != channels {self.channels} * frame_height {self.frame_height}"
                )
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self):
        return self.frames.shape[0]

    @property
    def frame_dim(self):
        return self.frames.shape[1]

    def volume(self):
        """
        The (frame_height, T, channels) volume the frames were serialized from.

        Column order follows the frames (right-to-left in the image).
        """
        if self.channels is None or self.frame_height is None:
            raise FilterError("sequence carries no channel/height layout")
        return self.frames.reshape(self.frame_count, self.channels, self.frame_height).transpose(2, 0, 1)


def standardize(frames):
    """Zero mean, unit variance per feature dimension over the sequence (variance floor 1e-8)."""
    mean = frames.mean(axis=0)
    var = np.maximum(frames.var(axis=0), VARIANCE_FLOOR)
    return (frames - mean) / np.sqrt(var)


def _serialize(planes):
    """(P, H, W) plane stack -> (W, P*H) frames, rightmost column first."""
    stack = np.asarray(planes)[:, :, ::-1]
    return stack.transpose(2, 0, 1).reshape(stack.shape[2], -1)


def _filtered_planes(level, bank, xheight, out_w):
    return [resample_plane(plane.values, out_w, xheight) for plane in apply_bank(level, bank)]


def featurize_level(level, bank=None, xheight=60, level_index=None):
    """
    Filter one pyramid level and serialize it into right-to-left column frames.

    Args:
        level: RasterImage
        bank: FilterBank (defaults to default_bank())
        xheight: Frame height in pixels
        level_index: Pyramid level recorded in the sequence metadata

    Returns:
        FeatureSequence with T = normalized width, D = 7 * xheight
    """
    if xheight < 1:
        raise FilterError(f"xheight must be >= 1, got {xheight}")
    bank = bank or default_bank()
    out_w = scaled_width(level.width, level.height, xheight)
    planes = _filtered_planes(level, bank, xheight, out_w)
    return FeatureSequence(
        frames=standardize(_serialize(planes)),
        level=level_index,
        channels=len(planes),
        frame_height=xheight,
    )


def featurize_pyramid(pyr, bank=None, xheight=60, mode="per_level"):
    """
    Featurize every level separately, or all levels on the base grid at once.

    Args:
        pyr: GaussianPyramid
        bank: FilterBank (defaults to default_bank())
        xheight: Frame height in pixels
        mode: "per_level" (one sequence per level) or "whole" (one sequence)

    Returns:
        List of FeatureSequence
    """
    if len(pyr) < 1:
        raise FilterError("pyramid is empty")
    if mode not in FEATURE_MODES:
        raise FilterError(f"mode must be one of {FEATURE_MODES}, got {mode!r}")
    bank = bank or default_bank()

    if mode == "per_level":
        return [featurize_level(level, bank, xheight, level_index=k) for k, level in enumerate(pyr)]

    base = pyr.levels[0]
    out_w = scaled_width(base.width, base.height, xheight)
    planes = []
    for level in pyr:
        planes.extend(_filtered_planes(level, bank, xheight, out_w))
    sequence = FeatureSequence(
        frames=standardize(_serialize(planes)),
        level="whole",
        channels=len(planes),
        frame_height=xheight,
    )
    return [sequence]


def write_feature_sequence(seq, path):
    """
    Write the FSEQ1 container: magic, little-endian u32 T and D, then T*D float64.

    Args:
        seq: FeatureSequence
        path: Output file path

    Returns:
        Path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(FSEQ_MAGIC)
        f.write(struct.pack("<II", seq.frame_count, seq.frame_dim))
        f.write(seq.frames.astype("<f8").tobytes())
    return path


def read_feature_sequence(path):
    """Read an FSEQ1 container (layout metadata is not stored in the file)."""
    raw = Path(path).read_bytes()
    header_size = len(FSEQ_MAGIC) + 8
    if raw[:len(FSEQ_MAGIC)] != FSEQ_MAGIC or len(raw) < header_size:
        raise FilterError(f"{path}: not an FSEQ1 file")
    frame_count, frame_dim = struct.unpack("<II", raw[len(FSEQ_MAGIC):header_size])
    body = raw[header_size:]
    if len(body) != frame_count * frame_dim * 8:
        raise FilterError(f"{path}: expected {frame_count}x{frame_dim} values, got {len(body) // 8}")
    frames = np.frombuffer(body, dtype="<f8").reshape(frame_count, frame_dim)
    return FeatureSequence(frames.astype(np.float64))


def featurize_image(img, xheight=60, max_levels=6, min_height=30, base_height=None,
                    mode="per_level", bank=None):
    """
    Full front end for one line image: optional standard-height rescale,
    pyramid construction and featurization.

    Args:
        img: RasterImage
        xheight: Frame height in pixels
        max_levels: Pyramid level limit
        min_height: Pyramid height floor
        base_height: Height the image is normalized to before the pyramid (None keeps it)
        mode: "per_level" or "whole"
        bank: FilterBank (defaults to default_bank())

    Returns:
        List of FeatureSequence (one per level, or one for "whole")
    """
    if base_height is not None:
        img = normalize_height(img, base_height)
    pyr = build_pyramid(img, max_levels=max_levels, min_height=min_height)
    return featurize_pyramid(pyr, bank, xheight, mode)
