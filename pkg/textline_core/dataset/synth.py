"""
Seeded synthetic text-line corpus.

Glyphs are random connected strokes drawn on a 32x32 cell and mapped to
private-use codepoints (U+E000 + i). A line is composed right-to-left: the
first symbol of the transcription is placed at the right edge.
"""
from pathlib import Path

import numpy as np
import yaml
from PIL import Image, ImageDraw

from ..raster.raster_image import RasterImage, save_image
from ..utils.errors import DatasetError
from ..utils.logger import get_logger
from .manifest import Sample, write_manifest

logger = get_logger(__name__)

CELL_SIZE = 32
CELL_MARGIN = 4
STROKE_WIDTH = 3
STROKE_POINTS = (3, 6)
MAX_JITTER = 2
MAX_SPACING = 4
LINE_PADDING = 6
BACKGROUND = 0.75
INK = 0.05
CODEPOINT_BASE = 0xE000
GLYPH_COUNT_RANGE = (2, 40)
MAX_GLYPH_ATTEMPTS = 100

MANIFEST_NAME = "MANIFEST.tsv"
META_NAME = "meta.txt"
LINES_DIR = "lines"


def _stroke_glyph(rng):
    """One polyline of 3..6 random points, rasterized as ink coverage in [0, 1]."""
    cell = Image.new("L", (CELL_SIZE, CELL_SIZE), 0)
    point_count = int(rng.integers(STROKE_POINTS[0], STROKE_POINTS[1] + 1))
    lo, hi = CELL_MARGIN, CELL_SIZE - CELL_MARGIN
    points = [tuple(int(v) for v in rng.integers(lo, hi, size=2)) for _ in range(point_count)]
    ImageDraw.Draw(cell).line(points, fill=255, width=STROKE_WIDTH, joint="curve")
    return np.asarray(cell, dtype=np.float64) / 255.0


def make_glyphs(glyph_count, rng):
    """
    Distinct glyph bitmaps.

    Args:
        glyph_count: Number of glyphs, in [2, 40]
        rng: numpy Generator

    Returns:
        List of (32, 32) ink-coverage arrays
    """
    lo, hi = GLYPH_COUNT_RANGE
    if not lo <= glyph_count <= hi:
        raise DatasetError(f"glyph_count must be in [{lo}, {hi}], got {glyph_count}")
    glyphs = []
    attempts = 0
    while len(glyphs) < glyph_count:
        attempts += 1
        if attempts > glyph_count * MAX_GLYPH_ATTEMPTS:
            raise DatasetError(f"could not draw {glyph_count} distinct glyphs")
        glyph = _stroke_glyph(rng)
        if any(np.array_equal(glyph, other) for other in glyphs):
            continue
        glyphs.append(glyph)
    return glyphs


def glyph_symbol(index):
    return chr(CODEPOINT_BASE + index)


def compose_line(glyphs, indices, rng, noise_level=0.0):
    """
    Render glyph indices as one gray line image, right-to-left.

    Each glyph gets a vertical jitter in [-2, 2] pixels and each gap a spacing
    in [0, 4] pixels; Gaussian noise of std ``noise_level`` is added and the
    result clamped to [0, 1].

    Returns:
        (H, W) float array
    """
    if not indices:
        raise DatasetError("cannot compose an empty line")
    if noise_level < 0:
        raise DatasetError(f"noise_level must be >= 0, got {noise_level}")
    offsets = [int(rng.integers(-MAX_JITTER, MAX_JITTER + 1)) for _ in indices]
    gaps = [int(rng.integers(0, MAX_SPACING + 1)) for _ in indices[1:]]

    height = CELL_SIZE + 2 * LINE_PADDING
    width = len(indices) * CELL_SIZE + sum(gaps) + 2 * LINE_PADDING
    ink = np.zeros((height, width), dtype=np.float64)

    right = width - LINE_PADDING
    for k, index in enumerate(indices):
        left = right - CELL_SIZE
        top = LINE_PADDING + offsets[k]
        window = ink[top:top + CELL_SIZE, left:right]
        np.maximum(window, glyphs[index], out=window)
        if k < len(gaps):
            right = left - gaps[k]

    pixels = BACKGROUND + (INK - BACKGROUND) * ink
    if noise_level > 0:
        pixels = pixels + rng.normal(0.0, noise_level, size=pixels.shape)
    return np.clip(pixels, 0.0, 1.0)


def synth_generate(glyph_count, line_count, line_length_range=(3, 8), noise_level=0.0,
                   seed=0, out_dir="synth"):
    """
    Generate a synthetic corpus under out_dir.

    Writes ``lines/line_NNNNN.pgm``, ``MANIFEST.tsv`` and ``meta.txt`` (the
    generation arguments). The output is a pure function of the arguments.

    Args:
        glyph_count: Distinct glyphs, in [2, 40]
        line_count: Lines to generate (>= 1)
        line_length_range: Inclusive (min, max) symbols per line
        noise_level: Std of additive Gaussian pixel noise
        seed: Generator seed
        out_dir: Output directory

    Returns:
        Path of the manifest
    """
    if line_count < 1:
        raise DatasetError(f"line_count must be >= 1, got {line_count}")
    min_len, max_len = (int(v) for v in line_length_range)
    if not 1 <= min_len <= max_len:
        raise DatasetError(f"line_length_range must satisfy 1 <= min <= max, got {tuple(line_length_range)}")
    if noise_level < 0:
        raise DatasetError(f"noise_level must be >= 0, got {noise_level}")

    rng = np.random.default_rng(seed)
    glyphs = make_glyphs(glyph_count, rng)

    out_dir = Path(out_dir)
    manifest_path = out_dir / MANIFEST_NAME
    samples = []
    try:
        (out_dir / LINES_DIR).mkdir(parents=True, exist_ok=True)
        for n in range(line_count):
            length = int(rng.integers(min_len, max_len + 1))
            indices = [int(i) for i in rng.integers(0, glyph_count, size=length)]
            pixels = compose_line(glyphs, indices, rng, noise_level)
            image_path = out_dir / LINES_DIR / f"line_{n:05d}.pgm"
            save_image(RasterImage(pixels), image_path)
            samples.append(Sample(image_path, "".join(glyph_symbol(i) for i in indices)))

        write_manifest(samples, manifest_path)
        meta = {
            "glyph_count": int(glyph_count),
            "line_count": int(line_count),
            "line_length_range": [min_len, max_len],
            "noise_level": float(noise_level),
            "seed": int(seed),
        }
        with open(out_dir / META_NAME, "w", encoding="utf-8") as f:
            yaml.safe_dump(meta, f, sort_keys=True, default_flow_style=False)
    except OSError as e:
        raise DatasetError(f"{out_dir}: cannot write synthetic corpus ({e})") from e

    logger.info(f"Synthetic corpus: {line_count} lines over {glyph_count} glyphs written to {out_dir}")
    return manifest_path
