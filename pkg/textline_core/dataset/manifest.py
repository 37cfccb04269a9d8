"""
Sample manifests (TSV), alphabet construction and train/validation/test splits.

Manifest format, UTF-8, one record per line:

    <image-path><TAB><transcription>

Lines starting with ``#`` are comments and blank lines are skipped. Image
paths are resolved relative to the manifest's directory.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from ..raster.raster_image import load_image
from ..seqmodel.alphabet import Alphabet
from ..utils.errors import DatasetError, ManifestError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_SPLIT_RATIOS = (0.8, 0.1, 0.1)
SPLIT_NAMES = ("train", "validation", "test")
RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Sample:
    image_path: Path
    transcription: str

    def __post_init__(self):
        if not self.transcription:
            raise DatasetError(f"{self.image_path}: empty transcription")
        object.__setattr__(self, "image_path", Path(self.image_path))

    def load(self):
        """Decode the sample's image."""
        if not self.image_path.is_file():
            raise DatasetError(f"{self.image_path}: image file not found")
        return load_image(self.image_path)


@dataclass(frozen=True)
class Corpus:
    """Samples, their alphabet and a disjoint covering split into index lists."""

    samples: Tuple[Sample, ...]
    alphabet: Alphabet
    train: Tuple[int, ...] = field(default_factory=tuple)
    validation: Tuple[int, ...] = field(default_factory=tuple)
    test: Tuple[int, ...] = field(default_factory=tuple)

    def subset(self, name):
        """Samples of one split ("train", "validation" or "test")."""
        if name not in SPLIT_NAMES:
            raise DatasetError(f"unknown split {name!r}, expected one of {SPLIT_NAMES}")
        return [self.samples[i] for i in getattr(self, name)]


def parse_manifest(path):
    """
    Parse a TSV manifest.

    Args:
        path: Manifest file path

    Returns:
        List of Sample in file order
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise DatasetError(f"{path}: manifest is not UTF-8 ({e})") from e
    except OSError as e:
        raise DatasetError(f"{path}: unreadable manifest ({e})") from e

    base_dir = path.parent
    samples = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ManifestError(f"{path}: expected <image-path><TAB><transcription>", line_number)
        image, transcription = line.split("\t", 1)
        if not image:
            raise ManifestError(f"{path}: empty image path", line_number)
        if not transcription:
            raise ManifestError(f"{path}: empty transcription", line_number)
        samples.append(Sample(base_dir / image, transcription))

    logger.debug(f"Parsed {len(samples)} samples from {path}")
    return samples


def write_manifest(samples, path):
    """Write samples as a TSV manifest, image paths relative to the manifest's directory."""
    path = Path(path)
    lines = []
    for sample in samples:
        try:
            image = sample.image_path.relative_to(path.parent)
        except ValueError:
            image = sample.image_path
        lines.append(f"{image.as_posix()}\t{sample.transcription}\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.writelines(lines)
    return path


def check_images(samples):
    """Raise DatasetError for the first sample whose image file is missing."""
    for index, sample in enumerate(samples):
        if not sample.image_path.is_file():
            raise DatasetError(f"sample {index}: image file not found: {sample.image_path}")


def build_alphabet(samples: Sequence[Sample]) -> Alphabet:
    """Sorted unique codepoints over all transcriptions (blank is index 0)."""
    if not samples:
        raise DatasetError("cannot build an alphabet from zero samples")
    symbols = sorted({ch for sample in samples for ch in sample.transcription})
    return Alphabet(tuple(symbols))


def split_counts(n, ratios):
    """
    Per-split sample counts: floor(n * r), remainder to the largest fractional
    parts (ties to the earlier split).
    """
    exact = [n * r for r in ratios]
    counts = [int(math.floor(x + RATIO_TOLERANCE)) for x in exact]
    fractions = [x - c for x, c in zip(exact, counts)]
    for i in sorted(range(len(ratios)), key=lambda i: (-fractions[i], i))[:n - sum(counts)]:
        counts[i] += 1
    return counts


def split_corpus(samples, ratios=DEFAULT_SPLIT_RATIOS, seed=0) -> Corpus:
    """
    Seeded shuffle, then a contiguous train/validation/test partition.

    Args:
        samples: List of Sample
        ratios: (train, validation, test) ratios, positive and summing to 1
        seed: Shuffle seed

    Returns:
        Corpus with the alphabet of all samples
    """
    samples = tuple(samples)
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != len(SPLIT_NAMES):
        raise DatasetError(f"expected {len(SPLIT_NAMES)} split ratios, got {len(ratios)}")
    if any(r <= 0 for r in ratios):
        raise DatasetError(f"split ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise DatasetError(f"split ratios must sum to 1, got {ratios} (sum {sum(ratios)})")

    n = len(samples)
    counts = split_counts(n, ratios)
    if n >= len(SPLIT_NAMES):
        for name, count in zip(SPLIT_NAMES, counts):
            if count == 0:
                raise DatasetError(f"{name} split of {n} samples with ratios {ratios} would be empty")

    order = [int(i) for i in np.random.default_rng(seed).permutation(n)]
    bounds = np.cumsum([0] + counts)
    parts = [tuple(order[bounds[k]:bounds[k + 1]]) for k in range(len(SPLIT_NAMES))]
    corpus = Corpus(samples, build_alphabet(samples), *parts)
    logger.info(
        f"Corpus split (seed {seed}): {len(corpus.train)} train, "
        f"{len(corpus.validation)} validation, {len(corpus.test)} test; "
        f"alphabet of {len(corpus.alphabet.symbols)} symbols"
    )
    return corpus


def load_corpus(manifest_path, ratios=DEFAULT_SPLIT_RATIOS, seed=0) -> Corpus:
    """Parse a manifest, check every image exists and split it."""
    samples = parse_manifest(manifest_path)
    if not samples:
        raise DatasetError(f"{manifest_path}: manifest lists no samples")
    check_images(samples)
    return split_corpus(samples, ratios, seed)
