"""Filter bank, convolution and feature-sequence assembly."""
from .features import (
    FeatureSequence,
    featurize_level,
    featurize_image,
    featurize_pyramid,
    read_feature_sequence,
    write_feature_sequence,
)
from .filter_bank import BANK_ORDER, FilterBank, Kernel, apply_bank, convolve2d, default_bank

__all__ = [
    "BANK_ORDER",
    "FeatureSequence",
    "FilterBank",
    "Kernel",
    "apply_bank",
    "convolve2d",
    "default_bank",
    "featurize_image",
    "featurize_level",
    "featurize_pyramid",
    "read_feature_sequence",
    "write_feature_sequence",
]
