"""Sample manifests, corpus splits and the synthetic line generator."""
from .manifest import (
    Corpus,
    Sample,
    build_alphabet,
    check_images,
    load_corpus,
    parse_manifest,
    split_corpus,
    write_manifest,
)
from .synth import synth_generate

__all__ = [
    "Corpus",
    "Sample",
    "build_alphabet",
    "check_images",
    "load_corpus",
    "parse_manifest",
    "split_corpus",
    "synth_generate",
    "write_manifest",
]
