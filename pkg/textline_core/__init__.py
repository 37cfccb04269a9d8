"""Pyramid-feature text-line recognition toolkit."""

__version__ = "0.1.0"
