"""Command-line surface and experiment loops."""
from .dispatcher import dispatch

__all__ = ["dispatch"]
