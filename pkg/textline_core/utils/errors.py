"""
Exception hierarchy for the toolkit.

Every error derives from TextlineError; the data-side errors also derive from
ValueError so plain ``except ValueError`` callers keep working.
"""


class TextlineError(Exception):
    """Base class for all toolkit errors."""


class RasterFormatError(TextlineError, ValueError):
    """Unreadable, unsupported or malformed image data."""


class PyramidError(TextlineError, ValueError):
    """Invalid pyramid construction request."""


class FilterError(TextlineError, ValueError):
    """Invalid kernel or convolution input."""


class SequenceModelError(TextlineError, ValueError):
    """Model shape mismatch, bad model file or invalid training input."""


class CTCError(TextlineError, ValueError):
    """Label incompatible with the posterior matrix."""


class DatasetError(TextlineError, ValueError):
    """Corpus construction or generation failure."""


class ManifestError(DatasetError):
    """Malformed manifest line."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EvaluationError(TextlineError, ValueError):
    """Metric or report precondition failure."""


class ConfigError(TextlineError, ValueError):
    """Invalid run configuration."""


class UsageError(TextlineError):
    """Command-line misuse (unknown subcommand, flag or missing argument)."""
