"""
Pyramid-feature text-line recognizer.
Builds Gaussian pyramids of line images, filters and serializes them into
right-to-left frames, and trains/evaluates recurrent CTC recognizers.
"""
import sys

from textline_core.cli.dispatcher import dispatch


def main():
    """Main entry point."""
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
