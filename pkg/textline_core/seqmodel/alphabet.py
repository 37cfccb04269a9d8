from dataclasses import dataclass
from typing import Tuple

from ..utils.errors import SequenceModelError

BLANK_INDEX = 0


@dataclass(frozen=True)
class Alphabet:
    """
    Label symbols with the CTC blank reserved at index 0.

    Symbol ``symbols[i]`` has label index ``i + 1``.
    """

    symbols: Tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        for symbol in symbols:
            if not isinstance(symbol, str) or len(symbol) != 1:
                raise SequenceModelError(f"alphabet symbols must be single codepoints, got {symbol!r}")
        if len(set(symbols)) != len(symbols):
            raise SequenceModelError("alphabet symbols must be unique")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i + 1 for i, s in enumerate(symbols)})

    @classmethod
    def from_codepoints(cls, codepoints):
        return cls(tuple(chr(c) for c in codepoints))

    @property
    def codepoints(self):
        return [ord(s) for s in self.symbols]

    @property
    def size(self):
        """Output classes including the blank."""
        return len(self.symbols) + 1

    def __len__(self):
        return self.size

    def __contains__(self, symbol):
        return symbol in self._index

    def encode(self, text):
        """Transcription -> label indices (1-based; 0 is the blank)."""
        try:
            return [self._index[ch] for ch in text]
        except KeyError as e:
            raise SequenceModelError(f"symbol {e.args[0]!r} (U+{ord(e.args[0]):04X}) not in alphabet") from e

    def decode(self, indices):
        """Label indices -> transcription; blanks are skipped."""
        out = []
        for index in indices:
            if index == BLANK_INDEX:
                continue
            if not 0 < index < self.size:
                raise SequenceModelError(f"label index {index} outside alphabet of size {self.size}")
            out.append(self.symbols[index - 1])
        return "".join(out)
