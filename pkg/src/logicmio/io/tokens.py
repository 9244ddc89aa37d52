"""Whitespace-delimited numeric token streams (ASCII, '.' decimal separator)."""

from __future__ import annotations

import re

from .errors import ParseError

_INT = re.compile(r"[+-]?\d+\Z")
_REAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")


class TokenStream:
    def __init__(self, text: str, source: str = None):
        if not isinstance(text, str):
            raise ParseError("input must be text", source=source)
        try:
            text.encode("ascii")
        except UnicodeEncodeError as exc:
            line = text.count("\n", 0, exc.start) + 1
            raise ParseError("non-ASCII character in numeric file", source=source, line=line) from None
        self.source = source
        self.tokens = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            for m in re.finditer(r"\S+", line):
                self.tokens.append((m.group(), lineno, m.start() + 1))
        self.pos = 0

    def __len__(self):
        return len(self.tokens)

    @property
    def remaining(self) -> int:
        return len(self.tokens) - self.pos

    def _next(self, what):
        if self.pos >= len(self.tokens):
            last_line = self.tokens[-1][1] if self.tokens else None
            raise ParseError(f"unexpected end of input while reading {what}", source=self.source, line=last_line, token=self.pos + 1)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def integer(self, what="an integer") -> int:
        text, line, col = self._next(what)
        if not _INT.match(text):
            raise ParseError(f"expected {what}, found {text!r}", source=self.source, line=line, column=col, token=self.pos)
        return int(text)

    def real(self, what="a number") -> float:
        text, line, col = self._next(what)
        if not _REAL.match(text):
            raise ParseError(f"expected {what}, found {text!r}", source=self.source, line=line, column=col, token=self.pos)
        return float(text)

    def here(self):
        """(line, column) of the next token, or of the end of input."""
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1:]
        return (self.tokens[-1][1] if self.tokens else None, None)

    def expect_end(self):
        if self.pos < len(self.tokens):
            text, line, col = self.tokens[self.pos]
            raise ParseError(f"{self.remaining} unexpected trailing token(s), starting with {text!r}", source=self.source, line=line, column=col, token=self.pos + 1)


def format_number(v: float) -> str:
    """Shortest round-tripping text; integral values without a decimal point."""
    v = float(v)
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)
