"""Structured errors for instance input."""

from __future__ import annotations

from typing import Optional


class InstanceFormatError(ValueError):
    """Base class; carries where in the input the problem was found."""

    kind = "format"

    def __init__(self, message: str, *, source: Optional[str] = None, line: Optional[int] = None, column: Optional[int] = None, field: Optional[str] = None, token: Optional[int] = None):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        self.field = field
        self.token = token
        super().__init__(str(self))

    def location(self) -> str:
        parts = []
        if self.source:
            parts.append(self.source)
        if self.line is not None:
            parts.append(f"line {self.line}" + (f", column {self.column}" if self.column is not None else ""))
        if self.token is not None:
            parts.append(f"token {self.token}")
        if self.field:
            parts.append(f"field '{self.field}'")
        return ": ".join(parts)

    def __str__(self):
        loc = self.location()
        return f"{loc}: {self.message}" if loc else self.message

    def to_dict(self) -> dict:
        return {
            "error": self.kind,
            "message": self.message,
            "source": self.source,
            "line": self.line,
            "column": self.column,
            "field": self.field,
            "token": self.token,
        }


class ParseError(InstanceFormatError):
    """The input is not well formed (syntax, token counts, types, unknown fields)."""

    kind = "parse"


class ValidationError(InstanceFormatError):
    """The input is well formed but the instance data are inconsistent."""

    kind = "validation"
