"""Source spans and compiler diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Span:
    """Half-open character range ``[start, end)`` into the source text."""

    start: int
    end: int

    def merge(self, other: Span) -> Span:
        return Span(min(self.start, other.start), max(self.end, other.end))


NO_SPAN = Span(0, 0)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span = NO_SPAN
    severity: str = "error"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


def line_col(source: str, offset: int) -> tuple[int, int]:
    """1-based line and column of ``offset``."""
    offset = max(0, min(offset, len(source)))
    line = source.count("\n", 0, offset) + 1
    col = offset - (source.rfind("\n", 0, offset) + 1) + 1
    return line, col


def render(diag: Diagnostic, source: str, path: str) -> str:
    line, col = line_col(source, diag.span.start)
    return f"{path}:{line}:{col}: {diag.severity}[{diag.code}]: {diag.message}"


def has_errors(diags) -> bool:
    return any(d.is_error for d in diags)
