from __future__ import annotations

import re
from dataclasses import dataclass

from ..diagnostics import Span


class CloakSyntaxError(Exception):
    code = "SyntaxError"

    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.message = message
        self.span = span


class LexError(CloakSyntaxError):
    code = "LexError"


class ParseError(CloakSyntaxError):
    code = "ParseError"


class AnnotationSyntaxError(CloakSyntaxError):
    code = "AnnotationSyntaxError"


KEYWORDS = {
    "contract", "interface", "struct", "function", "returns", "return",
    "mapping", "if", "else", "for", "true", "false", "reveal",
    "public", "internal", "external", "pragma", "import",
    "uint", "uint256", "bool", "address", "string",
}

# longest first
PUNCT = (
    "=>", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=",
    "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "<", ">",
    "+", "-", "*", "/", "%", "!", "^",
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<owner>@[A-Za-z_][A-Za-z0-9_]*)
  | (?P<at>@)
  | (?P<hex>0[xX][0-9a-fA-F]+)
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>""" + "|".join(re.escape(p) for p in PUNCT) + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | owner | at | punct | eof
    text: str
    span: Span

    @property
    def value(self):
        if self.kind == "number":
            return int(self.text, 0) if self.text[:2].lower() == "0x" else int(self.text)
        return self.text


def tokenize(source: str) -> list:
    tokens = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            if source.startswith("/*", pos):
                raise LexError("unterminated block comment", Span(pos, n))
            if source[pos] == '"':
                raise LexError("unterminated string literal", Span(pos, pos + 1))
            raise LexError(f"illegal character {source[pos]!r}", Span(pos, pos + 1))
        kind = m.lastgroup
        text = m.group()
        span = Span(pos, m.end())
        pos = m.end()
        if kind in ("ws", "line_comment", "block_comment"):
            continue
        if kind in ("hex", "num"):
            kind = "number"
        elif kind == "ident" and text in KEYWORDS:
            kind = "keyword"
        tokens.append(Token(kind, text, span))
    tokens.append(Token("eof", "", Span(n, n)))
    return tokens
