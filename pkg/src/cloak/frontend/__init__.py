"""Lexing, parsing, printing and plain-subset validation of ``.cloak`` sources."""

from .ast import SourceFile, ContractDecl, FunctionDecl
from .lexer import AnnotationSyntaxError, CloakSyntaxError, LexError, ParseError
from .parser import parse, parse_expression
from .printer import pretty_print
from .strip import strip_annotations
from .validate import validate_subset

__all__ = [
    "SourceFile", "ContractDecl", "FunctionDecl",
    "AnnotationSyntaxError", "CloakSyntaxError", "LexError", "ParseError",
    "parse", "parse_expression", "pretty_print", "strip_annotations", "validate_subset",
]
