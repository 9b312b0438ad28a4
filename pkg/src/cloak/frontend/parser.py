"""Recursive-descent parser for annotated contract sources."""

from __future__ import annotations

import itertools

from ..diagnostics import Diagnostic, Span
from . import ast as A
from .lexer import (AnnotationSyntaxError, CloakSyntaxError, ParseError, Token,
                    tokenize)

MAX_MAPPING_DEPTH = 2

ELEMENTARY = {"uint": "uint", "uint256": "uint", "bool": "bool",
              "address": "address", "string": "string"}

# declaration contexts that accept owner annotations
ANNOTATABLE = {"state", "param", "return", "local"}

ASSIGN_OPS = ("=", "+=", "-=")
BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


def parse(source: str, path: str = "<input>") -> A.SourceFile:
    """Parse ``source`` into a SourceFile.

    Syntax errors never raise; they come back as a single diagnostic and the
    returned file exposes no units.
    """
    try:
        units = Parser(source).parse_units()
    except CloakSyntaxError as exc:
        diag = Diagnostic(exc.code, exc.message, exc.span)
        return A.SourceFile(path, (), (diag,))
    return A.SourceFile(path, tuple(units), ())


def parse_expression(source: str) -> A.Expr:
    """Parse a standalone expression; raises on error (test helper)."""
    p = Parser(source)
    e = p.expression()
    p.expect_kind("eof")
    return e


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self._ids = itertools.count()

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "keyword") and t.text == text

    def accept(self, text: str):
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}'")
        return self.advance()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            self.error(f"expected {kind}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected identifier")
        return self.advance()

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        if tok.kind in ("owner", "at"):
            raise AnnotationSyntaxError(f"annotation '{tok.text}' not allowed here", tok.span)
        found = "end of input" if tok.kind == "eof" else f"'{tok.text}'"
        raise ParseError(f"{message}, found {found}", tok.span)

    def span_from(self, start: Span) -> Span:
        prev = self.tokens[self.pos - 1] if self.pos else self.tok
        return Span(start.start, max(start.start, prev.span.end))

    def nid(self) -> int:
        return next(self._ids)

    # -- source units -------------------------------------------------------

    def parse_units(self) -> list:
        for t in self.tokens:
            # a bare '@' has no legal position anywhere in the grammar
            if t.kind == "at":
                raise AnnotationSyntaxError("dangling '@' without an owner name", t.span)
        units = []
        while self.tok.kind != "eof":
            if self.at("pragma"):
                units.append(self.pragma())
            elif self.at("import"):
                units.append(self.import_directive())
            elif self.at("interface"):
                units.append(self.interface())
            elif self.at("contract"):
                units.append(self.contract())
            else:
                self.error("expected 'contract', 'interface', 'pragma' or 'import'")
        return units

    def pragma(self) -> A.PragmaDirective:
        start = self.expect("pragma").span
        first_pos = self.pos
        while not self.at(";"):
            if self.tok.kind == "eof":
                self.error("expected ';'")
            self.advance()
        if self.pos == first_pos:
            self.error("empty pragma")
        first, last = self.tokens[first_pos], self.tokens[self.pos - 1]
        text = self.source[first.span.start:last.span.end]
        self.expect(";")
        return A.PragmaDirective(" ".join(text.split()), self.span_from(start))

    def import_directive(self) -> A.ImportDirective:
        start = self.expect("import").span
        tok = self.expect_kind("string")
        self.expect(";")
        return A.ImportDirective(tok.text[1:-1], self.span_from(start))

    def interface(self) -> A.InterfaceDecl:
        start = self.expect("interface").span
        name = self.ident().text
        self.expect("{")
        structs, functions = [], []
        while not self.accept("}"):
            if self.at("struct"):
                structs.append(self.struct())
            elif self.at("function"):
                functions.append(self.function(in_interface=True))
            else:
                self.error("expected 'struct' or 'function'")
        return A.InterfaceDecl(name, tuple(structs), tuple(functions), self.span_from(start))

    def struct(self) -> A.StructDecl:
        start = self.expect("struct").span
        name = self.ident().text
        self.expect("{")
        fields = []
        while not self.accept("}"):
            fstart = self.tok.span
            ty = self.type_name("field")
            fname = self.ident().text
            self.expect(";")
            fields.append(A.VarDecl(fname, ty, None, None, self.span_from(fstart)))
        return A.StructDecl(name, tuple(fields), self.span_from(start))

    def contract(self) -> A.ContractDecl:
        start = self.expect("contract").span
        name = self.ident().text
        self.expect("{")
        state_vars, functions = [], []
        while not self.accept("}"):
            if self.at("function"):
                functions.append(self.function())
            else:
                state_vars.append(self.var_decl("state"))
                self.expect(";")
        return A.ContractDecl(name, tuple(state_vars), tuple(functions), self.span_from(start))

    def function(self, in_interface: bool = False) -> A.FunctionDecl:
        start = self.expect("function").span
        name = self.ident().text
        ctx = "field" if in_interface else "param"
        params = self.param_list(ctx)
        visibility = None
        while self.tok.kind == "keyword" and self.tok.text in ("public", "internal", "external"):
            if visibility is not None:
                self.error("duplicate visibility")
            visibility = self.advance().text
        returns = ()
        if self.accept("returns"):
            returns = self.param_list("field" if in_interface else "return", names_optional=True)
        if in_interface:
            if visibility != "external":
                self.error("interface functions must be declared 'external'")
            self.expect(";")
            body = None
        else:
            if visibility not in (None, "public", "internal"):
                self.error("contract functions must be 'public' or 'internal'")
            body = self.block()
        return A.FunctionDecl(name, params, returns, visibility or "public", body,
                              self.span_from(start))

    def param_list(self, ctx: str, names_optional: bool = False) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                pstart = self.tok.span
                ty = self.type_name(ctx)
                owner = self.owner_annotation(ctx)
                if self.tok.kind == "ident":
                    pname = self.advance().text
                elif names_optional or ctx == "field":
                    pname = ""
                else:
                    self.error("expected parameter name")
                out.append(A.VarDecl(pname, ty, owner, None, self.span_from(pstart)))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(out)

    def var_decl(self, ctx: str) -> A.VarDecl:
        start = self.tok.span
        ty = self.type_name(ctx)
        owner = self.owner_annotation(ctx)
        name = self.ident().text
        init = None
        if self.accept("="):
            init = self.expression()
        return A.VarDecl(name, ty, owner, init, self.span_from(start))

    # -- types and annotations ----------------------------------------------

    def owner_annotation(self, ctx: str):
        tok = self.tok
        if tok.kind == "at":
            raise AnnotationSyntaxError("dangling '@' without an owner name", tok.span)
        if tok.kind != "owner":
            return None
        if ctx not in ANNOTATABLE:
            raise AnnotationSyntaxError(f"annotation '{tok.text}' not allowed here", tok.span)
        self.advance()
        return A.owner_from_name(tok.text[1:], tok.span)

    def binding(self, ctx: str, where: str) -> A.OwnerAnnotation:
        bang = self.expect("!")
        nxt = self.tok
        if nxt.kind != "ident" or nxt.span.start != bang.span.end:
            raise AnnotationSyntaxError("'!' must be immediately followed by a binding name",
                                        bang.span)
        if ctx not in ANNOTATABLE:
            raise AnnotationSyntaxError("binding not allowed here", bang.span)
        if where == "array" and ctx != "param":
            raise AnnotationSyntaxError("array bindings are only allowed on parameters",
                                        bang.span)
        self.advance()
        return A.OwnerAnnotation(A.BIND, nxt.text, bang.span.merge(nxt.span))

    def type_name(self, ctx: str, depth: int = 0):
        start = self.tok.span
        tok = self.tok
        if tok.kind == "keyword" and tok.text in ELEMENTARY:
            self.advance()
            ty = A.ElementaryType(ELEMENTARY[tok.text], tok.span)
        elif self.at("mapping"):
            ty = self.mapping_type(ctx, depth)
        elif tok.kind == "ident":
            self.advance()
            ty = A.UserType(tok.text, tok.span)
        else:
            self.error("expected type name")
        while self.at("["):
            self.advance()
            length = None
            annotation = None
            if self.tok.kind == "number":
                length = self.advance().value
                if length <= 0:
                    raise ParseError("array length must be positive", self.tokens[self.pos - 1].span)
            elif self.at("!"):
                annotation = self.binding(ctx, "array")
            elif self.tok.kind in ("owner", "at"):
                annotation = self.owner_annotation(ctx)
            self.expect("]")
            ty = A.ArrayType(ty, length, annotation, self.span_from(start))
        return ty

    def mapping_type(self, ctx: str, depth: int) -> A.MappingType:
        start = self.expect("mapping").span
        if depth + 1 > MAX_MAPPING_DEPTH:
            raise ParseError("mappings nest at most two levels deep", start)
        self.expect("(")
        ktok = self.tok
        if not (ktok.kind == "keyword" and ELEMENTARY.get(ktok.text) in ("uint", "address")):
            if ktok.kind in ("owner", "at"):
                self.owner_annotation("field")
            self.error("mapping key must be 'address' or 'uint'")
        self.advance()
        key = A.ElementaryType(ELEMENTARY[ktok.text], ktok.span)
        key_binding = None
        if self.at("!"):
            key_binding = self.binding(ctx, "mapping")
        elif self.tok.kind in ("owner", "at"):
            raise AnnotationSyntaxError("mapping keys take a '!' binding, not an owner",
                                        self.tok.span)
        self.expect("=>")
        value = self.type_name(ctx, depth + 1)
        value_owner = self.owner_annotation(ctx)
        if self.at("!"):
            raise AnnotationSyntaxError("bindings are only allowed in key position", self.tok.span)
        self.expect(")")
        return A.MappingType(key, value, key_binding, value_owner, self.span_from(start))

    # -- statements ---------------------------------------------------------

    def block(self) -> A.Block:
        start = self.expect("{").span
        stmts = []
        while not self.accept("}"):
            if self.tok.kind == "eof":
                self.error("expected '}'")
            stmts.append(self.statement())
        return A.Block(tuple(stmts), self.span_from(start))

    def starts_declaration(self) -> bool:
        t = self.tok
        if t.kind == "keyword" and (t.text in ELEMENTARY or t.text == "mapping"):
            return True
        return t.kind == "ident" and self.peek().kind in ("ident", "owner")

    def statement(self):
        start = self.tok.span
        if self.at("{"):
            return self.block()
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expression()
            self.expect(")")
            then = self.statement()
            orelse = self.statement() if self.accept("else") else None
            return A.If(cond, then, orelse, self.span_from(start))
        if self.at("for"):
            self.advance()
            self.expect("(")
            init = None
            if not self.accept(";"):
                init = self.simple_statement()
            cond = None if self.at(";") else self.expression()
            self.expect(";")
            update = None if self.at(")") else self.expression()
            self.expect(")")
            body = self.statement()
            return A.For(init, cond, update, body, self.span_from(start))
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expression()
            self.expect(";")
            return A.Return(value, self.span_from(start))
        return self.simple_statement()

    def simple_statement(self):
        start = self.tok.span
        if self.starts_declaration():
            decl = self.var_decl("local")
            self.expect(";")
            return A.VarDeclStmt(decl, self.span_from(start))
        e = self.expression()
        self.expect(";")
        return A.ExprStmt(e, self.span_from(start))

    # -- expressions --------------------------------------------------------

    def expression(self):
        start = self.tok.span
        left = self.binary(0)
        if self.tok.kind == "punct" and self.tok.text in ASSIGN_OPS:
            op_tok = self.advance()
            if not isinstance(left, (A.Identifier, A.IndexAccess)):
                raise ParseError("invalid assignment target", left.span)
            right = self.expression()
            return A.Assignment(op_tok.text, left, right, self.span_from(start), self.nid())
        return left

    def binary(self, level: int):
        if level == len(BINARY_LEVELS):
            return self.unary()
        start = self.tok.span
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while self.tok.kind == "punct" and self.tok.text in ops:
            op = self.advance().text
            right = self.binary(level + 1)
            left = A.BinaryOp(op, left, right, self.span_from(start), self.nid())
        return left

    def unary(self):
        start = self.tok.span
        if self.tok.kind == "punct" and self.tok.text in ("!", "-", "++", "--"):
            op = self.advance().text
            operand = self.unary()
            return A.UnaryOp(op, operand, True, self.span_from(start), self.nid())
        return self.postfix()

    def postfix(self):
        start = self.tok.span
        e = self.primary()
        while True:
            if self.accept("["):
                idx = self.expression()
                self.expect("]")
                e = A.IndexAccess(e, idx, self.span_from(start), self.nid())
            elif self.accept("."):
                member = self.ident().text
                e = A.MemberAccess(e, member, self.span_from(start), self.nid())
                if self.at("("):
                    args = self.call_args()
                    e = A.Call(e, args, self.span_from(start), self.nid())
            elif self.tok.kind == "punct" and self.tok.text in ("++", "--"):
                op = self.advance().text
                e = A.UnaryOp(op, e, False, self.span_from(start), self.nid())
            else:
                return e

    def call_args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.expression())
            while self.accept(","):
                args.append(self.expression())
        self.expect(")")
        return tuple(args)

    def primary(self):
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return A.Literal(tok.value, tok.span, self.nid())
        if self.at("true") or self.at("false"):
            self.advance()
            return A.Literal(tok.text == "true", tok.span, self.nid())
        if tok.kind == "string":
            # kept undecoded so printing reproduces the source text
            self.advance()
            return A.Literal(tok.text[1:-1], tok.span, self.nid())
        if self.at("reveal"):
            return self.reveal()
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                self.error("only 'reveal' and interface member calls are supported")
            return A.Identifier(tok.text, tok.span, self.nid())
        if self.accept("("):
            e = self.expression()
            self.expect(")")
            return e
        self.error("expected expression")

    def reveal(self):
        start = self.expect("reveal").span
        self.expect("(")
        e = self.expression()
        self.expect(",")
        otok = self.tok
        if otok.kind != "ident":
            if otok.kind in ("owner", "at"):
                raise AnnotationSyntaxError("reveal takes a bare owner name", otok.span)
            self.error("expected owner name")
        self.advance()
        self.expect(")")
        owner = A.owner_from_name(otok.text, otok.span)
        return A.Reveal(e, owner, self.span_from(start), self.nid())
