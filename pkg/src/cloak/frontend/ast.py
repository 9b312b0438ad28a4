"""AST for the annotated contract language.

All nodes are frozen dataclasses. ``span`` and ``node_id`` are excluded from
equality, so two trees compare equal when they are structurally identical
regardless of where they came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..diagnostics import NO_SPAN, Span, Diagnostic


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


def _nid():
    return field(default=-1, compare=False, repr=False)


# ---------------------------------------------------------------------------
# owner annotations

ALL = "all"
ME = "me"
TEE = "tee"
ID = "id"
BIND = "bind"  # `!name` key / party-class binding


@dataclass(frozen=True)
class OwnerAnnotation:
    kind: str
    name: Optional[str] = None
    span: Span = _span()

    @property
    def is_binding(self) -> bool:
        return self.kind == BIND

    def __str__(self) -> str:
        if self.kind == BIND:
            return f"!{self.name}"
        if self.kind == ID:
            return f"@{self.name}"
        return f"@{self.kind}"


def owner_from_name(name: str, span: Span = NO_SPAN) -> OwnerAnnotation:
    if name in (ALL, ME, TEE):
        return OwnerAnnotation(name, None, span)
    return OwnerAnnotation(ID, name, span)


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class ElementaryType:
    name: str  # uint | bool | address | string
    span: Span = _span()

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class UserType:
    """A struct or interface name."""

    name: str
    span: Span = _span()

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class MappingType:
    key: TypeName
    value: TypeName
    key_binding: Optional[OwnerAnnotation] = None
    value_owner: Optional[OwnerAnnotation] = None
    span: Span = _span()

    def __str__(self) -> str:
        return f"mapping({self.key}=>{self.value})"


@dataclass(frozen=True)
class ArrayType:
    elem: TypeName
    length: Optional[int] = None
    # either a `!p` party-class binding or an `@p` element owner
    annotation: Optional[OwnerAnnotation] = None
    span: Span = _span()

    def __str__(self) -> str:
        n = "" if self.length is None else str(self.length)
        return f"{self.elem}[{n}]"


TypeName = Union[ElementaryType, UserType, MappingType, ArrayType]

UINT = ElementaryType("uint")
BOOL = ElementaryType("bool")
ADDRESS = ElementaryType("address")
STRING = ElementaryType("string")


def same_type(a: TypeName, b: TypeName) -> bool:
    """Type equality ignoring owner annotations."""
    if isinstance(a, MappingType) and isinstance(b, MappingType):
        return same_type(a.key, b.key) and same_type(a.value, b.value)
    if isinstance(a, ArrayType) and isinstance(b, ArrayType):
        return a.length == b.length and same_type(a.elem, b.elem)
    return type(a) is type(b) and getattr(a, "name", None) == getattr(b, "name", None)


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class Literal:
    value: Union[int, bool, str]
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class Identifier:
    name: str
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class IndexAccess:
    base: Expr
    index: Expr
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class MemberAccess:
    base: Expr
    member: str
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: Expr
    right: Expr
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class UnaryOp:
    op: str  # ! - ++ --
    operand: Expr
    prefix: bool = True
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class Assignment:
    op: str  # = += -=
    target: Expr
    value: Expr
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class Reveal:
    expr: Expr
    owner: OwnerAnnotation
    span: Span = _span()
    node_id: int = _nid()


@dataclass(frozen=True)
class Call:
    """``ref.fn(args)`` on an interface-typed state variable."""

    callee: MemberAccess
    args: tuple
    span: Span = _span()
    node_id: int = _nid()


Expr = Union[Literal, Identifier, IndexAccess, MemberAccess, BinaryOp, UnaryOp,
             Assignment, Reveal, Call]

EXPR_TYPES = (Literal, Identifier, IndexAccess, MemberAccess, BinaryOp, UnaryOp,
              Assignment, Reveal, Call)


def children(e: Expr) -> tuple:
    if isinstance(e, IndexAccess):
        return (e.base, e.index)
    if isinstance(e, MemberAccess):
        return (e.base,)
    if isinstance(e, BinaryOp):
        return (e.left, e.right)
    if isinstance(e, UnaryOp):
        return (e.operand,)
    if isinstance(e, Assignment):
        return (e.target, e.value)
    if isinstance(e, Reveal):
        return (e.expr,)
    if isinstance(e, Call):
        return (e.callee,) + tuple(e.args)
    return ()


def walk_expr(e: Expr):
    """Pre-order traversal of an expression tree."""
    yield e
    for c in children(e):
        yield from walk_expr(c)


# ---------------------------------------------------------------------------
# declarations and statements


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: TypeName
    owner: Optional[OwnerAnnotation] = None
    init: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class VarDeclStmt:
    decl: VarDecl
    span: Span = _span()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt] = None
    span: Span = _span()


@dataclass(frozen=True)
class For:
    init: Optional[Stmt]
    cond: Optional[Expr]
    update: Optional[Expr]
    body: Stmt
    span: Span = _span()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    span: Span = _span()


@dataclass(frozen=True)
class Block:
    stmts: tuple = ()
    span: Span = _span()


Stmt = Union[VarDeclStmt, ExprStmt, If, For, Return, Block]


def stmt_exprs(s: Stmt):
    """Top-level expressions directly owned by a statement (not nested statements)."""
    if isinstance(s, VarDeclStmt):
        return (s.decl.init,) if s.decl.init is not None else ()
    if isinstance(s, ExprStmt):
        return (s.expr,)
    if isinstance(s, If):
        return (s.cond,)
    if isinstance(s, For):
        return tuple(x for x in (s.cond, s.update) if x is not None)
    if isinstance(s, Return):
        return (s.value,) if s.value is not None else ()
    return ()


def sub_stmts(s: Stmt):
    if isinstance(s, Block):
        return s.stmts
    if isinstance(s, If):
        return (s.then,) if s.orelse is None else (s.then, s.orelse)
    if isinstance(s, For):
        return (s.init, s.body) if s.init is not None else (s.body,)
    return ()


def walk_stmts(s: Stmt):
    yield s
    for c in sub_stmts(s):
        yield from walk_stmts(c)


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple
    returns: tuple
    visibility: str = "public"
    body: Optional[Block] = None  # None for interface signatures
    span: Span = _span()

    def expressions(self):
        """Every expression node in the body, pre-order."""
        if self.body is None:
            return
        for s in walk_stmts(self.body):
            for e in stmt_exprs(s):
                yield from walk_expr(e)


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: tuple
    span: Span = _span()


@dataclass(frozen=True)
class InterfaceDecl:
    name: str
    structs: tuple
    functions: tuple
    span: Span = _span()


@dataclass(frozen=True)
class ContractDecl:
    name: str
    state_vars: tuple
    functions: tuple
    span: Span = _span()

    def function(self, name: str) -> FunctionDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def state_var(self, name: str) -> VarDecl:
        for v in self.state_vars:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class PragmaDirective:
    text: str
    span: Span = _span()


@dataclass(frozen=True)
class ImportDirective:
    path: str
    span: Span = _span()


SourceUnit = Union[PragmaDirective, ImportDirective, InterfaceDecl, ContractDecl]


@dataclass(frozen=True)
class SourceFile:
    path: str
    units: tuple = ()
    diagnostics: tuple = ()

    @property
    def contracts(self) -> tuple:
        return tuple(u for u in self.units if isinstance(u, ContractDecl))

    @property
    def interfaces(self) -> tuple:
        return tuple(u for u in self.units if isinstance(u, InterfaceDecl))

    @property
    def ok(self) -> bool:
        return not any(isinstance(d, Diagnostic) and d.is_error for d in self.diagnostics)
