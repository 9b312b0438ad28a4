"""Lexical name resolution shared by the validator and the owner checker."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import Diagnostic
from . import ast as A

STATE, PARAM, RETURN, LOCAL = "state", "param", "return", "local"


@dataclass(eq=False)
class Symbol:
    """A declared variable. Compared by identity so shadowed names stay distinct."""

    name: str
    type: A.TypeName
    kind: str
    decl: A.VarDecl
    owner: Optional[A.OwnerAnnotation] = None

    def __repr__(self) -> str:
        return f"Symbol({self.kind}:{self.name})"


@dataclass
class Resolution:
    symbols: dict = field(default_factory=dict)  # Identifier.node_id -> Symbol
    locals: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def lookup(self, ident: A.Identifier) -> Optional[Symbol]:
        return self.symbols.get(ident.node_id)


def is_msg_sender(e) -> bool:
    return (isinstance(e, A.MemberAccess) and e.member == "sender"
            and isinstance(e.base, A.Identifier) and e.base.name == "msg")


def state_symbols(contract: A.ContractDecl) -> dict:
    return {v.name: Symbol(v.name, v.type, STATE, v, v.owner) for v in contract.state_vars}


class _Scopes:
    def __init__(self, base: dict):
        self.stack = [dict(base)]

    def push(self):
        self.stack.append({})

    def pop(self):
        self.stack.pop()

    def declare(self, sym: Symbol, res: Resolution):
        top = self.stack[-1]
        if sym.name in top:
            res.diagnostics.append(Diagnostic(
                "DuplicateDeclaration", f"'{sym.name}' is already declared in this scope",
                sym.decl.span))
        top[sym.name] = sym

    def find(self, name: str) -> Optional[Symbol]:
        for frame in reversed(self.stack):
            if name in frame:
                return frame[name]
        return None


def resolve_function(contract: A.ContractDecl, fn: A.FunctionDecl,
                     states: Optional[dict] = None) -> Resolution:
    """Bind every identifier in ``fn`` to its declaration.

    Locals are visible from their declaration to the end of the enclosing
    block; a local may shadow a state variable.
    """
    res = Resolution()
    scopes = _Scopes(states if states is not None else state_symbols(contract))
    scopes.push()
    for p in fn.params:
        if p.name:
            scopes.declare(Symbol(p.name, p.type, PARAM, p, p.owner), res)
    for r in fn.returns:
        if r.name:
            scopes.declare(Symbol(r.name, r.type, RETURN, r, r.owner), res)
    if fn.body is not None:
        _stmt(fn.body, scopes, res)
    return res


def resolve_state_inits(contract: A.ContractDecl, states: Optional[dict] = None) -> Resolution:
    res = Resolution()
    scopes = _Scopes(states if states is not None else state_symbols(contract))
    for v in contract.state_vars:
        if v.init is not None:
            _expr(v.init, scopes, res)
    return res


def _stmt(s, scopes: _Scopes, res: Resolution):
    if isinstance(s, A.Block):
        scopes.push()
        for c in s.stmts:
            _stmt(c, scopes, res)
        scopes.pop()
    elif isinstance(s, A.VarDeclStmt):
        d = s.decl
        if d.init is not None:
            _expr(d.init, scopes, res)
        sym = Symbol(d.name, d.type, LOCAL, d, d.owner)
        res.locals.append(sym)
        scopes.declare(sym, res)
    elif isinstance(s, A.ExprStmt):
        _expr(s.expr, scopes, res)
    elif isinstance(s, A.If):
        _expr(s.cond, scopes, res)
        _branch(s.then, scopes, res)
        if s.orelse is not None:
            _branch(s.orelse, scopes, res)
    elif isinstance(s, A.For):
        scopes.push()
        if s.init is not None:
            _stmt(s.init, scopes, res)
        if s.cond is not None:
            _expr(s.cond, scopes, res)
        if s.update is not None:
            _expr(s.update, scopes, res)
        _branch(s.body, scopes, res)
        scopes.pop()
    elif isinstance(s, A.Return):
        if s.value is not None:
            _expr(s.value, scopes, res)


def _branch(s, scopes: _Scopes, res: Resolution):
    # a non-block branch body still gets its own scope
    scopes.push()
    _stmt(s, scopes, res)
    scopes.pop()


def _expr(e, scopes: _Scopes, res: Resolution):
    if isinstance(e, A.Identifier):
        sym = scopes.find(e.name)
        if sym is not None:
            res.symbols[e.node_id] = sym
        return
    if is_msg_sender(e):
        return
    for c in A.children(e):
        _expr(c, scopes, res)
