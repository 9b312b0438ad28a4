from __future__ import annotations

from dataclasses import replace

from . import ast as A


def strip_annotations(node):
    """Remove every owner annotation and unwrap ``reveal(e, o)`` to ``e``.

    Works on any node; a SourceFile comes back with the same path and
    diagnostics.
    """
    if isinstance(node, A.SourceFile):
        return replace(node, units=tuple(strip_annotations(u) for u in node.units))
    if isinstance(node, A.ContractDecl):
        return replace(node,
                       state_vars=tuple(_var(v) for v in node.state_vars),
                       functions=tuple(_function(f) for f in node.functions))
    if isinstance(node, A.InterfaceDecl):
        return replace(node, functions=tuple(_function(f) for f in node.functions))
    if isinstance(node, (A.PragmaDirective, A.ImportDirective)):
        return node
    if isinstance(node, A.FunctionDecl):
        return _function(node)
    if isinstance(node, A.EXPR_TYPES):
        return _expr(node)
    return _stmt(node)


def _function(f: A.FunctionDecl) -> A.FunctionDecl:
    return replace(f,
                   params=tuple(_var(p) for p in f.params),
                   returns=tuple(_var(r) for r in f.returns),
                   body=None if f.body is None else _stmt(f.body))


def _var(v: A.VarDecl) -> A.VarDecl:
    return replace(v, type=strip_type(v.type), owner=None,
                   init=None if v.init is None else _expr(v.init))


def strip_type(t):
    if isinstance(t, A.MappingType):
        return replace(t, key=strip_type(t.key), value=strip_type(t.value),
                       key_binding=None, value_owner=None)
    if isinstance(t, A.ArrayType):
        return replace(t, elem=strip_type(t.elem), annotation=None)
    return t


def _stmt(s):
    if isinstance(s, A.Block):
        return replace(s, stmts=tuple(_stmt(c) for c in s.stmts))
    if isinstance(s, A.VarDeclStmt):
        return replace(s, decl=_var(s.decl))
    if isinstance(s, A.ExprStmt):
        return replace(s, expr=_expr(s.expr))
    if isinstance(s, A.If):
        return replace(s, cond=_expr(s.cond), then=_stmt(s.then),
                       orelse=None if s.orelse is None else _stmt(s.orelse))
    if isinstance(s, A.For):
        return replace(s,
                       init=None if s.init is None else _stmt(s.init),
                       cond=None if s.cond is None else _expr(s.cond),
                       update=None if s.update is None else _expr(s.update),
                       body=_stmt(s.body))
    if isinstance(s, A.Return):
        return replace(s, value=None if s.value is None else _expr(s.value))
    raise TypeError(f"not a statement: {s!r}")


def _expr(e):
    if isinstance(e, A.Reveal):
        return _expr(e.expr)
    if isinstance(e, (A.Literal, A.Identifier)):
        return e
    if isinstance(e, A.IndexAccess):
        return replace(e, base=_expr(e.base), index=_expr(e.index))
    if isinstance(e, A.MemberAccess):
        return replace(e, base=_expr(e.base))
    if isinstance(e, A.BinaryOp):
        return replace(e, left=_expr(e.left), right=_expr(e.right))
    if isinstance(e, A.UnaryOp):
        return replace(e, operand=_expr(e.operand))
    if isinstance(e, A.Assignment):
        return replace(e, target=_expr(e.target), value=_expr(e.value))
    if isinstance(e, A.Call):
        return replace(e, callee=_expr(e.callee), args=tuple(_expr(a) for a in e.args))
    raise TypeError(f"not an expression: {e!r}")
