"""Deterministic source printer.

``parse(pretty_print(parse(s)))`` is structurally equal to ``parse(s)``.
"""

from __future__ import annotations

from . import ast as A

INDENT = "    "

_BINARY_PREC = {
    "||": 2, "&&": 3,
    "==": 4, "!=": 4,
    "<": 5, ">": 5, "<=": 5, ">=": 5,
    "+": 6, "-": 6,
    "*": 7, "/": 7, "%": 7,
}
_ASSIGN, _PREFIX, _POSTFIX, _PRIMARY = 1, 8, 9, 10


def pretty_print(node) -> str:
    if isinstance(node, A.SourceFile):
        return "\n".join(unit_text(u) for u in node.units)
    if isinstance(node, A.EXPR_TYPES):
        return expr(node)
    return unit_text(node) + "\n"


def unit_text(u) -> str:
    if isinstance(u, A.PragmaDirective):
        return f"pragma {u.text};\n"
    if isinstance(u, A.ImportDirective):
        return f'import "{u.path}";\n'
    if isinstance(u, A.InterfaceDecl):
        return "\n".join(interface_lines(u)) + "\n"
    if isinstance(u, A.ContractDecl):
        return "\n".join(contract_lines(u)) + "\n"
    raise TypeError(f"not a source unit: {u!r}")


def contract_lines(c: A.ContractDecl) -> list:
    if not c.state_vars and not c.functions:
        return [f"contract {c.name} {{ }}"]
    lines = [f"contract {c.name} {{"]
    for v in c.state_vars:
        lines.append(INDENT + var_decl(v) + ";")
    for i, f in enumerate(c.functions):
        if i or c.state_vars:
            lines.append("")
        lines.extend(function_lines(f, 1))
    lines.append("}")
    return lines


def interface_lines(it: A.InterfaceDecl) -> list:
    if not it.structs and not it.functions:
        return [f"interface {it.name} {{ }}"]
    lines = [f"interface {it.name} {{"]
    first = True
    for s in it.structs:
        if not first:
            lines.append("")
        first = False
        lines.append(f"{INDENT}struct {s.name} {{")
        for fld in s.fields:
            lines.append(INDENT * 2 + f"{type_name(fld.type)} {fld.name};")
        lines.append(INDENT + "}")
    for f in it.functions:
        if not first:
            lines.append("")
        first = False
        lines.extend(function_lines(f, 1))
    lines.append("}")
    return lines


def function_lines(f: A.FunctionDecl, level: int) -> list:
    ind = INDENT * level
    head = f"function {f.name}({', '.join(param(p) for p in f.params)}) {f.visibility}"
    if f.returns:
        head += f" returns ({', '.join(param(p) for p in f.returns)})"
    if f.body is None:
        return [ind + head + ";"]
    return block_lines(head, f.body, level)


def block_lines(head: str, b: A.Block, level: int) -> list:
    ind = INDENT * level
    if not b.stmts:
        return [f"{ind}{head} {{ }}" if head else f"{ind}{{ }}"]
    lines = [f"{ind}{head} {{" if head else f"{ind}{{"]
    for s in b.stmts:
        lines.extend(stmt_lines(s, level + 1))
    lines.append(ind + "}")
    return lines


def _body(head: str, s, level: int) -> list:
    if isinstance(s, A.Block):
        return block_lines(head, s, level)
    return [INDENT * level + head] + stmt_lines(s, level + 1)


def stmt_lines(s, level: int) -> list:
    ind = INDENT * level
    if isinstance(s, A.Block):
        return block_lines("", s, level)
    if isinstance(s, A.VarDeclStmt):
        return [ind + var_decl(s.decl) + ";"]
    if isinstance(s, A.ExprStmt):
        return [ind + expr(s.expr) + ";"]
    if isinstance(s, A.Return):
        return [ind + ("return;" if s.value is None else f"return {expr(s.value)};")]
    if isinstance(s, A.For):
        init = ""
        if s.init is not None:
            init = stmt_lines(s.init, 0)[0].rstrip(";")
        cond = expr(s.cond) if s.cond is not None else ""
        update = expr(s.update) if s.update is not None else ""
        return _body(f"for ({init}; {cond}; {update})", s.body, level)
    if isinstance(s, A.If):
        return if_lines(s, level)
    raise TypeError(f"not a statement: {s!r}")


def if_lines(s: A.If, level: int) -> list:
    ind = INDENT * level
    lines = _body(f"if ({expr(s.cond)})", s.then, level)
    if s.orelse is None:
        return lines
    if isinstance(s.then, A.Block):
        lines.pop()
        prefix = "} else"
    else:
        prefix = "else"
    if isinstance(s.orelse, A.If):
        rest = if_lines(s.orelse, level)
        lines.append(f"{ind}{prefix} {rest[0].lstrip()}")
        lines.extend(rest[1:])
    elif isinstance(s.orelse, A.Block):
        lines.extend(block_lines(prefix, s.orelse, level))
    else:
        lines.append(ind + prefix)
        lines.extend(stmt_lines(s.orelse, level + 1))
    return lines


# -- declarations and types ---------------------------------------------------


def var_decl(v: A.VarDecl) -> str:
    text = type_name(v.type)
    if v.owner is not None:
        text += f" {v.owner}"
    text += f" {v.name}"
    if v.init is not None:
        text += f" = {expr(v.init)}"
    return text


def param(v: A.VarDecl) -> str:
    text = type_name(v.type)
    if v.owner is not None:
        text += f" {v.owner}"
    if v.name:
        text += f" {v.name}"
    return text


def type_name(t) -> str:
    if isinstance(t, A.MappingType):
        key = type_name(t.key)
        if t.key_binding is not None:
            key += f" {t.key_binding}"
        value = type_name(t.value)
        if t.value_owner is not None:
            value += f" {t.value_owner}"
        return f"mapping({key} => {value})"
    if isinstance(t, A.ArrayType):
        inner = ""
        if t.length is not None:
            inner = str(t.length)
        elif t.annotation is not None:
            inner = str(t.annotation)
        return f"{type_name(t.elem)}[{inner}]"
    return t.name


# -- expressions --------------------------------------------------------------


def prec(e) -> int:
    if isinstance(e, A.Assignment):
        return _ASSIGN
    if isinstance(e, A.BinaryOp):
        return _BINARY_PREC[e.op]
    if isinstance(e, A.UnaryOp):
        return _PREFIX if e.prefix else _POSTFIX
    if isinstance(e, (A.IndexAccess, A.MemberAccess, A.Call)):
        return _POSTFIX
    return _PRIMARY


def _wrap(e, min_prec: int) -> str:
    text = expr(e)
    return f"({text})" if prec(e) < min_prec else text


def expr(e) -> str:
    if isinstance(e, A.Literal):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if isinstance(e.value, str):
            return f'"{e.value}"'
        return str(e.value)
    if isinstance(e, A.Identifier):
        return e.name
    if isinstance(e, A.IndexAccess):
        return f"{_wrap(e.base, _POSTFIX)}[{expr(e.index)}]"
    if isinstance(e, A.MemberAccess):
        return f"{_wrap(e.base, _POSTFIX)}.{e.member}"
    if isinstance(e, A.Call):
        return f"{expr(e.callee)}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.BinaryOp):
        p = _BINARY_PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, A.UnaryOp):
        if not e.prefix:
            return f"{_wrap(e.operand, _POSTFIX)}{e.op}"
        inner = _wrap(e.operand, _PREFIX)
        if isinstance(e.operand, A.UnaryOp) and e.operand.prefix:
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, A.Assignment):
        return f"{_wrap(e.target, _POSTFIX)} {e.op} {_wrap(e.value, _ASSIGN)}"
    if isinstance(e, A.Reveal):
        owner = e.owner.name if e.owner.kind == A.ID else e.owner.kind
        return f"reveal({expr(e.expr)}, {owner})"
    raise TypeError(f"not an expression: {e!r}")
