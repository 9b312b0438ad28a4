"""Name-resolution and type rules of the plain (annotation-free) subset."""

from __future__ import annotations

from ..diagnostics import Diagnostic
from . import ast as A
from .resolve import is_msg_sender, resolve_function, resolve_state_inits, state_symbols

ARITH = {"+", "-", "*", "/", "%"}
ORDER = {"<", ">", "<=", ">="}
EQUALITY = {"==", "!="}
LOGIC = {"&&", "||"}

VOID = object()


def validate_subset(source: A.SourceFile) -> list:
    """Return the subset diagnostics of an annotation-stripped file (empty when valid)."""
    diags: list = []
    interfaces = {}
    structs = {}
    for it in source.interfaces:
        if it.name in interfaces:
            diags.append(Diagnostic("DuplicateDeclaration",
                                    f"interface '{it.name}' declared twice", it.span))
        interfaces[it.name] = it
        for s in it.structs:
            structs[s.name] = s
    seen_contracts = set()
    for c in source.contracts:
        if c.name in seen_contracts or c.name in interfaces:
            diags.append(Diagnostic("DuplicateDeclaration",
                                    f"contract '{c.name}' declared twice", c.span))
        seen_contracts.add(c.name)
    for it in source.interfaces:
        _Checker(None, interfaces, structs, diags).check_interface(it)
    for c in source.contracts:
        _Checker(c, interfaces, structs, diags).check_contract()
    return diags


class _Checker:
    def __init__(self, contract, interfaces, structs, diags):
        self.contract = contract
        self.interfaces = interfaces
        self.structs = structs
        self.diags = diags
        self.res = None
        self.fn = None

    def report(self, code: str, message: str, span):
        self.diags.append(Diagnostic(code, message, span))

    # -- declarations -------------------------------------------------------

    def check_type(self, t, span):
        if isinstance(t, A.UserType):
            if t.name not in self.interfaces and t.name not in self.structs:
                self.report("UnknownType", f"unknown type '{t.name}'", t.span or span)
        elif isinstance(t, A.MappingType):
            self.check_type(t.key, span)
            self.check_type(t.value, span)
        elif isinstance(t, A.ArrayType):
            self.check_type(t.elem, span)

    def check_interface(self, it: A.InterfaceDecl):
        names = set()
        for s in it.structs:
            for f in s.fields:
                self.check_type(f.type, f.span)
        for f in it.functions:
            if f.name in names:
                self.report("DuplicateDeclaration", f"function '{f.name}' declared twice", f.span)
            names.add(f.name)
            for p in f.params + f.returns:
                self.check_type(p.type, p.span)

    def check_contract(self):
        c = self.contract
        states = state_symbols(c)
        seen = set()
        for v in c.state_vars:
            if v.name in seen:
                self.report("DuplicateDeclaration",
                            f"state variable '{v.name}' declared twice", v.span)
            seen.add(v.name)
            self.check_type(v.type, v.span)
        self.res = resolve_state_inits(c, states)
        for v in c.state_vars:
            if v.init is not None:
                self.expect_assignable(v.type, v.init, v.init.span)
        fnames = set()
        for f in c.functions:
            if f.name in fnames:
                self.report("DuplicateDeclaration", f"function '{f.name}' declared twice", f.span)
            fnames.add(f.name)
            self.fn = f
            for p in f.params + f.returns:
                self.check_type(p.type, p.span)
            self.res = resolve_function(c, f, states)
            self.diags.extend(self.res.diagnostics)
            self.stmt(f.body)

    # -- statements ---------------------------------------------------------

    def stmt(self, s):
        if isinstance(s, A.Block):
            for c in s.stmts:
                self.stmt(c)
        elif isinstance(s, A.VarDeclStmt):
            d = s.decl
            self.check_type(d.type, d.span)
            if d.init is not None:
                self.expect_assignable(d.type, d.init, d.init.span)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, allow_void=True)
        elif isinstance(s, A.If):
            self.expect_bool(s.cond)
            self.stmt(s.then)
            if s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            if s.cond is not None:
                self.expect_bool(s.cond)
            if s.update is not None:
                self.expr(s.update, allow_void=True)
            self.stmt(s.body)
        elif isinstance(s, A.Return):
            returns = self.fn.returns
            if s.value is None:
                return
            if len(returns) != 1:
                self.report("ReturnArity",
                            f"function '{self.fn.name}' returns {len(returns)} value(s), "
                            "'return' supplies 1", s.span)
                self.expr(s.value)
                return
            self.expect_assignable(returns[0].type, s.value, s.value.span)

    def expect_bool(self, e):
        t = self.expr(e)
        if t is not None and not A.same_type(t, A.BOOL):
            self.report("TypeMismatch", f"condition must be bool, found {t}", e.span)

    def expect_assignable(self, target_type, value, span):
        t = self.expr(value)
        if t is None:
            return
        if not A.same_type(target_type, t):
            self.report("TypeMismatch", f"cannot assign {t} to {target_type}", span)

    # -- expressions --------------------------------------------------------

    def expr(self, e, allow_void: bool = False):
        """Type of ``e``, or None when it could not be determined (already reported)."""
        t = self._expr(e)
        if t is VOID:
            if not allow_void:
                self.report("TypeMismatch", "expression has no value", e.span)
            return None
        return t

    def _expr(self, e):
        if isinstance(e, A.Literal):
            if isinstance(e.value, str):
                return A.STRING
            return A.BOOL if isinstance(e.value, bool) else A.UINT
        if isinstance(e, A.Identifier):
            sym = self.res.lookup(e)
            if sym is None:
                self.report("UndeclaredIdentifier", f"undeclared identifier '{e.name}'", e.span)
                return None
            return sym.type
        if isinstance(e, A.MemberAccess):
            if is_msg_sender(e):
                return A.ADDRESS
            base = self.expr(e.base)
            if base is None:
                return None
            if isinstance(base, A.ArrayType) and e.member == "length":
                return A.UINT
            self.report("UnknownMember", f"{base} has no member '{e.member}'", e.span)
            return None
        if isinstance(e, A.IndexAccess):
            return self.index(e)
        if isinstance(e, A.BinaryOp):
            return self.binary(e)
        if isinstance(e, A.UnaryOp):
            t = self.expr(e.operand)
            if t is None:
                return None
            want = A.BOOL if e.op == "!" else A.UINT
            if not A.same_type(t, want):
                self.report("TypeMismatch", f"operator {e.op} expects {want}, found {t}", e.span)
                return None
            if e.op in ("++", "--"):
                self.expect_lvalue(e.operand)
            return want
        if isinstance(e, A.Assignment):
            target = self.expr(e.target)
            self.expect_lvalue(e.target)
            value = self.expr(e.value)
            if target is None or value is None:
                return None
            if isinstance(target, A.MappingType):
                self.report("TypeMismatch", "mappings cannot be assigned", e.span)
                return None
            if e.op != "=" and not (A.same_type(target, A.UINT) and A.same_type(value, A.UINT)):
                self.report("TypeMismatch", f"operator {e.op} expects uint operands", e.span)
                return None
            if not A.same_type(target, value):
                self.report("TypeMismatch", f"cannot assign {value} to {target}", e.span)
                return None
            return target
        if isinstance(e, A.Reveal):
            return self.expr(e.expr)
        if isinstance(e, A.Call):
            return self.call(e)
        raise TypeError(f"unexpected node {e!r}")

    def expect_lvalue(self, e):
        if isinstance(e, A.Identifier):
            return
        if isinstance(e, A.IndexAccess):
            return
        self.report("NotAnLvalue", "expression is not assignable", e.span)

    def index(self, e: A.IndexAccess):
        base = self.expr(e.base)
        idx = self.expr(e.index)
        if base is None:
            return None
        if isinstance(base, A.MappingType):
            if idx is not None and not A.same_type(idx, base.key):
                self.report("TypeMismatch", f"mapping key must be {base.key}, found {idx}",
                            e.index.span)
            return base.value
        if isinstance(base, A.ArrayType):
            if idx is not None and not A.same_type(idx, A.UINT):
                self.report("TypeMismatch", f"array index must be uint, found {idx}", e.index.span)
            return base.elem
        self.report("TypeMismatch", f"{base} is not indexable", e.span)
        return None

    def binary(self, e: A.BinaryOp):
        lt = self.expr(e.left)
        rt = self.expr(e.right)
        if lt is None or rt is None:
            return None
        if e.op in ARITH or e.op in ORDER:
            if A.same_type(lt, A.UINT) and A.same_type(rt, A.UINT):
                return A.UINT if e.op in ARITH else A.BOOL
            self.report("TypeMismatch", f"operator {e.op} expects uint operands, found {lt} and {rt}",
                        e.span)
            return None
        if e.op in LOGIC:
            if A.same_type(lt, A.BOOL) and A.same_type(rt, A.BOOL):
                return A.BOOL
            self.report("TypeMismatch", f"operator {e.op} expects bool operands, found {lt} and {rt}",
                        e.span)
            return None
        # equality: same elementary type
        if isinstance(lt, A.ElementaryType) and A.same_type(lt, rt) and lt.name != "string":
            return A.BOOL
        self.report("TypeMismatch", f"cannot compare {lt} with {rt}", e.span)
        return None

    def call(self, e: A.Call):
        callee = e.callee
        base_t = self.expr(callee.base)
        arg_types = [self.expr(a) for a in e.args]
        if base_t is None:
            return None
        if not isinstance(base_t, A.UserType) or base_t.name not in self.interfaces:
            self.report("TypeMismatch", f"{base_t} is not callable", callee.span)
            return None
        it = self.interfaces[base_t.name]
        fn = next((f for f in it.functions if f.name == callee.member), None)
        if fn is None:
            self.report("UnknownMember", f"interface '{it.name}' has no function '{callee.member}'",
                        callee.span)
            return None
        if len(fn.params) != len(e.args):
            self.report("TypeMismatch",
                        f"'{callee.member}' takes {len(fn.params)} argument(s), {len(e.args)} given",
                        e.span)
            return None
        for p, a, t in zip(fn.params, e.args, arg_types):
            if t is not None and not A.same_type(p.type, t):
                self.report("TypeMismatch", f"argument '{p.name}' expects {p.type}, found {t}", a.span)
        if not fn.returns:
            return VOID
        if len(fn.returns) > 1:
            self.report("TypeMismatch", "multi-value calls are not supported", e.span)
            return None
        return fn.returns[0].type
