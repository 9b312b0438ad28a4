"""Big-step interpreter for the annotation-free contract subset."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .. import encoding
from ..frontend import ast as A
from ..frontend.resolve import LOCAL, STATE, is_msg_sender, resolve_function, resolve_state_inits

DEFAULT_STEP_LIMIT = 1_000_000


class ExecutionError(RuntimeError):
    """A run-time fault that aborts the transaction."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class _Return(Exception):
    def __init__(self, value):
        self.value = value


@dataclass
class ExecutionResult:
    returns: dict  # return name (or "" for an unnamed one) -> value
    state: dict
    locals: dict = field(default_factory=dict)  # final value of every local, by name
    steps: int = 0


def _copy(v):
    # containers are values; anything else (scalars, host bindings) is shared
    return copy.deepcopy(v) if isinstance(v, (list, dict)) else v


def default_for(t):
    """Default runtime value for an AST type."""
    if isinstance(t, A.ElementaryType):
        if t.name == "string":
            return ""
        return encoding.default_value(t.name)
    if isinstance(t, A.ArrayType):
        return [default_for(t.elem) for _ in range(t.length or 0)]
    if isinstance(t, A.MappingType):
        return {}
    return None  # interface references start unset


class Interpreter:
    def __init__(self, contract: A.ContractDecl, step_limit: int = DEFAULT_STEP_LIMIT):
        self.contract = contract
        self.step_limit = step_limit
        self._resolutions = {}

    def initial_state(self) -> dict:
        """Type defaults, then declared initializers in order."""
        state = {v.name: default_for(v.type) for v in self.contract.state_vars}
        res = resolve_state_inits(self.contract)
        frame = _Frame(self, res, state, bytes(encoding.ADDRESS_LEN))
        for v in self.contract.state_vars:
            if v.init is not None:
                state[v.name] = frame.eval(v.init)
        return state

    def resolution(self, fn: A.FunctionDecl):
        res = self._resolutions.get(fn.name)
        if res is None:
            res = self._resolutions[fn.name] = resolve_function(self.contract, fn)
        return res

    def call(self, fn_name: str, args: dict, state: dict, sender: bytes) -> ExecutionResult:
        """Run ``fn_name``; ``state`` is left untouched and the new state returned."""
        try:
            fn = self.contract.function(fn_name)
        except KeyError:
            fn = None
        if fn is None or fn.body is None:
            raise ExecutionError("UnknownFunction", f"no function '{fn_name}'")
        res = self.resolution(fn)
        work = {k: _copy(v) for k, v in state.items()}
        frame = _Frame(self, res, work, sender)
        syms = {id(s.decl): s for s in res.symbols.values()}
        for p in fn.params:
            sym = syms.get(id(p))
            if sym is None:
                continue  # parameter never referenced
            if p.name not in args:
                raise ExecutionError("MissingArgument", f"argument '{p.name}' not supplied")
            frame.env[sym] = _copy(args[p.name])
        ret_syms = []
        for r in fn.returns:
            sym = syms.get(id(r))
            if sym is not None:
                frame.env[sym] = default_for(r.type)
            ret_syms.append((r, sym))
        explicit = None
        try:
            frame.stmt(fn.body)
        except _Return as r:
            explicit = r.value
        returns = {}
        for r, sym in ret_syms:
            returns[r.name] = frame.env[sym] if sym is not None else default_for(r.type)
        if explicit is not None and len(fn.returns) == 1:
            returns[fn.returns[0].name] = explicit
        local_values = {s.name: frame.env[s] for s in res.locals if s in frame.env}
        return ExecutionResult(returns, work, local_values, frame.steps)


class _Frame:
    def __init__(self, interp: Interpreter, res, state: dict, sender: bytes):
        self.interp = interp
        self.res = res
        self.state = state
        self.sender = sender
        self.env: dict = {}
        self.steps = 0

    def tick(self):
        self.steps += 1
        if self.steps > self.interp.step_limit:
            raise ExecutionError("StepLimit", "step limit exceeded")

    # -- statements ---------------------------------------------------------

    def stmt(self, s):
        self.tick()
        if isinstance(s, A.Block):
            for c in s.stmts:
                self.stmt(c)
        elif isinstance(s, A.VarDeclStmt):
            d = s.decl
            sym = self._decl_symbol(d)
            value = self.eval(d.init) if d.init is not None else default_for(d.type)
            if sym is not None:
                self.env[sym] = value
        elif isinstance(s, A.ExprStmt):
            self.eval(s.expr)
        elif isinstance(s, A.If):
            if self.eval(s.cond):
                self.stmt(s.then)
            elif s.orelse is not None:
                self.stmt(s.orelse)
        elif isinstance(s, A.For):
            if s.init is not None:
                self.stmt(s.init)
            while s.cond is None or self.eval(s.cond):
                self.tick()
                self.stmt(s.body)
                if s.update is not None:
                    self.eval(s.update)
        elif isinstance(s, A.Return):
            raise _Return(self.eval(s.value) if s.value is not None else None)
        else:
            raise TypeError(f"unexpected statement {s!r}")

    def _decl_symbol(self, d):
        for sym in self.res.locals:
            if sym.decl is d:
                return sym
        return None

    # -- expressions --------------------------------------------------------

    def static_type(self, e):
        if isinstance(e, A.Identifier):
            sym = self.res.lookup(e)
            return sym.type if sym else None
        if isinstance(e, A.IndexAccess):
            base = self.static_type(e.base)
            if isinstance(base, A.MappingType):
                return base.value
            if isinstance(base, A.ArrayType):
                return base.elem
        return None

    def eval(self, e):
        if isinstance(e, A.Literal):
            return e.value
        if isinstance(e, A.Identifier):
            sym = self.res.lookup(e)
            if sym is None:
                raise ExecutionError("Unbound", f"unbound identifier '{e.name}'")
            if sym.kind == STATE:
                return self.state[sym.name]
            return self.env.get(sym, default_for(sym.type))
        if is_msg_sender(e):
            return self.sender
        if isinstance(e, A.MemberAccess):
            base = self.eval(e.base)
            if e.member == "length" and isinstance(base, list):
                return len(base)
            raise ExecutionError("BadMember", f"no member '{e.member}'")
        if isinstance(e, A.IndexAccess):
            base = self.eval(e.base)
            key = self.eval(e.index)
            return self._read_index(base, key, e)
        if isinstance(e, A.BinaryOp):
            return self.binary(e)
        if isinstance(e, A.UnaryOp):
            if e.op == "!":
                return not self.eval(e.operand)
            if e.op == "-":
                return (-self.eval(e.operand)) % encoding.UINT_MOD
            old = self.eval(e.operand)
            new = (old + (1 if e.op == "++" else -1)) % encoding.UINT_MOD
            self.store(e.operand, new)
            return new if e.prefix else old
        if isinstance(e, A.Assignment):
            value = self.eval(e.value)
            if e.op != "=":
                cur = self.eval(e.target)
                value = (cur + value if e.op == "+=" else cur - value) % encoding.UINT_MOD
            self.store(e.target, value)
            return value
        if isinstance(e, A.Reveal):
            return self.eval(e.expr)
        if isinstance(e, A.Call):
            target = self.eval(e.callee.base)
            args = [self.eval(a) for a in e.args]
            method = getattr(target, e.callee.member, None)
            if method is None:
                raise ExecutionError("BadCall", f"no host binding for '{e.callee.member}'")
            return method(*args)
        raise TypeError(f"unexpected expression {e!r}")

    def _read_index(self, base, key, e):
        if isinstance(base, list):
            if not 0 <= key < len(base):
                raise ExecutionError("IndexOutOfBounds", f"index {key} out of bounds ({len(base)})")
            return base[key]
        if isinstance(base, dict):
            if key in base:
                return base[key]
            return default_for(self.static_type(e))
        raise ExecutionError("BadIndex", "value is not indexable")

    def binary(self, e):
        op = e.op
        if op == "&&":
            return bool(self.eval(e.left)) and bool(self.eval(e.right))
        if op == "||":
            return bool(self.eval(e.left)) or bool(self.eval(e.right))
        a, b = self.eval(e.left), self.eval(e.right)
        if op == "+":
            return (a + b) % encoding.UINT_MOD
        if op == "-":
            return (a - b) % encoding.UINT_MOD
        if op == "*":
            return (a * b) % encoding.UINT_MOD
        if op in ("/", "%"):
            if b == 0:
                raise ExecutionError("DivisionByZero", "division by zero")
            return a // b if op == "/" else a % b
        if op == "<":
            return a < b
        if op == ">":
            return a > b
        if op == "<=":
            return a <= b
        if op == ">=":
            return a >= b
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        raise ExecutionError("BadOperator", op)

    # -- locations ----------------------------------------------------------

    def container(self, e):
        """The mutable list/dict an index expression writes into."""
        if isinstance(e, A.IndexAccess):
            outer = self.container(e.base)
            key = self.eval(e.index)
            if isinstance(outer, dict):
                if key not in outer:
                    outer[key] = default_for(self.static_type(e))
                return outer[key]
            return self._read_index(outer, key, e)
        return self.eval(e)

    def store(self, target, value):
        if isinstance(target, A.Identifier):
            sym = self.res.lookup(target)
            if sym is None:
                raise ExecutionError("Unbound", f"unbound identifier '{target.name}'")
            if sym.kind == STATE:
                self.state[sym.name] = value
            else:
                self.env[sym] = value
            return
        if isinstance(target, A.IndexAccess):
            box = self.container(target.base)
            key = self.eval(target.index)
            if isinstance(box, list):
                if not 0 <= key < len(box):
                    raise ExecutionError("IndexOutOfBounds",
                                         f"index {key} out of bounds ({len(box)})")
                box[key] = value
            elif isinstance(box, dict):
                box[key] = value
            else:
                raise ExecutionError("BadIndex", "value is not indexable")
            return
        raise ExecutionError("NotAnLvalue", "expression is not assignable")
