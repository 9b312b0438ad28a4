"""Owner inference, function classification and privacy-flow checking.

Every expression gets an owner set by post-order union of its children.
Unannotated locals carry no declared owner; their owner is the union of
everything ever assigned to them (computed to a fixpoint, flow-insensitive).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .diagnostics import Diagnostic
from .frontend import ast as A
from .frontend.resolve import (LOCAL, PARAM, RETURN, STATE, Resolution, Symbol,
                               is_msg_sender, resolve_function, state_symbols)


@dataclass(frozen=True, order=True)
class OwnerAtom:
    kind: str  # all | me | tee | party | class
    name: str = ""

    def __str__(self) -> str:
        if self.kind == "party":
            return f"id:{self.name}"
        if self.kind == "class":
            return f"class:{self.name}"
        return self.kind


ALL = OwnerAtom("all")
ME = OwnerAtom("me")
TEE = OwnerAtom("tee")
PUBLIC = frozenset({ALL})


def party(name: str) -> OwnerAtom:
    return OwnerAtom("party", name)


def party_class(name: str) -> OwnerAtom:
    return OwnerAtom("class", name)


def fmt_owners(owners) -> str:
    return "{" + ", ".join(str(a) for a in sorted(owners)) + "}"


def private_part(owners) -> frozenset:
    return frozenset(owners) - PUBLIC


class FunctionKind(enum.Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    MPT = "mpt"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FlowDiagnostic(Diagnostic):
    source_owners: frozenset = frozenset()
    dest_owners: frozenset = frozenset()


@dataclass(frozen=True)
class CheckedContract:
    ast: A.ContractDecl
    owner_of: Mapping[int, frozenset]
    kind_of: Mapping[str, FunctionKind]
    diagnostics: tuple = ()
    function_owners: Mapping[str, frozenset] = field(default_factory=dict)
    check_time_us: Mapping[str, int] = field(default_factory=dict, compare=False)

    @property
    def ok(self) -> bool:
        return not any(d.is_error for d in self.diagnostics)


# sentinel for `mapping(address !k => T @k)`: the element owner is the key itself
_KEY = OwnerAtom("key")


class OwnerEnv:
    """Declared owners visible inside one function."""

    def __init__(self, contract: A.ContractDecl, fn: A.FunctionDecl,
                 resolution: Optional[Resolution] = None,
                 states: Optional[dict] = None):
        self.contract = contract
        self.fn = fn
        self.states = states if states is not None else state_symbols(contract)
        self.res = resolution or resolve_function(contract, fn, self.states)
        self.diagnostics: list = []
        self.classes: dict = {}
        self.names: dict = dict(self.states)
        for p in fn.params:
            if p.name:
                self.names[p.name] = self._symbol_for(p, PARAM)
        for r in fn.returns:
            if r.name:
                self.names[r.name] = self._symbol_for(r, RETURN)
        for sym in self.res.locals:
            self.names.setdefault(sym.name, sym)
        self._collect_bindings()
        self.local_owner: dict = {s: PUBLIC for s in self.res.locals if s.owner is None}

    def _symbol_for(self, decl: A.VarDecl, kind: str) -> Symbol:
        for sym in self.res.symbols.values():
            if sym.decl is decl:
                return sym
        return Symbol(decl.name, decl.type, kind, decl, decl.owner)

    def _collect_bindings(self):
        for p in self.fn.params:
            t = p.type
            if isinstance(t, A.ArrayType) and t.annotation is not None and t.annotation.is_binding:
                name = t.annotation.name
                if not (isinstance(t.elem, A.ElementaryType) and t.elem.name == "address"):
                    self.error("InvalidBinding",
                               f"party class '!{name}' must bind an address array", t.annotation.span)
                if name in self.classes:
                    self.error("InvalidBinding", f"party class '{name}' bound twice",
                               t.annotation.span)
                self.classes[name] = p

    def error(self, code: str, message: str, span):
        self.diagnostics.append(Diagnostic(code, message, span))

    # -- annotation resolution ----------------------------------------------

    def resolve(self, ann: A.OwnerAnnotation, key_binding: Optional[str] = None) -> OwnerAtom:
        if ann.kind == A.ALL:
            return ALL
        if ann.kind == A.ME:
            return ME
        if ann.kind == A.TEE:
            return TEE
        name = ann.name
        if key_binding is not None and name == key_binding:
            return _KEY
        if name in self.classes:
            return party_class(name)
        sym = self.names.get(name)
        if sym is None:
            self.error("UnresolvedOwner", f"owner '{name}' does not name a declared address",
                       ann.span)
            return party(name)
        if not (isinstance(sym.type, A.ElementaryType) and sym.type.name == "address"):
            self.error("UnresolvedOwner", f"owner '{name}' has type {sym.type}, expected address",
                       ann.span)
        return party(name)

    def declared(self, sym: Symbol) -> Optional[frozenset]:
        """Declared owner of a variable; None for unannotated locals."""
        if sym.owner is not None:
            return frozenset({self.resolve(sym.owner)})
        if sym.kind == LOCAL:
            return None
        return PUBLIC

    def decl_owners(self, decl: A.VarDecl) -> frozenset:
        """Owner atoms a parameter or return contributes, including element owners."""
        out = set(PUBLIC if decl.owner is None else {self.resolve(decl.owner)})
        t = decl.type
        while isinstance(t, (A.ArrayType, A.MappingType)):
            if isinstance(t, A.ArrayType):
                if t.annotation is not None and not t.annotation.is_binding:
                    out.add(self.resolve(t.annotation))
                t = t.elem
            else:
                if t.value_owner is not None:
                    kb = t.key_binding.name if t.key_binding else None
                    atom = self.resolve(t.value_owner, kb)
                    out.add(party_class(kb) if atom is _KEY else atom)
                t = t.value
        return frozenset(out)

    # -- inference -----------------------------------------------------------

    def root_symbol(self, e) -> Optional[Symbol]:
        while isinstance(e, A.IndexAccess):
            e = e.base
        if isinstance(e, A.Identifier):
            return self.res.lookup(e)
        return None

    def annotated_type(self, e):
        """Declared type (with annotations) of a location expression."""
        if isinstance(e, A.Identifier):
            sym = self.res.lookup(e)
            return sym.type if sym else None
        if isinstance(e, A.IndexAccess):
            base = self.annotated_type(e.base)
            if isinstance(base, A.MappingType):
                return base.value
            if isinstance(base, A.ArrayType):
                return base.elem
        return None

    def element_owner(self, e: A.IndexAccess) -> frozenset:
        """Owner of the element selected by ``e`` (excluding its subexpressions)."""
        base_t = self.annotated_type(e.base)
        root = self.root_symbol(e.base)
        fallback = PUBLIC
        if root is not None:
            fallback = self.declared(root) or self.local_owner.get(root, PUBLIC)
        if isinstance(base_t, A.MappingType) and base_t.value_owner is not None:
            kb = base_t.key_binding.name if base_t.key_binding else None
            atom = self.resolve(base_t.value_owner, kb)
            if atom is _KEY:
                key = e.index
                if isinstance(key, A.Identifier):
                    return frozenset({party(key.name)})
                if is_msg_sender(key):
                    return frozenset({ME})
                return frozenset({party_class(kb)})
            return frozenset({atom})
        if isinstance(base_t, A.ArrayType) and base_t.annotation is not None \
                and not base_t.annotation.is_binding:
            return frozenset({self.resolve(base_t.annotation)})
        return fallback

    def infer(self, e, owner_of: Optional[dict] = None) -> frozenset:
        """Post-order owner inference; records every node in ``owner_of``."""
        if isinstance(e, A.Literal):
            o = PUBLIC
        elif is_msg_sender(e):
            o = PUBLIC
            if owner_of is not None:
                owner_of[e.base.node_id] = PUBLIC
        elif isinstance(e, A.Identifier):
            sym = self.res.lookup(e)
            if sym is None:
                o = PUBLIC
            else:
                o = self.declared(sym)
                if o is None:
                    o = self.local_owner.get(sym, PUBLIC)
        elif isinstance(e, A.IndexAccess):
            o = (self.element_owner(e) | self.infer(e.base, owner_of)
                 | self.infer(e.index, owner_of))
        elif isinstance(e, A.Reveal):
            self.infer(e.expr, owner_of)
            o = frozenset({self.resolve(e.owner)})
        else:
            o = frozenset()
            for c in A.children(e):
                o |= self.infer(c, owner_of)
            if not o:
                o = PUBLIC
        if owner_of is not None:
            owner_of[e.node_id] = o
        return o

    def target_declared(self, target) -> Optional[frozenset]:
        """Declared owner D of an assignment target; None when it is inferred."""
        root = self.root_symbol(target)
        if root is None:
            return None
        if root.kind == LOCAL and root.owner is None:
            return None
        if isinstance(target, A.Identifier):
            return self.declared(root)
        return self.element_owner(target)


def infer_owner(expr, env: OwnerEnv) -> frozenset:
    return env.infer(expr)


def _flow_sources(fn: A.FunctionDecl):
    """(target, source expression, compound) for every binding site in ``fn``."""
    if fn.body is None:
        return
    for s in A.walk_stmts(fn.body):
        if isinstance(s, A.VarDeclStmt) and s.decl.init is not None:
            yield s.decl, s.decl.init, False
        for top in A.stmt_exprs(s):
            for e in A.walk_expr(top):
                if isinstance(e, A.Assignment):
                    yield e.target, e.value, e.op != "="
        if isinstance(s, A.Return) and s.value is not None and len(fn.returns) == 1:
            yield fn.returns[0], s.value, False


def _infer_function(env: OwnerEnv) -> dict:
    fn = env.fn
    # unannotated locals grow monotonically; iterate to a fixpoint
    local_decls = {id(s.decl): s for s in env.local_owner}
    while True:
        owner_of: dict = {}
        for s in A.walk_stmts(fn.body) if fn.body is not None else ():
            for top in A.stmt_exprs(s):
                env.infer(top, owner_of)
        changed = False
        for target, src, compound in _flow_sources(fn):
            sym = (local_decls.get(id(target)) if isinstance(target, A.VarDecl)
                   else env.root_symbol(target))
            if sym is None or sym not in env.local_owner:
                continue
            new = env.local_owner[sym] | owner_of[src.node_id]
            if new != env.local_owner[sym]:
                env.local_owner[sym] = new
                changed = True
        if not changed:
            return owner_of


def classify_function(fn: A.FunctionDecl, owner_of: Mapping[int, frozenset],
                      env: Optional[OwnerEnv] = None) -> FunctionKind:
    return _classify(_function_owners(fn, owner_of, env))


def _function_owners(fn, owner_of, env) -> frozenset:
    owners = set()
    for e in fn.expressions():
        owners |= owner_of.get(e.node_id, PUBLIC)
    if env is not None:
        for d in fn.params + fn.returns:
            owners |= env.decl_owners(d)
    return frozenset(owners)


def _classify(owners: frozenset) -> FunctionKind:
    priv = private_part(owners)
    if TEE in priv or any(a.kind == "class" for a in priv) or len(priv) >= 2:
        return FunctionKind.MPT
    if len(priv) == 1:
        return FunctionKind.PRIVATE
    return FunctionKind.PUBLIC


def flow_allowed(source: frozenset, dest: frozenset, kind: FunctionKind) -> bool:
    """Whether data owned by ``source`` may be bound into a location owned by ``dest``.

    Outside MPTs private data stays with its owner (source ⊆ dest ∪ {all}).
    Inside an MPT the enclave mixes private inputs by design, so data may move
    between private owners but never into a public location without reveal.
    """
    s, d = private_part(source), private_part(dest)
    if kind is FunctionKind.MPT:
        return not s or bool(d)
    return s <= d


def check_consistency(fn: A.FunctionDecl, owner_of: Mapping[int, frozenset],
                      env: OwnerEnv, kind: Optional[FunctionKind] = None) -> list:
    if kind is None:
        kind = classify_function(fn, owner_of, env)
    diags = []
    for target, src, compound in _flow_sources(fn):
        if isinstance(target, A.VarDecl):
            if target.owner is None and target not in fn.returns:
                continue  # unannotated local
            dest = frozenset({env.resolve(target.owner)}) if target.owner else PUBLIC
        else:
            dest = env.target_declared(target)
            if dest is None:
                continue
        source = owner_of[src.node_id]
        if compound:
            source = source | owner_of[target.node_id]
        if not flow_allowed(source, dest, kind):
            diags.append(FlowDiagnostic(
                "ImplicitFlow",
                f"data owned by {fmt_owners(source)} flows into a location owned by "
                f"{fmt_owners(dest)} without reveal",
                src.span, "error", source, dest))
    diags.extend(_reveal_targets(fn, env))
    return diags


def _reveal_targets(fn: A.FunctionDecl, env: OwnerEnv) -> list:
    """Reveals to a local or return variable need it definitely assigned first."""
    diags = []

    def needs_assignment(name: str) -> bool:
        sym = env.names.get(name)
        return sym is not None and sym.kind in (LOCAL, RETURN) and name not in env.classes

    def visit_expr(e, assigned: set):
        if isinstance(e, A.Assignment):
            visit_expr(e.value, assigned)
            visit_expr(e.target, assigned)
            if isinstance(e.target, A.Identifier):
                assigned.add(e.target.name)
            return
        if isinstance(e, A.Reveal):
            visit_expr(e.expr, assigned)
            o = e.owner
            if o.kind == A.ID and needs_assignment(o.name) and o.name not in assigned:
                diags.append(Diagnostic(
                    "UnassignedRevealTarget",
                    f"reveal to '{o.name}' before '{o.name}' is definitely assigned", o.span))
            return
        for c in A.children(e):
            visit_expr(c, assigned)

    def visit(s, assigned: set) -> set:
        if isinstance(s, A.Block):
            for c in s.stmts:
                assigned = visit(c, assigned)
            return assigned
        if isinstance(s, A.VarDeclStmt):
            if s.decl.init is not None:
                visit_expr(s.decl.init, assigned)
                assigned = assigned | {s.decl.name}
            return assigned
        if isinstance(s, (A.ExprStmt, A.Return)):
            for e in A.stmt_exprs(s):
                visit_expr(e, assigned)
            return assigned
        if isinstance(s, A.If):
            visit_expr(s.cond, assigned)
            a1 = visit(s.then, set(assigned))
            a2 = visit(s.orelse, set(assigned)) if s.orelse is not None else assigned
            return a1 & a2
        if isinstance(s, A.For):
            if s.init is not None:
                assigned = visit(s.init, assigned)
            if s.cond is not None:
                visit_expr(s.cond, assigned)
            visit(s.body, set(assigned))
            if s.update is not None:
                visit_expr(s.update, set(assigned))
            return assigned
        return assigned

    if fn.body is not None:
        visit(fn.body, set())
    return diags


def _check_state_owners(contract: A.ContractDecl, states: dict):
    """State annotations may only name address-typed state variables (or a key binding)."""

    def bad(ann, bound=None):
        if ann is None or ann.kind != A.ID or ann.name == bound:
            return None
        sym = states.get(ann.name)
        if sym is None:
            return f"owner '{ann.name}' does not name a declared address"
        if not (isinstance(sym.type, A.ElementaryType) and sym.type.name == "address"):
            return f"owner '{ann.name}' has type {sym.type}, expected address"
        return None

    for v in contract.state_vars:
        found = [(v.owner, None)]
        t = v.type
        while isinstance(t, (A.ArrayType, A.MappingType)):
            if isinstance(t, A.ArrayType):
                found.append((t.annotation, None))
                t = t.elem
            else:
                found.append((t.value_owner, t.key_binding.name if t.key_binding else None))
                t = t.value
        for ann, bound in found:
            msg = bad(ann, bound)
            if msg:
                yield Diagnostic("UnresolvedOwner", msg, ann.span)


def check_contract(contract: A.ContractDecl) -> CheckedContract:
    states = state_symbols(contract)
    owner_of: dict = {}
    kind_of: dict = {}
    fn_owners: dict = {}
    timing: dict = {}
    diags: list = []
    diags.extend(_check_state_owners(contract, states))
    for fn in contract.functions:
        t0 = time.perf_counter()
        env = OwnerEnv(contract, fn, states=states)
        fn_map = _infer_function(env)
        owners = _function_owners(fn, fn_map, env)
        kind = _classify(owners)
        fn_diags = check_consistency(fn, fn_map, env, kind)
        diags.extend(env.diagnostics)
        diags.extend(fn_diags)
        owner_of.update(fn_map)
        kind_of[fn.name] = kind
        fn_owners[fn.name] = owners
        timing[fn.name] = int((time.perf_counter() - t0) * 1e6)
    return CheckedContract(contract, owner_of, kind_of, tuple(_dedupe(diags)), fn_owners, timing)


def _dedupe(diags):
    seen = set()
    for d in diags:
        key = (d.code, d.message, d.span)
        if key not in seen:
            seen.add(key)
            yield d


def debug_lines(checked: CheckedContract) -> list:
    return [f"function {name}: kind={kind} owners={fmt_owners(checked.function_owners[name])} "
            f"time={checked.check_time_us.get(name, 0)}µs"
            for name, kind in checked.kind_of.items()]
