"""Privacy policy generation and canonical serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass

from . import crypto
from .frontend import ast as A
from .frontend.printer import type_name
from .frontend.resolve import STATE, is_msg_sender, resolve_function, state_symbols
from .frontend.strip import strip_type
from .owners import CheckedContract, FunctionKind


@dataclass(frozen=True)
class VarPolicy:
    name: str
    type: str
    owner: str

    def to_dict(self) -> dict:
        return {"name": self.name, "type": self.type, "owner": self.owner}


@dataclass(frozen=True)
class FunctionPolicy:
    name: str
    kind: FunctionKind
    inputs: tuple = ()
    read: tuple = ()
    mutate: tuple = ()
    returns: tuple = ()
    classes: tuple = ()  # (party-class name, address-array input) pairs

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "kind": self.kind.value,
            "inputs": [v.to_dict() for v in self.inputs],
            "read": list(self.read),
            "mutate": list(self.mutate),
            "returns": [v.to_dict() for v in self.returns],
        }
        if self.classes:
            d["classes"] = dict(self.classes)
        return d

    def class_members(self, cls: str) -> str:
        """Name of the input that lists the members of party class ``cls``."""
        return dict(self.classes)[cls]

    def input(self, name: str) -> VarPolicy:
        for v in self.inputs:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class PrivacyPolicy:
    contract: str
    states: tuple = ()
    functions: tuple = ()

    def to_dict(self) -> dict:
        return {
            "contract": self.contract,
            "states": [s.to_dict() for s in self.states],
            "functions": [f.to_dict() for f in self.functions],
        }

    def function(self, name: str) -> FunctionPolicy:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @classmethod
    def from_dict(cls, d: dict) -> PrivacyPolicy:
        def var(v):
            return VarPolicy(v["name"], v["type"], v["owner"])

        return cls(
            d["contract"],
            tuple(var(s) for s in d["states"]),
            tuple(FunctionPolicy(f["name"], FunctionKind(f["kind"]),
                                 tuple(var(v) for v in f["inputs"]),
                                 tuple(f["read"]), tuple(f["mutate"]),
                                 tuple(var(v) for v in f["returns"]),
                                 tuple(sorted(f.get("classes", {}).items())))
                  for f in d["functions"]),
        )

    @classmethod
    def from_json(cls, data) -> PrivacyPolicy:
        return cls.from_dict(json.loads(data))


def canonical_json(obj) -> bytes:
    """Sorted keys, no insignificant whitespace, UTF-8."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def canonical_bytes(policy: PrivacyPolicy) -> bytes:
    return canonical_json(policy.to_dict())


def policy_hash(policy: PrivacyPolicy) -> bytes:
    return crypto.digest(crypto.TAG_POLICY, canonical_bytes(policy))


def render_owner(ann) -> str:
    """Owner string of a single annotation; class-ness is decided by the caller."""
    if ann is None or ann.kind == A.ALL:
        return "all"
    if ann.kind in (A.ME, A.TEE):
        return ann.kind
    return f"id:{ann.name}"


def decl_owner(decl: A.VarDecl, classes: frozenset = frozenset()) -> str:
    """Owner string of a declaration; element owners take precedence."""
    t = decl.type
    if isinstance(t, A.ArrayType) and t.annotation is not None and not t.annotation.is_binding:
        ann = t.annotation
        if ann.kind == A.ID and ann.name in classes:
            return f"class:{ann.name}"
        return render_owner(ann)
    if isinstance(t, A.MappingType) and t.value_owner is not None:
        return render_owner(t.value_owner)
    return render_owner(decl.owner)


def plain_type(t) -> str:
    return type_name(strip_type(t)).replace(" => ", "=>").replace(" ", "")


def compute_rw_sets(fn: A.FunctionDecl, contract: A.ContractDecl, resolution=None):
    """Syntactic read/mutate sets over whole state containers."""
    res = resolution or resolve_function(contract, fn)
    read, mutate = set(), set()

    def state_root(e):
        while isinstance(e, A.IndexAccess):
            e = e.base
        if isinstance(e, A.Identifier):
            sym = res.lookup(e)
            if sym is not None and sym.kind == STATE:
                return sym.name
        return None

    def visit(e, evaluated=True):
        if isinstance(e, A.Identifier):
            name = state_root(e)
            if name and evaluated:
                read.add(name)
            return
        if is_msg_sender(e):
            return
        if isinstance(e, A.Assignment):
            name = state_root(e.target)
            if name:
                mutate.add(name)
            visit_location(e.target, evaluated=e.op != "=")
            visit(e.value)
            return
        if isinstance(e, A.UnaryOp) and e.op in ("++", "--"):
            name = state_root(e.operand)
            if name:
                mutate.add(name)
            visit(e.operand)
            return
        for c in A.children(e):
            visit(c)

    def visit_location(e, evaluated):
        # the container itself is read only for compound updates; index
        # expressions are always evaluated
        if isinstance(e, A.IndexAccess):
            visit_location(e.base, evaluated)
            visit(e.index)
        else:
            visit(e, evaluated)

    if fn.body is not None:
        for s in A.walk_stmts(fn.body):
            for top in A.stmt_exprs(s):
                visit(top)
    order = [v.name for v in contract.state_vars]
    return (tuple(n for n in order if n in read), tuple(n for n in order if n in mutate))


def generate_policy(checked: CheckedContract) -> PrivacyPolicy:
    c = checked.ast
    states = state_symbols(c)
    state_entries = tuple(VarPolicy(v.name, plain_type(v.type), decl_owner(v)) for v in c.state_vars)
    functions = []
    for fn in c.functions:
        bindings = {p.type.annotation.name: p.name for p in fn.params
                    if isinstance(p.type, A.ArrayType) and p.type.annotation is not None
                    and p.type.annotation.is_binding}
        classes = frozenset(bindings)
        res = resolve_function(c, fn, states)
        read, mutate = compute_rw_sets(fn, c, res)
        functions.append(FunctionPolicy(
            fn.name,
            checked.kind_of[fn.name],
            tuple(VarPolicy(p.name, plain_type(p.type), decl_owner(p, classes)) for p in fn.params),
            read,
            mutate,
            tuple(VarPolicy(r.name, plain_type(r.type), decl_owner(r, classes)) for r in fn.returns),
            tuple(sorted(bindings.items())),
        ))
    return PrivacyPolicy(c.name, state_entries, tuple(functions))
