"""parse -> strip/validate -> owner check -> policy -> codegen."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from . import RUNTIME_VERSION, crypto
from .codegen import GeneratedArtifacts, generate
from .diagnostics import Diagnostic, has_errors
from .frontend import parse, strip_annotations, validate_subset
from .frontend.ast import SourceFile
from .owners import CheckedContract, check_contract
from .policy import PrivacyPolicy, canonical_bytes, canonical_json, generate_policy, policy_hash


@dataclass
class CompileResult:
    source: SourceFile
    diagnostics: list = field(default_factory=list)
    checked: Optional[CheckedContract] = None
    policy: Optional[PrivacyPolicy] = None
    artifacts: Optional[GeneratedArtifacts] = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not has_errors(self.diagnostics)

    def policy_bytes(self) -> bytes:
        return canonical_bytes(self.policy)

    def hashes(self) -> dict:
        return {
            "verifier": self.artifacts.verifier_hash.hex(),
            "service": self.artifacts.service_hash.hex(),
            "policy": policy_hash(self.policy).hex(),
            "runtime": crypto.teemr(RUNTIME_VERSION).hex(),
        }

    def summary(self) -> dict:
        fns = []
        for fn in self.checked.ast.functions:
            fns.append({
                "name": fn.name,
                "kind": self.checked.kind_of[fn.name].value,
                "check_us": self.checked.check_time_us.get(fn.name, 0),
                "codegen_us": self.artifacts.summary[fn.name]["codegen_us"],
            })
        return {"functions": fns, "hashes": self.hashes()}

    def summary_bytes(self) -> bytes:
        return canonical_json(self.summary())


def _single_contract(sf: SourceFile) -> list:
    if len(sf.contracts) != 1:
        return [Diagnostic("ContractCount",
                           f"expected exactly one contract per file, found {len(sf.contracts)}")]
    return []


def check_plain(text: str, path: str = "<input>") -> CompileResult:
    """The ``--solc`` stage: annotations ignored, plain-subset rules only."""
    t0 = time.perf_counter()
    sf = parse(text, path)
    res = CompileResult(sf, list(sf.diagnostics))
    if res.ok:
        res.diagnostics += validate_subset(strip_annotations(sf))
    res.elapsed = time.perf_counter() - t0
    return res


def check(text: str, path: str = "<input>") -> CompileResult:
    """Parse, validate and owner-check; also derives the policy when clean."""
    t0 = time.perf_counter()
    res = check_plain(text, path)
    if res.ok:
        res.diagnostics += _single_contract(res.source)
    if res.ok:
        res.checked = check_contract(res.source.contracts[0])
        res.diagnostics += list(res.checked.diagnostics)
    if res.ok:
        res.policy = generate_policy(res.checked)
    res.elapsed = time.perf_counter() - t0
    return res


def compile_source(text: str, path: str = "<input>") -> CompileResult:
    t0 = time.perf_counter()
    res = check(text, path)
    if res.ok:
        res.artifacts = generate(res.checked, res.policy)
    res.elapsed = time.perf_counter() - t0
    return res
