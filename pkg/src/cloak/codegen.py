"""Service contract F and verifier contract V generation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import crypto
from .frontend import ast as A
from .frontend.printer import INDENT, function_lines, var_decl
from .frontend.strip import strip_annotations
from .owners import CheckedContract, FunctionKind
from .policy import PrivacyPolicy, policy_hash

PRAGMA = "pragma solidity 0.5.17;"
SERVICE_INTERFACE = "CloakService"

CLOAK_SERVICE = f"""interface {SERVICE_INTERFACE} {{
    struct RegisterData {{
        string verKey;
        string encKey;
        string[] TEEMRs;
        string IASReport;
    }}

    function registerWorker(address workerId, RegisterData deviceInfo) external;

    function verify(uint256[] proof, uint256 TEEMR, uint256 codeHash, uint256 policyHash, uint256 functionHash, uint256 oldStateHash, uint256 newStateHash, uint256[] returnCommitments) external returns (bool);

    function stateRoot(string slotNames, uint256[] commitments) external returns (uint256);
}}
"""


@dataclass(frozen=True)
class GeneratedArtifacts:
    service_source: str
    verifier_source: str
    service_hash: bytes
    verifier_hash: bytes
    summary: dict = field(default_factory=dict)  # function name -> {kind, lines, codegen_us}


def function_hash(name: str) -> bytes:
    return crypto.digest(crypto.TAG_FUNCTION, name.encode("utf-8"))


def generate_service(checked: CheckedContract) -> str:
    c = strip_annotations(checked.ast)
    return "\n".join(_contract_lines(c.name, c.state_vars, c.functions)) + "\n"


def _contract_lines(name, state_vars, functions) -> list:
    # same layout as the frontend printer
    if not state_vars and not functions:
        return [f"contract {name} {{ }}"]
    lines = [f"contract {name} {{"]
    for v in state_vars:
        lines.append(INDENT + var_decl(v) + ";")
    for i, f in enumerate(functions):
        if i or state_vars:
            lines.append("")
        lines.extend(f if isinstance(f, list) else function_lines(f, 1))
    lines.append("}")
    return lines


def _verify_function(fn_name: str, slots: list, teemr_var: str) -> list:
    ind = INDENT
    body = [
        "if (codeHash != cloakCodeHash || policyHash != cloakPolicyHash) {",
        f"{ind}return false;",
        "}",
        "if (oldStateHash != cloakStateRoot) {",
        f"{ind}return false;",
        "}",
        f"if (newCommitments.length != {len(slots)}) {{",
        f"{ind}return false;",
        "}",
        f'if (cloakService.stateRoot("{",".join(slots)}", newCommitments) != newStateHash) {{',
        f"{ind}return false;",
        "}",
        f"if (!cloakService.verify(proof, {teemr_var}, codeHash, policyHash, "
        f"{crypto.as_uint(function_hash(fn_name))}, oldStateHash, newStateHash, returnCommitments)) {{",
        f"{ind}return false;",
        "}",
        "cloakStateRoot = newStateHash;",
    ]
    body += [f"cloakCommitment_{s} = newCommitments[{i}];" for i, s in enumerate(slots)]
    body.append("return true;")
    head = (f"function verify_{fn_name}(uint[] proof, uint codeHash, uint policyHash, "
            "uint oldStateHash, uint newStateHash, uint[] returnCommitments, "
            "uint[] newCommitments) public returns (bool)")
    return [ind + head + " {"] + [ind * 2 + line for line in body] + [ind + "}"]


def _initialize_function(slots: list) -> list:
    ind = INDENT
    body = [
        "if (cloakInitialized) {",
        f"{ind}return false;",
        "}",
        f"if (initialCommitments.length != {len(slots)}) {{",
        f"{ind}return false;",
        "}",
        "cloakService = service;",
        "cloakStateRoot = initialStateRoot;",
    ]
    body += [f"cloakCommitment_{s} = initialCommitments[{i}];" for i, s in enumerate(slots)]
    body += ["cloakInitialized = true;", "return true;"]
    head = (f"function cloakInitialize({SERVICE_INTERFACE} service, uint initialStateRoot, "
            "uint[] initialCommitments) public returns (bool)")
    return [ind + head + " {"] + [ind * 2 + line for line in body] + [ind + "}"]


def generate_verifier(checked: CheckedContract, policy: PrivacyPolicy, service_source: str = None,
                      runtime_teemr: bytes = None) -> str:
    from . import RUNTIME_VERSION

    stripped = strip_annotations(checked.ast)
    if service_source is None:
        service_source = generate_service(checked)
    teemr = runtime_teemr or crypto.teemr(RUNTIME_VERSION)
    slots = [v.name for v in stripped.state_vars]
    header = list(stripped.state_vars)
    extra = [
        f"{SERVICE_INTERFACE} cloakService",
        f"uint cloakCodeHash = {crypto.as_uint(crypto.code_hash(service_source))}",
        f"uint cloakPolicyHash = {crypto.as_uint(policy_hash(policy))}",
        f"uint cloakTeemr = {crypto.as_uint(teemr)}",
        "uint cloakStateRoot",
        "bool cloakInitialized",
    ] + [f"uint cloakCommitment_{s}" for s in slots]

    members = [_initialize_function(slots)]
    for fn in stripped.functions:
        if checked.kind_of[fn.name] is FunctionKind.MPT:
            members.append(_verify_function(fn.name, slots, "cloakTeemr"))
        else:
            members.append(fn)

    lines = _contract_lines(f"{stripped.name}Verifier", header, members)
    # splice the bookkeeping slots in after the user's state variables
    at = 1 + len(header)
    lines[at:at] = [INDENT + e + ";" for e in extra]
    return f"{PRAGMA}\n\n{CLOAK_SERVICE}\n" + "\n".join(lines) + "\n"


def generate(checked: CheckedContract, policy: PrivacyPolicy) -> GeneratedArtifacts:
    summary = {}
    t0 = time.perf_counter()
    service = generate_service(checked)
    verifier = generate_verifier(checked, policy, service)
    total_us = int((time.perf_counter() - t0) * 1e6)
    fns = checked.ast.functions
    for fn in fns:
        summary[fn.name] = {
            "kind": checked.kind_of[fn.name].value,
            "lines": len(function_lines(strip_annotations(fn), 1)),
            # generation is one pass over the contract; split the time evenly
            "codegen_us": total_us // max(1, len(fns)),
        }
    return GeneratedArtifacts(service, verifier, crypto.code_hash(service),
                              crypto.digest(crypto.TAG_CODE, verifier.encode("utf-8")), summary)
