"""Executes the generated verifier contract text against a host CloakService.

The ledger implements verification natively; this module runs the emitted
Solidity-subset V through the interpreter so tests can check that both make
the same accept/reject decisions.
"""

from __future__ import annotations

from .. import crypto
from ..frontend import parse
from .interpreter import Interpreter
from .ledger import Ledger, ResultAnnouncement

SIG_WORDS = 2


def _word(b: bytes) -> int:
    return int.from_bytes(b, "big")


def _bytes(n: int, size: int = 32) -> bytes:
    return n.to_bytes(size, "big")


def encode_proof(a: ResultAnnouncement) -> list:
    """Signature split into two words, then the signer's verKey."""
    sig = a.signature.rjust(64, b"\0")[-64:]
    return [_word(sig[:32]), _word(sig[32:]), _word(a.signer)]


def encode_returns(a: ResultAnnouncement) -> list:
    out = []
    for addr, c in a.return_commitments:
        out += [_word(addr), _word(c)]
    return out


class HostCloakService:
    """The registration contract's ``verify``/``stateRoot`` backed by a ledger's worker pool."""

    def __init__(self, ledger: Ledger):
        self.ledger = ledger

    def verify(self, proof, teemr, code_hash, policy_hash, function_hash, old_root, new_root,
               return_commitments) -> bool:
        if len(proof) != SIG_WORDS + 1 or len(return_commitments) % 2:
            return False
        signature = _bytes(proof[0]) + _bytes(proof[1])
        signer = _bytes(proof[2])
        if not self.ledger.is_registered(signer, _bytes(teemr)):
            return False
        pairs = [(_bytes(return_commitments[i], 20), _bytes(return_commitments[i + 1]))
                 for i in range(0, len(return_commitments), 2)]
        return crypto.verify_proof(signer, _bytes(policy_hash), _bytes(code_hash), _bytes(old_root),
                                   pairs, _bytes(new_root), signature)

    def stateRoot(self, slot_names: str, commitments) -> int:
        names = slot_names.split(",") if slot_names else []
        if len(names) != len(commitments):
            return 0
        return _word(crypto.state_root({n: _bytes(c) for n, c in zip(names, commitments)}))


class VerifierContract:
    def __init__(self, verifier_source: str, ledger: Ledger):
        sf = parse(verifier_source)
        if not sf.ok or len(sf.contracts) != 1:
            raise ValueError("verifier source must parse to one contract")
        self.contract = sf.contracts[0]
        self.interp = Interpreter(self.contract)
        self.state = self.interp.initial_state()
        self.service = HostCloakService(ledger)
        self.origin = bytes(20)

    def _call(self, fn: str, args: dict) -> bool:
        result = self.interp.call(fn, args, self.state, self.origin)
        ok = bool(next(iter(result.returns.values())))
        if ok:
            self.state = result.state
        return ok

    def initialize(self, initial: crypto.StateCommitment) -> bool:
        return self._call("cloakInitialize", {
            "service": self.service,
            "initialStateRoot": _word(initial.root),
            "initialCommitments": [_word(initial.slots[v.name]) for v in self._slots()],
        })

    def _slots(self):
        return [v for v in self.contract.state_vars
                if ("cloakCommitment_" + v.name) in {s.name for s in self.contract.state_vars}]

    def verify(self, a: ResultAnnouncement) -> bool:
        """False for anything V cannot accept, including functions it has no entry point for."""
        if f"verify_{a.function}" not in {f.name for f in self.contract.functions}:
            return False
        slots = [v.name for v in self._slots()]
        if set(a.new_state.slots) != set(slots):
            return False
        return self._call(f"verify_{a.function}", {
            "proof": encode_proof(a),
            "codeHash": _word(a.code_hash),
            "policyHash": _word(a.policy_hash),
            "oldStateHash": _word(a.old_root),
            "newStateHash": _word(a.new_state.root),
            "returnCommitments": encode_returns(a),
            "newCommitments": [_word(a.new_state.slots[n]) for n in slots],
        })

    @property
    def root(self) -> bytes:
        return _bytes(self.state["cloakStateRoot"])
