"""Single-field manipulations of a result announcement.

Shared by the ledger tests, the verifier-contract tests and scenario files.
"""

from __future__ import annotations

from .. import crypto
from .ledger import ResultAnnouncement


def _flip(b: bytes, at: int = 0) -> bytes:
    return b[:at] + bytes([b[at] ^ 0x01]) + b[at + 1:]


def policy_hash(a: ResultAnnouncement) -> ResultAnnouncement:
    return a.with_changes(policy_hash=_flip(a.policy_hash))


def code_hash(a: ResultAnnouncement) -> ResultAnnouncement:
    return a.with_changes(code_hash=_flip(a.code_hash))


def old_root(a: ResultAnnouncement) -> ResultAnnouncement:
    return a.with_changes(old_root=_flip(a.old_root))


def return_commitment(a: ResultAnnouncement) -> ResultAnnouncement:
    items = list(a.return_commitments)
    if not items:
        raise ValueError("announcement has no return commitments")
    addr, c = items[0]
    items[0] = (addr, _flip(c))
    return a.with_changes(return_commitments=tuple(items))


def new_root(a: ResultAnnouncement) -> ResultAnnouncement:
    """Swap in a different, internally consistent new state the executor never signed."""
    slots = dict(a.new_state.slots)
    name = sorted(slots)[0]
    slots[name] = _flip(slots[name])
    return a.with_changes(new_state=crypto.StateCommitment(crypto.state_root(slots), slots))


def signature(a: ResultAnnouncement) -> ResultAnnouncement:
    return a.with_changes(signature=_flip(a.signature, len(a.signature) - 1))


def signer(a: ResultAnnouncement) -> ResultAnnouncement:
    """Re-sign everything with a key that never registered."""
    rogue = crypto.ExecutorKeys.from_seed("rogue-executor")
    sig = crypto.sign_proof(rogue, a.policy_hash, a.code_hash, a.old_root,
                            a.return_commitments, a.new_state.root)
    return a.with_changes(signature=sig, signer=rogue.verkey)


TAMPERS = {
    "policy_hash": policy_hash,
    "code_hash": code_hash,
    "old_root": old_root,
    "return_commitment": return_commitment,
    "new_root": new_root,
    "signature": signature,
    "signer": signer,
}

EXPECTED_REASON = {
    "policy_hash": "HashMismatch",
    "code_hash": "HashMismatch",
    "old_root": "StaleState",
    "return_commitment": "BadSignature",
    "new_root": "BadSignature",
    "signature": "BadSignature",
    "signer": "UnregisteredSigner",
}
