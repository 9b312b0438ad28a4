"""In-memory chain: worker registry, verifier state and the announcement log."""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from typing import Optional

from .. import crypto


class LedgerError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "accept" if self.ok else f"reject({self.reason})"


ACCEPT = Verdict(True)


def reject(reason: str) -> Verdict:
    return Verdict(False, reason)


@dataclass(frozen=True)
class ResultAnnouncement:
    contract_id: str
    function: str
    policy_hash: bytes
    code_hash: bytes
    old_root: bytes
    return_commitments: tuple  # sorted (address, digest) pairs
    new_state: crypto.StateCommitment
    signature: bytes
    signer: bytes  # executor verKey
    payloads: dict = field(default_factory=dict)  # address -> sealed (r_i, nonce)

    def signed_fields_ok(self) -> bool:
        return crypto.verify_proof(self.signer, self.policy_hash, self.code_hash, self.old_root,
                                   self.return_commitments, self.new_state.root, self.signature)

    def commitment_for(self, address: bytes) -> Optional[bytes]:
        for a, c in self.return_commitments:
            if a == address:
                return c
        return None

    def to_json(self) -> dict:
        return {
            "contract": self.contract_id,
            "function": self.function,
            "policyHash": self.policy_hash.hex(),
            "codeHash": self.code_hash.hex(),
            "oldRoot": self.old_root.hex(),
            "returnCommitments": [["0x" + a.hex(), c.hex()] for a, c in self.return_commitments],
            "newRoot": self.new_state.root.hex(),
            "newSlots": {k: v.hex() for k, v in sorted(self.new_state.slots.items())},
            "signature": self.signature.hex(),
            "signer": self.signer.hex(),
            "payloads": {"0x" + a.hex(): p.hex() for a, p in sorted(self.payloads.items())},
        }

    def with_changes(self, **kw) -> ResultAnnouncement:
        return replace(self, **kw)


@dataclass
class Deployment:
    contract_id: str
    policy_hash: bytes
    code_hash: bytes
    teemr: bytes
    executor: bytes  # verKey of the executor the contract was deployed to
    state: crypto.StateCommitment


class Ledger:
    """Single-writer chain model; every mutation happens under one lock."""

    def __init__(self, ias_root_verkey: Optional[bytes] = None):
        self.ias_root_verkey = ias_root_verkey or crypto.ias_root_verkey()
        self.workers: dict = {}  # address -> RegisterData
        self.deployments: dict = {}
        self.log: list = []
        self._lock = threading.Lock()

    # -- registration --------------------------------------------------------

    def register_worker(self, data: crypto.RegisterData) -> Verdict:
        problem = crypto.validate_register_data(data, self.ias_root_verkey)
        if problem:
            return reject(problem)
        worker = crypto.address_of(bytes.fromhex(data.verKey))
        with self._lock:
            if worker in self.workers:
                return reject("Duplicate")
            self.workers[worker] = data
        return ACCEPT

    def worker_for(self, verkey: bytes) -> Optional[crypto.RegisterData]:
        return self.workers.get(crypto.address_of(verkey))

    def is_registered(self, verkey: bytes, teemr: Optional[bytes] = None) -> bool:
        data = self.worker_for(verkey)
        if data is None or data.verKey != verkey.hex():
            return False
        return teemr is None or teemr.hex() in data.TEEMRs

    # -- deployment ----------------------------------------------------------

    def add_deployment(self, executor_verkey: bytes, policy_hash: bytes, code_hash: bytes,
                       teemr: bytes, state: crypto.StateCommitment) -> str:
        if not self.is_registered(executor_verkey, teemr):
            raise LedgerError("UnregisteredExecutor", "executor is not a registered worker")
        with self._lock:
            n = len(self.deployments)
            cid = crypto.digest(crypto.TAG_DEPLOY, policy_hash, code_hash, executor_verkey,
                                crypto.u256(n)).hex()[:40]
            self.deployments[cid] = Deployment(cid, policy_hash, code_hash, teemr,
                                               executor_verkey, state)
        return cid

    def root(self, contract_id: str) -> bytes:
        return self.deployments[contract_id].state.root

    # -- verification --------------------------------------------------------

    def check(self, a: ResultAnnouncement) -> Verdict:
        dep = self.deployments.get(a.contract_id)
        if dep is None:
            return reject("UnknownContract")
        if not self.is_registered(a.signer, dep.teemr):
            return reject("UnregisteredSigner")
        if a.policy_hash != dep.policy_hash or a.code_hash != dep.code_hash:
            return reject("HashMismatch")
        if a.old_root != dep.state.root:
            return reject("StaleState")
        if crypto.state_root(a.new_state.slots) != a.new_state.root \
                or set(a.new_state.slots) != set(dep.state.slots):
            return reject("MalformedState")
        if not a.signed_fields_ok():
            return reject("BadSignature")
        return ACCEPT

    def verify_and_update(self, a: ResultAnnouncement) -> Verdict:
        with self._lock:
            verdict = self.check(a)
            if verdict.ok:
                self.deployments[a.contract_id].state = a.new_state
                self.log.append(a)
            return verdict

    def export_log(self) -> str:
        return json.dumps([a.to_json() for a in self.log], sort_keys=True)

    def snapshot(self) -> dict:
        """Everything publicly readable on chain."""
        return {
            "workers": {"0x" + k.hex(): v.to_dict() for k, v in sorted(self.workers.items())},
            "deployments": {
                cid: {"policyHash": d.policy_hash.hex(), "codeHash": d.code_hash.hex(),
                      "teemr": d.teemr.hex(), "root": d.state.root.hex(),
                      "slots": {k: v.hex() for k, v in sorted(d.state.slots.items())}}
                for cid, d in sorted(self.deployments.items())
            },
            "log": [a.to_json() for a in self.log],
        }
