"""Party-side helpers: sealing inputs, deploying, opening results."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .. import crypto, encoding
from ..policy import PrivacyPolicy
from .executor import Executor, Status
from .ledger import ResultAnnouncement


class OpenError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


@dataclass
class PartyClient:
    name: str
    keys: crypto.PartyKeys
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    sent: list = field(default_factory=list)  # every ciphertext this party produced

    @classmethod
    def from_name(cls, name: str, seed: str = "") -> PartyClient:
        keys = crypto.PartyKeys.from_seed(f"party:{seed}:{name}")
        return cls(name, keys, random.Random(f"{seed}:{name}"))

    @property
    def address(self) -> bytes:
        return self.keys.address

    def seal_inputs(self, executor_enckey: bytes, inputs: dict) -> bytes:
        """``inputs`` maps input names to their JSON form (addresses as 0x-hex)."""
        body = json.dumps({"inputs": inputs}, sort_keys=True).encode()
        sealed = crypto.seal(executor_enckey, body, self.rng.randbytes(32))
        self.sent.append(sealed)
        return sealed

    def call(self, executor: Executor, contract_id: str, function: str, inputs: dict):
        executor.announce_key(self.address, self.keys.enckey)
        return executor.open_session(contract_id, function, self.address,
                                     self.seal_inputs(executor.enckey, inputs))

    def submit(self, executor: Executor, session_id: str, inputs: dict) -> Status:
        executor.announce_key(self.address, self.keys.enckey)
        return executor.submit_input(session_id, self.address,
                                     self.seal_inputs(executor.enckey, inputs))

    def open_result(self, announcement: ResultAnnouncement, policy: PrivacyPolicy = None) -> dict:
        return party_open_result(self.keys, announcement, policy)


def party_open_result(keys: crypto.KeyPair, announcement: ResultAnnouncement,
                      policy: PrivacyPolicy = None) -> dict:
    """Decrypt this party's return tuple and check it against the announced commitment."""
    me = keys.address
    sealed = announcement.payloads.get(me)
    commitment = announcement.commitment_for(me)
    if sealed is None or commitment is None:
        raise OpenError("NotAParticipant", "no payload addressed to this party")
    try:
        body = json.loads(keys.open(sealed))
        nonce = bytes.fromhex(body["nonce"])
        entries = [(n, encoding.parse_type(t), encoding.from_json(v, t)) for n, t, v in body["values"]]
    except crypto.DecryptError as e:
        raise OpenError("OpeningMismatch", f"payload does not decrypt: {e}") from None
    except (ValueError, KeyError, TypeError, encoding.EncodingError) as e:
        raise OpenError("OpeningMismatch", f"malformed payload: {e}") from None
    if policy is not None:
        declared = {r.name: encoding.parse_type(r.type) for r in policy.function(announcement.function).returns}
        for n, t, _ in entries:
            if n not in declared or (t != declared[n] and t != declared[n].elem):
                raise OpenError("OpeningMismatch", f"unexpected return entry '{n}'")
    try:
        ok = crypto.commit_bytes(encoding.encode_record(entries), nonce).digest == commitment
    except (ValueError, encoding.EncodingError):
        ok = False
    if not ok:
        raise OpenError("OpeningMismatch", "opening does not match the announced commitment")
    return {n: v for n, _, v in entries}


def deploy(ledger, executor: Executor, artifacts, policy: PrivacyPolicy) -> str:
    """Install F and P in the enclave and record H(P), H(F) and C(s) on chain."""
    return executor.install(artifacts.service_source, policy)
