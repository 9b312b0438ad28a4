"""The enclave executor: input collection, execution and proof emission."""

from __future__ import annotations

import copy
import enum
import json
import threading
from dataclasses import dataclass, field
from typing import Optional

from .. import crypto, encoding
from ..frontend import parse
from ..owners import FunctionKind
from ..policy import PrivacyPolicy, policy_hash
from .interpreter import ExecutionError, Interpreter
from .ledger import Ledger, LedgerError, ResultAnnouncement


class SessionError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(message or code)
        self.code = code


class Status(enum.Enum):
    COLLECTING = "collecting"
    READY = "ready"
    EXECUTED = "executed"
    ABORTED = "aborted"

    def __str__(self) -> str:
        return self.value


@dataclass
class MptSession:
    session_id: str
    contract_id: str
    function: str
    initiator: bytes
    expected_parties: frozenset
    args: dict  # supplied by the initiator
    slots: dict  # party address -> [(input name, index or None)] still owed
    received: dict = field(default_factory=dict)  # address -> {input name: value}
    status: Status = Status.COLLECTING
    error: str = ""

    @property
    def missing(self) -> frozenset:
        return frozenset(a for a in self.slots if a not in self.received)


@dataclass
class _Snapshot:
    state: dict
    nonces: dict
    slots: dict
    version: int

    @property
    def root(self) -> bytes:
        return crypto.state_root(self.slots)


@dataclass
class DeployedContract:
    contract_id: str
    policy: PrivacyPolicy
    policy_hash: bytes
    code_hash: bytes
    interpreter: Interpreter
    types: dict
    secret: bytes
    current: _Snapshot
    prior: Optional[_Snapshot] = None  # last state the chain has not confirmed yet
    sessions_opened: int = 0

    @property
    def service_ast(self):
        return self.interpreter.contract


def _nonces(secret: bytes, version: int, names) -> dict:
    return {n: crypto.derive_nonce(secret, version, f"state:{n}") for n in names}


class Executor:
    def __init__(self, keys: crypto.ExecutorKeys, ledger: Ledger, seed: str = "executor"):
        self.keys = keys
        self.ledger = ledger
        self.seed = seed.encode("utf-8")
        self.deployed: dict = {}
        self.sessions: dict = {}
        # party encryption keys; public identities, announced by clients
        self.party_enckeys: dict = {}
        self.last_result = None
        self._lock = threading.RLock()

    @property
    def enckey(self) -> bytes:
        return self.keys.enckey

    def register_data(self) -> crypto.RegisterData:
        return crypto.mock_attest(self.keys)

    # -- deployment ----------------------------------------------------------

    def install(self, service_source: str, policy: PrivacyPolicy) -> str:
        if not self.ledger.is_registered(self.keys.verkey, self.keys.teemr):
            raise LedgerError("UnregisteredExecutor", "executor is not a registered worker")
        source = parse(service_source)
        if not source.ok or len(source.contracts) != 1:
            raise ValueError("service source does not parse to one contract")
        interp = Interpreter(source.contracts[0])
        types = {s.name: encoding.parse_type(s.type) for s in policy.states}
        state = interp.initial_state()
        p_hash, c_hash = policy_hash(policy), crypto.code_hash(service_source)
        with self._lock:
            index = crypto.u256(len(self.ledger.deployments))
            secret = crypto.digest(crypto.TAG_KEYGEN, b"contract:", self.seed, p_hash, c_hash, index)
            nonces = _nonces(secret, 0, types)
            slots = crypto.commit_state(state, types, nonces)
            cid = self.ledger.add_deployment(self.keys.verkey, p_hash, c_hash, self.keys.teemr, slots)
            self.deployed[cid] = DeployedContract(
                cid, policy, p_hash, c_hash, interp, types, secret,
                _Snapshot(state, nonces, dict(slots.slots), 0))
        return cid

    def plaintext_state(self, contract_id: str) -> dict:
        return copy.deepcopy(self.deployed[contract_id].current.state)

    def recommit(self, contract_id: str) -> bytes:
        dc = self.deployed[contract_id]
        cur = dc.current
        return crypto.commit_state(cur.state, dc.types, cur.nonces).root

    # -- sessions ------------------------------------------------------------

    def _decrypt(self, sealed: bytes) -> dict:
        try:
            return json.loads(self.keys.open(sealed))
        except crypto.DecryptError as e:
            raise SessionError("DecryptFailure", str(e)) from None
        except ValueError:
            raise SessionError("DecryptFailure", "payload is not JSON") from None

    def open_session(self, contract_id: str, function: str, initiator: bytes, sealed: bytes) -> MptSession:
        """The initiator's transaction: it names the call and supplies the public inputs."""
        dc = self.deployed.get(contract_id)
        if dc is None:
            raise SessionError("UnknownContract", contract_id)
        try:
            fp = dc.policy.function(function)
        except KeyError:
            raise SessionError("UnknownFunction", function) from None
        payload = self._decrypt(sealed).get("inputs", {})
        if not isinstance(payload, dict):
            raise SessionError("TypeMismatch", "inputs must be an object")
        params = {v.name for v in fp.inputs}
        owed_by_name = {}
        args = {}
        # first the inputs the initiator supplies directly
        for v in fp.inputs:
            if v.owner.startswith("class:") or (v.owner.startswith("id:") and v.owner[3:] in params):
                continue
            args[v.name] = self._typed(payload, v.name, v.type)
        for v in fp.inputs:
            if v.owner.startswith("id:") and v.owner[3:] in params:
                owner_param = v.owner[3:]
                if owner_param not in args:
                    raise SessionError("TypeMismatch", f"owner '{owner_param}' must be a public input")
                owed_by_name[v.name] = [(args[owner_param], None)]
            elif v.owner.startswith("class:"):
                cls = v.owner[6:]
                members = args.get(fp.class_members(cls))
                if members is None:
                    raise SessionError("TypeMismatch", f"party class '{cls}' is not a public input")
                if len(set(members)) != len(members):
                    raise SessionError("DuplicateParty", f"an address appears twice in '{cls}'")
                owed_by_name[v.name] = [(a, i) for i, a in enumerate(members)]
        slots: dict = {}
        for name, owed in owed_by_name.items():
            for addr, idx in owed:
                slots.setdefault(addr, []).append((name, idx))
        expected = frozenset(slots) | {initiator}
        if fp.kind is FunctionKind.MPT and len(expected) < 2:
            raise SessionError("TooFewParties", "an MPT needs at least two parties")
        with self._lock:
            n = dc.sessions_opened
            dc.sessions_opened += 1
            sid = crypto.digest(crypto.TAG_SESSION, contract_id.encode(), function.encode(),
                                initiator, crypto.u256(n)).hex()[:32]
            session = MptSession(sid, contract_id, function, initiator, expected, args, slots)
            if not slots:
                session.status = Status.READY
            self.sessions[sid] = session
        return session

    @staticmethod
    def _typed(values: dict, name: str, typ: str):
        if name not in values:
            raise SessionError("TypeMismatch", f"missing input '{name}'")
        try:
            return encoding.from_json(values[name], typ)
        except (encoding.EncodingError, TypeError, ValueError) as e:
            raise SessionError("TypeMismatch", f"input '{name}': {e}") from None

    def submit_input(self, session_id: str, party: bytes, sealed: bytes) -> Status:
        session = self.sessions.get(session_id)
        if session is None:
            raise SessionError("UnknownSession", session_id)
        payload = self._decrypt(sealed).get("inputs", {})
        dc = self.deployed[session.contract_id]
        fp = dc.policy.function(session.function)
        types = {v.name: encoding.parse_type(v.type) for v in fp.inputs}
        with self._lock:
            if session.status is not Status.COLLECTING:
                raise SessionError("SessionClosed", f"session is {session.status}")
            if party not in session.slots:
                raise SessionError("UnknownParty", "sender has no input slot in this session")
            if party in session.received:
                raise SessionError("DuplicateSubmission", "input already received; first value kept")
            values = {}
            for name, idx in session.slots[party]:
                t = types[name]
                values[name] = self._typed(payload, name, str(t.elem) if idx is not None else str(t))
            session.received[party] = values
            if not session.missing:
                session.status = Status.READY
            return session.status

    def _assemble(self, session: MptSession, fp) -> dict:
        args = dict(session.args)
        for v in fp.inputs:
            if v.owner.startswith("class:"):
                members = args[fp.class_members(v.owner[6:])]
                args[v.name] = [session.received[a][v.name] for a in members]
            elif v.name not in args:
                owner = next(a for a, owed in session.slots.items() if (v.name, None) in owed)
                args[v.name] = session.received[owner][v.name]
        return args

    # -- execution -----------------------------------------------------------

    def _sync(self, dc: DeployedContract):
        root = self.ledger.root(dc.contract_id)
        if dc.current.root == root:
            dc.prior = None
            return
        if dc.prior is not None and dc.prior.root == root:
            # the last announcement never landed; roll back to what the chain holds
            dc.current, dc.prior = dc.prior, None
            return
        raise SessionError("OutOfSync", "enclave state does not match the chain")

    def execute_mpt(self, session_id: str) -> ResultAnnouncement:
        with self._lock:
            session = self.sessions.get(session_id)
            if session is None:
                raise SessionError("UnknownSession", session_id)
            if session.status is not Status.READY:
                raise SessionError("NotReady", f"session is {session.status}")
            dc = self.deployed[session.contract_id]
            fp = dc.policy.function(session.function)
            try:
                self._sync(dc)
                result = dc.interpreter.call(session.function, self._assemble(session, fp),
                                             dc.current.state, session.initiator)
                announcement, snapshot = self._announce(dc, session, fp, result)
            except (ExecutionError, SessionError, encoding.EncodingError) as e:
                session.status = Status.ABORTED
                session.error = getattr(e, "reason", getattr(e, "code", type(e).__name__))
                raise
            dc.prior, dc.current = dc.current, snapshot
            session.status = Status.EXECUTED
            self.last_result = result
            return announcement

    def _announce(self, dc: DeployedContract, session: MptSession, fp, result):
        old = dc.current
        version = old.version + 1
        state = {n: result.state[n] for n in dc.types}
        nonces = dict(old.nonces)
        slots = dict(old.slots)
        fresh = _nonces(dc.secret, version, fp.mutate)
        for name in fp.mutate:
            nonces[name] = fresh[name]
            slots[name] = crypto.commit(state[name], dc.types[name], nonces[name]).digest
        snapshot = _Snapshot(state, nonces, slots, version)
        new_state = crypto.StateCommitment(snapshot.root, dict(slots))

        records = self._route_returns(dc, session, fp, result)
        commitments, payloads = [], {}
        for addr, entries in sorted(records.items()):
            nonce = crypto.derive_nonce(dc.secret, version,
                                        f"return:{session.session_id}:{addr.hex()}")
            enc = encoding.encode_record([(n, t, v) for n, t, v in entries])
            commitments.append((addr, crypto.commit_bytes(enc, nonce).digest))
            body = json.dumps({
                "values": [[n, str(t), encoding.to_json(v, t)] for n, t, v in entries],
                "nonce": nonce.hex(),
            }, sort_keys=True).encode()
            party = self.party_enckeys.get(addr)
            if party is None:
                raise SessionError("UnknownParty", f"no encryption key for {addr.hex()}")
            eph = crypto.digest(crypto.TAG_KEYGEN, dc.secret, b"payload:", nonce)
            payloads[addr] = crypto.seal(party, body, eph)
        commitments = tuple(sorted(commitments))
        sig = crypto.sign_proof(self.keys, dc.policy_hash, dc.code_hash, old.root, commitments,
                                new_state.root)
        ann = ResultAnnouncement(dc.contract_id, session.function, dc.policy_hash, dc.code_hash,
                                 old.root, commitments, new_state, sig, self.keys.verkey, payloads)
        return ann, snapshot

    def announce_key(self, address: bytes, enckey: bytes):
        with self._lock:
            self.party_enckeys[address] = enckey

    def _route_returns(self, dc, session, fp, result) -> dict:
        records: dict = {a: [] for a in session.expected_parties}
        named = dict(session.args)
        named.update(self._assemble(session, fp))
        named.update(result.returns)

        def address_of(name):
            if name in named:
                return named[name]
            if name in result.state:
                return result.state[name]
            raise SessionError("UnknownParty", f"owner '{name}' is not an address in scope")

        for r in fp.returns:
            t = encoding.parse_type(r.type)
            value = result.returns[r.name]
            owner = r.owner
            if owner == "all":
                targets = [(a, value, t) for a in session.expected_parties]
            elif owner == "me":
                targets = [(session.initiator, value, t)]
            elif owner == "tee":
                targets = []
            elif owner.startswith("id:"):
                targets = [(address_of(owner[3:]), value, t)]
            else:
                members = named[fp.class_members(owner[6:])]
                targets = [(a, value[i], t.elem) for i, a in enumerate(members)]
            for addr, v, vt in targets:
                records.setdefault(addr, []).append((r.name, vt, v))
        return {a: e for a, e in records.items() if e}
