"""Commitments, keys, sealed boxes, mock attestation and proof signatures.

Every hash is SHA-256 over ``tag || payload`` with a one-byte domain tag.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey
from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey, X25519PublicKey
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.hashes import SHA256
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from . import encoding

TAG_VALUE = 0x01
TAG_STATE = 0x02
TAG_POLICY = 0x03
TAG_CODE = 0x04
TAG_PROOF = 0x05
TAG_ADDRESS = 0x06
TAG_NONCE = 0x07
TAG_SESSION = 0x08
TAG_REPORT = 0x09
TAG_TEEMR = 0x0A
TAG_DEPLOY = 0x0B
TAG_KEYGEN = 0x0C
TAG_FUNCTION = 0x0D

DIGEST_LEN = 32
NONCE_LEN = 32
IAS_ROOT_SEED = "cloak-mock-ias-root"
QUOTE_OK = "OK"


class DecryptError(Exception):
    pass


def digest(tag: int, *parts: bytes) -> bytes:
    h = hashlib.sha256(bytes([tag]))
    for p in parts:
        h.update(p)
    return h.digest()


def u256(n: int) -> bytes:
    return n.to_bytes(32, "big")


def as_uint(d: bytes) -> int:
    """A digest read as the uint256 the verifier contract stores."""
    return int.from_bytes(d, "big")


def code_hash(service_source: str) -> bytes:
    return digest(TAG_CODE, service_source.encode("utf-8"))


def teemr(runtime_version: str) -> bytes:
    return digest(TAG_TEEMR, f"cloak-runtime/{runtime_version}".encode("utf-8"))


# -- commitments --------------------------------------------------------------

@dataclass(frozen=True)
class Commitment:
    digest: bytes

    def hex(self) -> str:
        return self.digest.hex()


def commit(value, typ, nonce: bytes) -> Commitment:
    if len(nonce) != NONCE_LEN:
        raise ValueError("nonce must be 32 bytes")
    return Commitment(digest(TAG_VALUE, encoding.encode(value, typ), nonce))


def verify_commitment(c: Commitment, value, typ, nonce: bytes) -> bool:
    try:
        return commit(value, typ, nonce) == c
    except (encoding.EncodingError, ValueError):
        return False


@dataclass(frozen=True)
class StateCommitment:
    root: bytes
    slots: Mapping[str, bytes] = field(default_factory=dict)


def state_root(slots: Mapping[str, bytes]) -> bytes:
    parts = []
    for name in sorted(slots):
        raw = name.encode("utf-8")
        parts.append(u256(len(raw)) + raw + slots[name])
    return digest(TAG_STATE, *parts)


def commit_state(state: Mapping[str, object], types: Mapping[str, object],
                 nonces: Mapping[str, bytes]) -> StateCommitment:
    slots = {name: commit(state[name], types[name], nonces[name]).digest for name in state}
    return StateCommitment(state_root(slots), slots)


def derive_nonce(secret: bytes, version: int, label: str) -> bytes:
    return digest(TAG_NONCE, secret, u256(version), label.encode("utf-8"))


# -- keys ---------------------------------------------------------------------

def _raw_public(key) -> bytes:
    return key.public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw)


def address_of(verkey: bytes) -> bytes:
    return digest(TAG_ADDRESS, verkey)[:encoding.ADDRESS_LEN]


@dataclass(frozen=True)
class KeyPair:
    """An Ed25519 signing key and an X25519 encryption key."""

    signing: Ed25519PrivateKey
    encryption: X25519PrivateKey

    @classmethod
    def from_seed(cls, seed: str) -> KeyPair:
        s = seed.encode("utf-8")
        return cls(Ed25519PrivateKey.from_private_bytes(digest(TAG_KEYGEN, b"sign:", s)),
                   X25519PrivateKey.from_private_bytes(digest(TAG_KEYGEN, b"enc:", s)))

    @property
    def verkey(self) -> bytes:
        return _raw_public(self.signing.public_key())

    @property
    def enckey(self) -> bytes:
        return _raw_public(self.encryption.public_key())

    @property
    def address(self) -> bytes:
        return address_of(self.verkey)

    def sign(self, message: bytes) -> bytes:
        return self.signing.sign(message)

    def open(self, sealed: bytes) -> bytes:
        return unseal(self.encryption, sealed)


@dataclass(frozen=True)
class PartyKeys(KeyPair):
    pass


@dataclass(frozen=True)
class ExecutorKeys(KeyPair):
    teemr: bytes = b""

    @classmethod
    def from_seed(cls, seed: str, runtime_version: str = "") -> ExecutorKeys:
        base = KeyPair.from_seed(seed)
        if not runtime_version:
            from . import RUNTIME_VERSION
            runtime_version = RUNTIME_VERSION
        return cls(base.signing, base.encryption, teemr(runtime_version))


def verify_signature(verkey: bytes, message: bytes, signature: bytes) -> bool:
    try:
        Ed25519PublicKey.from_public_bytes(verkey).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


# -- sealed boxes -------------------------------------------------------------

def _box_key(shared: bytes, eph_pub: bytes, recipient: bytes) -> bytes:
    return HKDF(SHA256(), 32, salt=eph_pub + recipient, info=b"cloak-sealed-box").derive(shared)


def seal(recipient_enckey: bytes, plaintext: bytes, ephemeral_seed: bytes) -> bytes:
    """Anonymous authenticated encryption to ``recipient_enckey``.

    The ephemeral key comes from the caller so runs are reproducible.
    """
    eph = X25519PrivateKey.from_private_bytes(digest(TAG_KEYGEN, b"eph:", ephemeral_seed))
    eph_pub = _raw_public(eph.public_key())
    shared = eph.exchange(X25519PublicKey.from_public_bytes(recipient_enckey))
    key = _box_key(shared, eph_pub, recipient_enckey)
    return eph_pub + ChaCha20Poly1305(key).encrypt(bytes(12), plaintext, None)


def unseal(private: X25519PrivateKey, sealed: bytes) -> bytes:
    if len(sealed) < 32 + 16:
        raise DecryptError("ciphertext too short")
    eph_pub, body = sealed[:32], sealed[32:]
    recipient = _raw_public(private.public_key())
    try:
        shared = private.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        return ChaCha20Poly1305(_box_key(shared, eph_pub, recipient)).decrypt(bytes(12), body, None)
    except (InvalidTag, ValueError) as e:
        raise DecryptError("authentication failed") from e


# -- mock attestation ---------------------------------------------------------

def ias_root() -> Ed25519PrivateKey:
    return Ed25519PrivateKey.from_private_bytes(digest(TAG_KEYGEN, IAS_ROOT_SEED.encode()))


def ias_root_verkey() -> bytes:
    return _raw_public(ias_root().public_key())


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


@dataclass(frozen=True)
class RegisterData:
    verKey: str
    encKey: str
    TEEMRs: tuple
    IASReport: str

    def to_dict(self) -> dict:
        return {"verKey": self.verKey, "encKey": self.encKey,
                "TEEMRs": list(self.TEEMRs), "IASReport": self.IASReport}


def key_binding(verkey: bytes, enckey: bytes) -> bytes:
    return digest(TAG_REPORT, verkey, enckey)


def sign_report(report_data: dict, root: Optional[Ed25519PrivateKey] = None) -> str:
    sig = (root or ias_root()).sign(_canonical(report_data))
    return json.dumps({"X-IASReport-Signature": sig.hex(), "reportData": report_data},
                      sort_keys=True)


def mock_attest(keys: ExecutorKeys, quote_status: str = QUOTE_OK) -> RegisterData:
    report_data = {
        "isvEnclaveQuoteStatus": quote_status,
        "isvEnclaveQuoteBody": {
            "REPORTBODY": {
                "MRENCLAVE": keys.teemr.hex(),
                "REPORTDATA": key_binding(keys.verkey, keys.enckey).hex(),
            },
        },
    }
    return RegisterData(keys.verkey.hex(), keys.enckey.hex(), (keys.teemr.hex(),),
                        sign_report(report_data))


def validate_register_data(data: RegisterData, root_verkey: Optional[bytes] = None) -> Optional[str]:
    """None when valid, otherwise ``"BadReport"`` or ``"KeyMismatch"``."""
    try:
        report = json.loads(data.IASReport)
        sig = bytes.fromhex(report["X-IASReport-Signature"])
        body = report["reportData"]
        status = body["isvEnclaveQuoteStatus"]
        rb = body["isvEnclaveQuoteBody"]["REPORTBODY"]
        mrenclave, bound = rb["MRENCLAVE"], rb["REPORTDATA"]
        verkey, enckey = bytes.fromhex(data.verKey), bytes.fromhex(data.encKey)
    except (ValueError, KeyError, TypeError, AttributeError):
        return "BadReport"
    if not verify_signature(root_verkey or ias_root_verkey(), _canonical(body), sig):
        return "BadReport"
    if status != QUOTE_OK or mrenclave not in data.TEEMRs:
        return "BadReport"
    if bound != key_binding(verkey, enckey).hex():
        return "KeyMismatch"
    return None


# -- proof --------------------------------------------------------------------

def proof_digest(policy_hash: bytes, code_hash_: bytes, old_root: bytes,
                 return_commitments, new_root: bytes) -> bytes:
    """``return_commitments`` is a sequence of (address, digest); it is sorted here."""
    for d in (policy_hash, code_hash_, old_root, new_root):
        if len(d) != DIGEST_LEN:
            raise ValueError("digests must be 32 bytes")
    items = sorted((bytes(a), bytes(c)) for a, c in return_commitments)
    return digest(TAG_PROOF, policy_hash, code_hash_, old_root, u256(len(items)),
                  *(a + c for a, c in items), new_root)


def sign_proof(keys: KeyPair, policy_hash: bytes, code_hash_: bytes, old_root: bytes,
               return_commitments, new_root: bytes) -> bytes:
    return keys.sign(proof_digest(policy_hash, code_hash_, old_root, return_commitments, new_root))


def verify_proof(verkey: bytes, policy_hash: bytes, code_hash_: bytes, old_root: bytes,
                 return_commitments, new_root: bytes, signature: bytes) -> bool:
    try:
        d = proof_digest(policy_hash, code_hash_, old_root, return_commitments, new_root)
    except ValueError:
        return False
    return verify_signature(verkey, d, signature)


def commit_bytes(encoded: bytes, nonce: bytes) -> Commitment:
    """Commitment over bytes that are already canonically encoded."""
    if len(nonce) != NONCE_LEN:
        raise ValueError("nonce must be 32 bytes")
    return Commitment(digest(TAG_VALUE, encoded, nonce))
