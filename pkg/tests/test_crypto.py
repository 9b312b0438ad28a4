import hashlib
import json

import pytest
from hypothesis import given, settings, strategies as st

from cloak import crypto, encoding
from cloak.crypto import (DecryptError, KeyPair, commit, commit_state, derive_nonce, mock_attest,
                          proof_digest, seal, sign_proof, state_root, unseal,
                          validate_register_data, verify_commitment, verify_proof)

from vectors import EMPTY_STATE_ROOT, SUPPLYCHAIN_INITIAL_ROOT_ZERO_SECRET

UINT = encoding.UINT
N0, N1 = bytes(32), bytes([1]) * 32


def sha(*parts) -> bytes:
    return hashlib.sha256(b"".join(parts)).digest()


# -- golden vectors against an independent hashlib construction -------------------

def test_empty_state_root():
    assert state_root({}).hex() == EMPTY_STATE_ROOT
    assert sha(b"\x02").hex() == EMPTY_STATE_ROOT


def test_value_commitment_layout():
    expected = sha(b"\x01", (5).to_bytes(32, "big"), N0)
    assert commit(5, UINT, N0).digest == expected


def test_state_root_layout():
    slots = {"b": b"\x22" * 32, "a": b"\x11" * 32}
    body = b"".join(len(n).to_bytes(32, "big") + n.encode() + slots[n] for n in sorted(slots))
    assert state_root(slots) == sha(b"\x02", body)


def test_supplychain_initial_root():
    types = {"balances": encoding.parse_type("mapping(address=>uint)"), "mPrice": UINT}
    nonces = {n: derive_nonce(bytes(32), 0, f"state:{n}") for n in types}
    sc = commit_state({"balances": {}, "mPrice": 0}, types, nonces)
    assert sc.root.hex() == SUPPLYCHAIN_INITIAL_ROOT_ZERO_SECRET
    # the same value rebuilt from hashlib alone
    slot = {n: sha(b"\x01", encoding.encode(v, types[n]), nonces[n])
            for n, v in (("balances", {}), ("mPrice", 0))}
    assert slot["mPrice"] == sha(b"\x01", bytes(32), nonces["mPrice"])
    assert slot["balances"] == sha(b"\x01", bytes(32), nonces["balances"])  # zero-length map
    assert state_root(slot).hex() == SUPPLYCHAIN_INITIAL_ROOT_ZERO_SECRET


def test_encoding_layout():
    addr = bytes(range(20))
    assert encoding.encode(True, encoding.BOOL) == b"\x01"
    assert encoding.encode(addr, encoding.ADDRESS) == addr
    assert encoding.encode([1, 2], encoding.parse_type("uint[]")) == \
        (2).to_bytes(32, "big") + (1).to_bytes(32, "big") + (2).to_bytes(32, "big")
    m = encoding.parse_type("mapping(uint=>uint)")
    # default entries are dropped, keys sorted by encoding
    assert encoding.encode({2: 7, 1: 9, 3: 0}, m) == encoding.encode({1: 9, 2: 7}, m)


# -- commitments -------------------------------------------------------------------

def test_commit_verify():
    c = commit(0, UINT, N0)
    assert verify_commitment(c, 0, UINT, N0)


def test_commit_binding():
    assert not verify_commitment(commit(5, UINT, N0), 6, UINT, N0)


def test_commit_hiding_by_nonce():
    assert commit(5, UINT, N0) != commit(5, UINT, N1)


def test_commit_rejects_bad_values():
    with pytest.raises(encoding.EncodingError):
        commit(-1, UINT, N0)
    with pytest.raises(ValueError):
        commit(1, UINT, b"short")


def test_state_root_order_independent():
    a = {"x": b"\x01" * 32, "y": b"\x02" * 32, "z": b"\x03" * 32}
    b = dict(reversed(list(a.items())))
    assert state_root(a) == state_root(b)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from("abcdef"), st.integers(0, 2 ** 256 - 1), min_size=1),
       st.data())
def test_changing_any_slot_changes_root(state, data):
    types = {k: UINT for k in state}
    nonces = {k: derive_nonce(N0, 0, k) for k in state}
    root = commit_state(state, types, nonces).root
    k = data.draw(st.sampled_from(sorted(state)))
    changed = dict(state, **{k: (state[k] + 1) % 2 ** 256})
    assert commit_state(changed, types, nonces).root != root


def test_domain_separation():
    tags = [v for k, v in vars(crypto).items() if k.startswith("TAG_")]
    assert len(tags) == len(set(tags))
    # a value commitment never equals the root over the same bytes
    payload = b"\x00" * 64
    assert crypto.digest(crypto.TAG_VALUE, payload) != crypto.digest(crypto.TAG_STATE, payload)


# -- encryption --------------------------------------------------------------------

def test_seal_round_trip():
    k = KeyPair.from_seed("alice")
    ct = seal(k.enckey, b"hello", b"e" * 32)
    assert k.open(ct) == b"hello"


def test_seal_wrong_key_fails():
    a, b = KeyPair.from_seed("alice"), KeyPair.from_seed("bob")
    ct = seal(a.enckey, b"hello", b"e" * 32)
    with pytest.raises(DecryptError):
        b.open(ct)


def test_seal_tampered_fails():
    a = KeyPair.from_seed("alice")
    ct = bytearray(seal(a.enckey, b"hello", b"e" * 32))
    ct[-1] ^= 1
    with pytest.raises(DecryptError):
        a.open(bytes(ct))


@settings(max_examples=50, deadline=None)
@given(st.binary(max_size=256), st.binary(min_size=32, max_size=32))
def test_seal_round_trip_property(msg, eph):
    k = KeyPair.from_seed("prop")
    assert k.open(seal(k.enckey, msg, eph)) == msg


# -- keys and attestation -------------------------------------------------------------

def test_key_derivation_is_deterministic():
    assert KeyPair.from_seed("x").verkey == KeyPair.from_seed("x").verkey
    assert KeyPair.from_seed("x").address == crypto.address_of(KeyPair.from_seed("x").verkey)
    assert len(KeyPair.from_seed("x").address) == 20
    assert KeyPair.from_seed("x").verkey != KeyPair.from_seed("y").verkey


def test_attestation_accepted():
    keys = crypto.ExecutorKeys.from_seed("e")
    data = mock_attest(keys)
    assert validate_register_data(data) is None
    assert list(data.TEEMRs) == [keys.teemr.hex()]


def _report(data):
    return json.loads(data.IASReport)


def _with_report(data, report):
    return crypto.RegisterData(data.verKey, data.encKey, data.TEEMRs, json.dumps(report))


def test_attestation_tampered_mrenclave():
    data = mock_attest(crypto.ExecutorKeys.from_seed("e"))
    rep = _report(data)
    body = rep["reportData"]["isvEnclaveQuoteBody"]["REPORTBODY"]
    body["MRENCLAVE"] = "00" * 32
    assert validate_register_data(_with_report(data, rep)) == "BadReport"


def test_attestation_tampered_signature():
    data = mock_attest(crypto.ExecutorKeys.from_seed("e"))
    rep = _report(data)
    sig = rep["X-IASReport-Signature"]
    rep["X-IASReport-Signature"] = ("0" if sig[0] != "0" else "1") + sig[1:]
    assert validate_register_data(_with_report(data, rep)) == "BadReport"


def test_attestation_bad_quote_status():
    data = mock_attest(crypto.ExecutorKeys.from_seed("e"), quote_status="GROUP_OUT_OF_DATE")
    assert validate_register_data(data) == "BadReport"


def test_attestation_key_mismatch():
    data = mock_attest(crypto.ExecutorKeys.from_seed("e"))
    other = crypto.ExecutorKeys.from_seed("f")
    swapped = crypto.RegisterData(other.verkey.hex(), data.encKey, data.TEEMRs, data.IASReport)
    assert validate_register_data(swapped) == "KeyMismatch"


def test_register_data_field_names():
    d = mock_attest(crypto.ExecutorKeys.from_seed("e")).to_dict()
    assert set(d) == {"verKey", "encKey", "TEEMRs", "IASReport"}
    rep = json.loads(d["IASReport"])
    assert rep["reportData"]["isvEnclaveQuoteStatus"] == "OK"


# -- proof signatures -------------------------------------------------------------------

FIELDS = dict(policy_hash=b"\x01" * 32, code_hash_=b"\x02" * 32, old_root=b"\x03" * 32,
              return_commitments=((b"\xaa" * 20, b"\x04" * 32), (b"\xbb" * 20, b"\x05" * 32)),
              new_root=b"\x06" * 32)


def _verify(keys, sig, **changes):
    f = dict(FIELDS, **changes)
    return verify_proof(keys.verkey, f["policy_hash"], f["code_hash_"], f["old_root"],
                        f["return_commitments"], f["new_root"], sig)


def test_proof_round_trip():
    k = crypto.ExecutorKeys.from_seed("e")
    sig = sign_proof(k, **FIELDS)
    assert _verify(k, sig)


def _flip(b: bytes) -> bytes:
    return bytes([b[0] ^ 1]) + b[1:]


@pytest.mark.parametrize("field", ["policy_hash", "code_hash_", "old_root", "new_root"])
def test_proof_single_field_tamper(field):
    k = crypto.ExecutorKeys.from_seed("e")
    sig = sign_proof(k, **FIELDS)
    assert not _verify(k, sig, **{field: _flip(FIELDS[field])})


def test_proof_return_commitment_tamper():
    k = crypto.ExecutorKeys.from_seed("e")
    sig = sign_proof(k, **FIELDS)
    (a, c), rest = FIELDS["return_commitments"][0], FIELDS["return_commitments"][1:]
    assert not _verify(k, sig, return_commitments=((a, _flip(c)),) + rest)


def test_proof_signature_bytes_tamper():
    k = crypto.ExecutorKeys.from_seed("e")
    sig = sign_proof(k, **FIELDS)
    assert not _verify(k, sig[:-1] + bytes([sig[-1] ^ 1]))


def test_proof_wrong_signer():
    k, other = crypto.ExecutorKeys.from_seed("e"), crypto.ExecutorKeys.from_seed("o")
    assert not _verify(other, sign_proof(k, **FIELDS))


def test_proof_commitment_order_is_canonical():
    swapped = tuple(reversed(FIELDS["return_commitments"]))
    f = dict(FIELDS, return_commitments=swapped)
    assert proof_digest(**FIELDS) == proof_digest(**f)


def test_nonce_derivation():
    assert derive_nonce(N0, 1, "a") != derive_nonce(N0, 2, "a")
    assert derive_nonce(N0, 1, "a") != derive_nonce(N0, 1, "b")
    assert derive_nonce(N0, 1, "a") == derive_nonce(N0, 1, "a")


def test_unseal_with_raw_key():
    k = KeyPair.from_seed("alice")
    assert unseal(k.encryption, seal(k.enckey, b"m", N1)) == b"m"
