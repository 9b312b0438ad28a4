import re

import pytest

from cloak import crypto
from cloak.codegen import generate, generate_service, generate_verifier
from cloak.frontend import parse, validate_subset
from cloak.owners import FunctionKind, check_contract
from cloak.policy import generate_policy
from cloak.runtime.onchain import VerifierContract
from cloak.runtime.tamper import EXPECTED_REASON, TAMPERS

from conftest import LISTING1_PATH, World, bundled, corpus_manifest, hexaddr, read
from vectors import LISTING1_HASHES

CORPUS = [LISTING1_PATH] + [bundled("corpus") / e["file"] for e in corpus_manifest().values()]


def artifacts_for(text):
    checked = check_contract(parse(text).contracts[0])
    return checked, generate(checked, generate_policy(checked))


def test_listing1_service_body(listing1_text):
    checked, art = artifacts_for(listing1_text)
    svc = art.service_source
    assert "@" not in svc and "reveal" not in svc
    body = [line.strip() for line in svc.splitlines()]
    for expected in ["winner = parties[0];", "uint mPrice = bids[0];", "sPrice = bids[0];",
                     "for (uint i = 1; i < parties.length; i++) {", "if (bids[i] < mPrice) {",
                     "winner = parties[i];", "sPrice = mPrice;", "mPrice = bids[i];",
                     "} else if (bids[i] < sPrice) {", "sPrice = bids[i];",
                     "balances[tenderer] -= sPrice;", "balances[winner] += sPrice;"]:
        assert expected in body


def test_empty_contract_service():
    checked = check_contract(parse("contract C { }").contracts[0])
    assert generate_service(checked) == "contract C { }\n"


def test_listing1_verifier_shape(listing1_text):
    checked, art = artifacts_for(listing1_text)
    v = art.verifier_source
    assert v.startswith("pragma solidity 0.5.17;")
    assert "interface CloakService" in v
    assert "function registerWorker(" in v and "function verify(" in v
    assert re.findall(r"function (verify_\w+)\(", v) == ["verify_biddingProcure"]
    assert "cloakCommitment_balances" in v and "cloakCommitment_mPrice" in v
    sig = re.search(r"function verify_biddingProcure\(([^)]*)\)", v).group(1)
    names = [p.split()[-1] for p in sig.split(",")]
    assert names[:6] == ["proof", "codeHash", "policyHash", "oldStateHash", "newStateHash",
                         "returnCommitments"]


def test_no_mpt_means_no_verify_functions():
    checked, art = artifacts_for("contract C { uint @all a; function f(uint x) public { a = x; } }")
    assert "verify_" not in art.verifier_source.replace("function verify(", "")
    assert "cloakCommitment_a" in art.verifier_source
    assert "function f(uint x) public" in art.verifier_source


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_generated_sources_self_parse(path):
    checked, art = artifacts_for(read(path))
    for text in (art.service_source, art.verifier_source):
        sf = parse(text)
        assert sf.ok, sf.diagnostics
        assert validate_subset(sf) == []


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_verify_function_count_matches_mpt_count(path):
    checked, art = artifacts_for(read(path))
    n_mpt = sum(k is FunctionKind.MPT for k in checked.kind_of.values())
    assert len(re.findall(r"function verify_\w+\(", art.verifier_source)) == n_mpt


@pytest.mark.parametrize("path", CORPUS, ids=lambda p: p.stem)
def test_codegen_deterministic(path):
    _, a = artifacts_for(read(path))
    _, b = artifacts_for(read(path))
    assert a.service_source == b.service_source and a.verifier_source == b.verifier_source
    assert a.service_hash == b.service_hash and a.verifier_hash == b.verifier_hash


def test_hashes_cover_exact_bytes(listing1_text):
    _, art = artifacts_for(listing1_text)
    assert art.service_hash == crypto.code_hash(art.service_source)
    assert art.service_hash.hex() == LISTING1_HASHES["service"]
    assert art.verifier_hash.hex() == LISTING1_HASHES["verifier"]


def test_summary_lists_every_function(listing1_text):
    _, art = artifacts_for(listing1_text)
    assert set(art.summary) == {"biddingProcure"}
    assert art.summary["biddingProcure"]["kind"] == "mpt"


# -- the emitted verifier agrees with the native ledger --------------------------

def test_verifier_text_matches_ledger_decisions():
    w = World.create(seed="onchain")
    v = VerifierContract(w.result.artifacts.verifier_source, w.ledger)
    assert v.initialize(w.ledger.deployments[w.cid].state)
    names = ["A", "B", "C"]
    s = w["T"].call(w.executor, w.cid, "biddingProcure",
                    {"parties": [hexaddr(w[n]) for n in names], "tenderer": hexaddr(w["T"])})
    for n, b in zip(names, (5, 3, 4)):
        w[n].submit(w.executor, s.session_id, {"bids": b})
    ann = w.executor.execute_mpt(s.session_id)
    root = w.ledger.root(w.cid)
    for name, tamper in TAMPERS.items():
        forged = tamper(ann)
        native = w.ledger.verify_and_update(forged)
        assert not native.ok and native.reason == EXPECTED_REASON[name]
        assert v.verify(forged) is False, name
        assert w.ledger.root(w.cid) == root == v.root
    assert w.ledger.verify_and_update(ann).ok and v.verify(ann)
    assert v.root == w.ledger.root(w.cid) != root
    assert not w.ledger.verify_and_update(ann).ok and not v.verify(ann)


def test_uninitialized_verifier_rejects():
    w = World.create(seed="uninit")
    v = VerifierContract(w.result.artifacts.verifier_source, w.ledger)
    assert v.state["cloakInitialized"] is False
    ann, verdict = w.bid({"A": 5, "B": 3})
    assert verdict.ok and v.verify(ann) is False
    # non-MPT functions have no entry point in V
    assert v.verify(w.deposit("T", 100)) is False
