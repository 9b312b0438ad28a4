import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import pytest

from cloak import crypto
from cloak.pipeline import compile_source
from cloak.runtime.client import PartyClient, deploy
from cloak.runtime.executor import Executor
from cloak.runtime.ledger import Ledger
from cloak.runtime.scenario import bundled

UINT_MOD = 2 ** 256
LISTING1_PATH = bundled("listing1.cloak")
SUPPLYCHAIN_PATH = bundled("corpus") / "supplychain.cloak"


def read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def compiled(path: str):
    res = compile_source(read(path), str(path))
    assert res.ok, [d.message for d in res.diagnostics]
    return res


def corpus_manifest() -> dict:
    return json.loads(read(bundled("corpus") / "manifest.json"))


def hexaddr(p) -> str:
    return "0x" + p.address.hex()


def reference_bidding(parties, bids, tenderer, balances):
    """Straight-line transcription of the bidding loop, independent of the interpreter."""
    winner, m_price, s_price = parties[0], bids[0], bids[0]
    for i in range(1, len(parties)):
        if bids[i] < m_price:
            winner, s_price, m_price = parties[i], m_price, bids[i]
        elif bids[i] < s_price:
            s_price = bids[i]
    out = dict(balances)
    out[tenderer] = (out.get(tenderer, 0) - s_price) % UINT_MOD
    out[winner] = (out.get(winner, 0) + s_price) % UINT_MOD
    return winner, m_price, s_price, out


def nonzero(m: dict) -> dict:
    return {k: v for k, v in m.items() if v}


@dataclass
class World:
    """One registered executor, one deployment and a set of named parties."""

    ledger: Ledger
    executor: Executor
    result: object
    cid: str
    parties: dict = field(default_factory=dict)

    @classmethod
    def create(cls, path=SUPPLYCHAIN_PATH, seed="world", names="ABCT"):
        ledger = Ledger()
        ex = Executor(crypto.ExecutorKeys.from_seed(f"executor:{seed}"), ledger, seed)
        assert ledger.register_worker(ex.register_data()).ok
        res = compiled(str(path))
        cid = deploy(ledger, ex, res.artifacts, res.policy)
        parties = {n: PartyClient.from_name(n, seed) for n in names}
        return cls(ledger, ex, res, cid, parties)

    def __getitem__(self, name) -> PartyClient:
        return self.parties[name]

    def transact(self, initiator: str, function: str, inputs: dict, submissions=()):
        """Open a session, feed every (party, inputs) pair, execute, verify."""
        session = self[initiator].call(self.executor, self.cid, function, inputs)
        for name, values in submissions:
            self[name].submit(self.executor, session.session_id, values)
        ann = self.executor.execute_mpt(session.session_id)
        verdict = self.ledger.verify_and_update(ann)
        return ann, verdict

    def deposit(self, name: str, amount: int):
        ann, verdict = self.transact(name, "deposit", {"amount": amount})
        assert verdict.ok, verdict
        return ann

    def bid(self, bids: dict, tenderer="T"):
        names = list(bids)
        inputs = {"parties": [hexaddr(self[n]) for n in names], "tenderer": hexaddr(self[tenderer])}
        return self.transact(tenderer, "biddingProcure", inputs,
                             [(n, {"bids": b}) for n, b in bids.items()])


@pytest.fixture
def world():
    return World.create()


@pytest.fixture
def listing1_text():
    return read(LISTING1_PATH)
