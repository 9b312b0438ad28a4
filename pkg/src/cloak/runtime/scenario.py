"""JSON scenario runner behind ``cloak demo``.

A scenario names a contract, a seed, the parties, and a list of steps:
``register``, ``deploy``, ``submit``, ``execute``, ``verify``, ``open`` and
``state``. Every step may carry ``expect``; a string such as ``"accept"``,
``"reject(StaleState)"``, ``"ready"`` or ``"error(DuplicateSubmission)"``, or
an object of fields that must match. ``"$A"`` stands for party A's address.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from .. import crypto, encoding
from ..pipeline import compile_source
from .client import OpenError, PartyClient, deploy
from .executor import Executor, SessionError
from .interpreter import ExecutionError
from .ledger import Ledger, LedgerError
from .tamper import TAMPERS

STEP_KINDS = ("register", "deploy", "submit", "execute", "verify", "open", "state")


class ScenarioError(Exception):
    pass


@dataclass
class Scenario:
    name: str
    contract_path: Path
    seed: str
    parties: list
    steps: list
    source: Optional[Path] = None


@dataclass
class Report:
    lines: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)  # per step: the observed value
    final_root: str = ""
    run: object = None

    @property
    def ok(self) -> bool:
        return not self.mismatches


def bundled(name: str) -> Path:
    return Path(str(resources.files("cloak") / "data" / name))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ScenarioError(f"{path}: invalid JSON: {e}") from None
    return scenario_from_dict(data, path)


def scenario_from_dict(data: dict, path: Optional[Path] = None) -> Scenario:
    for key in ("contract", "parties", "steps"):
        if key not in data:
            raise ScenarioError(f"scenario is missing '{key}'")
    contract = Path(data["contract"])
    if not contract.is_absolute():
        local = (path.parent / contract) if path else contract
        contract = local if local.exists() else bundled("corpus") / contract
    if not contract.exists():
        raise ScenarioError(f"contract file {data['contract']} not found")
    for i, step in enumerate(data["steps"]):
        if step.get("op") not in STEP_KINDS:
            raise ScenarioError(f"step {i}: unknown op {step.get('op')!r}")
    return Scenario(data.get("name", contract.stem), contract, str(data.get("seed", "")),
                    list(data["parties"]), list(data["steps"]), path)


class _Run:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.ledger = Ledger()
        self.executors = {}
        self.parties = {n: PartyClient.from_name(n, sc.seed) for n in sc.parties}
        res = compile_source(sc.contract_path.read_text(encoding="utf-8"), str(sc.contract_path))
        if not res.ok:
            raise ScenarioError(f"{sc.contract_path} does not compile: {res.diagnostics[0].message}")
        self.compiled = res
        self.contract_id = None
        self.session = None
        self.announcement = None
        self.active = None

    def executor(self, name: str) -> Executor:
        ex = self.executors.get(name)
        if ex is None:
            keys = crypto.ExecutorKeys.from_seed(f"executor:{self.sc.seed}:{name}")
            ex = self.executors[name] = Executor(keys, self.ledger, f"{self.sc.seed}:{name}")
        return ex

    def subst(self, value):
        if isinstance(value, str) and value.startswith("$"):
            party = self.parties.get(value[1:])
            if party is None:
                raise ScenarioError(f"unknown party {value}")
            return "0x" + party.address.hex()
        if isinstance(value, list):
            return [self.subst(v) for v in value]
        if isinstance(value, dict):
            return {k: self.subst(v) for k, v in value.items()}
        return value

    def party(self, step) -> PartyClient:
        name = step.get("party")
        if name not in self.parties:
            raise ScenarioError(f"unknown party {name!r}")
        return self.parties[name]

    # -- steps ----------------------------------------------------------------

    def register(self, step):
        ex = self.executor(step.get("executor", "E"))
        return str(self.ledger.register_worker(ex.register_data()))

    def deploy(self, step):
        ex = self.executor(step.get("executor", "E"))
        try:
            self.contract_id = deploy(self.ledger, ex, self.compiled.artifacts, self.compiled.policy)
        except LedgerError as e:
            return f"error({e.code})"
        self.active = ex
        return "ok"

    def submit(self, step):
        party = self.party(step)
        inputs = self.subst(step.get("inputs", {}))
        try:
            if "function" in step:
                self.session = party.call(self.active, self.contract_id, step["function"], inputs)
                return str(self.session.status)
            if self.session is None:
                raise ScenarioError("submit without an open session")
            return str(party.submit(self.active, self.session.session_id, inputs))
        except SessionError as e:
            return f"error({e.code})"

    def execute(self, step):
        try:
            self.announcement = self.active.execute_mpt(self.session.session_id)
        except (SessionError, ExecutionError) as e:
            return f"error({getattr(e, 'code', None) or e.reason})"
        result = self.active.last_result
        fp = self.compiled.policy.function(self.session.function)
        types = {r.name: r.type for r in fp.returns}
        return {
            "status": "ok",
            "returns": {k: encoding.to_json(v, types[k]) for k, v in result.returns.items()},
            "locals": {k: v for k, v in result.locals.items() if isinstance(v, int)},
        }

    def verify(self, step):
        ann = self.announcement
        if ann is None:
            raise ScenarioError("verify before execute")
        tamper = step.get("tamper")
        if tamper:
            if tamper not in TAMPERS:
                raise ScenarioError(f"unknown tamper {tamper!r}")
            ann = TAMPERS[tamper](ann)
        return str(self.ledger.verify_and_update(ann))

    def open(self, step):
        try:
            values = self.party(step).open_result(self.announcement, self.compiled.policy)
        except OpenError as e:
            return f"error({e.code})"
        fp = self.compiled.policy.function(self.announcement.function)
        types = {r.name: encoding.parse_type(r.type) for r in fp.returns}
        out = {}
        for k, v in values.items():
            t = types[k]
            try:
                encoding.check_value(v, t)
            except encoding.EncodingError:
                t = t.elem  # one element of a class-owned array
            out[k] = encoding.to_json(v, t)
        return out

    def state(self, step):
        state = self.active.plaintext_state(self.contract_id)
        types = self.active.deployed[self.contract_id].types
        return {k: encoding.to_json(v, types[k]) for k, v in state.items()}


def _matches(expected, actual) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(
            k in actual and _matches(v, actual[k]) for k, v in expected.items())
    if isinstance(expected, list) and isinstance(actual, list):
        # mapping entries: compare as sets of pairs
        return sorted(map(json.dumps, expected)) == sorted(map(json.dumps, actual))
    return expected == actual


def run_scenario(sc: Scenario) -> Report:
    report = Report()
    run = _Run(sc)
    for i, step in enumerate(sc.steps):
        op = step["op"]
        actual = getattr(run, op)(step)
        report.outcomes.append(actual)
        shown = json.dumps(actual, sort_keys=True) if isinstance(actual, dict) else actual
        report.lines.append(f"[{i}] {op}{' ' + step['party'] if 'party' in step else ''}: {shown}")
        if "expect" in step:
            expected = run.subst(step["expect"])
            if not _matches(expected, actual):
                report.mismatches.append(
                    f"step {i} ({op}): expected {json.dumps(expected, sort_keys=True)}, "
                    f"got {json.dumps(actual, sort_keys=True)}")
    if run.contract_id is not None:
        report.final_root = run.ledger.root(run.contract_id).hex()
        report.lines.append(f"final ledger root: {report.final_root}")
    report.run = run
    return report
