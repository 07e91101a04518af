"""Protocol driver and security-game harnesses.

A :class:`ProtocolSession` walks one contract through
compile, sign, commit, submit, install, evaluate, prove and settle, keeping
an append-only transcript of public facts about each step. ``run_session``
drives a session from a JSON scenario; the game functions replay or
perturb sessions to exercise privacy, soundness and non-repudiation.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import crypto, enclave
from .clc import (
    REJECT,
    ContractDocument,
    LifecycleState,
    Outcome,
    SignedContract,
    compile_contract,
    contract_digest,
    message_digest,
    sign_contract,
    transitions_valid,
)
from .clc.types import INT, coerce_value, parse_amount, parse_type, runtime_value
from .ledger import LedgerState, SettlementReverted, verify_chain
from .proofsys import CommitStatement, CommitWitness, EvalStatement, ProofBundle, Srs, prove_commit

STEPS = ("compile", "sign", "commit", "submit", "install", "evaluate", "prove", "settle")
REPORT_FORMAT = "zkagree.session-report/1"


class OrchestratorError(Exception):
    pass


class SessionError(OrchestratorError):
    """A module error, annotated with the protocol step that raised it."""

    def __init__(self, step: str, cause: BaseException) -> None:
        super().__init__(f"[{step}] {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause


class ParameterMismatch(OrchestratorError):
    pass


class ScenarioError(OrchestratorError):
    pass


# ------------------------------------------------------------- scenario


def template_path(name: str | Path, base: Path | None = None) -> Path:
    """Resolve a template reference: existing path, path relative to ``base``, or bundled name."""
    candidate = Path(name)
    if candidate.exists():
        return candidate
    if base is not None and (base / candidate).exists():
        return base / candidate
    bundled = resources.files("zkagree") / "templates" / f"{candidate.stem}.yaml"
    if bundled.is_file():
        return Path(str(bundled))
    raise ScenarioError(f"template {str(name)!r} not found")


def bundled_scenarios() -> dict[str, Path]:
    root = resources.files("zkagree") / "scenarios"
    return {Path(str(p)).stem: Path(str(p)) for p in root.iterdir() if p.name.endswith(".json")}


def _seeded_rng(seeds: Mapping[str, int], name: str) -> random.Random:
    if name in seeds:
        return random.Random(seeds[name])
    return random.Random(f"zkagree:{seeds.get('session', 0)}:{name}")


@dataclass
class Scenario:
    name: str
    template: str
    seeds: dict[str, int] = field(default_factory=dict)
    inputs: list[dict[str, Any]] = field(default_factory=list)
    expect: dict[str, Any] = field(default_factory=dict)
    funding: dict[str, Any] = field(default_factory=dict)
    base_dir: Path | None = None

    @classmethod
    def from_json(cls, data: Mapping[str, Any], name: str = "scenario",
                  base_dir: Path | None = None) -> "Scenario":
        if not isinstance(data, Mapping) or "template" not in data:
            raise ScenarioError("scenario must be an object with a 'template' key")
        inputs = data.get("inputs", [])
        if not isinstance(inputs, list) or not all(isinstance(e, Mapping) for e in inputs):
            raise ScenarioError("scenario 'inputs' must be a list of event objects")
        seeds = data.get("seeds", {})
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in seeds.values()):
            raise ScenarioError("scenario seeds must be integers")
        return cls(str(data.get("name", name)), str(data["template"]), dict(seeds),
                   [dict(e) for e in inputs], dict(data.get("expect", {})),
                   dict(data.get("funding", {})), base_dir)

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        return cls.from_json(data, path.stem, path.parent)

    def with_seed(self, seed: int) -> "Scenario":
        """Same scenario with every key and nonce derived from ``seed``."""
        return replace(self, seeds={"session": seed})

    def keys(self, roles: Sequence[str]) -> dict[str, crypto.KeyPair]:
        names = list(roles) + [e["signer"] for e in self.inputs if "signer" in e]
        return {n: crypto.keygen(_seeded_rng(self.seeds, n)) for n in dict.fromkeys(names)}

    def rng(self, purpose: str) -> random.Random:
        # nonces also depend on the scenario name, so scenarios sharing a
        # session seed can run against one ledger without reusing k
        if purpose in self.seeds:
            return random.Random(self.seeds[purpose])
        return random.Random(f"zkagree:{self.seeds.get('session', 0)}:{self.name}:{purpose}")


# -------------------------------------------------------------- session


def _coerce_input(doc: ContractDocument, name: str, raw: Any) -> Any:
    types = doc.input_types()
    if name not in types:
        raise ScenarioError(f"event sets undeclared input {name!r}")
    if parse_type(types[name]) == INT and isinstance(raw, str):
        return parse_amount(raw)
    return raw


class ProtocolSession:
    """One contract's run through the protocol. Single-threaded."""

    def __init__(self, doc: ContractDocument, keys: Mapping[str, crypto.KeyPair], ledger: LedgerState,
                 srs: Srs, nullifier_rng: random.Random | None = None,
                 enclave_rng: random.Random | None = None, label: str = "") -> None:
        self.doc = doc
        self.keys = dict(keys)
        self.ledger = ledger
        self.srs = srs
        self.label = label
        self.lifecycle = LifecycleState()
        self.transcript: list[dict[str, Any]] = []
        self.inputs: dict[str, Any] = {}
        self.signed: SignedContract | None = None
        self.clc_comm: int | None = None
        self.commit_statement: CommitStatement | None = None
        self.commit_proof: ProofBundle | None = None
        self.registration: dict[str, Any] | None = None
        self.instance: enclave.EnclaveInstance | None = None
        self.attestation: enclave.AttestedOutcome | None = None
        self.statement: EvalStatement | None = None
        self.proof: ProofBundle | None = None
        self.pre_settle: LedgerState | None = None
        self.settlement: dict[str, Any] | None = None
        self._k: int | None = None
        self._nullifier_rng = nullifier_rng
        self._enclave_rng = enclave_rng
        self._record("compile", contract=doc.name, value_v=doc.value_v,
                     logic_digest=crypto.field_hex(doc.logic.digest()))

    def _record(self, step: str, **facts: Any) -> None:
        self.transcript.append({"step": step, **facts})

    def _run(self, step: str, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (SessionError, ScenarioError):
            raise
        except Exception as exc:
            raise SessionError(step, exc) from exc

    def pk(self, role: str) -> bytes:
        pk = self.doc.pk(role)
        if pk is None:
            raise OrchestratorError(f"party {role!r} has no key")
        return pk

    # -- steps ----------------------------------------------------------

    def sign(self) -> SignedContract:
        buyer, seller = self.doc.roles["buyer"], self.doc.roles["seller"]
        self.signed = self._run("sign", sign_contract, self.keys[buyer].sk, self.keys[seller].sk, self.doc)
        self._record("sign", contract_digest=crypto.field_hex(self.signed.digest))
        return self.signed

    def commit(self) -> int:
        def go():
            self._k = crypto.random_field(self._nullifier_rng)
            stmt, proof = prove_commit(self.srs, CommitWitness(self._k, self.signed.program_digest()))
            return stmt, proof
        if self.signed is None:
            raise SessionError("commit", OrchestratorError("contract is not signed"))
        self.commit_statement, self.commit_proof = self._run("commit", go)
        self.clc_comm = self.commit_statement.clc_comm
        self._record("commit", clc_comm=crypto.field_hex(self.clc_comm))
        return self.clc_comm

    def submit(self) -> dict[str, Any]:
        if self.clc_comm is None:
            raise SessionError("submit", OrchestratorError("no commitment to submit"))
        buyer, seller = self.doc.roles["buyer"], self.doc.roles["seller"]
        sigs = {self.keys[r].pk.hex(): crypto.sign(self.keys[r].sk, self.clc_comm) for r in (buyer, seller)}
        tx = self._run("submit", self.ledger.submit_commitment, self.clc_comm, self.doc.value_v,
                       self.pk(buyer), sigs, self.lifecycle)
        self.registration = self.ledger.tx_log[-1]
        self._record("submit", height=tx.height, leaf_index=tx.fields["leaf_index"],
                     root=tx.fields["root"])
        return self.registration

    def install(self) -> enclave.EnclaveInstance:
        self.instance = self._run("install", enclave.install, self.signed, self._enclave_rng)
        self._record("install", measurement=crypto.field_hex(self.instance.measurement),
                     attestation_pk=self.instance.attestation_pk.hex())
        return self.instance

    def evidence(self, event: Mapping[str, Any]) -> None:
        """Apply one scripted event: set inputs, sign a message, drive rental phases."""
        def go():
            kind = event.get("event", "evidence")
            for name, raw in (event.get("set") or {}).items():
                self.inputs[name] = _coerce_input(self.doc, name, raw)
            if "signer" in event:
                sig_field = event["sign"]["field"]
                over = [self._runtime_input(n) for n in event["sign"]["over"]]
                sk = self.keys[event["signer"]].sk
                self.inputs[sig_field] = crypto.sign(sk, message_digest(over)).hex()
            if kind == "inspection":
                self.lifecycle.submit_inspection(True)
            elif kind == "decision":
                decision = self.inputs.get(event.get("decision_input", "tenantDecision"))
                self.lifecycle.tenant_decision(str(decision))
            return kind
        kind = self._run("evidence", go)
        self._record("evidence", event=kind, fields=sorted((event.get("set") or {}).keys()))

    def _runtime_input(self, name: str) -> Any:
        decl = self.doc.input_types()[name]
        return runtime_value(decl, coerce_value(decl, self.inputs[name]))

    def evaluate(self) -> enclave.AttestedOutcome:
        if self.instance is None:
            raise SessionError("evaluate", OrchestratorError("enclave not installed"))
        self.attestation = self._run("evaluate", self.instance.execute_evaluation, self.inputs,
                                     self.lifecycle)
        self._record("evaluate", **self.attestation.to_json())
        return self.attestation

    def prove(self) -> EvalStatement:
        def go():
            leaf_index = self.registration["leaf_index"]
            siblings, dirs, rt = self.ledger.inclusion_proof(leaf_index)
            return self.instance.generate_settlement_proof(self.srs, self._k, rt, siblings, dirs)
        self.statement, self.proof, att = self._run("prove", go)
        if self.statement.rat_numerator != att.outcome.numerator:
            raise SessionError("prove", OrchestratorError("statement and attested outcome disagree"))
        self.attestation = att
        self.pre_settle = self.ledger.copy()
        self._record("prove", statement=self.statement.to_json(), proof_bytes=len(self.proof.proof))
        return self.statement

    def settle(self) -> dict[str, Any]:
        ratio_pk = self.pk(self.doc.payout.ratio_payee)
        comp_pk = self.pk(self.doc.payout.complement_payee)
        before = {r: self.ledger.balance(self.pk(r)) for r in self.doc.parties}
        tx = self._run("settle", self.ledger.settle, self.proof, self.statement, ratio_pk, comp_pk,
                       self.lifecycle)
        self.settlement = {r: self.ledger.balance(self.pk(r)) - before[r] for r in self.doc.parties}
        self._record("settle", height=tx.height, digest=tx.digest)
        return self.settlement

    # -- views ----------------------------------------------------------

    @property
    def outcome(self) -> Outcome | None:
        return self.attestation.outcome if self.attestation is not None else None

    def steps(self) -> list[str]:
        return [e["step"] for e in self.transcript]

    def public_transcript(self, since_height: int = 0) -> list[dict[str, Any]]:
        """Ledger records plus the evaluation statement; what an outside observer sees."""
        out = [dict(r) for r in self.ledger.tx_log if r["height"] > since_height]
        if self.statement is not None:
            out.append({"kind": "STATEMENT", **self.statement.to_json()})
        return out

    def drive(self, events: Sequence[Mapping[str, Any]] = ()) -> "ProtocolSession":
        """Run every step; stops after evaluation if the outcome is REJECT."""
        self.sign()
        self.commit()
        self.submit()
        self.install()
        for event in events:
            self.evidence(event)
        if self.evaluate().outcome.kind == REJECT:
            return self
        self.prove()
        self.settle()
        return self


# --------------------------------------------------------------- report


@dataclass
class SessionReport:
    scenario: str
    lifecycle: str
    phase: str
    outcome: str | None
    balances: dict[str, int]
    payouts: dict[str, int]
    escrow: int
    history: list[list[str]]
    transcript: list[dict[str, Any]]
    statements: dict[str, Any]
    attestation: dict[str, Any] | None
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict[str, Any]:
        return {
            "format": REPORT_FORMAT,
            "scenario": self.scenario,
            "lifecycle": self.lifecycle,
            "phase": self.phase,
            "outcome": self.outcome,
            "balances": self.balances,
            "payouts": self.payouts,
            "escrow": self.escrow,
            "history": self.history,
            "transcript": self.transcript,
            "statements": self.statements,
            "attestation": self.attestation,
            "expectations_met": self.ok,
            "mismatches": self.mismatches,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def check_expectations(report: SessionReport, expect: Mapping[str, Any]) -> list[str]:
    problems = []
    if "lifecycle" in expect and expect["lifecycle"] != report.lifecycle:
        problems.append(f"lifecycle: expected {expect['lifecycle']}, got {report.lifecycle}")
    if "phase" in expect and expect["phase"] != report.phase:
        problems.append(f"phase: expected {expect['phase']}, got {report.phase}")
    if "outcome" in expect:
        want = expect["outcome"]
        if isinstance(want, str) and "(" in want:
            kind, arg = want.rstrip(")").split("(", 1)
            want = f"{kind}({parse_amount(arg)})"
        if want != report.outcome:
            problems.append(f"outcome: expected {want}, got {report.outcome}")
    for key in ("payouts", "balances"):
        for role, raw in (expect.get(key) or {}).items():
            got = getattr(report, key).get(role)
            if got != parse_amount(raw):
                problems.append(f"{key}[{role}]: expected {parse_amount(raw)}, got {got}")
    if "escrow" in expect and parse_amount(expect["escrow"]) != report.escrow:
        problems.append(f"escrow: expected {parse_amount(expect['escrow'])}, got {report.escrow}")
    return problems


def build_report(session: ProtocolSession, name: str, expect: Mapping[str, Any] | None = None) -> SessionReport:
    parties = list(session.doc.parties)
    balances = {r: session.ledger.balance(session.pk(r)) for r in parties}
    payouts = session.settlement or {r: 0 for r in parties}
    statements: dict[str, Any] = {}
    if session.commit_statement is not None:
        statements["commit"] = {"clc_comm": crypto.field_hex(session.commit_statement.clc_comm)}
    if session.statement is not None:
        statements["eval"] = session.statement.to_json()
    report = SessionReport(
        scenario=name,
        lifecycle=session.lifecycle.lifecycle.value,
        phase=session.lifecycle.phase.value,
        outcome=str(session.outcome) if session.outcome is not None else None,
        balances=balances,
        payouts=dict(payouts),
        escrow=session.ledger.escrow_total,
        history=[list(t) for t in session.lifecycle.history],
        transcript=list(session.transcript),
        statements=statements,
        attestation=session.attestation.to_json() if session.attestation is not None else None,
    )
    report.mismatches = check_expectations(report, expect or {})
    return report


def prepare_session(scenario: Scenario, ledger: LedgerState, srs: Srs) -> ProtocolSession:
    """Compile the template, derive keys, fund the depositor; returns a session at INIT."""
    try:
        path = template_path(scenario.template, scenario.base_dir)
        unkeyed = compile_contract(path)
        keys = scenario.keys(list(unkeyed.parties))
        doc = unkeyed.with_keys({r: keys[r].pk for r in unkeyed.parties})
    except Exception as exc:
        raise SessionError("compile", exc) from exc
    session = ProtocolSession(doc, keys, ledger, srs, scenario.rng("nullifier"), scenario.rng("enclave"),
                              scenario.name)
    funding = scenario.funding or {doc.roles["buyer"]: doc.value_v}
    for role, raw in funding.items():
        if role not in keys:
            raise ScenarioError(f"funding names unknown party {role!r}")
        ledger.deposit(keys[role].pk, parse_amount(raw))
    return session


def run_session(scenario: Scenario, ledger: LedgerState, srs: Srs) -> SessionReport:
    """Execute all protocol steps for ``scenario``; halts in EVALUATION on REJECT."""
    session = prepare_session(scenario, ledger, srs)
    session.drive(scenario.inputs)
    return build_report(session, scenario.name, scenario.expect)


# ---------------------------------------------------------------- games


def check_transcript(steps: Sequence[str]) -> bool:
    """Standalone FSM checker for session step sequences.

    Accepts any prefix of compile, sign, commit, submit, install,
    evidence*, evaluate, prove, settle.
    """
    pattern = r"(compile( sign( commit( submit( install( evidence)*( evaluate( prove( settle)?)?)?)?)?)?)?)?"
    return re.fullmatch(pattern, " ".join(steps)) is not None


def session_fsm_ok(session: ProtocolSession) -> bool:
    return check_transcript(session.steps()) and transitions_valid(session.lifecycle.history)


def public_parameters(doc: ContractDocument) -> dict[str, Any]:
    return {
        "value_v": doc.value_v,
        "payout": (doc.payout.ratio_payee, doc.payout.complement_payee),
        "roles": dict(doc.roles),
        "party_pks": {r: (p.pk.hex() if p.pk else None) for r, p in doc.parties.items()},
        "schema": [(d.name, d.type, d.optional) for d in doc.data_schema],
    }


def privacy_game(clc_0: ContractDocument, clc_1: ContractDocument, keys: Mapping[str, crypto.KeyPair],
                 srs: Srs, events: Sequence[Mapping[str, Any]] = (), rng: random.Random | None = None
                 ) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
    """Run both contracts on fresh ledgers; return their public transcripts."""
    p0, p1 = public_parameters(clc_0), public_parameters(clc_1)
    diff = sorted(k for k in p0 if p0[k] != p1[k])
    if diff:
        raise ParameterMismatch(f"public parameters differ: {diff}")
    rng = rng or random.Random()
    transcripts = []
    outcomes = []
    for doc in (clc_0, clc_1):
        ledger = LedgerState(srs)
        ledger.deposit(doc.protocol_pk("buyer"), doc.value_v)
        session = ProtocolSession(doc, keys, ledger, srs, random.Random(rng.getrandbits(64)),
                                  random.Random(rng.getrandbits(64)))
        session.drive(events)
        outcomes.append(session.outcome)
        transcripts.append(session.public_transcript())
    if outcomes[0] != outcomes[1]:
        raise ParameterMismatch(f"outcomes differ under the scripted inputs: {outcomes}")
    return transcripts[0], transcripts[1]


# hash-valued fields that may differ between privacy-game transcripts; root/rt
# follow from clc_comm and digest/prev are the chain links over those records
PRIVACY_DIFF_ALLOWED = frozenset({"clc_comm", "h", "signatures", "proof", "root", "rt", "digest", "prev"})


def transcript_diff(t0: Sequence[Mapping[str, Any]], t1: Sequence[Mapping[str, Any]]) -> set[str]:
    """Field names whose values differ between two public transcripts."""
    if len(t0) != len(t1):
        return {"<length>"}
    names: set[str] = set()
    for a, b in zip(t0, t1):
        for key in set(a) | set(b):
            if a.get(key) != b.get(key):
                names.add(key)
    return names


@dataclass(frozen=True)
class Mutation:
    """One targeted perturbation of a settlement.

    ``target`` is one of proof, rt, h, rat_numerator, parties_digest, v.
    For proof, ``bit`` selects the flipped bit; otherwise ``value`` replaces
    the field (default: old value + 1).
    """

    target: str
    value: int | None = None
    bit: int | None = None

    def apply(self, statement: EvalStatement, proof: ProofBundle) -> tuple[EvalStatement, ProofBundle]:
        if self.target == "proof":
            data = bytearray(proof.proof)
            bit = (self.bit or 0) % (len(data) * 8)
            data[bit // 8] ^= 1 << (bit % 8)
            return statement, replace(proof, proof=bytes(data))
        if self.target not in ("rt", "h", "rat_numerator", "parties_digest", "v"):
            raise ValueError(f"unknown mutation target {self.target!r}")
        old = getattr(statement, self.target)
        new = old + 1 if self.value is None else self.value
        if self.target in ("rt", "h", "parties_digest") and self.value is None:
            new %= crypto.P
        return replace(statement, **{self.target: new}), proof


MUTATION_TARGETS = ("proof", "rt", "h", "rat_numerator", "parties_digest")


def random_mutation(rng: random.Random, statement: EvalStatement, proof: ProofBundle) -> Mutation:
    target = rng.choice(MUTATION_TARGETS)
    if target == "proof":
        return Mutation("proof", bit=rng.randrange(len(proof.proof) * 8))
    old = getattr(statement, target)
    if target == "rat_numerator":
        choices = [v for v in (old + 1, old - 1, rng.randrange(statement.v + 1), 0, statement.v)
                   if v != old and v >= 0]
        return Mutation(target, rng.choice(choices))
    new = rng.choice([(old + 1) % crypto.P, rng.randrange(crypto.P), old ^ (1 << rng.randrange(250))])
    return Mutation(target, new if new != old else (old + 1) % crypto.P)


@dataclass(frozen=True)
class SettleResult:
    accepted: bool
    error: str | None
    state_unchanged: bool


def soundness_game(session: ProtocolSession, mutation: Mutation) -> SettleResult:
    """Replay the session's settlement with one field perturbed against its pre-settle ledger."""
    if session.pre_settle is None or session.statement is None:
        raise OrchestratorError("session has no proven settlement to mutate")
    ledger = session.pre_settle.copy()
    statement, proof = mutation.apply(session.statement, session.proof)
    before = ledger.state_hash()
    try:
        ledger.settle(proof, statement, session.pk(session.doc.payout.ratio_payee),
                      session.pk(session.doc.payout.complement_payee))
    except SettlementReverted as exc:
        return SettleResult(False, type(exc).__name__, ledger.state_hash() == before)
    return SettleResult(True, None, False)


def non_repudiation_check(session: ProtocolSession, tx_log: Sequence[Mapping[str, Any]] | None = None
                          ) -> dict[str, Any]:
    """Both contract signatures verify and the registration record is intact in the log."""
    log = list(session.ledger.tx_log if tx_log is None else tx_log)
    issues: list[str] = []
    signed = session.signed
    status = {}
    if signed is None:
        issues.append("no signed contract")
    else:
        c = contract_digest(signed.doc)
        for proto, sig in (("buyer", signed.sigma_buy), ("seller", signed.sigma_sel)):
            pk = signed.doc.protocol_pk(proto)
            if not sig:
                status[proto] = "missing"
                issues.append(f"missing {proto} signature")
            elif pk is None or not crypto.verify(pk, c, sig):
                status[proto] = "invalid"
                issues.append(f"invalid {proto} signature")
            else:
                status[proto] = "valid"
    broken = verify_chain(log)
    if broken is not None:
        issues.append(f"digest chain mismatch at record {broken}")
    registration = None
    if session.clc_comm is not None:
        want = crypto.field_hex(session.clc_comm)
        registration = next((r for r in log if r.get("kind") == "COMMIT" and r.get("clc_comm") == want), None)
    if registration is None:
        issues.append("registration transaction not found")
    elif session.registration is not None and registration != session.registration:
        issues.append("registration transaction differs from the one recorded at submit")
    return {
        "buyer_signature": status.get("buyer", "missing"),
        "seller_signature": status.get("seller", "missing"),
        "registration_present": registration is not None,
        "chain_break": broken,
        "issues": issues,
        "ok": not issues,
    }


__all__ = [
    "MUTATION_TARGETS",
    "PRIVACY_DIFF_ALLOWED",
    "STEPS",
    "Mutation",
    "OrchestratorError",
    "ParameterMismatch",
    "ProtocolSession",
    "Scenario",
    "ScenarioError",
    "SessionError",
    "SessionReport",
    "SettleResult",
    "build_report",
    "bundled_scenarios",
    "check_expectations",
    "check_transcript",
    "non_repudiation_check",
    "prepare_session",
    "privacy_game",
    "public_parameters",
    "random_mutation",
    "run_session",
    "session_fsm_ok",
    "soundness_game",
    "template_path",
    "transcript_diff",
]
