import dataclasses
import json
import random

import pytest

from conftest import rental_events, run_rental
from zkagree import crypto
from zkagree.clc import Outcome, SignedContract
from zkagree.ledger import LedgerState
from zkagree.orchestrator import (
    PRIVACY_DIFF_ALLOWED,
    STEPS,
    Mutation,
    ParameterMismatch,
    ProtocolSession,
    Scenario,
    ScenarioError,
    SessionError,
    bundled_scenarios,
    check_transcript,
    non_repudiation_check,
    prepare_session,
    privacy_game,
    random_mutation,
    run_session,
    session_fsm_ok,
    soundness_game,
    transcript_diff,
)

ETH = 10 ** 18


@pytest.fixture(scope="module")
def approved(rental_doc, rental_keys, srs):
    return run_rental(rental_doc, rental_keys, srs)


@pytest.mark.parametrize("name", sorted(bundled_scenarios()))
def test_bundled_scenarios_meet_expectations(name, srs):
    report = run_session(Scenario.load(bundled_scenarios()[name]), LedgerState(srs), srs)
    assert report.mismatches == []


def test_rental_approve_report(srs):
    report = run_session(Scenario.load(bundled_scenarios()["rental_approve"]), LedgerState(srs), srs)
    assert report.lifecycle == "COMPLETED"
    assert report.payouts == {"tenant": 2 * ETH, "landlord": 0, "arbitrator": 0, "evaluator": 0}
    assert report.escrow == 0


def test_reject_halts_in_evaluation(srs):
    report = run_session(Scenario.load(bundled_scenarios()["rental_forged_arbitrator"]), LedgerState(srs), srs)
    assert (report.lifecycle, report.outcome, report.escrow) == ("EVALUATION", "REJECT", 2 * ETH)
    assert "prove" not in [e["step"] for e in report.transcript]


def test_reports_are_bit_identical(srs):
    path = bundled_scenarios()["rental_dispute"]
    a = run_session(Scenario.load(path), LedgerState(srs), srs).dumps()
    b = run_session(Scenario.load(path), LedgerState(srs), srs).dumps()
    assert a == b
    c = run_session(Scenario.load(path).with_seed(99), LedgerState(srs), srs).dumps()
    assert c != a


def test_session_seed_replays_on_shared_ledger(srs):
    """Different session seeds on one ledger never collide on the nullifier."""
    ledger = LedgerState(srs)
    base = Scenario.load(bundled_scenarios()["rental_approve"])
    for seed in range(3):
        assert run_session(base.with_seed(seed), ledger, srs).ok
    assert ledger.conserved()


def test_transcript_never_holds_k(approved):
    k = approved._k
    text = json.dumps(approved.transcript)
    assert format(k, "x") not in text and str(k) not in text
    assert all("k" not in e for e in approved.transcript)


def test_statement_matches_attestation(approved):
    assert approved.statement.rat_numerator == approved.attestation.outcome.numerator


def test_fsm_checker_accepts_real_sessions(approved):
    assert approved.steps()[0] == "compile" and approved.steps()[-1] == "settle"
    assert session_fsm_ok(approved)


@pytest.mark.parametrize("steps", [
    ["sign"],
    ["compile", "commit"],
    ["compile", "sign", "commit", "submit", "evaluate"],
    ["compile", "sign", "commit", "submit", "install", "prove"],
    ["compile", "sign", "commit", "submit", "install", "evaluate", "prove", "settle", "settle"],
    ["compile", "sign", "commit", "submit", "install", "evaluate", "evidence"],
])
def test_fsm_checker_rejects_out_of_order(steps):
    assert not check_transcript(steps)


def test_fsm_checker_on_shuffles():
    rng = random.Random(61)
    for _ in range(200):
        steps = list(STEPS)
        rng.shuffle(steps)
        assert check_transcript(steps) == (steps == list(STEPS))


def test_step_errors_are_annotated(rental_doc, rental_keys, srs):
    ledger = LedgerState(srs)  # unfunded depositor
    session = ProtocolSession(rental_doc, rental_keys, ledger, srs, random.Random(1))
    session.sign()
    session.commit()
    with pytest.raises(SessionError) as info:
        session.submit()
    assert info.value.step == "submit"
    assert str(info.value).startswith("[submit] InsufficientFunds")


def test_unknown_input_is_scenario_error(rental_doc, rental_keys, srs):
    with pytest.raises(ScenarioError):
        run_rental(rental_doc, rental_keys, srs, events=[{"set": {"bogus": 1}}])


def test_privacy_pair_differs_only_in_hashes(rental_doc, rental_keys, srs):
    other = rental_doc.with_term("propertyId", "UNIT-9Z-OAK-AVENUE").with_term(
        "rentalEndDate", "2027-06-30T00:00:00Z")
    t0, t1 = privacy_game(rental_doc, other, rental_keys, srs, rental_events(), random.Random(62))
    diff = transcript_diff(t0, t1)
    assert {"clc_comm", "h"} <= diff <= PRIVACY_DIFF_ALLOWED
    assert "UNIT-9Z" not in json.dumps(t1)


def test_same_contract_different_nullifiers(rental_doc, rental_keys, srs):
    t0, t1 = privacy_game(rental_doc, rental_doc, rental_keys, srs, rental_events(), random.Random(63))
    c0 = next(r for r in t0 if r["kind"] == "COMMIT")
    c1 = next(r for r in t1 if r["kind"] == "COMMIT")
    assert c0["clc_comm"] != c1["clc_comm"]
    assert t0[-1]["h"] != t1[-1]["h"]


def test_privacy_game_rejects_value_mismatch(rental_doc, rental_keys, srs):
    cheaper = dataclasses.replace(rental_doc.with_term("depositValue", ETH), value_v=ETH)
    assert cheaper.value_v == ETH
    with pytest.raises(ParameterMismatch):
        privacy_game(rental_doc, cheaper, rental_keys, srs, rental_events())


def test_soundness_examples(approved, rental_doc, rental_keys, srs):
    res = soundness_game(approved, Mutation("rat_numerator"))
    assert (res.accepted, res.error, res.state_unchanged) == (False, "InvalidProof", True)
    # a nullifier already spent on the same ledger by an earlier session
    ledger = LedgerState(srs)
    first = run_rental(rental_doc, rental_keys, srs, ledger=ledger, seed=1)
    second = run_rental(rental_doc, rental_keys, srs, ledger=ledger, seed=2)
    res = soundness_game(second, Mutation("h", first.statement.h))
    assert res.error == "NullifierSpent" and res.state_unchanged
    unrelated = run_rental(rental_doc, rental_keys, srs, seed=3)
    res = soundness_game(approved, Mutation("rt", unrelated.statement.rt))
    assert res.error == "StaleRoot" and res.state_unchanged


def test_random_mutations_never_settle(approved):
    rng = random.Random(64)
    for _ in range(100):
        res = soundness_game(approved, random_mutation(rng, approved.statement, approved.proof))
        assert not res.accepted and res.state_unchanged


def test_unmutated_replay_settles_on_pre_state(approved):
    ledger = approved.pre_settle.copy()
    ledger.settle(approved.proof, approved.statement, approved.pk("tenant"), approved.pk("landlord"))


def test_non_repudiation_honest(approved):
    report = non_repudiation_check(approved)
    assert report["ok"] and report["buyer_signature"] == report["seller_signature"] == "valid"


def test_non_repudiation_missing_signature(rental_doc, rental_keys, srs):
    session = run_rental(rental_doc, rental_keys, srs)
    session.signed = SignedContract(session.signed.doc, b"", session.signed.sigma_sel)
    report = non_repudiation_check(session)
    assert report["buyer_signature"] == "missing" and not report["ok"]


def test_non_repudiation_altered_commit(approved):
    log = [dict(r) for r in approved.ledger.tx_log]
    i = next(j for j, r in enumerate(log) if r["kind"] == "COMMIT")
    log[i]["v"] += 1
    report = non_repudiation_check(approved, log)
    assert report["chain_break"] == i and not report["ok"]


def test_scenario_file_errors(tmp_path, srs):
    bad = tmp_path / "bad.json"
    bad.write_text('{"template": "rental_deposit",\n "inputs": [}')
    with pytest.raises(ScenarioError) as info:
        Scenario.load(bad)
    assert "bad.json" in str(info.value)


def test_prepare_session_funds_buyer(srs):
    ledger = LedgerState(srs)
    session = prepare_session(Scenario.load(bundled_scenarios()["rental_approve"]), ledger, srs)
    assert ledger.balance(session.pk("tenant")) == 2 * ETH
    assert session.outcome is None


def test_dispute_outcome_via_events(rental_doc, rental_keys, srs):
    session = run_rental(rental_doc, rental_keys, srs, rental_events("DISPUTE", ("1.5 ETH", "0.5 ETH")))
    assert session.outcome == Outcome.ratio(15 * ETH // 10)
    assert session.settlement["tenant"] == 15 * ETH // 10
    assert crypto.field_hex(session.statement.h) in json.dumps(session.public_transcript())
