"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line in ``conftest.ACCEPTANCE`` before
asserting; the lines are printed in the terminal summary.
"""
import dataclasses
import functools
import json
import random
import re
import time

import conftest
import oracles
from conftest import rental_events, run_rental
from zkagree import cli, crypto
from zkagree.clc import IllegalTransition, Lifecycle, LifecycleState, Phase, compile_contract, transitions_valid
from zkagree.crypto import P, hash_fields
from zkagree.ledger import LedgerState, NullifierSpent, StaleRoot, verify_chain
from zkagree.merkle import MerkleTree, root_from_path
from zkagree.orchestrator import (
    MUTATION_TARGETS,
    PRIVACY_DIFF_ALLOWED,
    ProtocolSession,
    Scenario,
    bundled_scenarios,
    privacy_game,
    random_mutation,
    run_session,
    soundness_game,
    transcript_diff,
)
from zkagree.proofsys import (
    CommitWitness,
    EvalStatement,
    EvalWitness,
    prove_commit,
    prove_eval,
    setup,
    verify,
)

ETH = 10 ** 18


def record(n: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE[n] = (ok, detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


def scenario(name):
    return Scenario.load(bundled_scenarios()[name])


# 1 ---------------------------------------------------------------------


def test_criterion_01_rental_approve(srs):
    ledger = LedgerState(srs)
    escrow_seen = []
    ledger.listeners.append(lambda s, rec: escrow_seen.append(s.escrow_total) if rec["kind"] == "COMMIT" else None)
    start = time.perf_counter()
    report = run_session(scenario("rental_approve"), ledger, srs)
    elapsed = time.perf_counter() - start
    ok = (escrow_seen == [2 * ETH]
          and report.payouts["tenant"] == 2 * ETH and report.payouts["landlord"] == 0
          and report.lifecycle == "COMPLETED" and report.escrow == 0 and elapsed < 5.0)
    record(1, ok, f"escrow {escrow_seen}, payouts {report.payouts['tenant']}/{report.payouts['landlord']}, "
                  f"{report.lifecycle}, {elapsed:.3f}s")
    assert ok


# 2 ---------------------------------------------------------------------


def test_criterion_02_rental_dispute(srs):
    dispute = run_session(scenario("rental_dispute"), LedgerState(srs), srs)
    ledger = LedgerState(srs)
    unbalanced = run_session(scenario("rental_unbalanced_shares"), ledger, srs)
    pays_ok = (dispute.payouts["tenant"] == 15 * ETH // 10 and dispute.payouts["landlord"] == 5 * ETH // 10
               and dispute.lifecycle == "COMPLETED")
    reject_ok = (unbalanced.outcome == "REJECT" and all(v == 0 for v in unbalanced.payouts.values())
                 and unbalanced.escrow == 2 * ETH and not any(r["kind"] == "SETTLE" for r in ledger.tx_log))
    record(2, pays_ok and reject_ok,
           f"dispute {dispute.payouts['tenant']}/{dispute.payouts['landlord']}; "
           f"unbalanced {unbalanced.outcome}, transfers {sum(unbalanced.payouts.values())}")
    assert pays_ok and reject_ok


# 3 ---------------------------------------------------------------------


def test_criterion_03_double_spend(srs, rental_doc, rental_keys):
    ledger = LedgerState(srs)
    sessions = [run_rental(rental_doc, rental_keys, srs, ledger=ledger, seed=300 + i) for i in range(4)]
    sessions.append(run_rental(rental_doc, rental_keys, srs, rental_events("DISPUTE", ("0.25 ETH", "1.75 ETH")),
                               ledger=ledger, seed=305))
    reverts = unchanged = 0
    for attempt in range(100):
        s = sessions[attempt % len(sessions)]
        before = ledger.state_hash()
        try:
            ledger.settle(s.proof, s.statement, s.pk("tenant"), s.pk("landlord"))
        except NullifierSpent:
            reverts += 1
        unchanged += ledger.state_hash() == before
    ok = reverts == 100 and unchanged == 100
    record(3, ok, f"{reverts}/100 reverts, state hash unchanged {unchanged}/100")
    assert ok


# 4 ---------------------------------------------------------------------


def test_criterion_04_soundness_mutations(srs, rental_doc, rental_keys):
    sessions = [
        run_rental(rental_doc, rental_keys, srs, seed=400),
        run_rental(rental_doc, rental_keys, srs, rental_events("DISPUTE", ("1.5 ETH", "0.5 ETH")), seed=401),
        run_rental(rental_doc, rental_keys, srs, rental_events("DISPUTE", ("0 ETH", "2 ETH")), seed=402),
        run_rental(rental_doc, rental_keys, srs, rental_events("DISPUTE", ("2 ETH", "0 ETH")), seed=403),
    ]
    rng = random.Random(404)
    per_target = dict.fromkeys(MUTATION_TARGETS, 0)
    accepted = dirty = 0
    total = 1200
    for i in range(total):
        s = sessions[i % len(sessions)]
        mutation = random_mutation(rng, s.statement, s.proof)
        per_target[mutation.target] += 1
        res = soundness_game(s, mutation)
        accepted += res.accepted
        dirty += not res.state_unchanged
    ok = accepted == 0 and dirty == 0 and min(per_target.values()) > 0
    record(4, ok, f"{total} mutations {per_target}, accepted {accepted}")
    assert ok


# 5 ---------------------------------------------------------------------


def _steps(session, events):
    """Generator driving one session, yielding between ledger-visible steps."""
    session.sign()
    session.commit()
    yield
    session.submit()
    yield
    session.install()
    for event in events:
        session.evidence(event)
    if session.evaluate().outcome.kind == "REJECT":
        return
    session.prove()
    yield
    session.settle()


def _random_private_name(rng, n=10):
    # letters outside the hex alphabet so matches cannot come from digests
    return "".join(rng.choice("GHJKLMNPQRSTUVWXYZ") for _ in range(n))


def test_criterion_05_conservation(srs):
    rental = compile_contract(conftest.template_path("rental_deposit"))
    pud = compile_contract(conftest.template_path("payment_upon_delivery"))
    ledger = LedgerState(srs)
    checks = []
    ledger.listeners.append(lambda s, rec: checks.append(
        sum(s.balances.values()) + s.escrow_total == s.total_deposits))
    rng = random.Random(505)
    active, started, kinds = [], 0, {}
    open_v = []
    while started < 500 or active:
        if started < 500 and (len(active) < 6 and rng.random() < 0.5 or not active):
            keys = {r: crypto.keygen(random.Random(rng.getrandbits(64))) for r in
                    ("tenant", "landlord", "arbitrator", "evaluator", "buyer", "seller", "mallory")}
            if rng.random() < 0.8:
                v = rng.randrange(1, 5 * ETH)
                doc = dataclasses.replace(rental.with_term("propertyId", _random_private_name(rng)), value_v=v)
                kind = rng.choice(["approve", "dispute", "dispute", "forged", "unbalanced"])
                if kind == "approve":
                    events = rental_events()
                else:
                    ts = rng.randrange(v + 1)
                    ls = v - ts + (rng.randrange(1, 10) if kind == "unbalanced" else 0)
                    events = rental_events("DISPUTE", (ts, ls), "mallory" if kind == "forged" else "arbitrator")
            else:
                v = rng.randrange(1, 10 ** 6)
                doc = dataclasses.replace(pud, value_v=v)
                kind = "delivery"
                events = [{"set": {"delivered": rng.random() < 0.9, "accepted": rng.random() < 0.7}}]
            doc = doc.with_keys({r: keys[r].pk for r in doc.parties})
            kinds[kind] = kinds.get(kind, 0) + 1
            ledger.deposit(doc.protocol_pk("buyer"), v + rng.randrange(0, 3) * rng.randrange(1, ETH))
            if rng.random() < 0.2:
                ledger.deposit(rng.randbytes(32), rng.randrange(1, ETH))
            session = ProtocolSession(doc, keys, ledger, srs, random.Random(rng.getrandbits(64)),
                                      random.Random(rng.getrandbits(64)))
            active.append((session, _steps(session, events)))
            started += 1
            continue
        session, gen = active[rng.randrange(len(active))]
        try:
            next(gen)
        except StopIteration:
            active.remove((session, gen))
            if session.settlement is None:
                open_v.append(session.doc.value_v)
    settled = sum(1 for r in ledger.tx_log if r["kind"] == "SETTLE")
    ok = (all(checks) and len(checks) == len(ledger.tx_log) and ledger.conserved()
          and ledger.escrow_total == sum(open_v) and verify_chain(ledger.tx_log) is None)
    record(5, ok, f"500 sessions {kinds}, {len(checks)} tx checked, {settled} settled, "
                  f"violations {checks.count(False)}, residual escrow {ledger.escrow_total}")
    assert ok


# 6 ---------------------------------------------------------------------


def _private_values(doc):
    return [str(doc.terms[n].value) for n in ("propertyId", "startDate", "rentalEndDate")]


def test_criterion_06_privacy(srs, rental_doc, rental_keys):
    rng = random.Random(606)
    failures = []
    for pair in range(50):
        docs = []
        for _ in range(2):
            start = f"20{rng.randrange(25, 30)}-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}T00:00:00Z"
            end = f"20{rng.randrange(31, 40)}-{rng.randrange(1, 13):02d}-{rng.randrange(1, 29):02d}T00:00:00Z"
            docs.append(rental_doc.with_term("propertyId", "UNIT-" + _random_private_name(rng))
                        .with_term("startDate", start).with_term("rentalEndDate", end))
        events = rental_events() if pair % 2 else rental_events("DISPUTE", ("1.5 ETH", "0.5 ETH"))
        t0, t1 = privacy_game(docs[0], docs[1], rental_keys, srs, events, random.Random(rng.getrandbits(64)))
        diff = transcript_diff(t0, t1)
        if not ({"clc_comm", "h"} <= diff <= PRIVACY_DIFF_ALLOWED):
            failures.append(f"pair {pair}: diff {sorted(diff)}")
        public = re.sub(r"[0-9a-f]{64,}", "#", json.dumps([t0, t1]))
        for value in _private_values(docs[0]) + _private_values(docs[1]):
            for i in range(len(value) - 7):
                if value[i:i + 8] in public:
                    failures.append(f"pair {pair}: {value[i:i + 8]!r} leaked")
                    break
    ok = not failures
    record(6, ok, f"50 pairs, allowed diff {sorted(PRIVACY_DIFF_ALLOWED)}, failures {failures[:3]}")
    assert ok


# 7 ---------------------------------------------------------------------


def test_criterion_07_merkle(srs):
    h2 = functools.lru_cache(maxsize=None)(lambda a, b: hash_fields([a, b]))
    rng = random.Random(707)
    tree = MerkleTree()
    leaves = []
    bad_roots = bad_proofs = proofs = 0
    for n in range(1, 1025):
        leaf = rng.randrange(P)
        tree.insert(leaf)
        leaves.append(leaf)
        expected = oracles.merkle_root(leaves, hash2=h2)
        bad_roots += tree.root != expected
        for i, x in enumerate(leaves):
            siblings, dirs, root = tree.proof(i)
            proofs += 1
            if root != expected or oracles.merkle_path_root(x, siblings, dirs, h2) != expected:
                bad_proofs += 1
    # stale roots on the ledger
    ledger = LedgerState(srs)
    payer = b"\x01" * 32
    ledger.deposit(payer, 100)
    k, pd = rng.randrange(P), rng.randrange(P)
    stmt, _ = prove_commit(srs, CommitWitness(k, pd))
    index = ledger.submit_commitment(stmt.clc_comm, 1, payer).fields["leaf_index"]
    siblings, dirs, rt = ledger.inclusion_proof(index)
    old = EvalStatement(rt, hash_fields([k]), 0, 1, 1)
    old_proof = prove_eval(srs, EvalWitness(k, pd, siblings, dirs), old)
    for _ in range(29):
        ledger.submit_commitment(rng.randrange(P), 1, payer)
    within = ledger.copy()
    within.settle(old_proof, old, b"\x02" * 32, b"\x03" * 32)
    ledger.submit_commitment(rng.randrange(P), 1, payer)
    try:
        ledger.settle(old_proof, old, b"\x02" * 32, b"\x03" * 32)
        stale_rejected = False
    except StaleRoot:
        stale_rejected = True
    ok = bad_roots == 0 and bad_proofs == 0 and stale_rejected
    record(7, ok, f"sizes 1..1024, {proofs} proofs, root mismatches {bad_roots}, proof failures {bad_proofs}, "
                  f"root 30 insertions old rejected: {stale_rejected}")
    assert ok


# 8 ---------------------------------------------------------------------


def test_criterion_08_proof_system(srs):
    other = setup(192)
    rng = random.Random(808)
    commit_ok = eval_ok = deterministic = cross_rejected = 0
    for _ in range(1000):
        stmt, proof = prove_commit(srs, CommitWitness(rng.randrange(P), rng.randrange(P)))
        sb = stmt.to_bytes()
        results = {verify(srs, sb, proof) for _ in range(2)}
        commit_ok += results == {True}
        deterministic += len(results) == 1
        _, foreign = prove_commit(other, CommitWitness(rng.randrange(P), rng.randrange(P)))
        cross_rejected += not verify(srs, sb, dataclasses.replace(proof, proof=foreign.proof)) \
            and not verify(other, sb, proof)
    for _ in range(1000):
        k, pd = rng.randrange(P), rng.randrange(P)
        siblings = [rng.randrange(P) for _ in range(20)]
        dirs = [rng.randrange(2) for _ in range(20)]
        rt = root_from_path(hash_fields([k, pd]), siblings, dirs)
        v = rng.randrange(1, 10 ** 20)
        stmt = EvalStatement(rt, hash_fields([k]), rng.randrange(P), rng.randrange(v + 1), v)
        witness = EvalWitness(k, pd, siblings, dirs)
        proof = prove_eval(srs, witness, stmt)
        sb = stmt.to_bytes()
        results = {verify(srs, sb, proof) for _ in range(2)}
        eval_ok += results == {True}
        deterministic += len(results) == 1 and prove_eval(srs, witness, stmt) == proof
        cross_rejected += not verify(other, sb, proof)
    ok = commit_ok == 1000 and eval_ok == 1000 and deterministic == 2000 and cross_rejected == 2000
    record(8, ok, f"commit {commit_ok}/1000, evaluation {eval_ok}/1000, deterministic {deterministic}/2000, "
                  f"cross-srs rejected {cross_rejected}/2000")
    assert ok


# 9 ---------------------------------------------------------------------


def test_criterion_09_fsm_safety():
    rng = random.Random(909)
    allowed = {("INIT", "EXECUTION"), ("EXECUTION", "EVALUATION"), ("EVALUATION", "COMPLETED")}
    ops = [
        lambda lc: lc.initialize(),
        lambda lc: lc.submit_inspection(rng.random() < 0.8),
        lambda lc: lc.tenant_decision(rng.choice(["APPROVE", "DISPUTE", "NOPE"])),
        lambda lc: lc.complete(),
        lambda lc: lc.advance(rng.choice(list(Lifecycle)), rng.choice(list(Phase))),
        lambda lc: lc.set_phase(rng.choice(list(Phase))),
    ]
    outside = illegal = 0
    for _ in range(10_000):
        lc = LifecycleState()
        for _ in range(rng.randrange(1, 16)):
            try:
                rng.choice(ops)(lc)
            except IllegalTransition:
                illegal += 1
        if not set(map(tuple, lc.history)) <= allowed or not transitions_valid(lc.history):
            outside += 1
    ok = outside == 0
    record(9, ok, f"10000 sequences, {illegal} illegal ops refused, transitions outside chain {outside}")
    assert ok


# 10 --------------------------------------------------------------------


def test_criterion_10_bench(capsys, monkeypatch):
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    code = cli.main(["bench", "--iterations", "5", "--json"])
    rows = {r["relation"]: r for r in json.loads(capsys.readouterr().out)["relations"]}
    ok = code == 0 and rows["commitment"]["hash_invocations"] == 2 and rows["evaluation"]["hash_invocations"] == 22
    with capsys.disabled():
        record(10, ok, f"exit {code}, commitment hashes {rows['commitment']['hash_invocations']}, "
                       f"evaluation hashes {rows['evaluation']['hash_invocations']}")
    assert ok
