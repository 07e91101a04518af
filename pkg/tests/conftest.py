import hashlib
import os
import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

from zkagree import crypto  # noqa: E402
from zkagree.clc import compile_contract, message_digest  # noqa: E402
from zkagree.ledger import LedgerState  # noqa: E402
from zkagree.orchestrator import template_path  # noqa: E402
from zkagree.proofsys import setup  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

RENTAL_ROLES = ("tenant", "landlord", "arbitrator", "evaluator")
REPORT_HASH = hashlib.sha256(b"move-out inspection: no damage").hexdigest()

# filled in by test_acceptance; printed once at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def srs():
    return setup()


@pytest.fixture(scope="session")
def rental_keys():
    return {r: crypto.keygen(random.Random(f"fixture:{r}")) for r in RENTAL_ROLES + ("mallory",)}


@pytest.fixture(scope="session")
def rental_template():
    return compile_contract(template_path("rental_deposit"))


@pytest.fixture(scope="session")
def rental_doc(rental_template, rental_keys):
    return rental_template.with_keys({r: rental_keys[r].pk for r in RENTAL_ROLES})


@pytest.fixture
def ledger(srs):
    return LedgerState(srs)


def arbitration_inputs(keys, tenant_share, landlord_share, signer="arbitrator", report=REPORT_HASH):
    msg = message_digest([bytes.fromhex(report), tenant_share, landlord_share])
    return {
        "inspectionReportHash": report,
        "tenantDecision": "DISPUTE",
        "arbDecisionSig": crypto.sign(keys[signer].sk, msg).hex(),
        "arbTenantShare": tenant_share,
        "arbLandlordShare": landlord_share,
    }


def approve_inputs(report=REPORT_HASH):
    return {"inspectionReportHash": report, "tenantDecision": "APPROVE"}


def rental_events(decision="APPROVE", shares=None, signer="arbitrator", report=REPORT_HASH):
    events = [{"event": "inspection", "set": {"inspectionReportHash": report}},
              {"event": "decision", "set": {"tenantDecision": decision}}]
    if shares is not None:
        events.append({"event": "arbitration", "signer": signer,
                       "set": {"arbTenantShare": shares[0], "arbLandlordShare": shares[1]},
                       "sign": {"field": "arbDecisionSig",
                                "over": ["inspectionReportHash", "arbTenantShare", "arbLandlordShare"]}})
    return events


def run_rental(doc, keys, srs, events=None, ledger=None, seed=0):
    """Fund the tenant and drive a rental session to completion (or REJECT)."""
    from zkagree.orchestrator import ProtocolSession

    ledger = ledger if ledger is not None else LedgerState(srs)
    ledger.deposit(doc.protocol_pk("buyer"), doc.value_v)
    session = ProtocolSession(doc, keys, ledger, srs, random.Random(f"k:{seed}"), random.Random(f"e:{seed}"))
    return session.drive(rental_events() if events is None else events)
