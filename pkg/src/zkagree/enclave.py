"""Simulated trusted execution environment.

An :class:`EnclaveInstance` seals a signed contract, measures its logic,
evaluates it on evidence, and assembles the settlement proof. Attestation
is an Ed25519 signature by a per-instance key over
``H([measurement, outcome_code, numerator, statement_digest])``. Nothing
sealed is reachable through the public surface; callers receive only
measurements, attested outcomes, statements and proofs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from . import crypto
from .clc import (
    RATIO,
    REJECT,
    Lifecycle,
    LifecycleState,
    Outcome,
    SignedContract,
    evaluate_logic,
)
from .merkle import root_from_path
from .proofsys import (
    EvalStatement,
    EvalWitness,
    ProofBundle,
    RelationUnsatisfied,
    Srs,
    parties_digest,
    prove_eval,
)

_OUTCOME_CODES = {"APPROVE_FULL": 1, "REJECT": 2, "RATIO": 3}


class EnclaveError(Exception):
    pass


class BadSignature(EnclaveError):
    pass


class NoOutcome(EnclaveError):
    pass


class StaleRoot(EnclaveError):
    pass


@dataclass(frozen=True)
class AttestedOutcome:
    outcome: Outcome
    measurement: int
    statement_digest: int
    output_digest: int
    quote: bytes
    attestation_pk: bytes

    def to_json(self) -> dict[str, Any]:
        return {
            "measurement_hex": crypto.field_hex(self.measurement),
            "attestation_pk_hex": self.attestation_pk.hex(),
            "outcome": str(self.outcome),
            "output_digest_hex": crypto.field_hex(self.output_digest),
            "quote_hex": self.quote.hex(),
        }


def output_digest(measurement: int, outcome: Outcome, statement_digest: int = 0) -> int:
    return crypto.hash_fields(
        [measurement, _OUTCOME_CODES[outcome.kind], outcome.numerator % crypto.P, statement_digest]
    )


def verify_attestation(att: AttestedOutcome, attestation_pk: bytes | None = None) -> bool:
    """Check the quote and that it covers this measurement and outcome."""
    pk = attestation_pk if attestation_pk is not None else att.attestation_pk
    expected = output_digest(att.measurement, att.outcome, att.statement_digest)
    return expected == att.output_digest and crypto.verify(pk, att.output_digest, att.quote)


class EnclaveInstance:
    """One installed contract. Calls must be serialized (evaluate before prove)."""

    __slots__ = ("_measurement", "_attestation_pk", "_sk", "_sealed", "_outcome", "_pk_eva")

    def __init__(self, signed: SignedContract, rng: random.Random | None = None) -> None:
        ok_buy, ok_sel = signed.check()
        if not ok_buy:
            raise BadSignature("buyer signature does not verify; installation refused")
        if not ok_sel:
            raise BadSignature("seller signature does not verify; installation refused")
        keys = crypto.keygen(rng)
        self._sk = keys.sk
        self._attestation_pk = keys.pk
        self._sealed = signed
        self._measurement = signed.doc.logic.digest()
        self._outcome: Outcome | None = None
        self._pk_eva = signed.doc.protocol_pk("evaluator")

    def __repr__(self) -> str:
        return f"EnclaveInstance(measurement={crypto.field_hex(self._measurement)[:16]}...)"

    def __getstate__(self):  # sealed state never leaves by pickling
        raise TypeError("enclave instances cannot be serialized")

    @property
    def measurement(self) -> int:
        return self._measurement

    @property
    def attestation_pk(self) -> bytes:
        return self._attestation_pk

    def _attest(self, outcome: Outcome, statement_digest: int = 0) -> AttestedOutcome:
        digest = output_digest(self._measurement, outcome, statement_digest)
        return AttestedOutcome(outcome, self._measurement, statement_digest, digest,
                               crypto.sign(self._sk, digest), self._attestation_pk)

    def execute_evaluation(self, external_inputs: Mapping[str, Any],
                           lifecycle: LifecycleState | None = None) -> AttestedOutcome:
        """Evaluate sealed logic on evidence. APPROVE_FULL is reported as RATIO(v)."""
        doc = self._sealed.doc
        outcome = evaluate_logic(doc, external_inputs)
        if outcome.kind == "APPROVE_FULL":
            outcome = Outcome.ratio(doc.value_v)
        self._outcome = outcome
        if lifecycle is not None and lifecycle.lifecycle is Lifecycle.EXECUTION:
            lifecycle.advance(Lifecycle.EVALUATION, lifecycle.phase)
        return self._attest(outcome)

    def generate_settlement_proof(self, srs: Srs, k: int, rt: int, merkle_path: Sequence[int],
                                  merkle_dirs: Sequence[int]
                                  ) -> tuple[EvalStatement, ProofBundle, AttestedOutcome]:
        if self._outcome is None:
            raise NoOutcome("execute_evaluation has not produced an outcome")
        if self._outcome.kind == REJECT:
            raise NoOutcome("evaluation rejected; no settlement proof is issued")
        assert self._outcome.kind == RATIO
        doc = self._sealed.doc
        pd = self._sealed.program_digest()
        leaf = crypto.hash_fields([k, pd])
        if len(merkle_path) != len(merkle_dirs) or root_from_path(leaf, merkle_path, merkle_dirs) != rt:
            raise StaleRoot("membership path does not reproduce the given root")
        pk_eva = self._pk_eva if self._pk_eva is not None else self._attestation_pk
        statement = EvalStatement(
            rt=rt,
            h=crypto.hash_fields([k]),
            parties_digest=parties_digest(doc.protocol_pk("buyer"), doc.protocol_pk("seller"), pk_eva),
            rat_numerator=self._outcome.numerator,
            v=doc.value_v,
        )
        witness = EvalWitness(k, pd, tuple(merkle_path), tuple(merkle_dirs))
        try:
            bundle = prove_eval(srs, witness, statement)
        except RelationUnsatisfied as exc:
            raise StaleRoot(str(exc)) from exc
        stmt_digest = crypto.digest_document(statement.to_bytes())
        return statement, bundle, self._attest(self._outcome, stmt_digest)


def install(signed: SignedContract, rng: random.Random | None = None) -> EnclaveInstance:
    return EnclaveInstance(signed, rng)


def execute_evaluation(instance: EnclaveInstance, external_inputs: Mapping[str, Any],
                       lifecycle: LifecycleState | None = None) -> AttestedOutcome:
    return instance.execute_evaluation(external_inputs, lifecycle)


def generate_settlement_proof(instance: EnclaveInstance, srs: Srs, k: int, rt: int,
                              merkle_path: Sequence[int], merkle_dirs: Sequence[int]):
    return instance.generate_settlement_proof(srs, k, rt, merkle_path, merkle_dirs)
