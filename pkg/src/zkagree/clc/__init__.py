"""Computable legal contracts: documents, logic, lifecycle, signing."""

from .errors import ContractError, ParseError, SchemaError, SchemaViolation, TypeCheckError
from .lang import APPROVE_FULL, RATIO, REJECT, Outcome
from .lifecycle import IllegalTransition, Lifecycle, LifecycleState, Phase, transitions_valid
from .model import (
    ContractDocument,
    InputDecl,
    LogicProgram,
    Party,
    PayoutRoles,
    SignedContract,
    Term,
    canonical,
    canonical_json,
    contract_digest,
    evaluate_logic,
    from_canonical,
    message_digest,
    sign_as,
    sign_contract,
    signed_from_canonical,
)
from .template import compile_contract

__all__ = [
    "APPROVE_FULL",
    "RATIO",
    "REJECT",
    "ContractDocument",
    "ContractError",
    "IllegalTransition",
    "InputDecl",
    "Lifecycle",
    "LifecycleState",
    "LogicProgram",
    "Outcome",
    "ParseError",
    "Party",
    "PayoutRoles",
    "Phase",
    "SchemaError",
    "SchemaViolation",
    "SignedContract",
    "Term",
    "TypeCheckError",
    "canonical",
    "canonical_json",
    "compile_contract",
    "contract_digest",
    "evaluate_logic",
    "from_canonical",
    "message_digest",
    "sign_as",
    "sign_contract",
    "signed_from_canonical",
    "transitions_valid",
]
