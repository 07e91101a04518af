"""Contract lifecycle state machine.

``lifecycle`` moves strictly INIT -> EXECUTION -> EVALUATION -> COMPLETED.
``phase`` tracks the rental-style sub-state and may only be set while the
contract is in EXECUTION or EVALUATION.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Lifecycle(enum.Enum):
    INIT = "INIT"
    EXECUTION = "EXECUTION"
    EVALUATION = "EVALUATION"
    COMPLETED = "COMPLETED"


class Phase(enum.Enum):
    NONE = "NONE"
    AWAITING_INSPECTION = "AWAITING_INSPECTION"
    AWAITING_TENANT_DECISION = "AWAITING_TENANT_DECISION"
    APPROVED = "APPROVED"
    DISPUTED = "DISPUTED"


ORDER = (Lifecycle.INIT, Lifecycle.EXECUTION, Lifecycle.EVALUATION, Lifecycle.COMPLETED)
ALLOWED = frozenset(zip(ORDER, ORDER[1:]))
_PHASE_STATES = (Lifecycle.EXECUTION, Lifecycle.EVALUATION)


class IllegalTransition(Exception):
    pass


@dataclass
class LifecycleState:
    lifecycle: Lifecycle = Lifecycle.INIT
    phase: Phase = Phase.NONE
    history: list[tuple[str, str]] = field(default_factory=list)

    def advance(self, to: Lifecycle, phase: Phase = Phase.NONE) -> None:
        if (self.lifecycle, to) not in ALLOWED:
            raise IllegalTransition(f"{self.lifecycle.value} -> {to.value} is not allowed")
        if phase is not Phase.NONE and to not in _PHASE_STATES:
            raise IllegalTransition(f"phase {phase.value} is not legal in {to.value}")
        self.history.append((self.lifecycle.value, to.value))
        self.lifecycle = to
        self.phase = phase

    def set_phase(self, phase: Phase) -> None:
        if phase is not Phase.NONE and self.lifecycle not in _PHASE_STATES:
            raise IllegalTransition(f"phase {phase.value} is not legal in {self.lifecycle.value}")
        self.phase = phase

    def ensure(self, *states: Lifecycle) -> None:
        if self.lifecycle not in states:
            want = "/".join(s.value for s in states)
            raise IllegalTransition(f"expected {want}, contract is {self.lifecycle.value}")

    # rental-deposit handlers; each is a no-op outside its guard, like the
    # clause functions they mirror

    def initialize(self) -> None:
        if self.lifecycle is Lifecycle.INIT:
            self.advance(Lifecycle.EXECUTION, Phase.AWAITING_INSPECTION)

    def submit_inspection(self, report_ok: bool = True) -> None:
        if (self.lifecycle is Lifecycle.EXECUTION and self.phase is Phase.AWAITING_INSPECTION
                and report_ok):
            self.advance(Lifecycle.EVALUATION, Phase.AWAITING_TENANT_DECISION)

    def tenant_decision(self, decision: str) -> None:
        if self.lifecycle is Lifecycle.EVALUATION and self.phase is Phase.AWAITING_TENANT_DECISION:
            if decision == "APPROVE":
                self.set_phase(Phase.APPROVED)
            elif decision == "DISPUTE":
                self.set_phase(Phase.DISPUTED)

    def complete(self) -> None:
        self.advance(Lifecycle.COMPLETED)

    def check(self) -> None:
        if self.phase is not Phase.NONE and self.lifecycle not in _PHASE_STATES:
            raise AssertionError(f"phase {self.phase.value} in {self.lifecycle.value}")


def transitions_valid(history: list[tuple[str, str]]) -> bool:
    """Standalone checker: every transition in ``history`` is on the allowed chain."""
    allowed = {(a.value, b.value) for a, b in ALLOWED}
    prev = Lifecycle.INIT.value
    for a, b in history:
        if (a, b) not in allowed or a != prev:
            return False
        prev = b
    return True
