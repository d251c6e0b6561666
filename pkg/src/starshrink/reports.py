"""Certification report records and their deterministic text serialization.

Pass flags are pure functions of the recorded numbers and the size target.
Wall time is kept on the in-memory record for profiling but never written
to the serialized report, which must be byte-identical across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class ElementOutcome:
    id: str
    diam_before: float
    diam_after: float
    fixed: bool


@dataclass
class StepRecord:
    """One elementary squeeze inside a composite shrink."""

    element_id: str
    eps: float
    diam_before: float
    diam_after: float
    stages: int


@dataclass
class ShrinkReport:
    scene: str
    epsilon: float
    chain_length: int
    condition_i_sup: float
    condition_ii_max: float
    support_violations: int
    inverse_error: float
    collisions: int
    elements: list[ElementOutcome] = field(default_factory=list)
    steps: list[StepRecord] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed_i(self) -> bool:
        return self.condition_i_sup < self.epsilon

    @property
    def passed_ii(self) -> bool:
        return self.condition_ii_max < self.epsilon

    @property
    def passed(self) -> bool:
        return (
            self.passed_i
            and self.passed_ii
            and self.support_violations == 0
            and self.collisions == 0
            and self.inverse_error < 1e-9
        )


def _yesno(flag: bool) -> str:
    return "yes" if flag else "no"


def serialize_report(report: ShrinkReport) -> str:
    """Fixed-field-order text form of a report (no volatile fields)."""
    lines = [
        "report shrink",
        f"scene {report.scene}",
        f"epsilon {report.epsilon!r}",
        f"chain-length {report.chain_length}",
        f"condition-i-sup {report.condition_i_sup!r}",
        f"condition-ii-max {report.condition_ii_max!r}",
        f"support-violations {report.support_violations}",
        f"inverse-error-max {report.inverse_error!r}",
        f"collisions {report.collisions}",
    ]
    for step in report.steps:
        lines.append(
            f"step {step.element_id} eps {step.eps!r} diam-before {step.diam_before!r} "
            f"diam-after {step.diam_after!r} stages {step.stages}"
        )
    for el in report.elements:
        lines.append(
            f"element {el.id} diam-before {el.diam_before!r} "
            f"diam-after {el.diam_after!r} fixed {_yesno(el.fixed)}"
        )
    lines.append(f"pass {_yesno(report.passed)}")
    return "\n".join(lines) + "\n"
