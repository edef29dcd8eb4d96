"""Tester outputs."""

from __future__ import annotations

from dataclasses import dataclass, field

ACCEPT = "Accept"
REJECT = "Reject"

# stage tags used in reject_stage and in per-stage query counts
VERIFIER = "verifier"
DISTINGUISH = "distinguish"
LITERAL = "literal"
INNER = "inner-tester"
SELF_CORRECT = "self-correct"
SPAN = "span-check"
REDUCTION = "reduction"


@dataclass
class Verdict:
    decision: str
    queries_used: int
    reject_stage: str | None = None
    seed: int | None = None
    stage_counts: dict[str, int] = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.decision == ACCEPT

    def __bool__(self) -> bool:
        return self.accepted

    @classmethod
    def accept(cls, queries: int, **kw) -> "Verdict":
        return cls(ACCEPT, queries, **kw)

    @classmethod
    def reject(cls, queries: int, stage: str, **kw) -> "Verdict":
        return cls(REJECT, queries, reject_stage=stage, **kw)
