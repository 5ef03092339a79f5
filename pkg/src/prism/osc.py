"""Overall Selection Cost accounting.

A selection pipeline only pays off if the model trained on the subset is
at least as good as the full-data model AND the selection plus subset
tuning time undercuts full-data tuning. Both conditions fold into one
scalar: performance ratio times time ratio. Strictly below 1 means the
pipeline is practically viable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError

HOURS = "hours"  # all times in the record are hours; mixed units are a bug source


@dataclass(frozen=True)
class OscRecord:
    """Inputs for one pipeline: benchmark scalars and wall-clock hours.

    Performance is an opaque positive scalar supplied by the caller; this
    module never recomputes benchmark scores.
    """

    label: str
    perf_full: float
    perf_sub: float
    t_select: float
    t_tune_sub: float
    t_tune_full: float

    def __post_init__(self) -> None:
        if not self.label:
            raise ContractError("record label must be non-empty")
        if self.perf_full <= 0 or self.perf_sub <= 0:
            raise ContractError("performance values must be > 0")
        if self.t_select < 0:
            raise ContractError("t_select must be >= 0")
        if self.t_tune_sub <= 0 or self.t_tune_full <= 0:
            raise ContractError("tuning times must be > 0")


@dataclass(frozen=True)
class OscResult:
    """score = performance_ratio * time_ratio; viable iff score < 1."""

    label: str
    score: float
    performance_ratio: float
    time_ratio: float
    viable: bool

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "score": self.score,
            "performance_ratio": self.performance_ratio,
            "time_ratio": self.time_ratio,
            "viable": self.viable,
        }


def osc(record: OscRecord) -> OscResult:
    """Evaluate the selection-cost score for one record."""
    performance_ratio = record.perf_full / record.perf_sub
    time_ratio = (record.t_select + record.t_tune_sub) / record.t_tune_full
    score = performance_ratio * time_ratio
    return OscResult(
        label=record.label,
        score=score,
        performance_ratio=performance_ratio,
        time_ratio=time_ratio,
        viable=score < 1.0,
    )


def compare_records(records) -> list[OscResult]:
    """Rank records by ascending score, ties broken by label."""
    records = list(records)
    if not records:
        raise ContractError("compare_records needs at least one record")
    results = [osc(r) for r in records]
    return sorted(results, key=lambda r: (r.score, r.label))
