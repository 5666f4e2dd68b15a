"""Heuristic error filters and rejection-rate accounting.

Two filters run on each judgment. The first drops annotations whose target
phrase does not occur in the translation. The second collapses the same
phrase reported under several severities down to its most severe instance.
Phrase comparison is case-folded with whitespace runs collapsed, the same
normalization in both filters, which is what makes them commute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from decimal import ROUND_HALF_UP, Decimal

from openqe.json_repair import SEVERITIES, SEVERITY_RANK, QEJudgment
from openqe.textnorm import FoldedText, normalize_phrase


@dataclass
class FilterReport:
    errors_before: int = 0
    errors_after: int = 0
    rejected_hallucinated: int = 0
    rejected_duplicates: int = 0
    per_severity: dict = field(default_factory=lambda: {s: {"before": 0, "after": 0} for s in SEVERITIES})

    def __post_init__(self):
        if min(self.errors_before, self.errors_after, self.rejected_hallucinated, self.rejected_duplicates) < 0:
            raise ValueError("counts must be non-negative")

    def consistent(self) -> bool:
        return self.errors_after == self.errors_before - self.rejected_hallucinated - self.rejected_duplicates

    def __add__(self, other: "FilterReport") -> "FilterReport":
        return FilterReport(
            self.errors_before + other.errors_before,
            self.errors_after + other.errors_after,
            self.rejected_hallucinated + other.rejected_hallucinated,
            self.rejected_duplicates + other.rejected_duplicates,
            {s: {k: self.per_severity[s][k] + other.per_severity[s][k] for k in ("before", "after")}
             for s in SEVERITIES},
        )

    @property
    def rejection_rate(self) -> float:
        return rejection_rate(self)

    def to_dict(self) -> dict:
        return {
            "before": self.errors_before,
            "after": self.errors_after,
            "rejected_hallucinated": self.rejected_hallucinated,
            "rejected_duplicates": self.rejected_duplicates,
            "rejection_rate": self.rejection_rate,
            "per_severity": self.per_severity,
        }


def rejection_rate(report: FilterReport | None = None, *, before: int | None = None,
                   after: int | None = None) -> float:
    """Percentage of annotations removed, rounded half-up to one decimal.

    Pass a report, or ``before``/``after`` counts directly. Zero annotations
    before filtering gives 0.0.
    """
    if report is not None:
        before, after = report.errors_before, report.errors_after
    if before is None or after is None:
        raise TypeError("need a report or both before and after")
    if before == 0:
        return 0.0
    exact = Fraction(100 * (before - after), before)
    rounded = (Decimal(exact.numerator) / Decimal(exact.denominator)).quantize(Decimal("0.1"), ROUND_HALF_UP)
    return float(rounded)


def filter_hallucinated(judgment: QEJudgment, target: str) -> QEJudgment:
    """Drop annotations whose target phrase is absent from ``target``.

    Source-only annotations (no target phrase) are kept.
    """
    folded = FoldedText.of(target)
    seen: dict[str, bool] = {}

    def keep(ann) -> bool:
        if ann.target_error is None:
            return True
        key = normalize_phrase(ann.target_error)
        if key not in seen:
            seen[key] = folded.contains(ann.target_error)
        return seen[key]

    return judgment.with_errors({sev: [a for a in judgment.errors(sev) if keep(a)] for sev in SEVERITIES})


def dedupe_cross_severity(judgment: QEJudgment) -> QEJudgment:
    """Keep one annotation per target phrase: the first one in the most severe list."""
    best: dict[str, object] = {}
    for ann in judgment.annotations():  # critical first, so the first hit per phrase wins
        if ann.target_error is None:
            continue
        key = normalize_phrase(ann.target_error)
        current = best.get(key)
        if current is None or SEVERITY_RANK[ann.severity] > SEVERITY_RANK[current.severity]:
            best[key] = ann
    survivors = {id(a) for a in best.values()}
    return judgment.with_errors({
        sev: [a for a in judgment.errors(sev) if a.target_error is None or id(a) in survivors]
        for sev in SEVERITIES
    })


def _count(judgment: QEJudgment) -> dict[str, int]:
    return {sev: len(judgment.errors(sev)) for sev in SEVERITIES}


def apply_filters(judgment: QEJudgment, target: str, hallucinations: bool = True,
                  duplicates: bool = True) -> tuple[QEJudgment, FilterReport]:
    """Hallucination filter then cross-severity dedup, with per-judgment accounting."""
    before = _count(judgment)
    out = judgment
    n_before = judgment.n_errors()
    rejected_h = rejected_d = 0
    if hallucinations:
        out = filter_hallucinated(out, target)
        rejected_h = n_before - out.n_errors()
    if duplicates:
        n_mid = out.n_errors()
        out = dedupe_cross_severity(out)
        rejected_d = n_mid - out.n_errors()
    after = _count(out)
    report = FilterReport(
        n_before, out.n_errors(), rejected_h, rejected_d,
        {s: {"before": before[s], "after": after[s]} for s in SEVERITIES},
    )
    return out, report
