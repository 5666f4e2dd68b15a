"""Map surviving ``target_error`` phrases onto character spans of the translation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from openqe.textnorm import FoldedText, normalize_phrase

if TYPE_CHECKING:
    from openqe.json_repair import QEJudgment

logger = logging.getLogger(__name__)

SPAN_SEVERITIES = ("minor", "major", "critical")


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open range ``[start, end)`` of Unicode scalar values in a target text."""

    start: int
    end: int
    severity: str
    origin: str = "predicted"

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")
        if self.severity not in SPAN_SEVERITIES:
            raise ValueError(f"unknown severity {self.severity!r}")
        if self.origin not in ("predicted", "gold"):
            raise ValueError(f"unknown origin {self.origin!r}")

    def check_bounds(self, length: int) -> None:
        if self.end > length:
            raise AlignmentError(f"span [{self.start}, {self.end}) exceeds target length {length}")

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "severity": self.severity}


def locate_spans(judgment: "QEJudgment", target: str, warnings: list[str] | None = None,
                 missing: str = "raise") -> list[CharSpan]:
    """Place every annotation that has a ``target_error`` on the target text.

    Each annotation takes the leftmost case-insensitive occurrence of its
    phrase not yet claimed by an earlier annotation of the same phrase
    (annotations are visited critical, major, minor, in list order).
    Annotations without a target phrase, such as omissions, get no span.
    Surplus annotations of a phrase that occurs fewer times than it was
    reported are dropped with a warning.

    A phrase that does not occur at all means the hallucination filter was
    skipped: AlignmentError by default, or a warning with ``missing="skip"``
    (used when scoring unfiltered output).
    """
    if missing not in ("raise", "skip"):
        raise ValueError(f"missing must be 'raise' or 'skip', not {missing!r}")
    warnings = [] if warnings is None else warnings
    folded = FoldedText.of(target)
    occurrences: dict[str, list[tuple[int, int]]] = {}
    cursor: dict[str, int] = {}
    spans = []
    for ann in judgment.annotations():
        if ann.target_error is None:
            continue
        key = normalize_phrase(ann.target_error)
        if key not in occurrences:
            occurrences[key] = folded.occurrences(ann.target_error)
            cursor[key] = 0
            if not occurrences[key] and missing == "raise":
                raise AlignmentError(f"target_error {ann.target_error!r} ({ann.type_path}) not found in target")
        if not occurrences[key]:
            warnings.append(f"skipped {ann.target_error!r}: not found in target")
            continue
        idx = cursor[key]
        if idx >= len(occurrences[key]):
            warnings.append(f"dropped surplus annotation of {ann.target_error!r}: only "
                            f"{len(occurrences[key])} occurrence(s) in target")
            continue
        cursor[key] = idx + 1
        start, end = occurrences[key][idx]
        spans.append(CharSpan(start, end, ann.severity, "predicted"))
    spans.sort(key=lambda s: (s.start, s.end, SPAN_SEVERITIES.index(s.severity)))
    return spans
