"""Loading segments and human ESA annotations from JSONL files."""

from __future__ import annotations

import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from openqe.span_alignment import CharSpan

logger = logging.getLogger(__name__)

LANGUAGE_NAMES = {
    "cs": "Czech",
    "de": "German",
    "en": "English",
    "es": "Spanish",
    "fr": "French",
    "it": "Italian",
    "ja": "Japanese",
    "pl": "Polish",
    "ru": "Russian",
    "uk": "Ukrainian",
    "zh": "Chinese",
}
_CODES = {name.casefold(): code for code, name in LANGUAGE_NAMES.items()}

GOLD_SEVERITIES = ("minor", "major")


class DatasetError(ValueError):
    """Schema or consistency problem in an input file."""

    def __init__(self, message: str, path: str | os.PathLike | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class LanguagePair:
    source_lang: str
    target_lang: str
    code: str

    def __post_init__(self):
        if not self.source_lang.strip() or not self.target_lang.strip():
            raise ValueError("language names must be non-empty")
        if self.source_lang.casefold() == self.target_lang.casefold():
            raise ValueError(f"source and target language are both {self.source_lang!r}")

    @classmethod
    def from_names(cls, source: str, target: str) -> "LanguagePair":
        """Build a pair from language names or ISO codes (``"cs"`` and ``"Czech"`` both work)."""
        src = LANGUAGE_NAMES.get(source.lower(), source)
        tgt = LANGUAGE_NAMES.get(target.lower(), target)
        code = "-".join(_CODES.get(n.casefold(), n.lower()) for n in (src, tgt))
        return cls(src, tgt, code)


@dataclass(frozen=True)
class Segment:
    item_id: str
    system_id: str
    pair: LanguagePair
    source: str
    target: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.item_id, self.system_id)

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "system_id": self.system_id,
            "src_lang": self.pair.source_lang,
            "tgt_lang": self.pair.target_lang,
            "source": self.source,
            "target": self.target,
        }


@dataclass(frozen=True)
class GoldAnnotation:
    item_id: str
    system_id: str
    annotator_id: str
    score: float
    spans: tuple[CharSpan, ...] = ()

    @property
    def key(self) -> tuple[str, str]:
        return (self.item_id, self.system_id)

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "system_id": self.system_id,
            "annotator_id": self.annotator_id,
            "score": self.score,
            "spans": [{"start": s.start, "end": s.end, "severity": s.severity} for s in self.spans],
        }


def _read_jsonl(path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"invalid JSON ({exc.msg})", path, lineno) from None
            if not isinstance(obj, dict):
                raise DatasetError("expected a JSON object", path, lineno)
            yield lineno, obj


def _require_str(obj: dict, field: str, path, lineno: int) -> str:
    value = obj.get(field)
    if not isinstance(value, str):
        raise DatasetError(f"field {field!r} must be a string", path, lineno)
    return value


def load_segments(path) -> list[Segment]:
    """Read ``segments.jsonl``; records come back in file order."""
    segments: list[Segment] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, obj in _read_jsonl(path):
        fields = {f: _require_str(obj, f, path, lineno)
                  for f in ("item_id", "system_id", "src_lang", "tgt_lang", "source", "target")}
        if not fields["source"]:
            raise DatasetError("source text is empty", path, lineno)
        try:
            pair = LanguagePair.from_names(fields["src_lang"], fields["tgt_lang"])
        except ValueError as exc:
            raise DatasetError(str(exc), path, lineno) from None
        seg = Segment(fields["item_id"], fields["system_id"], pair, fields["source"], fields["target"])
        if seg.key in seen:
            raise DatasetError(
                f"duplicate (item_id, system_id) {seg.key!r}, first seen on line {seen[seg.key]}",
                path, lineno)
        seen[seg.key] = lineno
        segments.append(seg)
    return segments


def load_gold(path, segments: Sequence[Segment] | None = None) -> list[GoldAnnotation]:
    """Read ``gold.jsonl``.

    When ``segments`` is given, every annotation must refer to a known segment
    and its spans must lie inside that segment's target text.
    """
    by_key = {s.key: s for s in segments} if segments is not None else None
    out: list[GoldAnnotation] = []
    annotators: dict[tuple[str, str], list[str]] = defaultdict(list)
    for lineno, obj in _read_jsonl(path):
        item_id = _require_str(obj, "item_id", path, lineno)
        system_id = _require_str(obj, "system_id", path, lineno)
        annotator = _require_str(obj, "annotator_id", path, lineno)
        score = obj.get("score")
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise DatasetError("field 'score' must be a number", path, lineno)
        if not 0 <= score <= 100:
            raise DatasetError(f"score {score} outside [0, 100]", path, lineno)
        key = (item_id, system_id)
        if annotator in annotators[key]:
            raise DatasetError(f"annotator {annotator!r} repeated for {key!r}", path, lineno)
        annotators[key].append(annotator)
        if len(annotators[key]) > 2:
            raise DatasetError(f"more than two annotators for {key!r}", path, lineno)

        target_len = None
        if by_key is not None:
            if key not in by_key:
                raise DatasetError(f"annotation for unknown segment {key!r}", path, lineno)
            target_len = len(by_key[key].target)
        spans = []
        raw_spans = obj.get("spans", [])
        if not isinstance(raw_spans, list):
            raise DatasetError("field 'spans' must be a list", path, lineno)
        for raw in raw_spans:
            try:
                start, end, severity = raw["start"], raw["end"], raw["severity"]
            except (KeyError, TypeError):
                raise DatasetError(f"malformed span {raw!r}", path, lineno) from None
            if severity not in GOLD_SEVERITIES:
                raise DatasetError(f"unsupported gold severity {severity!r}", path, lineno)
            if not (isinstance(start, int) and isinstance(end, int)) or not 0 <= start < end:
                raise DatasetError(f"bad span bounds {raw!r}", path, lineno)
            if target_len is not None and end > target_len:
                raise DatasetError(f"span {raw!r} exceeds target length {target_len}", path, lineno)
            spans.append(CharSpan(start, end, severity, "gold"))
        out.append(GoldAnnotation(item_id, system_id, annotator, score, tuple(spans)))
    return out


def group_gold(annotations: Iterable[GoldAnnotation]) -> dict[tuple[str, str], list[GoldAnnotation]]:
    """Group annotations by segment key, keeping file order within each group."""
    groups: dict[tuple[str, str], list[GoldAnnotation]] = defaultdict(list)
    for ann in annotations:
        groups[ann.key].append(ann)
    return dict(groups)


def gold_score(annotations: Sequence[GoldAnnotation]) -> float:
    """Average of the available human scores for one segment."""
    if not annotations:
        raise ValueError("no annotations for segment")
    if len(annotations) == 1:
        a = annotations[0]
        logger.warning("segment (%s, %s) has a single annotator", a.item_id, a.system_id)
    return sum(a.score for a in annotations) / len(annotations)


def dump_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
