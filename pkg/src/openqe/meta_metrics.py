"""Meta-evaluation: soft pairwise accuracy, tie-calibrated pairwise accuracy, span F1.

System level uses soft pairwise accuracy (SPA): for every pair of systems,
compare the p-value of "system A beats system B" under the metric with the
same p-value under human scores, and average ``1 - |p_metric - p_human|``.
P-values come from a paired sign-flip permutation test over items.

Segment level uses group-by-item pairwise accuracy with tie calibration: all
system pairs within each item, with a metric tie threshold chosen to maximize
agreement.

Span level uses character-level precision/recall/micro-F1 with half credit for
characters marked on both sides with different severities.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from openqe.span_alignment import SPAN_SEVERITIES, CharSpan

DEFAULT_RESAMPLES = 1000
EXACT_MAX_N = 12
DEFAULT_SEVERITY_MAP = {"critical": "major", "major": "major", "minor": "minor"}


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ScoreMatrix:
    """Scores laid out systems x items; NaN marks a missing value."""

    systems: tuple[str, ...]
    items: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.systems), len(self.items)):
            raise MetricError(f"grid shape {values.shape} does not match "
                              f"{len(self.systems)} systems x {len(self.items)} items")
        if len(set(self.systems)) != len(self.systems) or len(set(self.items)) != len(self.items):
            raise MetricError("duplicate system or item ids")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_scores(cls, scores: Mapping[tuple[str, str], float],
                    systems: Sequence[str] | None = None, items: Sequence[str] | None = None) -> "ScoreMatrix":
        """Build from ``{(item_id, system_id): score}``; absent cells become NaN."""
        if systems is None:
            systems = sorted({s for _, s in scores})
        if items is None:
            items = sorted({i for i, _ in scores})
        grid = np.full((len(systems), len(items)), np.nan)
        sys_idx = {s: k for k, s in enumerate(systems)}
        item_idx = {i: k for k, i in enumerate(items)}
        for (item, system), v in scores.items():
            if system in sys_idx and item in item_idx:
                grid[sys_idx[system], item_idx[item]] = np.nan if v is None else v
        return cls(tuple(systems), tuple(items), grid)

    def missing(self) -> list[tuple[str, str]]:
        rows, cols = np.nonzero(np.isnan(self.values))
        return [(self.items[c], self.systems[r]) for r, c in zip(rows, cols)]

    def require_complete(self) -> None:
        gaps = self.missing()
        if gaps:
            shown = ", ".join(f"{i}/{s}" for i, s in gaps[:10])
            more = f" (+{len(gaps) - 10} more)" if len(gaps) > 10 else ""
            raise MetricError(f"{len(gaps)} missing scores (item/system): {shown}{more}")

    def reorder(self, systems: Sequence[str], items: Sequence[str]) -> "ScoreMatrix":
        si = [self.systems.index(s) for s in systems]
        ii = [self.items.index(i) for i in items]
        return ScoreMatrix(tuple(systems), tuple(items), self.values[np.ix_(si, ii)])


def _check_aligned(metric: ScoreMatrix, human: ScoreMatrix) -> ScoreMatrix:
    """Return ``metric`` reordered to ``human``'s layout, or fail on mismatched sets."""
    if set(metric.systems) != set(human.systems) or set(metric.items) != set(human.items):
        raise MetricError("metric and human matrices cover different systems or items")
    metric.require_complete()
    human.require_complete()
    return metric.reorder(human.systems, human.items)


def system_scores(matrix: ScoreMatrix) -> dict[str, float]:
    """Mean score per system over items."""
    matrix.require_complete()
    return {s: float(v) for s, v in zip(matrix.systems, matrix.values.mean(axis=1))}


# --------------------------------------------------------------------------- permutation test

_SIGN_CACHE: dict[int, np.ndarray] = {}


def _all_signs(n: int) -> np.ndarray:
    if n not in _SIGN_CACHE:
        bits = (np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1
        _SIGN_CACHE[n] = 1.0 - 2.0 * bits
    return _SIGN_CACHE[n]


def paired_permutation_pvalue(a: Sequence[float], b: Sequence[float], resamples: int = DEFAULT_RESAMPLES,
                              seed: int | np.random.SeedSequence = 0, exact_max_n: int = EXACT_MAX_N) -> float:
    """One-sided p-value for ``mean(a - b) > 0`` by flipping signs of the per-item differences.

    With ``n <= exact_max_n`` items all ``2**n`` sign patterns are enumerated
    and the p-value is the exact fraction whose mean reaches the observed one.
    Otherwise ``resamples`` random patterns are drawn and the estimate is
    add-one smoothed, ``(1 + hits) / (resamples + 1)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise MetricError(f"length mismatch: {a.shape} vs {b.shape}")
    n = a.size
    if n == 0:
        raise MetricError("need at least one item")
    d = a - b
    observed = d.sum()
    # summed (not averaged) statistics keep integer-valued inputs exact
    tol = 1e-9 * max(1.0, float(np.abs(d).sum()))
    if n <= exact_max_n:
        stats = _all_signs(n) @ d
        return float(np.count_nonzero(stats >= observed - tol)) / stats.size
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(resamples, n), dtype=np.int8) * 2 - 1
    stats = signs @ d
    hits = int(np.count_nonzero(stats >= observed - tol))
    return (1 + hits) / (resamples + 1)


def pair_seed(seed: int, sys_a: str, sys_b: str) -> np.random.SeedSequence:
    """Per-pair seed from the global seed and the two system ids (order-free)."""
    lo, hi = sorted((sys_a, sys_b))
    digest = hashlib.sha256(f"{lo}\x00{hi}".encode()).digest()
    return np.random.SeedSequence([seed, int.from_bytes(digest[:8], "little")])


def _oriented_pairs(systems: Sequence[str]) -> list[tuple[int, int]]:
    """System index pairs ``(i, j)`` with ``systems[i] < systems[j]`` lexicographically."""
    order = sorted(range(len(systems)), key=lambda k: systems[k])
    return list(itertools.combinations(order, 2))


@dataclass(frozen=True)
class PairwiseSPA:
    system_a: str
    system_b: str
    p_metric: float
    p_human: float

    @property
    def agreement(self) -> float:
        return 1.0 - abs(self.p_metric - self.p_human)


def spa_pairs(metric: ScoreMatrix, human: ScoreMatrix, resamples: int = DEFAULT_RESAMPLES, seed: int = 0,
              exact_max_n: int = EXACT_MAX_N) -> list[PairwiseSPA]:
    metric = _check_aligned(metric, human)
    if len(human.systems) < 2:
        raise MetricError("need at least two systems")
    out = []
    for i, j in _oriented_pairs(human.systems):
        si, sj = human.systems[i], human.systems[j]
        pm = paired_permutation_pvalue(metric.values[i], metric.values[j], resamples,
                                       pair_seed(seed, si, sj), exact_max_n)
        ph = paired_permutation_pvalue(human.values[i], human.values[j], resamples,
                                       pair_seed(seed, si, sj), exact_max_n)
        out.append(PairwiseSPA(si, sj, pm, ph))
    return out


def soft_pairwise_accuracy(metric: ScoreMatrix, human: ScoreMatrix, resamples: int = DEFAULT_RESAMPLES,
                           seed: int = 0, exact_max_n: int = EXACT_MAX_N) -> float:
    """Mean over system pairs of ``1 - |p_metric - p_human|``."""
    pairs = spa_pairs(metric, human, resamples, seed, exact_max_n)
    return float(np.mean([p.agreement for p in pairs]))


# --------------------------------------------------------------------------- tie calibration


def _item_pair_diffs(metric: ScoreMatrix, human: ScoreMatrix) -> tuple[np.ndarray, np.ndarray]:
    n = len(human.systems)
    ii, jj = np.triu_indices(n, k=1)
    dm = (metric.values[ii, :] - metric.values[jj, :]).ravel()
    dh = (human.values[ii, :] - human.values[jj, :]).ravel()
    return dm, dh


def tie_accuracy_at(metric: ScoreMatrix, human: ScoreMatrix, epsilon: float) -> float:
    """Group-by-item pairwise accuracy treating metric gaps ``<= epsilon`` as ties."""
    metric = _check_aligned(metric, human)
    dm, dh = _item_pair_diffs(metric, human)
    tie = np.abs(dm) <= epsilon
    correct = (tie & (dh == 0)) | (~tie & (np.sign(dm) == np.sign(dh)) & (dh != 0))
    return float(np.count_nonzero(correct)) / dm.size


def tie_calibrated_accuracy(metric: ScoreMatrix, human: ScoreMatrix) -> tuple[float, float]:
    """Best group-by-item accuracy over tie thresholds, and the threshold achieving it.

    Pairs are every unordered system pair within each item. Candidate
    thresholds are 0 and every distinct absolute metric gap; the smallest
    threshold reaching the maximum wins. Because the matrix is dense, pooling
    pairs across items equals averaging per-item accuracies.
    """
    metric = _check_aligned(metric, human)
    if len(human.systems) < 2:
        raise MetricError("need at least two systems")
    dm, dh = _item_pair_diffs(metric, human)
    gap = np.abs(dm)
    human_tie = dh == 0
    ordered_ok = (np.sign(dm) == np.sign(dh)) & ~human_tie

    # Sweep thresholds in increasing order: a pair switches from "ordered" to
    # "tie" once the threshold reaches its gap.
    order = np.argsort(gap, kind="stable")
    gap_sorted = gap[order]
    candidates = np.unique(np.concatenate([[0.0], gap_sorted]))
    # number of pairs with gap <= c, for each candidate
    n_tied = np.searchsorted(gap_sorted, candidates, side="right")
    tie_ok_cum = np.concatenate([[0], np.cumsum(human_tie[order])])
    ord_ok_cum = np.concatenate([[0], np.cumsum(ordered_ok[order])])
    correct = tie_ok_cum[n_tied] + (ord_ok_cum[-1] - ord_ok_cum[n_tied])
    best = int(np.argmax(correct))  # first maximum = smallest threshold
    return float(correct[best]) / dm.size, float(candidates[best])


# --------------------------------------------------------------------------- span F1


@dataclass(frozen=True)
class SpanMetrics:
    matched_weight: float = 0.0
    predicted_chars: float = 0.0
    gold_chars: float = 0.0

    @property
    def precision(self) -> float:
        return self.matched_weight / self.predicted_chars if self.predicted_chars else 0.0

    @property
    def recall(self) -> float:
        return self.matched_weight / self.gold_chars if self.gold_chars else 0.0

    @property
    def f1(self) -> float:
        # harmonic mean of P and R, simplified to a single division
        total = self.predicted_chars + self.gold_chars
        return 2 * self.matched_weight / total if self.matched_weight else 0.0

    def __add__(self, other: "SpanMetrics") -> "SpanMetrics":
        return SpanMetrics(self.matched_weight + other.matched_weight,
                           self.predicted_chars + other.predicted_chars,
                           self.gold_chars + other.gold_chars)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "matched_weight": self.matched_weight, "predicted_chars": self.predicted_chars,
                "gold_chars": self.gold_chars}


_RANK = {s: k for k, s in enumerate(SPAN_SEVERITIES)}


def _char_severity(spans: Sequence[CharSpan], severity_map: Mapping[str, str] | None) -> dict[int, int]:
    """Per character: rank of the highest (mapped) severity covering it."""
    out: dict[int, int] = {}
    for span in spans:
        sev = severity_map.get(span.severity, span.severity) if severity_map else span.severity
        rank = _RANK[sev]
        for c in range(span.start, span.end):
            if out.get(c, -1) < rank:
                out[c] = rank
    return out


def segment_span_counts(predicted: Sequence[CharSpan], gold: Sequence[CharSpan],
                        severity_map: Mapping[str, str] | None = None,
                        target_length: int | None = None) -> SpanMetrics:
    """Match weight and character counts for one segment."""
    if severity_map is None:
        severity_map = DEFAULT_SEVERITY_MAP
    if target_length is not None:
        for span in itertools.chain(predicted, gold):
            span.check_bounds(target_length)
    pred = _char_severity(predicted, severity_map)
    ref = _char_severity(gold, None)
    matched = sum(1.0 if ref[c] == r else 0.5 for c, r in pred.items() if c in ref)
    return SpanMetrics(matched, float(len(pred)), float(len(ref)))


def span_f1(predicted, gold, severity_map: Mapping[str, str] | None = None,
            target_lengths=None) -> SpanMetrics:
    """Character-level micro P/R/F1 over segments.

    ``predicted`` and ``gold`` are either span lists for a single segment or
    parallel sequences of per-segment span lists. Counts are summed over all
    segments before dividing. Predicted severities pass through
    ``severity_map`` (default critical->major) before comparison.
    ``target_lengths`` (an int for a single segment) enables bounds checks.
    """
    single = any(isinstance(x, CharSpan) for x in itertools.chain(predicted, gold)) or not (predicted or gold)
    if single:
        predicted, gold = [predicted], [gold]
        if target_lengths is not None:
            target_lengths = [target_lengths]
    if len(predicted) != len(gold):
        raise MetricError(f"{len(predicted)} predicted segments vs {len(gold)} gold segments")
    total = SpanMetrics()
    for k, (p, g) in enumerate(zip(predicted, gold)):
        length = target_lengths[k] if target_lengths is not None else None
        total = total + segment_span_counts(p, g, severity_map, length)
    return total


# --------------------------------------------------------------------------- inter-annotator agreement


def split_annotators(gold) -> tuple[dict, dict]:
    """Split annotations into first and second annotator per segment (file order).

    Returns two ``{(item_id, system_id): GoldAnnotation}`` maps covering only
    segments with exactly two annotators.
    """
    groups: dict[tuple[str, str], list] = {}
    for ann in gold:
        groups.setdefault(ann.key, []).append(ann)
    first, second = {}, {}
    for key, anns in groups.items():
        if len(anns) == 2:
            first[key], second[key] = anns
    return first, second


def complete_items(keys, systems: Sequence[str] | None = None) -> tuple[list[str], list[str]]:
    """Systems and the items scored for every one of them (sorted)."""
    keys = set(keys)
    if systems is None:
        systems = sorted({s for _, s in keys})
    items = sorted({i for i, _ in keys if all((i, s) in keys for s in systems)})
    return list(systems), items


def inter_annotator_agreement(gold, resamples: int = DEFAULT_RESAMPLES, seed: int = 0,
                              severity_map: Mapping[str, str] | None = None) -> dict:
    """Score the second annotator against the first with the same protocols as a metric.

    Uses only items where every system has two annotations.
    """
    first, second = split_annotators(gold)
    if not first:
        raise MetricError("no segment has two annotators")
    systems, items = complete_items(first.keys(), sorted({s for _, s in (a.key for a in gold)}))
    if not items:
        raise MetricError("no item is doubly annotated for every system")
    keys = [(i, s) for i in items for s in systems]
    human = ScoreMatrix.from_scores({k: first[k].score for k in keys}, systems, items)
    metric = ScoreMatrix.from_scores({k: second[k].score for k in keys}, systems, items)
    acc, eps = tie_calibrated_accuracy(metric, human)
    spans = span_f1([list(second[k].spans) for k in keys], [list(first[k].spans) for k in keys],
                    severity_map)
    return {
        "n_systems": len(systems),
        "n_items": len(items),
        "spa": soft_pairwise_accuracy(metric, human, resamples, seed),
        "spa_pairs": [asdict(p) for p in spa_pairs(metric, human, resamples, seed)],
        "segment_accuracy": acc,
        "epsilon": eps,
        "span": spans.to_dict(),
        "system_scores": {"annotator_1": system_scores(human), "annotator_2": system_scores(metric)},
    }
