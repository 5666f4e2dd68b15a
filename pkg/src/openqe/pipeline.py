"""File-to-file pipeline stages: judge, filter, evaluate.

Stages only talk through files so expensive judging can be cached once and
re-scored many ways.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from openqe.filtering import FilterReport, apply_filters
from openqe.ingestion import GoldAnnotation, Segment, dump_jsonl, gold_score, group_gold, load_gold, load_segments
from openqe.json_repair import QEJudgment, RepairError, ValidationError, parse_judgment
from openqe.llm_client import ClientConfig, run_batch
from openqe.meta_metrics import (
    DEFAULT_RESAMPLES,
    DEFAULT_SEVERITY_MAP,
    MetricError,
    ScoreMatrix,
    complete_items,
    inter_annotator_agreement,
    soft_pairwise_accuracy,
    spa_pairs,
    span_f1,
    system_scores,
    tie_calibrated_accuracy,
)
from openqe.span_alignment import CharSpan, locate_spans

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


# --------------------------------------------------------------------------- judge


def judgment_record(seg_key: tuple[str, str], model: str, judgment: QEJudgment) -> dict:
    rec = {"item_id": seg_key[0], "system_id": seg_key[1], "model": model}
    rec.update(judgment.to_dict())
    rec["warnings"] = list(judgment.parse_warnings)
    return rec


def record_judgment(rec: dict) -> QEJudgment:
    return QEJudgment.from_dict(rec, tuple(rec.get("warnings", ())))


def judge(segments_path, out_dir, config: ClientConfig) -> int:
    """Prompt the model for every segment; writes raw_completions.jsonl and judgments.jsonl."""
    segments = load_segments(segments_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    completions = run_batch(segments, config)

    raw_rows, judgment_rows, failures = [], [], []
    for seg, comp in zip(segments, completions):
        if not comp.ok:
            failures.append({"item_id": seg.item_id, "system_id": seg.system_id, "stage": "request",
                             "error": comp.error})
            continue
        raw_rows.append(comp.to_dict())
        try:
            judgment = parse_judgment(comp.raw_text)
        except (RepairError, ValidationError) as exc:
            logger.error("unusable output for %s/%s: %s", seg.item_id, seg.system_id, exc)
            failures.append({"item_id": seg.item_id, "system_id": seg.system_id, "stage": "parse",
                             "error": str(exc)})
            continue
        if comp.warnings:
            judgment = replace(judgment, parse_warnings=judgment.parse_warnings + comp.warnings)
        judgment_rows.append(judgment_record(seg.key, config.model_name, judgment))

    dump_jsonl(raw_rows, out / "raw_completions.jsonl")
    dump_jsonl(judgment_rows, out / "judgments.jsonl")
    dump_jsonl(failures, out / "failures.jsonl")
    logger.info("judged %d/%d segments", len(judgment_rows), len(segments))
    if not judgment_rows:
        return EXIT_FATAL
    return EXIT_PARTIAL if failures else EXIT_OK


# --------------------------------------------------------------------------- filter


def filter_stage(judgments_path, segments_path, out_dir, hallucinations: bool = True,
                 duplicates: bool = True) -> dict:
    """Filter every judgment; writes filtered.jsonl, predicted_spans.jsonl and filter_report.json."""
    segments = {s.key: s for s in load_segments(segments_path)}
    rows = read_jsonl(judgments_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    reports: dict[tuple[str, str], FilterReport] = defaultdict(FilterReport)
    filtered_rows, span_rows = [], []
    for rec in rows:
        key = (rec["item_id"], rec["system_id"])
        if key not in segments:
            raise ValueError(f"judgment for unknown segment {key!r}")
        seg = segments[key]
        judgment = record_judgment(rec)
        filtered, report = apply_filters(judgment, seg.target, hallucinations, duplicates)
        reports[(rec.get("model", ""), seg.pair.code)] += report
        filtered_rows.append(judgment_record(key, rec.get("model", ""), filtered))
        warnings: list[str] = []
        spans = locate_spans(filtered, seg.target, warnings, missing="skip" if not hallucinations else "raise")
        span_rows.append({"item_id": key[0], "system_id": key[1], "spans": [s.to_dict() for s in spans],
                          "warnings": warnings})

    summary = {
        "filters": {"hallucinations": hallucinations, "duplicates": duplicates},
        "reports": [
            {"model": model, "language_pair": lp, **rep.to_dict()}
            for (model, lp), rep in sorted(reports.items())
        ],
    }
    dump_jsonl(filtered_rows, out / "filtered.jsonl")
    dump_jsonl(span_rows, out / "predicted_spans.jsonl")
    _write_json(summary, out / "filter_report.json")
    return summary


# --------------------------------------------------------------------------- evaluate


@dataclass
class Predictions:
    """Per-segment predicted scores and spans, from judgments or a gold-format file."""

    model: str
    scores: dict[tuple[str, str], float | None] = field(default_factory=dict)
    spans: dict[tuple[str, str], list[CharSpan]] = field(default_factory=dict)


def union_spans(annotations: Sequence[GoldAnnotation]) -> list[CharSpan]:
    """All annotators' spans for one segment; overlap is resolved later per character."""
    return [s for ann in annotations for s in ann.spans]


def predictions_from_judgments(rows: list[dict], segments: Mapping[tuple[str, str], Segment]) -> Predictions:
    model = rows[0].get("model", "") if rows else ""
    pred = Predictions(model)
    for rec in rows:
        key = (rec["item_id"], rec["system_id"])
        pred.scores[key] = rec.get("score")
        if key in segments:
            pred.spans[key] = locate_spans(record_judgment(rec), segments[key].target, [], missing="skip")
    return pred


def predictions_from_gold(path, segments: Sequence[Segment]) -> Predictions:
    pred = Predictions("gold")
    for key, anns in group_gold(load_gold(path, segments)).items():
        pred.scores[key] = gold_score(anns)
        pred.spans[key] = [CharSpan(s.start, s.end, s.severity, "predicted") for s in union_spans(anns)]
    return pred


def load_predictions(path, segments: Sequence[Segment]) -> Predictions:
    rows = read_jsonl(path)
    if rows and "annotator_id" in rows[0]:
        return predictions_from_gold(path, segments)
    return predictions_from_judgments(rows, {s.key: s for s in segments})


def evaluate_pair(pred: Predictions | None, gold: dict[tuple[str, str], list[GoldAnnotation]],
                  segments: Sequence[Segment], resamples: int, seed: int,
                  severity_map: Mapping[str, str], scores_only: bool = False,
                  unfiltered: Predictions | None = None) -> dict:
    """All protocols for the segments of one language pair."""
    systems, items = complete_items(
        [s.key for s in segments if s.key in gold], sorted({s.system_id for s in segments}))
    dropped = sorted({s.item_id for s in segments} - set(items))
    if dropped:
        logger.warning("skipping %d items without complete human scores", len(dropped))
    if len(systems) < 2 or not items:
        raise MetricError("need at least two systems and one fully annotated item")
    keys = [(i, s) for i in items for s in systems]
    human = ScoreMatrix.from_scores({k: gold_score(gold[k]) for k in keys}, systems, items)

    missing = [k for k in keys if pred.scores.get(k) is None]
    if missing:
        shown = ", ".join(f"{i}/{s}" for i, s in missing[:20])
        raise MetricError(f"{len(missing)} segments lack a predicted score: {shown}")
    metric = ScoreMatrix.from_scores({k: pred.scores[k] for k in keys}, systems, items)

    acc, eps = tie_calibrated_accuracy(metric, human)
    result = {
        "n_systems": len(systems),
        "n_items": len(items),
        "dropped_items": dropped,
        "spa": soft_pairwise_accuracy(metric, human, resamples, seed),
        "spa_pairs": [asdict(p) | {"agreement": p.agreement} for p in spa_pairs(metric, human, resamples, seed)],
        "segment_accuracy": acc,
        "epsilon": eps,
        "system_scores": {"metric": system_scores(metric), "human": system_scores(human)},
    }
    if not scores_only:
        by_key = {s.key: s for s in segments}
        lengths = [len(by_key[k].target) for k in keys]
        gold_spans = [union_spans(gold[k]) for k in keys]
        result["span"] = {"filtered": span_f1([pred.spans.get(k, []) for k in keys], gold_spans,
                                              severity_map, lengths).to_dict()}
        if unfiltered is not None:
            result["span"]["unfiltered"] = span_f1([unfiltered.spans.get(k, []) for k in keys], gold_spans,
                                                   severity_map, lengths).to_dict()
    return result


def _mean(values) -> float | None:
    values = [v for v in values if v is not None]
    return float(np.mean(values)) if values else None


def evaluate(segments_path, gold_path, out_dir, predictions_path=None, unfiltered_path=None,
             filter_report_path=None, resamples: int = DEFAULT_RESAMPLES, seed: int = 0,
             severity_map: Mapping[str, str] | None = None, scores_only: bool = False,
             iaa: bool = False) -> dict:
    """Meta-evaluate predictions against gold; writes report.json and report.md."""
    from openqe.report import render_markdown

    severity_map = dict(severity_map or DEFAULT_SEVERITY_MAP)
    segments = load_segments(segments_path)
    gold_list = load_gold(gold_path, segments)
    gold = group_gold(gold_list)
    by_pair: dict[str, list[Segment]] = defaultdict(list)
    for seg in segments:
        by_pair[seg.pair.code].append(seg)

    report: dict = {
        "settings": {"resamples": resamples, "seed": seed, "severity_map": severity_map,
                     "scores_only": scores_only, "iaa": iaa},
        "language_pairs": {},
    }
    if iaa:
        report["model"] = "human-vs-human"
        for lp, segs in sorted(by_pair.items()):
            keys = {s.key for s in segs}
            report["language_pairs"][lp] = inter_annotator_agreement(
                [g for g in gold_list if g.key in keys], resamples, seed, severity_map)
    else:
        if predictions_path is None:
            raise ValueError("predictions are required unless iaa is set")
        pred = load_predictions(predictions_path, segments)
        unfiltered = load_predictions(unfiltered_path, segments) if unfiltered_path else None
        report["model"] = pred.model
        for lp, segs in sorted(by_pair.items()):
            report["language_pairs"][lp] = evaluate_pair(pred, gold, segs, resamples, seed, severity_map,
                                                         scores_only, unfiltered)
    if filter_report_path:
        filt = json.loads(Path(filter_report_path).read_text(encoding="utf-8"))
        for row in filt.get("reports", []):
            if row["language_pair"] in report["language_pairs"]:
                report["language_pairs"][row["language_pair"]]["rejection"] = {
                    k: row[k] for k in ("before", "after", "rejection_rate")}

    pairs = report["language_pairs"].values()
    report["average"] = {
        "spa": _mean(p["spa"] for p in pairs),
        "segment_accuracy": _mean(p["segment_accuracy"] for p in pairs),
    }
    if not scores_only:
        for variant in ("filtered", "unfiltered"):
            f1 = _mean(p.get("span", {}).get(variant, {}).get("f1") for p in pairs)
            if f1 is not None:
                report["average"][f"span_f1_{variant}"] = f1

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(report, out / "report.json")
    (out / "report.md").write_text(render_markdown([report]), encoding="utf-8")
    return report


def write_system_scores_csv(report: dict, path) -> None:
    """One row per (language pair, system) with metric and human system-level scores."""
    lines = ["language_pair,system,metric,human"]
    for lp, res in sorted(report["language_pairs"].items()):
        scores = res.get("system_scores", {})
        metric = scores.get("metric") or scores.get("annotator_2", {})
        human = scores.get("human") or scores.get("annotator_1", {})
        for system in sorted(human):
            lines.append(f"{lp},{system},{metric.get(system, '')},{human[system]}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
