"""Markdown tables from one or more ``report.json`` files."""

from __future__ import annotations

from typing import Sequence


def _fmt(value, pct: bool = False, digits: int = 2) -> str:
    if value is None:
        return "-"
    return f"{100 * value:.{digits}f}" if pct else f"{value:.{digits}f}"


def _pairs(reports: Sequence[dict]) -> list[str]:
    seen: list[str] = []
    for rep in reports:
        for lp in rep["language_pairs"]:
            if lp not in seen:
                seen.append(lp)
    return seen


def render_markdown(reports: Sequence[dict]) -> str:
    """Rejection counts, span P/R/F1, SPA and segment accuracy; one row per model."""
    pairs = _pairs(reports)
    out: list[str] = []

    rejection_rows = [(lp, rep) for lp in pairs for rep in reports
                      if "rejection" in rep["language_pairs"].get(lp, {})]
    if rejection_rows:
        out += ["## Error filtering", "", "| Pair | Model | Before | After | Rejection rate |",
                "|---|---|---:|---:|---:|"]
        for lp, rep in rejection_rows:
            r = rep["language_pairs"][lp]["rejection"]
            out.append(f"| {lp} | {rep['model']} | {r['before']:,} | {r['after']:,} | {r['rejection_rate']:.1f}% |")
        out.append("")

    span_rows = [(lp, rep) for lp in pairs for rep in reports if "span" in rep["language_pairs"].get(lp, {})]
    if span_rows:
        out += ["## Span detection (character-level, %)", "",
                "| Pair | Model | P (unf.) | R (unf.) | F1 (unf.) | P | R | F1 |",
                "|---|---|---:|---:|---:|---:|---:|---:|"]
        for lp, rep in span_rows:
            span = rep["language_pairs"][lp]["span"]
            cells = []
            for variant in ("unfiltered", "filtered"):
                m = span.get(variant) or {}
                cells += [_fmt(m.get("precision"), True), _fmt(m.get("recall"), True), _fmt(m.get("f1"), True)]
            out.append(f"| {lp} | {rep['model']} | " + " | ".join(cells) + " |")
        out.append("")

    for title, key in (("System level: soft pairwise accuracy", "spa"),
                       ("Segment level: group-by-item accuracy with tie calibration", "segment_accuracy")):
        out += [f"## {title}", "", "| Model | " + " | ".join(pairs) + " | Average |",
                "|---|" + "---:|" * (len(pairs) + 1)]
        for rep in reports:
            cells = [_fmt(rep["language_pairs"].get(lp, {}).get(key)) for lp in pairs]
            cells.append(_fmt(rep.get("average", {}).get(key)))
            out.append(f"| {rep['model']} | " + " | ".join(cells) + " |")
        out.append("")

    eps = [(lp, rep) for lp in pairs for rep in reports if "epsilon" in rep["language_pairs"].get(lp, {})]
    if eps:
        out += ["Tie thresholds: " + ", ".join(
            f"{rep['model']} {lp} eps={rep['language_pairs'][lp]['epsilon']:g}" for lp, rep in eps), ""]
    return "\n".join(out)
