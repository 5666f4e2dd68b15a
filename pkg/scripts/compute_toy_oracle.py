"""Write fixtures/toy/: a 3-system en-it dataset and its brute-force expected metrics.

The expected values come from tests/oracles.py (exact enumeration, explicit
character loops), not from the openqe metrics code.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import oracles  # noqa: E402

OUT = ROOT / "fixtures" / "toy"
SEVERITY_MAP = {"critical": "major", "major": "major", "minor": "minor"}
SYSTEMS = ["alpha", "beta", "gamma"]

# item -> (source, {system: target})
DATA = {
    "it-1": ("The meeting was moved to Monday.", {
        "alpha": "La riunione è stata spostata a lunedì.",
        "beta": "La riunione è stato spostato a lunedì.",
        "gamma": "Il meeting è spostato lunedì.",
    }),
    "it-2": ("Please send the invoice by email.", {
        "alpha": "Per favore invia la fattura per email.",
        "beta": "Si prega di inviare la fattura via email.",
        "gamma": "Per favore manda il conto per posta.",
    }),
    "it-3": ("Our office is closed on public holidays.", {
        "alpha": "Il nostro ufficio è chiuso nei giorni festivi.",
        "beta": "Nostro ufficio è chiuso in feste pubbliche.",
        "gamma": "Il nostro ufficio è chiuso nei giorni festivi.",
    }),
    "it-4": ("The price includes shipping and taxes.", {
        "alpha": "Il prezzo include spedizione e tasse.",
        "beta": "Il prezzo include la spedizione e le tasse.",
        "gamma": "Il prezzo include spedizione.",
    }),
}

# (item, system) -> list of (annotator, score, [(phrase, severity)])
GOLD = {
    ("it-1", "alpha"): [("h1", 95, []), ("h2", 90, [])],
    ("it-1", "beta"): [("h1", 70, [("è stato spostato", "minor")]), ("h2", 75, [("stato spostato", "minor")])],
    ("it-1", "gamma"): [("h1", 40, [("meeting", "minor"), ("spostato lunedì", "major")]), ("h2", 50, [("meeting", "minor")])],
    ("it-2", "alpha"): [("h1", 85, []), ("h2", 85, [])],
    ("it-2", "beta"): [("h1", 90, []), ("h2", 95, [])],
    ("it-2", "gamma"): [("h1", 35, [("il conto", "major"), ("per posta", "major")]), ("h2", 30, [("per posta", "major")])],
    ("it-3", "alpha"): [("h1", 100, []), ("h2", 95, [])],
    ("it-3", "beta"): [("h1", 55, [("Nostro", "minor"), ("in feste pubbliche", "major")]), ("h2", 60, [("feste pubbliche", "major")])],
    ("it-3", "gamma"): [("h1", 100, []), ("h2", 95, [])],
    ("it-4", "alpha"): [("h1", 80, []), ("h2", 85, [("spedizione e tasse", "minor")])],
    ("it-4", "beta"): [("h1", 95, []), ("h2", 100, [])],
    ("it-4", "gamma"): [("h1", 30, [("spedizione.", "major")]), ("h2", 40, [])],
}

# (item, system) -> (score, {severity: [(type, source_error, target_error)]})
PRED = {
    ("it-1", "alpha"): (92, {}),
    ("it-1", "beta"): (80, {"minor": [("fluency/grammar", None, "stato spostato")]}),
    ("it-1", "gamma"): (45, {"major": [("style/awkward", None, "meeting"), ("fluency/grammar", "to", "spostato lunedì")],
                             "minor": [("fluency/grammar", None, "meeting")]}),
    ("it-2", "alpha"): (88, {"minor": [("fluency/register", None, "invia")]}),
    ("it-2", "beta"): (88, {}),
    ("it-2", "gamma"): (30, {"critical": [("accuracy/mistranslation", "invoice", "il conto"),
                                          ("accuracy/mistranslation", "by email", "per posta")]}),
    ("it-3", "alpha"): (100, {}),
    ("it-3", "beta"): (60, {"major": [("accuracy/mistranslation", "public holidays", "feste pubbliche")],
                            "minor": [("fluency/grammar", None, "nostro")]}),
    ("it-3", "gamma"): (100, {}),
    ("it-4", "alpha"): (90, {}),
    ("it-4", "beta"): (92, {}),
    ("it-4", "gamma"): (50, {"major": [("accuracy/omission", "and taxes", None)],
                             "minor": [("fluency/punctuation", None, "spedizione")]}),
}


def locate(target, errors):
    """Leftmost-unclaimed occurrence per phrase, severity lists visited critical, major, minor."""
    claimed = {}
    spans = []
    for sev in ("critical", "major", "minor"):
        for _, _, phrase in errors.get(sev, []):
            if phrase is None:
                continue
            starts = oracles.all_occurrences(target, phrase)
            k = claimed.get(phrase.lower(), 0)
            if k < len(starts):
                spans.append((starts[k], starts[k] + len(phrase), sev))
                claimed[phrase.lower()] = k + 1
    return spans


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    items = sorted(DATA)
    with open(OUT / "segments.jsonl", "w", encoding="utf-8") as fh:
        for item in items:
            src, targets = DATA[item]
            for sys_id in SYSTEMS:
                fh.write(json.dumps({"item_id": item, "system_id": sys_id, "src_lang": "English",
                                     "tgt_lang": "Italian", "source": src, "target": targets[sys_id]},
                                    ensure_ascii=False) + "\n")
    gold_spans = {}
    with open(OUT / "gold.jsonl", "w", encoding="utf-8") as fh:
        for (item, sys_id), anns in GOLD.items():
            target = DATA[item][1][sys_id]
            gold_spans[(item, sys_id)] = []
            for annotator, score, spans in anns:
                rows = []
                for phrase, sev in spans:
                    start = target.index(phrase)
                    rows.append({"start": start, "end": start + len(phrase), "severity": sev})
                    gold_spans[(item, sys_id)].append((start, start + len(phrase), sev))
                fh.write(json.dumps({"item_id": item, "system_id": sys_id, "annotator_id": annotator,
                                     "score": score, "spans": rows}, ensure_ascii=False) + "\n")
    with open(OUT / "predictions.jsonl", "w", encoding="utf-8") as fh:
        for (item, sys_id), (score, errors) in PRED.items():
            rec = {"item_id": item, "system_id": sys_id, "model": "toy-model", "score": score,
                   "post_edited_translation": "",
                   "errors": {sev: [{"type": t, "source_error": s, "target_error": tgt, "correction": None,
                                     "short_desc": None} for t, s, tgt in errors.get(sev, [])]
                              for sev in ("critical", "major", "minor")},
                   "warnings": []}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")

    human = {k: sum(a[1] for a in v) / len(v) for k, v in GOLD.items()}
    metric = {k: v[0] for k, v in PRED.items()}
    acc, eps = oracles.tie_calibration(metric, human, SYSTEMS, items)
    segs = [(locate(DATA[i][1][s], PRED[(i, s)][1]), gold_spans[(i, s)]) for i in items for s in SYSTEMS]
    p, r, f = oracles.micro_prf(segs, SEVERITY_MAP)

    h1 = {k: v[0][1] for k, v in GOLD.items()}
    h2 = {k: v[1][1] for k, v in GOLD.items()}
    iaa_acc, iaa_eps = oracles.tie_calibration(h2, h1, SYSTEMS, items)
    iaa_segs = [([(s, e, sev) for s, e, sev in _ann_spans(i, sy, 1)], _ann_spans(i, sy, 0))
                for i in items for sy in SYSTEMS]
    ip, ir, iff = oracles.micro_prf(iaa_segs, SEVERITY_MAP)
    expected = {
        "spa": oracles.spa(metric, human, SYSTEMS, items),
        "segment_accuracy": float(acc),
        "epsilon": float(eps),
        "span": {"precision": p, "recall": r, "f1": f},
        "iaa": {"spa": oracles.spa(h2, h1, SYSTEMS, items), "segment_accuracy": float(iaa_acc),
                "epsilon": float(iaa_eps), "span": {"precision": ip, "recall": ir, "f1": iff}},
    }
    (OUT / "expected.json").write_text(json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(expected, indent=2))


def _ann_spans(item, sys_id, k):
    target = DATA[item][1][sys_id]
    out = []
    for phrase, sev in GOLD[(item, sys_id)][k][2]:
        start = target.index(phrase)
        out.append((start, start + len(phrase), sev))
    return out


if __name__ == "__main__":
    main()
