"""Write fixtures/e2e/: five cs-de segments, two-annotator gold, and mock-server responses.

Mock responses are keyed by request fingerprint, so this must be re-run
whenever the prompt templates change.
"""

import json
from pathlib import Path

from openqe.ingestion import LanguagePair, Segment
from openqe.mock_server import fingerprint
from openqe.prompting import build_prompts

ROOT = Path(__file__).resolve().parent.parent / "fixtures" / "e2e"
MODEL = "mock-qe"

SOURCE = "Děkujeme za vaši objednávku. Balík odešleme zítra a dorazí do tří pracovních dnů."
TARGETS = {
    "sysA": "Vielen Dank für Ihre Bestellung. Wir versenden das Paket morgen und es kommt in drei Werktagen an.",
    "sysB": "Danke für deine Bestellung. Wir schicken das Paket morgen, es kommt in drei Arbeitstage an.",
    "sysC": "Vielen Dank für Ihre Bestellung. Das Paket wird morgen versendet.",
    "sysD": "Děkujeme za vaši objednávku. Balík odešleme zítra.",
    "sysE": "Danke für Ihre Bestelung. Wir senden das Paket morgen und es ist da in drei Tagen.",
}

RESPONSES = {
    # clean
    "sysA": json.dumps({"score": 95, "post_edited_translation": TARGETS["sysA"],
                        "errors": {"critical": [], "major": [], "minor": []}}, ensure_ascii=False),
    # fenced, Python None, same phrase under two severities
    "sysB": "```json\n" + """{
    "score": 70,
    "post_edited_translation": "Danke für Ihre Bestellung. Wir schicken das Paket morgen, es kommt in drei Werktagen an.",
    "errors": {
        "critical": [],
        "major": [
            {"type": "fluency/grammar", "source_error": "pracovních dnů", "target_error": "Arbeitstage", "correction": "Werktagen", "short_desc": "wrong case"}
        ],
        "minor": [
            {"type": "fluency/register", "source_error": None, "target_error": "deine", "correction": "Ihre", "short_desc": "'deine' should be 'Ihre'"},
            {"type": "fluency/grammar", "source_error": None, "target_error": "arbeitstage", "correction": "Werktagen", "short_desc": "case"}
        ]
    },
}""" + "\n```",
    # omission plus a hallucinated phrase
    "sysC": """Here is my analysis:
{"score": 55, "post_edited_translation": "Vielen Dank für Ihre Bestellung. Das Paket wird morgen versendet und kommt in drei Werktagen an.",
 "errors": {"critical": [], "major": [
   {"type": "accuracy/omission", "source_error": "dorazí do tří pracovních dnů", "target_error": null, "correction": "und kommt in drei Werktagen an", "short_desc": "delivery time missing"},
   {"type": "accuracy/mistranslation", "source_error": "Balík", "target_error": "Päckchen", "correction": "Paket", "short_desc": "not in the text"}
 ], "minor": []}}""",
    # wrong language, score out of range
    "sysD": "{'score': -5, 'post_edited_translation': 'Vielen Dank für Ihre Bestellung. Wir versenden das Paket morgen.', "
            "'errors': {'critical': [{'type': 'non-translation', 'source_error': None, 'target_error': "
            "'Děkujeme za vaši objednávku. Balík odešleme zítra.', 'correction': 'Vielen Dank für Ihre Bestellung.', "
            "'short_desc': 'untranslated'}], 'major': [], 'minor': []}}",
    # truncated output
    "sysE": '{"score": 48, "post_edited_translation": "Danke für Ihre Bestellung. Wir senden das Paket morgen und es ist '
            'in drei Tagen da.", "errors": {"critical": [], "major": [{"type": "fluency/spelling", "source_error": null, '
            '"target_error": "Bestelung", "correction": "Bestellung", "short_desc": "typo"}, {"type": "style/awkward", '
            '"source_error": "dorazí", "target_error": "es ist da", "correction": "es ist da", "short_desc": "word order"',
}

GOLD = [
    ("sysA", "ann1", 92, []),
    ("sysA", "ann2", 96, []),
    ("sysB", "ann1", 68, [("deine", "minor"), ("Arbeitstage", "major")]),
    ("sysB", "ann2", 74, [("Arbeitstage", "minor")]),
    ("sysC", "ann1", 50, [("versendet.", "major")]),
    ("sysC", "ann2", 60, []),
    ("sysD", "ann1", 0, [("Děkujeme za vaši objednávku. Balík odešleme zítra.", "major")]),
    ("sysD", "ann2", 2, [("Děkujeme za vaši objednávku.", "major")]),
    ("sysE", "ann1", 45, [("Bestelung", "minor"), ("es ist da", "minor")]),
    ("sysE", "ann2", 40, [("Bestelung", "minor")]),
]


def main() -> None:
    ROOT.mkdir(parents=True, exist_ok=True)
    pair = LanguagePair.from_names("Czech", "German")
    segments = [Segment("doc1-p1", sys, pair, SOURCE, tgt) for sys, tgt in TARGETS.items()]
    with open(ROOT / "segments.jsonl", "w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(json.dumps(seg.to_dict(), ensure_ascii=False) + "\n")
    with open(ROOT / "gold.jsonl", "w", encoding="utf-8") as fh:
        for sys, annotator, score, spans in GOLD:
            target = TARGETS[sys]
            rows = []
            for phrase, sev in spans:
                start = target.index(phrase)
                rows.append({"start": start, "end": start + len(phrase), "severity": sev})
            fh.write(json.dumps({"item_id": "doc1-p1", "system_id": sys, "annotator_id": annotator,
                                 "score": score, "spans": rows}, ensure_ascii=False) + "\n")
    responses = {}
    for seg in segments:
        responses[fingerprint(MODEL, build_prompts(seg).messages())] = RESPONSES[seg.system_id]
    mock = ROOT / "mock"
    mock.mkdir(exist_ok=True)
    (mock / "responses.json").write_text(json.dumps(responses, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    print(f"wrote e2e fixtures to {ROOT}")


if __name__ == "__main__":
    main()
