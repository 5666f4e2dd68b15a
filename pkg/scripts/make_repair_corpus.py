"""Write fixtures/json_repair/: malformed model outputs paired with the structure they meant.

Expected values are written by hand here, never produced by the parser.
Re-run after editing: ``python scripts/make_repair_corpus.py``.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "json_repair"

E = {"critical": [], "major": [], "minor": []}


def ann(t, s, tgt, c, d):
    return {"type": t, "source_error": s, "target_error": tgt, "correction": c, "short_desc": d}


GRAMMAR = ann("fluency/grammar", None, "wäre", "kann", "awkward")

CASES = [
    # 1 strict JSON
    ('{"score": 90, "post_edited_translation": "Hallo", "errors": {"critical": [], "major": [], "minor": []}}',
     {"score": 90, "post_edited_translation": "Hallo", "errors": E}),
    # 2 markdown fence
    ('```json\n{"score": 75, "errors": {"minor": []}}\n```',
     {"score": 75, "errors": {"minor": []}}),
    # 3 fence without language tag
    ('```\n{"score": 60}\n```', {"score": 60}),
    # 4 leading prose
    ('Here is the analysis of the translation:\n{"score": 5, "errors": {}}',
     {"score": 5, "errors": {}}),
    # 5 trailing prose
    ('{"score": 88}\nLet me know if you need anything else!', {"score": 88}),
    # 6 trailing comma in object
    ('{"score": 70, "post_edited_translation": "Ciao",}', {"score": 70, "post_edited_translation": "Ciao"}),
    # 7 trailing comma in array
    ('{"errors": {"minor": [{"type": "style/awkward", "source_error": null, "target_error": "x", '
     '"correction": "y", "short_desc": "z"},]}}',
     {"errors": {"minor": [ann("style/awkward", None, "x", "y", "z")]}}),
    # 8 Python None
    ('{"score": 82, "errors": {"major": [{"type": "accuracy/omission", "source_error": "the account holder", '
     '"target_error": None, "correction": "Kontoinhaber", "short_desc": "missing"}]}}',
     {"score": 82, "errors": {"major": [ann("accuracy/omission", "the account holder", None, "Kontoinhaber",
                                             "missing")]}}),
    # 9 Python True/False
    ('{"score": 50, "flag": True, "other": False}', {"score": 50, "flag": True, "other": False}),
    # 10 single-quoted keys and strings
    ("{'score': 90, 'post_edited_translation': 'Das ist gut'}",
     {"score": 90, "post_edited_translation": "Das ist gut"}),
    # 11 mixed quotes with None and trailing comma
    ("{'score': 90, \"target_error\": None,}", {"score": 90, "target_error": None}),
    # 12 unquoted keys
    ('{score: 64, post_edited_translation: "Buongiorno"}', {"score": 64, "post_edited_translation": "Buongiorno"}),
    # 13 missing comma between members
    ('{"score": 77 "post_edited_translation": "Dobrý den"}', {"score": 77, "post_edited_translation": "Dobrý den"}),
    # 14 missing comma between string members across lines
    ('{\n  "score": 40,\n  "post_edited_translation": "Servus"\n  "errors": {"critical": []}\n}',
     {"score": 40, "post_edited_translation": "Servus", "errors": {"critical": []}}),
    # 15 missing comma between array objects
    ('{"errors": {"minor": [{"type": "fluency/grammar", "source_error": null, "target_error": "wäre", '
     '"correction": "kann", "short_desc": "awkward"} {"type": "fluency/grammar", "source_error": null, '
     '"target_error": "wäre", "correction": "kann", "short_desc": "awkward"}]}}',
     {"errors": {"minor": [GRAMMAR, GRAMMAR]}}),
    # 16 raw newline inside string
    ('{"score": 55, "post_edited_translation": "Zeile eins\nZeile zwei"}',
     {"score": 55, "post_edited_translation": "Zeile eins\nZeile zwei"}),
    # 17 raw tab inside string
    ('{"post_edited_translation": "a\tb", "score": 1}', {"post_edited_translation": "a\tb", "score": 1}),
    # 18 truncated inside nested structure
    ('{"errors": {"minor": [{"type": "fluency/grammar"', {"errors": {"minor": [{"type": "fluency/grammar"}]}}),
    # 19 truncated inside a string value
    ('{"score": 35, "post_edited_translation": "Das Wetter ist', {"score": 35, "post_edited_translation": "Das Wetter ist"}),
    # 20 truncated after a key and colon
    ('{"score": 35, "post_edited_translation":', {"score": 35}),
    # 21 truncated after comma
    ('{"score": 12, "errors": {"critical": [],', {"score": 12, "errors": {"critical": []}}),
    # 22 truncated in fenced block
    ('```json\n{"score": 91, "errors": {"major": []', {"score": 91, "errors": {"major": []}}),
    # 23 unescaped inner double quotes
    ('{"short_desc": "the word "Sie" is formal", "score": 3}', {"short_desc": 'the word "Sie" is formal', "score": 3}),
    # 24 apostrophes inside single-quoted string
    ("{'short_desc': 'it's wrong', 'score': 20}", {"short_desc": "it's wrong", "score": 20}),
    # 25 // comment
    ('{\n  "score": 66, // overall quality\n  "errors": {}\n}', {"score": 66, "errors": {}}),
    # 26 /* */ comment
    ('{"score": /* rounded */ 81}', {"score": 81}),
    # 27 numeric string score stays a string at parse level
    ('{"score": "82"}', {"score": "82"}),
    # 28 leading plus sign
    ('{"score": +45}', {"score": 45}),
    # 29 trailing-dot decimal
    ('{"score": 45.}', {"score": 45.0}),
    # 30 double comma
    ('{"score": 45,, "post_edited_translation": "x"}', {"score": 45, "post_edited_translation": "x"}),
    # 31 mismatched closing bracket
    ('{"errors": {"minor": [}}', {"errors": {"minor": []}}),
    # 32 \u escapes with surrogate pair
    ('{"post_edited_translation": "\\u00e4 \\ud83d\\ude00", "score": 99,}',
     {"post_edited_translation": "ä 😀", "score": 99}),
    # 33 escaped single quote inside double-quoted string
    ('{"short_desc": "\\\'dir\\\' should be \\\'Sie\\\'", "score": 70,}', {"short_desc": "'dir' should be 'Sie'", "score": 70}),
    # 34 Cyrillic content with trailing comma
    ('{"score": 58, "post_edited_translation": "Привіт, світе",}', {"score": 58, "post_edited_translation": "Привіт, світе"}),
    # 35 BOM and whitespace before object
    ('﻿  \n{"score": 13}', {"score": 13}),
    # 36 whole judgment with Python literals and trailing commas (prompt example style)
    ('{\n    "score": 82,\n    "errors": {\n        "critical": [],\n        "minor": [\n'
     '            {"type": "fluency/register", "source_error": None, "target_error": "dir", "correction": "Sie", '
     '"short_desc": "\'dir\' should be \'Sie\'"}\n        ]\n    },\n}',
     {"score": 82, "errors": {"critical": [], "minor": [ann("fluency/register", None, "dir", "Sie",
                                                              "'dir' should be 'Sie'")]}}),
    # 37 thinking text with braces-free prose then object
    ('<think>The translation has a grammar issue.</think>\n{"score": 72, "errors": {"minor": []}}',
     {"score": 72, "errors": {"minor": []}}),
    # 38 bare-word value
    ('{"score": 30, "post_edited_translation": unchanged}', {"score": 30, "post_edited_translation": "unchanged"}),
    # 39 truncated mid-key
    ('{"score": 47, "post_ed', {"score": 47}),
    # 40 two objects: first one wins
    ('{"score": 10} {"score": 20}', {"score": 10}),
]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for old in OUT.glob("case_*"):
        old.unlink()
    for k, (raw, expected) in enumerate(CASES, start=1):
        (OUT / f"case_{k:02d}.txt").write_text(raw, encoding="utf-8")
        (OUT / f"case_{k:02d}.expected.json").write_text(
            json.dumps(expected, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {len(CASES)} cases to {OUT}")


if __name__ == "__main__":
    main()
