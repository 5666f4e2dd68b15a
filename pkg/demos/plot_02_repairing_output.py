"""
Repairing model output
======================

Open models rarely return clean JSON. The repair parser recovers the
intended structure and says what it fixed.
"""

from openqe import parse_judgment, repair_and_parse

###############################################################################
# Python literals, single quotes and a trailing comma.

warnings = []
print(repair_and_parse("{'score': 90, \"target_error\": None,}", warnings))
print(warnings)

###############################################################################
# A fenced answer cut off mid-annotation: every open string, list and
# object gets closed.

raw = '''Sure! Here is my evaluation:
```json
{"score": 61, "post_edited_translation": "Die Bestellung wurde versandt.",
 "errors": {"critical": [], "major": [{"type": "accuracy/mistranslation",
 "source_error": "odeslána", "target_error": "verschickt", "correction": "versandt'''

warnings = []
value = repair_and_parse(raw, warnings)
print(value["errors"]["major"][0]["correction"])
print(warnings)

###############################################################################
# Validation then enforces the schema: score clamped into [0, 100],
# type paths lowercased, unknown keys dropped.

j = parse_judgment('{"score": "140", "confidence": 0.9, "errors": {"minor": '
                   '[{"type": "Fluency/Grammar", "target_error": "wurde"}]}}')
print(j.score, [a.type_path for a in j.minor])
for w in j.parse_warnings:
    print(" -", w)
