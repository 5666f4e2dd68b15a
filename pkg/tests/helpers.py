"""Shared builders and strategies for the test suite."""

from __future__ import annotations

import json

from hypothesis import strategies as st

from openqe.ingestion import LanguagePair, Segment
from openqe.json_repair import SEVERITIES, ErrorAnnotation, QEJudgment
from openqe.prompting import load_template

OUTPUT_MARKER = "And here is a corresponding JSON output"


def worked_examples() -> list[str]:
    """Raw text of the three few-shot example outputs embedded in the system prompt."""
    text = load_template("system_prompt.txt")
    out = []
    pos = 0
    while (pos := text.find(OUTPUT_MARKER, pos)) != -1:
        start = text.index("\n{", pos) + 1
        end = text.index("\n}", start) + 2
        out.append(text[start:end])
        pos = end
    return out


def segment(source="Hi", target="Ciao", item="1", system="a", pair=("English", "Italian")) -> Segment:
    return Segment(item, system, LanguagePair.from_names(*pair), source, target)


def annotation(severity, target_error, source_error=None, type_path="accuracy/mistranslation"):
    return ErrorAnnotation(type_path, severity, source_error, target_error)


def judgment(by_severity: dict, score=50.0) -> QEJudgment:
    return QEJudgment(score, "", **{s: tuple(by_severity.get(s, ())) for s in SEVERITIES})


WORDS = ["das", "ist", "gut", "Das", "GUT", "dir", "wäre", "straße", "STRASSE", "ok"]


@st.composite
def target_and_judgment(draw):
    """A target text plus a judgment whose phrases are partly present, partly hallucinated."""
    target = " ".join(draw(st.lists(st.sampled_from(WORDS), min_size=1, max_size=8)))
    tokens = target.split()
    phrases = st.one_of(
        st.none(),
        st.sampled_from(WORDS + ["fehlt", "nicht da"]),
        st.integers(0, len(tokens) - 1).flatmap(
            lambda i: st.integers(i + 1, len(tokens)).map(lambda j: "  ".join(tokens[i:j]))),
    )
    lists = {}
    for sev in SEVERITIES:
        entries = draw(st.lists(phrases, max_size=4))
        lists[sev] = [annotation(sev, p, None if p else "src") for p in entries]
    return target, judgment(lists)


def dump(value) -> str:
    return json.dumps(value, ensure_ascii=False)
