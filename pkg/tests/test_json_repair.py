import json
import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import worked_examples
from openqe.json_repair import (
    ExtractionError,
    RepairError,
    ValidationError,
    extract_json_block,
    parse_judgment,
    parse_loose,
    repair_and_parse,
    validate_judgment,
)


def corpus(fixtures_dir):
    for raw in sorted((fixtures_dir / "json_repair").glob("case_*.txt")):
        expected = json.loads(raw.with_suffix(".expected.json").read_text(encoding="utf-8"))
        yield raw.stem, raw.read_text(encoding="utf-8"), expected


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**12, 10**12)
    | st.floats(allow_nan=False, allow_infinity=False) | st.text(),
    lambda children: st.lists(children, max_size=4) | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)


# ---------------------------------------------------------------- extraction

@pytest.mark.parametrize("raw, block", [
    ('```json\n{"score":90}\n```', '{"score":90}'),
    ('Here is the analysis: {"score":5}', '{"score":5}'),
    ('{"a": "}"} trailing', '{"a": "}"}'),
    ('prefix {"a": {"b": [1, 2]', '{"a": {"b": [1, 2]'),
])
def test_extract(raw, block):
    assert extract_json_block(raw) == block


def test_extract_without_brace():
    with pytest.raises(ExtractionError):
        extract_json_block("no braces at all")


# ---------------------------------------------------------------- repair

def test_strict_identity_no_warnings():
    warnings = []
    assert repair_and_parse('{"score": 90}', warnings) == {"score": 90}
    assert warnings == []


def test_mixed_quotes_and_none():
    text = "{'score': 90, \"target_error\": None,}"
    value = repair_and_parse(text)
    assert value == {"score": 90, "target_error": None}
    assert json.loads(json.dumps(value)) == value


def test_truncated_closure_count():
    text = '{"errors": {"minor": [{"type": "fluency/grammar"'
    warnings = []
    value = repair_and_parse(text, warnings)
    assert value == {"errors": {"minor": [{"type": "fluency/grammar"}]}}
    assert oracles.open_scopes(text) == 4
    assert "closed 4 open scopes" in warnings


def test_corpus_cases(fixtures_dir):
    failures = [name for name, raw, expected in corpus(fixtures_dir) if _try(raw) != expected]
    assert failures == []


def _try(raw):
    try:
        return repair_and_parse(raw)
    except RepairError:
        return None


@pytest.mark.parametrize("raw", ["", "   ", "```json\n```"])
def test_irrecoverable(raw):
    with pytest.raises(RepairError):
        repair_and_parse(raw)


def test_deep_nesting_is_an_error_not_a_crash():
    with pytest.raises(RepairError):
        parse_loose("[" * 100_000)


@settings(max_examples=300)
@given(json_values, st.sampled_from([None, 2]))
def test_conservative_on_strict_json(value, indent):
    text = json.dumps(value, indent=indent, ensure_ascii=indent is None)
    warnings = []
    assert parse_loose(text, warnings) == json.loads(text)
    assert warnings == []


@settings(max_examples=200)
@given(st.text(max_size=60))
def test_total_or_repair_error(text):
    try:
        repair_and_parse(text)
    except RepairError:
        pass


def test_idempotent_on_corpus(fixtures_dir):
    for _, raw, _ in corpus(fixtures_dir):
        once = repair_and_parse(raw)
        assert repair_and_parse(json.dumps(once)) == once


@settings(max_examples=200)
@given(json_values.filter(lambda v: isinstance(v, (dict, list))), st.integers(0, 200))
def test_idempotent_on_truncations(value, cut):
    text = json.dumps(value)[:max(1, cut)]
    try:
        once = repair_and_parse(text)
    except RepairError:
        return
    assert repair_and_parse(json.dumps(once)) == once


@settings(max_examples=200)
@given(json_values.filter(lambda v: isinstance(v, (dict, list))), st.data())
def test_truncation_closes_every_open_scope(value, data):
    text = json.dumps(value)
    cut = data.draw(st.integers(1, len(text)))
    prefix = text[:cut]
    # only cut right after a value or a bracket, where closing is unambiguous
    if prefix[-1] not in '{["0123456789el]}' or prefix.endswith("\\"):
        return
    warnings = []
    try:
        repair_and_parse(prefix, warnings)
    except RepairError:
        return
    expected = oracles.open_scopes(prefix)
    closed = [w for w in warnings if re.fullmatch(r"closed \d+ open scopes", w)]
    if expected == 0:
        assert closed == []
    else:
        assert closed == [f"closed {expected} open scopes"]


# ---------------------------------------------------------------- validation

def test_clamp_high_score():
    j = validate_judgment({"score": 150, "errors": {}})
    assert j.score == 100.0
    assert any("clamp" in w for w in j.parse_warnings)


def test_clamp_negative_score():
    assert validate_judgment({"score": -5, "errors": {}}).score == 0.0


def test_numeric_string_score():
    assert validate_judgment({"score": "82", "errors": {}}).score == 82.0


def test_missing_score_and_errors():
    with pytest.raises(ValidationError):
        validate_judgment({"post_edited_translation": "x"})


def test_not_an_object():
    with pytest.raises(ValidationError):
        validate_judgment([1, 2])


def test_normalisations():
    j = validate_judgment({
        "score": 60, "extra": 1,
        "errors": {"major": [
            {"type": "Accuracy/Omission", "source_error": "x", "target_error": None, "severity": "minor"},
            {"type": "style", "source_error": None, "target_error": None},
        ]},
    })
    assert [a.type_path for a in j.major] == ["accuracy/omission"]
    assert j.major[0].severity == "major"
    assert j.critical == () and j.minor == ()
    assert any("extra" in w for w in j.parse_warnings)
    assert any("neither" in w for w in j.parse_warnings)


def test_worked_example():
    j = parse_judgment(worked_examples()[0])
    assert j.score == 82.0
    assert (len(j.critical), len(j.major), len(j.minor)) == (0, 2, 2)
    assert [a.target_error for a in j.major] == ["involvment", None]
    assert [a.target_error for a in j.minor] == ["wäre", "dir"]
    assert j.minor[1].short_desc == "'dir' should be 'Sie'"


@given(st.one_of(st.integers(-1000, 1000), st.floats(-1e6, 1e6, allow_nan=False)))
def test_score_always_in_range(score):
    j = validate_judgment({"score": score, "errors": {}})
    assert 0.0 <= j.score <= 100.0
    assert math.isclose(j.score, min(100, max(0, score)))


def test_judgment_dict_round_trip():
    j = parse_judgment(worked_examples()[1])
    again = validate_judgment(json.loads(json.dumps(j.to_dict())))
    assert again.to_dict() == j.to_dict()
