import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import annotation, judgment, target_and_judgment
from openqe.filtering import filter_hallucinated
from openqe.span_alignment import AlignmentError, CharSpan, locate_spans
from openqe.textnorm import normalize_phrase


def spans_of(j, target, **kw):
    return [(s.start, s.end, s.severity) for s in locate_spans(j, target, **kw)]


def test_leftmost():
    assert spans_of(judgment({"minor": [annotation("minor", "aa")]}), "aa bb aa") == [(0, 2, "minor")]


def test_occurrence_cursor():
    j = judgment({"minor": [annotation("minor", "aa"), annotation("minor", "AA")]})
    assert spans_of(j, "aa bb aa") == [(0, 2, "minor"), (6, 8, "minor")]
    assert oracles.all_occurrences("aa bb aa", "aa") == [0, 6]


def test_omission_has_no_span():
    j = judgment({"major": [annotation("major", None, "missing")]})
    assert spans_of(j, "aa bb aa") == []


def test_surplus_dropped_with_warning():
    warnings = []
    j = judgment({"minor": [annotation("minor", "bb"), annotation("minor", "bb")]})
    assert spans_of(j, "aa bb aa", warnings=warnings) == [(3, 5, "minor")]
    assert warnings


def test_absent_phrase():
    j = judgment({"minor": [annotation("minor", "zz")]})
    with pytest.raises(AlignmentError, match="zz"):
        locate_spans(j, "aa bb")
    warnings = []
    assert spans_of(j, "aa bb", missing="skip", warnings=warnings) == []
    assert warnings


def test_offsets_count_code_points():
    target = "😀 straße 😀"
    j = judgment({"major": [annotation("major", "STRASSE")]})
    assert spans_of(j, target) == [(2, 8, "major")]
    assert target[2:8] == "straße"


def test_overlapping_occurrences():
    j = judgment({"minor": [annotation("minor", "aa"), annotation("minor", "aa")]})
    assert spans_of(j, "aaa") == [(0, 2, "minor"), (1, 3, "minor")]


def test_charspan_checks():
    with pytest.raises(ValueError):
        CharSpan(3, 3, "minor")
    with pytest.raises(ValueError):
        CharSpan(0, 1, "fatal")
    with pytest.raises(AlignmentError):
        CharSpan(0, 5, "minor").check_bounds(4)


@settings(max_examples=300)
@given(target_and_judgment())
def test_invariants(case):
    target, j = case
    j = filter_hallucinated(j, target)
    warnings = []
    spans = locate_spans(j, target, warnings=warnings)
    with_phrase = [a for a in j.annotations() if a.target_error is not None]
    assert len(spans) + len(warnings) == len(with_phrase)
    assert spans == sorted(spans)
    phrases = {normalize_phrase(a.target_error) for a in with_phrase}
    for s in spans:
        assert 0 <= s.start < s.end <= len(target)
        assert normalize_phrase(target[s.start:s.end]) in phrases


@settings(max_examples=200)
@given(st.lists(st.sampled_from(["ab", "b", "ba", "a"]), min_size=1, max_size=6, unique=True),
       st.text(alphabet="ab ", min_size=1, max_size=12), st.randoms())
def test_distinct_phrase_permutation(phrases, target, rnd):
    anns = [annotation("minor", p) for p in phrases if oracles.all_occurrences(target, p)]
    shuffled = list(anns)
    rnd.shuffle(shuffled)
    assert spans_of(judgment({"minor": anns}), target) == spans_of(judgment({"minor": shuffled}), target)


@settings(max_examples=200)
@given(st.text(alphabet="ab", min_size=1, max_size=10), st.sampled_from(["a", "ab", "ba", "aa"]),
       st.integers(1, 5))
def test_cursor_matches_enumeration(target, phrase, k):
    starts = oracles.all_occurrences(target, phrase)
    j = judgment({"minor": [annotation("minor", phrase) for _ in range(k)]})
    got = spans_of(j, target, missing="skip")
    assert got == [(s, s + len(phrase), "minor") for s in starts[:k]]
