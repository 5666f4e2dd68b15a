from hypothesis import given
from hypothesis import strategies as st

from openqe.textnorm import FoldedText, normalize_phrase


def test_normalize():
    assert normalize_phrase("  Das\n IST\tgut ") == "das ist gut"


def test_offsets_map_back_to_original():
    text = "Die  STRASSE ist\n\nlang"
    ft = FoldedText.of(text)
    assert ft.occurrences("straße ist lang") == [(5, 22)]  # ß folds to ss on the phrase side too
    assert ft.occurrences("strasse ist lang") == [(5, 22)]
    assert text[5:22] == "STRASSE ist\n\nlang"


def test_sharp_s_not_split():
    ft = FoldedText.of("Maße")
    assert ft.occurrences("masse") == [(0, 4)]
    assert ft.occurrences("mas") == []  # would end inside the ß expansion
    assert ft.occurrences("ße") == [(2, 4)]


def test_empty_phrase_never_matches():
    assert not FoldedText.of("abc").contains("   ")


@given(st.text(max_size=30), st.integers(0, 30), st.integers(0, 30))
def test_every_substring_is_found(text, i, j):
    i, j = sorted((min(i, len(text)), min(j, len(text))))
    phrase = text[i:j]
    if not normalize_phrase(phrase):
        return
    ft = FoldedText.of(text)
    found = ft.occurrences(phrase)
    # the substring (or an equivalent one) is located, and every hit normalizes back to the phrase
    assert found
    for s, e in found:
        assert normalize_phrase(text[s:e]) == normalize_phrase(phrase)
