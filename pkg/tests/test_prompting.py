import json
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import segment, worked_examples
from openqe.ingestion import LanguagePair
from openqe.json_repair import repair_and_parse
from openqe.prompting import build_prompts, build_system_prompt, build_user_prompt

CS_DE = LanguagePair.from_names("Czech", "German")
EN_IT = LanguagePair.from_names("English", "Italian")


def test_system_prompt_golden(fixtures_dir):
    golden = (fixtures_dir / "prompts" / "system_czech_german.txt").read_bytes()
    assert build_system_prompt(CS_DE).encode("utf-8") == golden


def test_user_prompt_golden(fixtures_dir):
    seg = segment('Dobrý den, "vážený" zákazníku.', 'Guten Tag, "sehr geehrter" Kunde.\nZeile 2',
                  pair=("Czech", "German"))
    golden = (fixtures_dir / "prompts" / "user_czech_german.txt").read_bytes()
    assert build_user_prompt(seg).encode("utf-8") == golden


def test_opening_sentence():
    assert build_system_prompt(CS_DE).startswith(
        "You are an AI assistant specialized in Czech-to-German translation quality assurance.")


@pytest.mark.parametrize("pair", [CS_DE, EN_IT, LanguagePair.from_names("English", "Ukrainian")])
def test_polish_example_once_and_no_placeholders(pair):
    text = build_system_prompt(pair)
    assert text.count("Szanowny Kliencie") == 1
    assert "{source_language}" not in text and "{target_language}" not in text


def test_pairs_differ_only_at_placeholders():
    # a sentinel pair marks exactly where the language names land
    marked = build_system_prompt(LanguagePair("Qsrc", "Qtgt", "qs-qt"))
    assert marked.count("Qsrc") == marked.count("Qtgt") == 2
    for pair in (CS_DE, EN_IT):
        expected = marked.replace("Qsrc", pair.source_lang).replace("Qtgt", pair.target_lang)
        assert build_system_prompt(pair) == expected
    assert build_system_prompt(CS_DE) != build_system_prompt(EN_IT)


def test_system_prompt_is_pure():
    assert build_system_prompt(CS_DE) == build_system_prompt(LanguagePair("Czech", "German", "cs-de"))


def test_compact_example_by_parsed_value():
    text = build_user_prompt(segment("Hi", "Ciao"))
    assert json.loads(text) == json.loads(
        '{"source_language":"English","source":"Hi","translation_language":"Italian","translation":"Ciao"}')
    assert list(json.loads(text)) == ["source_language", "source", "translation_language", "translation"]


def test_quote_escaped():
    text = build_user_prompt(segment('He said "hi"', "Ciao"))
    assert '\\"hi\\"' in text
    assert json.loads(text)["source"] == 'He said "hi"'


def test_empty_target():
    assert json.loads(build_user_prompt(segment("Hi", "")))["translation"] == ""


def test_placeholder_text_in_segment_is_not_expanded():
    seg = segment("{target_text} and {source_language}", "{source_text}")
    data = json.loads(build_user_prompt(seg))
    assert data["source"] == "{target_text} and {source_language}"
    assert data["translation"] == "{source_text}"


@given(st.text(min_size=1), st.text())
def test_user_prompt_round_trips(source, target):
    data = json.loads(build_user_prompt(segment(source, target)))
    assert data == {"source_language": "English", "source": source,
                    "translation_language": "Italian", "translation": target}


def test_messages_shape():
    msgs = build_prompts(segment()).messages()
    assert [m["role"] for m in msgs] == ["system", "user"]


def test_few_shot_examples_are_repairable():
    examples = worked_examples()
    assert len(examples) == 3
    scores = [repair_and_parse(e)["score"] for e in examples]
    assert scores == [82, 45, 100]
    assert not re.search(r"\{(source|target)_language\}", "".join(examples))
