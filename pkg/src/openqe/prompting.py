"""System and user prompts for the single-pass QE request."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from openqe.ingestion import LanguagePair, Segment


@dataclass(frozen=True)
class PromptPair:
    system_text: str
    user_text: str

    def messages(self) -> list[dict]:
        return [
            {"role": "system", "content": self.system_text},
            {"role": "user", "content": self.user_text},
        ]


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return resources.files("openqe").joinpath("templates", name).read_text(encoding="utf-8")


def _fill(template: str, values: dict[str, str]) -> str:
    # Single pass over the named placeholders only: the few-shot JSON keeps its
    # braces, and substituted text is never rescanned.
    pattern = re.compile("|".join(re.escape("{" + n + "}") for n in values))
    return pattern.sub(lambda m: values[m.group()[1:-1]], template)


def build_system_prompt(pair: LanguagePair) -> str:
    """The instruction prompt with its three fixed few-shot examples, for any language pair."""
    return _fill(load_template("system_prompt.txt"),
                 {"source_language": pair.source_lang, "target_language": pair.target_lang})


def build_user_prompt(segment: Segment) -> str:
    """The segment as a JSON object; each field value is JSON-encoded in place."""
    enc = lambda s: json.dumps(s, ensure_ascii=False)  # noqa: E731
    return _fill(load_template("user_prompt.txt"), {
        "source_language": enc(segment.pair.source_lang),
        "source_text": enc(segment.source),
        "target_language": enc(segment.pair.target_lang),
        "target_text": enc(segment.target),
    })


def build_prompts(segment: Segment) -> PromptPair:
    return PromptPair(build_system_prompt(segment.pair), build_user_prompt(segment))
