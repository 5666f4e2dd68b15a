"""Tolerant parsing of LLM output into validated QE judgments.

Repair runs in a fixed order: locate the JSON block, then parse it with a
forgiving recursive-descent reader that fixes token-level damage as it goes,
then close whatever scopes are still open at end of input. There is no
backtracking, so a given input always produces the same tree and the same
warnings.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterator

logger = logging.getLogger(__name__)

SEVERITIES = ("critical", "major", "minor")
SEVERITY_RANK = {"minor": 0, "major": 1, "critical": 2}

TOP_LEVEL_KEYS = ("score", "post_edited_translation", "errors")
ANNOTATION_KEYS = ("type", "source_error", "target_error", "correction", "short_desc")

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*[ \t]*\n?")
_NUMBER_RE = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_$][\w$\-]*")
_LITERALS = {"true": True, "false": False, "null": None, "True": True, "False": False, "None": None}


class RepairError(ValueError):
    """Raised when no usable JSON can be recovered."""


class ExtractionError(RepairError):
    pass


class ValidationError(ValueError):
    pass


# --------------------------------------------------------------------------- extraction


def _scan_balanced(text: str, start: int) -> int | None:
    """Index one past the brace matching ``text[start]``, or None if it never closes."""
    depth = 0
    quote = None
    i = start
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch == '"':
            quote = ch
        elif ch in "{[":
            depth += 1
        elif ch in "}]":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return None


def extract_json_block(raw: str) -> str:
    """Return the first ``{...}`` block in ``raw``, dropping code fences and surrounding prose.

    If the block never closes (truncated output) everything from the first
    brace onward is returned, minus a trailing fence.
    """
    text = _FENCE_RE.sub("", raw)
    start = text.find("{")
    if start == -1:
        raise ExtractionError("no '{' found in model output")
    end = _scan_balanced(text, start)
    if end is None:
        return text[start:].rstrip().removesuffix("```").rstrip()
    return text[start:end]


# --------------------------------------------------------------------------- tolerant parser


class _Reader:
    def __init__(self, text: str, warnings: list[str]):
        self.text = text
        self.pos = 0
        self.warnings = warnings
        self.closed_scopes = 0

    def warn(self, msg: str) -> None:
        self.warnings.append(msg)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def skip_ws(self) -> None:
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch in " \t\r\n﻿":
                self.pos += 1
            elif text.startswith("//", self.pos):
                nl = text.find("\n", self.pos)
                self.pos = len(text) if nl == -1 else nl + 1
                self.warn("removed // comment")
            elif text.startswith("/*", self.pos):
                close = text.find("*/", self.pos + 2)
                self.pos = len(text) if close == -1 else close + 2
                self.warn("removed /* */ comment")
            else:
                return

    # values

    def value(self) -> Any:
        self.skip_ws()
        ch = self.peek()
        if ch == "{":
            return self.obj()
        if ch == "[":
            return self.array()
        if ch in "\"'":
            return self.string(ch, in_key=False)
        if ch in "-+.0123456789":
            return self.number()
        m = _IDENT_RE.match(self.text, self.pos)
        if m:
            word = m.group()
            self.pos = m.end()
            if word in _LITERALS:
                if word not in ("true", "false", "null"):
                    self.warn(f"converted Python literal {word}")
                return _LITERALS[word]
            if word in ("NaN", "Infinity"):
                return float(word.replace("Infinity", "inf"))
            # unquoted text: read to the next structural character
            end = self.pos
            while end < len(self.text) and self.text[end] not in ",}]\n":
                end += 1
            word = (word + self.text[self.pos:end]).rstrip()
            self.pos = end
            self.warn(f"quoted bare word {word!r}")
            return word
        raise RepairError(f"unexpected character {ch!r} at offset {self.pos}" if ch else "unexpected end of input")

    def number(self) -> Any:
        m = _NUMBER_RE.match(self.text, self.pos)
        if not m:
            raise RepairError(f"malformed number at offset {self.pos}")
        tok = m.group()
        self.pos = m.end()
        strict = tok.lstrip("+")
        if re.fullmatch(r"-?(?:0|[1-9]\d*)", strict):
            if strict != tok:
                self.warn(f"normalized number {tok}")
            return int(strict)
        if re.fullmatch(r"-?(?:0|[1-9]\d*)(?:\.\d+)?(?:[eE][-+]?\d+)?", strict):
            if strict != tok:
                self.warn(f"normalized number {tok}")
            return float(strict)
        self.warn(f"normalized number {tok}")
        value = float(strict)
        return int(value) if value.is_integer() and "." not in tok and "e" not in tok.lower() else value

    def _closes_string(self, i: int, quote: str, in_key: bool) -> bool:
        """Decide whether the quote at ``i`` ends the string or is an unescaped inner quote."""
        if in_key:
            return True
        j = i + 1
        text = self.text
        while j < len(text) and text[j] in " \t\r":
            j += 1
        if j >= len(text):
            return True
        nxt = text[j]
        if nxt in ",}]:":
            return True
        if nxt in "\"'":
            # `"a" "b": ...` is a missing comma before the next key, not an inner quote
            close = text.find(nxt, j + 1)
            if close != -1:
                k = close + 1
                while k < len(text) and text[k] in " \t\r\n":
                    k += 1
                return k < len(text) and text[k] == ":"
            return False
        if nxt == "\n":
            # newline after the quote: closes unless the string clearly continues
            k = j
            while k < len(text) and text[k] in " \t\r\n":
                k += 1
            return k >= len(text) or text[k] in ",}]\"'" or _IDENT_RE.match(text, k) is not None
        return False

    def string(self, quote: str, in_key: bool) -> str:
        if quote == "'":
            self.warn("converted single-quoted string")
        self.pos += 1
        text = self.text
        out: list[str] = []
        while True:
            if self.pos >= len(text):
                self.warn("closed unterminated string")
                self.closed_scopes += 1
                return "".join(out)
            ch = text[self.pos]
            if ch == "\\":
                self.pos += 1
                out.append(self._escape())
                continue
            if ch == quote:
                if self._closes_string(self.pos, quote, in_key):
                    self.pos += 1
                    return "".join(out)
                self.warn("kept unescaped inner quote")
                out.append(ch)
                self.pos += 1
                continue
            if ch == "\n" or ch == "\r" or ch == "\t":
                self.warn("escaped raw control character in string")
            out.append(ch)
            self.pos += 1

    def _escape(self) -> str:
        text = self.text
        if self.pos >= len(text):
            return ""
        ch = text[self.pos]
        self.pos += 1
        simple = {'"': '"', "\\": "\\", "/": "/", "b": "\b", "f": "\f", "n": "\n", "r": "\r", "t": "\t", "'": "'"}
        if ch in simple:
            if ch == "'":
                self.warn("dropped needless escape before '")
            return simple[ch]
        if ch == "u":
            hexdigits = text[self.pos:self.pos + 4]
            if re.fullmatch(r"[0-9a-fA-F]{4}", hexdigits):
                self.pos += 4
                code = int(hexdigits, 16)
                if 0xD800 <= code < 0xDC00 and text.startswith("\\u", self.pos):
                    low = text[self.pos + 2:self.pos + 6]
                    if re.fullmatch(r"[0-9a-fA-F]{4}", low) and 0xDC00 <= int(low, 16) < 0xE000:
                        self.pos += 6
                        return chr(0x10000 + ((code - 0xD800) << 10) + (int(low, 16) - 0xDC00))
                return chr(code)
            self.warn("kept invalid \\u escape literally")
            return "\\u"
        self.warn(f"kept invalid escape \\{ch} literally")
        return "\\" + ch

    def key(self) -> str:
        ch = self.peek()
        if ch in "\"'":
            return self.string(ch, in_key=True)
        m = re.compile(r"[^:,{}\[\]\s\"']+").match(self.text, self.pos)
        if not m:
            raise RepairError(f"expected object key at offset {self.pos}")
        self.pos = m.end()
        self.warn(f"quoted bare key {m.group()!r}")
        return m.group()

    def obj(self) -> dict:
        self.pos += 1
        result: dict = {}
        expecting_member = True
        while True:
            self.skip_ws()
            ch = self.peek()
            if not ch:
                self.closed_scopes += 1
                return result
            if ch == "}":
                self.pos += 1
                if not expecting_member or not result:
                    return result
                self.warn("removed trailing comma")
                return result
            if ch == "]":
                self.warn("replaced mismatched ']' with '}'")
                self.pos += 1
                return result
            if ch == ",":
                self.pos += 1
                if expecting_member:
                    self.warn("removed stray comma")
                expecting_member = True
                continue
            if not expecting_member:
                self.warn("inserted missing comma")
            name = self.key()
            self.skip_ws()
            if self.at_end():
                self.warn(f"dropped key {name!r} without value")
                self.closed_scopes += 1
                return result
            if self.peek() == ":":
                self.pos += 1
            else:
                self.warn("inserted missing colon")
            self.skip_ws()
            if self.at_end() or self.peek() in ",}":
                self.warn(f"dropped key {name!r} without value")
                expecting_member = False
                continue
            result[name] = self.value()
            expecting_member = False

    def array(self) -> list:
        self.pos += 1
        result: list = []
        expecting_item = True
        while True:
            self.skip_ws()
            ch = self.peek()
            if not ch:
                self.closed_scopes += 1
                return result
            if ch == "]":
                self.pos += 1
                if expecting_item and result:
                    self.warn("removed trailing comma")
                return result
            if ch == "}":
                self.warn("replaced mismatched '}' with ']'")
                self.pos += 1
                return result
            if ch == ",":
                self.pos += 1
                if expecting_item:
                    self.warn("removed stray comma")
                expecting_item = True
                continue
            if not expecting_item:
                self.warn("inserted missing comma")
            result.append(self.value())
            expecting_item = False


def parse_loose(text: str, warnings: list[str] | None = None) -> Any:
    """Run the tolerant reader on ``text`` with no strict-parse shortcut."""
    warnings = [] if warnings is None else warnings
    reader = _Reader(text, warnings)
    reader.skip_ws()
    if reader.at_end():
        raise RepairError("empty input")
    try:
        value = reader.value()
    except RecursionError:
        raise RepairError("input nested too deeply") from None
    if reader.closed_scopes:
        warnings.append(f"closed {reader.closed_scopes} open scopes")
    reader.skip_ws()
    if not reader.at_end():
        warnings.append(f"ignored {len(text) - reader.pos} trailing characters")
    return value


def repair_and_parse(text: str, warnings: list[str] | None = None) -> Any:
    """Parse approximately-JSON ``text``; repairs are appended to ``warnings`` and logged.

    Strict JSON comes back exactly as :func:`json.loads` would return it.
    """
    warnings = [] if warnings is None else warnings
    stripped = text.strip()
    try:
        return json.loads(stripped)
    except (json.JSONDecodeError, RecursionError):
        pass
    if not stripped.startswith(("{", "[")):
        stripped = extract_json_block(stripped)
    before = len(warnings)
    value = parse_loose(stripped, warnings)
    for msg in warnings[before:]:
        logger.debug("json repair: %s", msg)
    return value


# --------------------------------------------------------------------------- validation


@dataclass(frozen=True, eq=False)
class ErrorAnnotation:
    """One error reported by the model.

    Equality is by identity on purpose: two identical-looking annotations are
    still two reports, and filters must be able to tell them apart.
    """

    type_path: str
    severity: str
    source_error: str | None = None
    target_error: str | None = None
    correction: str | None = None
    short_desc: str | None = None

    def to_dict(self) -> dict:
        return {
            "type": self.type_path,
            "source_error": self.source_error,
            "target_error": self.target_error,
            "correction": self.correction,
            "short_desc": self.short_desc,
        }

    def same_content(self, other: "ErrorAnnotation") -> bool:
        return self.to_dict() == other.to_dict() and self.severity == other.severity


@dataclass(frozen=True)
class QEJudgment:
    score: float | None
    post_edited_translation: str = ""
    critical: tuple[ErrorAnnotation, ...] = ()
    major: tuple[ErrorAnnotation, ...] = ()
    minor: tuple[ErrorAnnotation, ...] = ()
    parse_warnings: tuple[str, ...] = ()

    def errors(self, severity: str) -> tuple[ErrorAnnotation, ...]:
        return getattr(self, severity)

    def annotations(self) -> Iterator[ErrorAnnotation]:
        """All annotations, most severe list first."""
        for sev in SEVERITIES:
            yield from self.errors(sev)

    def n_errors(self) -> int:
        return len(self.critical) + len(self.major) + len(self.minor)

    def with_errors(self, by_severity: dict[str, list[ErrorAnnotation]]) -> "QEJudgment":
        return replace(self, **{sev: tuple(by_severity.get(sev, ())) for sev in SEVERITIES})

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "post_edited_translation": self.post_edited_translation,
            "errors": {sev: [a.to_dict() for a in self.errors(sev)] for sev in SEVERITIES},
        }

    @classmethod
    def from_dict(cls, data: dict, warnings: tuple[str, ...] = ()) -> "QEJudgment":
        """Inverse of :meth:`to_dict` for already-validated records."""
        errors = data.get("errors") or {}
        lists = {
            sev: tuple(
                ErrorAnnotation(
                    type_path=a.get("type", ""),
                    severity=sev,
                    source_error=a.get("source_error"),
                    target_error=a.get("target_error"),
                    correction=a.get("correction"),
                    short_desc=a.get("short_desc"),
                )
                for a in errors.get(sev, [])
            )
            for sev in SEVERITIES
        }
        return cls(data.get("score"), data.get("post_edited_translation", ""), parse_warnings=tuple(warnings), **lists)


def _coerce_score(raw: Any, warnings: list[str]) -> float | None:
    if isinstance(raw, bool) or raw is None:
        warnings.append(f"unusable score {raw!r}")
        return None
    if isinstance(raw, str):
        m = _NUMBER_RE.search(raw)
        if not m:
            warnings.append(f"unusable score {raw!r}")
            return None
        warnings.append(f"coerced score from string {raw!r}")
        raw = float(m.group())
    if not isinstance(raw, (int, float)) or math.isnan(raw):
        warnings.append(f"unusable score {raw!r}")
        return None
    score = float(raw)
    if score < 0 or score > 100:
        clamped = min(100.0, max(0.0, score))
        warnings.append(f"clamped score {raw} to {clamped:g}")
        score = clamped
    return score


def _opt_text(value: Any, name: str, warnings: list[str]) -> str | None:
    if value is None:
        return None
    if not isinstance(value, str):
        warnings.append(f"converted non-string {name} {value!r}")
        value = json.dumps(value, ensure_ascii=False) if not isinstance(value, (int, float)) else str(value)
    return value if value.strip() else None


def _annotation(raw: Any, severity: str, warnings: list[str]) -> ErrorAnnotation | None:
    if not isinstance(raw, dict):
        warnings.append(f"dropped non-object {severity} annotation {raw!r}")
        return None
    for k in raw:
        if k not in ANNOTATION_KEYS:
            if k == "severity":
                if str(raw[k]).lower() != severity:
                    warnings.append(f"inline severity {raw[k]!r} overridden by list {severity!r}")
            else:
                warnings.append(f"dropped unknown annotation key {k!r}")
    type_path = raw.get("type")
    type_path = "" if type_path is None else str(type_path)
    ann = ErrorAnnotation(
        type_path=type_path.strip().lower(),
        severity=severity,
        source_error=_opt_text(raw.get("source_error"), "source_error", warnings),
        target_error=_opt_text(raw.get("target_error"), "target_error", warnings),
        correction=_opt_text(raw.get("correction"), "correction", warnings),
        short_desc=_opt_text(raw.get("short_desc"), "short_desc", warnings),
    )
    if ann.source_error is None and ann.target_error is None:
        warnings.append(f"dropped {severity} annotation with neither source_error nor target_error")
        return None
    return ann


def validate_judgment(value: Any, warnings: list[str] | None = None) -> QEJudgment:
    """Turn a repaired JSON tree into a :class:`QEJudgment`.

    Unknown keys are dropped, the score is coerced and clamped to [0, 100],
    missing severity lists become empty, and annotations that name neither a
    source nor a target phrase are discarded. Every such fix adds a warning.
    """
    warnings = [] if warnings is None else warnings
    if not isinstance(value, dict):
        raise ValidationError(f"expected a JSON object, got {type(value).__name__}")
    if "score" not in value and "errors" not in value:
        raise ValidationError("output has neither 'score' nor 'errors'")
    for k in value:
        if k not in TOP_LEVEL_KEYS:
            warnings.append(f"dropped unknown key {k!r}")

    if "score" in value:
        score = _coerce_score(value["score"], warnings)
    else:
        warnings.append("missing score")
        score = None

    pe = value.get("post_edited_translation")
    if pe is None:
        if "post_edited_translation" not in value:
            warnings.append("missing post_edited_translation")
        pe = ""
    elif not isinstance(pe, str):
        warnings.append("converted non-string post_edited_translation")
        pe = json.dumps(pe, ensure_ascii=False)

    raw_errors = value.get("errors")
    lists: dict[str, list[ErrorAnnotation]] = {sev: [] for sev in SEVERITIES}
    if raw_errors is None:
        if "errors" not in value:
            warnings.append("missing errors")
    elif isinstance(raw_errors, dict):
        for sev_key, items in raw_errors.items():
            sev = str(sev_key).strip().lower()
            if sev not in lists:
                warnings.append(f"dropped unknown severity list {sev_key!r}")
                continue
            if items is None:
                continue
            if isinstance(items, dict):
                items = [items]
            if not isinstance(items, list):
                warnings.append(f"dropped non-list {sev} errors")
                continue
            for raw in items:
                ann = _annotation(raw, sev, warnings)
                if ann is not None:
                    lists[sev].append(ann)
    elif isinstance(raw_errors, list):
        # flat list: the only place an inline severity is honoured
        warnings.append("errors given as a flat list")
        for raw in raw_errors:
            sev = str(raw.get("severity", "")).lower() if isinstance(raw, dict) else ""
            if sev not in lists:
                warnings.append(f"dropped annotation without usable severity {raw!r}")
                continue
            ann = _annotation({k: v for k, v in raw.items() if k != "severity"}, sev, warnings)
            if ann is not None:
                lists[sev].append(ann)
    else:
        warnings.append(f"dropped non-object errors {raw_errors!r}")

    return QEJudgment(score=score, post_edited_translation=pe, parse_warnings=tuple(warnings),
                      **{sev: tuple(v) for sev, v in lists.items()})


def parse_judgment(raw: str) -> QEJudgment:
    """Extract, repair and validate raw model output in one go."""
    warnings: list[str] = []
    value = repair_and_parse(raw, warnings)
    return validate_judgment(value, warnings)
