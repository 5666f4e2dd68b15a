"""Case- and whitespace-insensitive phrase matching with offsets in the original text.

Both the hallucination filter and span alignment go through here, so a phrase
that survives filtering is always locatable.
"""

from __future__ import annotations

from dataclasses import dataclass


def normalize_phrase(text: str) -> str:
    """Case-fold and collapse whitespace runs to single spaces (stripped)."""
    return " ".join(text.casefold().split())


@dataclass(frozen=True)
class FoldedText:
    """A normalized view of ``original`` with a map back to scalar-value offsets."""

    original: str
    folded: str
    # For every folded character: index of the source character it came from.
    origin: tuple[int, ...]

    @classmethod
    def of(cls, text: str) -> "FoldedText":
        out: list[str] = []
        origin: list[int] = []
        in_space = False
        for i, ch in enumerate(text):
            if ch.isspace():
                if not in_space:
                    out.append(" ")
                    origin.append(i)
                in_space = True
                continue
            in_space = False
            for f in ch.casefold():
                out.append(f)
                origin.append(i)
        return cls(text, "".join(out), tuple(origin))

    def _aligned(self, start: int, end: int) -> bool:
        # A match must not split the expansion of one source character (e.g. ß -> ss).
        if start > 0 and self.origin[start - 1] == self.origin[start]:
            return False
        if end < len(self.origin) and self.origin[end] == self.origin[end - 1]:
            return False
        return True

    def occurrences(self, phrase: str) -> list[tuple[int, int]]:
        """All (possibly overlapping) matches of ``phrase`` as original [start, end) ranges."""
        needle = normalize_phrase(phrase)
        if not needle:
            return []
        found = []
        pos = self.folded.find(needle)
        while pos != -1:
            end = pos + len(needle)
            if self._aligned(pos, end):
                s = self.origin[pos]
                # needle is stripped, so the last folded char is never a collapsed space
                found.append((s, self.origin[end - 1] + 1))
            pos = self.folded.find(needle, pos + 1)
        return found

    def contains(self, phrase: str) -> bool:
        return bool(self.occurrences(phrase))
