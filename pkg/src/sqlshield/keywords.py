"""Suspicious-keyword scanning with evasion-encoding normalization.

The scanner looks for configured keywords in the raw query text and in
decoded views of it (URL percent-decoding and ``0x...`` hex literals,
including hex inside percent-encoded text), so that ``%27`` and ``0x27``
are caught just like a bare quote. Every decoded view keeps a map back to
source offsets, letting hits report where in the original text they sit
and whether decoding was required to see them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import KeywordFileError

# Union of the framework's built-in suspicious tokens.
DEFAULT_KEYWORDS = ("'", ";", "--", "union", "exec", "order by", "union select")

_HEX_RUN = re.compile(r"0[xX][0-9a-fA-F]+")
_HEX_DIGITS = "0123456789abcdefABCDEF"


class DecodeLayer(Enum):
    URL_PERCENT = "url_percent"
    HEX_LITERAL = "hex_literal"


ALL_DECODE_LAYERS = frozenset(DecodeLayer)


def _normalize_entry(entry: str) -> str:
    return " ".join(entry.lower().split())


@dataclass(frozen=True)
class KeywordSet:
    """Keywords (canonical lowercase, single-spaced) plus active decode layers."""

    entries: tuple[str, ...]
    decode_layers: frozenset[DecodeLayer] = ALL_DECODE_LAYERS

    def __post_init__(self) -> None:
        normalized: list[str] = []
        for entry in self.entries:
            canonical = _normalize_entry(entry)
            if canonical and canonical not in normalized:
                normalized.append(canonical)
        if not normalized:
            raise ValueError("a keyword set needs at least one keyword")
        object.__setattr__(self, "entries", tuple(normalized))

    @classmethod
    def default(cls) -> "KeywordSet":
        return cls(DEFAULT_KEYWORDS)


@dataclass(frozen=True)
class KeywordHit:
    """One keyword occurrence; ``offset`` indexes the original source text
    and ``encoded`` is True when only a decode layer revealed it."""

    keyword: str
    offset: int
    encoded: bool


def _decode_percent(text: str) -> tuple[str, list[int]]:
    """URL percent-decode with a per-character map back to source offsets."""
    out: list[str] = []
    offsets: list[int] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if (
            ch == "%"
            and i + 2 < n
            and text[i + 1] in _HEX_DIGITS
            and text[i + 2] in _HEX_DIGITS
        ):
            out.append(chr(int(text[i + 1 : i + 3], 16)))
            offsets.append(i)
            i += 3
        else:
            out.append(ch)
            offsets.append(i)
            i += 1
    return "".join(out), offsets


def _decode_hex_literals(text: str, offsets: list[int]) -> tuple[str, list[int]]:
    """Replace ``0x..`` literals with their byte string (latin-1 view).

    ``offsets`` maps the input view back to the source; the output map is
    composed through it. Odd trailing nibbles are dropped.
    """
    out: list[str] = []
    out_offsets: list[int] = []
    last = 0
    for match in _HEX_RUN.finditer(text):
        for j in range(last, match.start()):
            out.append(text[j])
            out_offsets.append(offsets[j])
        digits = match.group(0)[2:]
        usable = len(digits) - (len(digits) % 2)
        decoded = bytes.fromhex(digits[:usable]).decode("latin-1")
        out.extend(decoded)
        out_offsets.extend([offsets[match.start()]] * len(decoded))
        last = match.end()
    for j in range(last, len(text)):
        out.append(text[j])
        out_offsets.append(offsets[j])
    return "".join(out), out_offsets


def _keyword_pattern(keyword: str) -> re.Pattern[str]:
    # Multi-word keywords match across any whitespace run.
    parts = [re.escape(p) for p in keyword.split(" ")]
    return re.compile(r"\s+".join(parts), re.IGNORECASE | re.DOTALL)


def keyword_scan(source: str, keywords: KeywordSet) -> list[KeywordHit]:
    """All keyword occurrences in ``source`` and its decoded views.

    Matching is case-insensitive. Occurrences found both raw and decoded
    are reported once, as raw; hits are ordered by source offset, then
    keyword.
    """
    identity = list(range(len(source)))
    views: list[tuple[str, list[int], bool]] = [(source, identity, False)]

    if DecodeLayer.URL_PERCENT in keywords.decode_layers:
        text, offsets = _decode_percent(source)
        if text != source:
            views.append((text, offsets, True))
    if DecodeLayer.HEX_LITERAL in keywords.decode_layers:
        for base_text, base_offsets, _ in list(views):
            text, offsets = _decode_hex_literals(base_text, base_offsets)
            if text != base_text:
                views.append((text, offsets, True))

    found: dict[tuple[str, int], bool] = {}
    for keyword in keywords.entries:
        pattern = _keyword_pattern(keyword)
        for text, offsets, encoded in views:
            for match in pattern.finditer(text):
                origin = offsets[match.start()] if offsets else 0
                key = (keyword, origin)
                if key not in found:
                    found[key] = encoded
    hits = [
        KeywordHit(keyword=kw, offset=off, encoded=encoded)
        for (kw, off), encoded in found.items()
    ]
    hits.sort(key=lambda h: (h.offset, h.keyword))
    return hits


def load_keywords(
    text: str, decode_layers: frozenset[DecodeLayer] = ALL_DECODE_LAYERS
) -> KeywordSet:
    """Parse the keyword file format: one keyword per line, ``#`` comments,
    blank lines ignored, ``0x...`` lines byte-decoded before storage."""
    entries: list[str] = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped[:2].lower() == "0x":
            digits = stripped[2:]
            try:
                decoded = bytes.fromhex(digits).decode("latin-1")
            except ValueError as exc:
                raise KeywordFileError(f"line {number}: bad hex keyword {stripped!r}") from exc
            entries.append(decoded)
        else:
            entries.append(stripped)
    if not entries:
        raise KeywordFileError("keyword file contains no keywords")
    return KeywordSet(tuple(entries), decode_layers)


def dump_keywords(keywords: KeywordSet) -> str:
    return "".join(f"{entry}\n" for entry in keywords.entries)
