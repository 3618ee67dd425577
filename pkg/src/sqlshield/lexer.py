"""Error-tolerant tokenizer for the SELECT subset of SQL.

The tokenizer is total: any input string produces a token list, never an
exception. Input that cannot be classified (unterminated quotes, stray
bytes) is preserved as ``malformed`` tokens so later stages can treat it
as evidence rather than losing it. Concatenating the token lexemes with
the original interstitial whitespace reproduces the source exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class TokenKind(Enum):
    """Token categories emitted by :func:`tokenize`."""

    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    INTEGER_LITERAL = "integer_literal"
    STRING_LITERAL = "string_literal"
    HEX_LITERAL = "hex_literal"
    PARAMETER_MARKER = "parameter_marker"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    COMMENT = "comment"
    MALFORMED = "malformed"


@dataclass(frozen=True)
class Token:
    """One lexical token.

    ``offset`` is the index of the first character of ``lexeme`` in the
    source string, so ``source[offset:offset + len(lexeme)] == lexeme``.
    """

    kind: TokenKind
    lexeme: str
    offset: int


# Words consumed by the SELECT grammar; everything else lexes as an identifier.
KEYWORDS = frozenset(
    {"select", "from", "where", "and", "or", "order", "by", "union", "all", "like"}
)

_TWO_CHAR_OPERATORS = ("<>", "<=", ">=", "!=", "||", "&&")
_ONE_CHAR_OPERATORS = frozenset("=<>!*+-/%|&~^")
_PUNCTUATION = frozenset("(),;.")


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


def _is_hex_digit(ch: str) -> bool:
    return ch in "0123456789abcdefABCDEF"


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens.

    Never raises: comments become ``comment`` tokens, unterminated quoted
    regions become a single ``malformed`` token spanning to end of input,
    and unrecognized characters become one-character ``malformed`` tokens.
    """
    tokens: list[Token] = []
    i = 0
    n = len(source)

    while i < n:
        ch = source[i]

        if ch.isspace():
            i += 1
            continue

        # Line comment: -- to end of line (newline stays whitespace).
        if ch == "-" and source.startswith("--", i):
            end = source.find("\n", i)
            end = n if end == -1 else end
            tokens.append(Token(TokenKind.COMMENT, source[i:end], i))
            i = end
            continue

        # Block comment: /* ... */; unterminated spans to end of input.
        if ch == "/" and source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end == -1:
                tokens.append(Token(TokenKind.MALFORMED, source[i:], i))
                break
            tokens.append(Token(TokenKind.COMMENT, source[i : end + 2], i))
            i = end + 2
            continue

        if ch == "'":
            end = source.find("'", i + 1)
            if end == -1:
                tokens.append(Token(TokenKind.MALFORMED, source[i:], i))
                break
            tokens.append(Token(TokenKind.STRING_LITERAL, source[i : end + 1], i))
            i = end + 1
            continue

        # Quoted identifiers; same unterminated rule as strings.
        if ch in ('`', '"'):
            end = source.find(ch, i + 1)
            if end == -1:
                tokens.append(Token(TokenKind.MALFORMED, source[i:], i))
                break
            tokens.append(Token(TokenKind.IDENTIFIER, source[i : end + 1], i))
            i = end + 1
            continue

        if ch.isdigit():
            if (
                ch == "0"
                and i + 2 < n
                and source[i + 1] in "xX"
                and _is_hex_digit(source[i + 2])
            ):
                j = i + 2
                while j < n and _is_hex_digit(source[j]):
                    j += 1
                tokens.append(Token(TokenKind.HEX_LITERAL, source[i:j], i))
                i = j
                continue
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token(TokenKind.INTEGER_LITERAL, source[i:j], i))
            i = j
            continue

        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(source[j]):
                j += 1
            lexeme = source[i:j]
            kind = TokenKind.KEYWORD if lexeme.lower() in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, lexeme, i))
            i = j
            continue

        if ch == "?":
            tokens.append(Token(TokenKind.PARAMETER_MARKER, ch, i))
            i += 1
            continue

        two = source[i : i + 2]
        if two in _TWO_CHAR_OPERATORS:
            tokens.append(Token(TokenKind.OPERATOR, two, i))
            i += 2
            continue
        if ch in _ONE_CHAR_OPERATORS:
            tokens.append(Token(TokenKind.OPERATOR, ch, i))
            i += 1
            continue
        if ch in _PUNCTUATION:
            tokens.append(Token(TokenKind.PUNCTUATION, ch, i))
            i += 1
            continue

        tokens.append(Token(TokenKind.MALFORMED, ch, i))
        i += 1

    return tokens


def normalize_identifier(raw: str) -> str:
    """Canonical form of a lexed identifier: quotes stripped, lowercase."""
    if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in ('`', '"'):
        raw = raw[1:-1]
    return raw.lower()
