"""Lenient recursive-descent parser for single SELECT statements.

The parser never fails. Tokens the grammar cannot consume are collected
in ``residual_tokens`` instead of aborting the parse, because unparseable
trailing material is exactly the evidence the detection pipeline needs.
Grammar scope: ``SELECT`` projection (``*`` or a column list), ``FROM``
table list, ``WHERE`` with binary comparison terms joined by AND/OR,
``ORDER BY``, ``UNION [ALL]`` chains, and an optional trailing ``;``.
Anything else (joins, parentheses, function calls, further statements)
lands in the residual.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .lexer import Token, TokenKind, normalize_identifier


class CommandType(Enum):
    SELECT = "select"
    OTHER = "other"


class Comparator(Enum):
    EQ = "eq"
    NEQ = "neq"
    LT = "lt"
    GT = "gt"
    LE = "le"
    GE = "ge"
    LIKE = "like"
    OTHER = "other"


class OperandKind(Enum):
    ATTRIBUTE = "attribute"
    INTEGER_LITERAL = "integer_literal"
    STRING_LITERAL = "string_literal"
    OTHER_LITERAL = "other_literal"


class LogicalOperator(Enum):
    AND = "and"
    OR = "or"


class SetOperator(Enum):
    UNION = "union"
    UNION_ALL = "union_all"


@dataclass(frozen=True)
class Operand:
    """One side of a comparison: an attribute (canonical lowercase name)
    or a literal (``name`` holds the raw source text)."""

    kind: OperandKind
    name: str


@dataclass(frozen=True)
class PredicateTerm:
    lhs: Operand
    comparator: Comparator
    rhs: Operand


@dataclass
class ParsedQuery:
    """Best-effort structure of one statement plus unconsumed evidence."""

    command_type: CommandType = CommandType.OTHER
    projection: list[str] = field(default_factory=list)
    from_tables: list[str] = field(default_factory=list)
    predicates: list[PredicateTerm] = field(default_factory=list)
    logical_operators: list[LogicalOperator] = field(default_factory=list)
    order_by: list[str] = field(default_factory=list)
    set_operations: list[tuple[SetOperator, "ParsedQuery"]] = field(default_factory=list)
    residual_tokens: list[Token] = field(default_factory=list)
    statement_count: int = 1


_COMPARATOR_BY_LEXEME = {
    "=": Comparator.EQ,
    "<>": Comparator.NEQ,
    "!=": Comparator.NEQ,
    "<": Comparator.LT,
    ">": Comparator.GT,
    "<=": Comparator.LE,
    ">=": Comparator.GE,
}


class _Cursor:
    """Index over the comment-free token stream with consumption tracking."""

    def __init__(self, tokens: Sequence[Token]):
        self.tokens = list(tokens)
        self.i = 0
        self.consumed: list[Token] = []

    def peek(self, ahead: int = 0) -> Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        self.consumed.append(tok)
        return tok

    def rest(self) -> list[Token]:
        out = self.tokens[self.i :]
        self.i = len(self.tokens)
        return out


def _is_keyword(tok: Token | None, word: str) -> bool:
    return tok is not None and tok.kind is TokenKind.KEYWORD and tok.lexeme.lower() == word


def _count_statements(tokens: Sequence[Token]) -> int:
    """Number of ;-separated segments containing at least one non-comment token."""
    count = 0
    segment_has_content = False
    for tok in tokens:
        if tok.kind is TokenKind.PUNCTUATION and tok.lexeme == ";":
            if segment_has_content:
                count += 1
            segment_has_content = False
        elif tok.kind is not TokenKind.COMMENT:
            segment_has_content = True
    if segment_has_content:
        count += 1
    return max(count, 1)


def _operand_at(cur: _Cursor, ahead: int) -> tuple[Operand, int] | None:
    """Operand starting ``ahead`` tokens away, with its token width, or None."""
    tok = cur.peek(ahead)
    if tok is None:
        return None
    if tok.kind is TokenKind.IDENTIFIER:
        return Operand(OperandKind.ATTRIBUTE, normalize_identifier(tok.lexeme)), 1
    if tok.kind is TokenKind.INTEGER_LITERAL:
        return Operand(OperandKind.INTEGER_LITERAL, tok.lexeme), 1
    if tok.kind is TokenKind.STRING_LITERAL:
        return Operand(OperandKind.STRING_LITERAL, tok.lexeme), 1
    if tok.kind in (TokenKind.PARAMETER_MARKER, TokenKind.HEX_LITERAL):
        return Operand(OperandKind.OTHER_LITERAL, tok.lexeme), 1
    if tok.kind is TokenKind.OPERATOR and tok.lexeme == "-":
        nxt = cur.peek(ahead + 1)
        if nxt is not None and nxt.kind is TokenKind.INTEGER_LITERAL:
            return Operand(OperandKind.INTEGER_LITERAL, "-" + nxt.lexeme), 2
    return None


def _comparator_of(tok: Token | None) -> Comparator | None:
    if tok is None:
        return None
    if tok.kind is TokenKind.OPERATOR:
        return _COMPARATOR_BY_LEXEME.get(tok.lexeme, Comparator.OTHER)
    if _is_keyword(tok, "like"):
        return Comparator.LIKE
    return None


def _term_at(cur: _Cursor, ahead: int = 0) -> tuple[PredicateTerm, int] | None:
    """Lookahead parse of ``operand comparator operand``; consumes nothing."""
    lhs = _operand_at(cur, ahead)
    if lhs is None:
        return None
    lhs_op, lhs_n = lhs
    comparator = _comparator_of(cur.peek(ahead + lhs_n))
    if comparator is None:
        return None
    rhs = _operand_at(cur, ahead + lhs_n + 1)
    if rhs is None:
        return None
    rhs_op, rhs_n = rhs
    return PredicateTerm(lhs_op, comparator, rhs_op), lhs_n + 1 + rhs_n


def _consume(cur: _Cursor, count: int) -> None:
    for _ in range(count):
        cur.advance()


def _name_list(cur: _Cursor, allow_integers: bool = False) -> list[str]:
    """Comma-separated identifiers (optionally bare integers); commas are
    consumed only when another item verifiably follows."""

    def item_of(tok: Token | None) -> str | None:
        if tok is None:
            return None
        if tok.kind is TokenKind.IDENTIFIER:
            return normalize_identifier(tok.lexeme)
        if allow_integers and tok.kind is TokenKind.INTEGER_LITERAL:
            return tok.lexeme
        return None

    names: list[str] = []
    first = item_of(cur.peek())
    if first is None:
        return names
    cur.advance()
    names.append(first)
    while True:
        comma = cur.peek()
        if comma is None or comma.kind is not TokenKind.PUNCTUATION or comma.lexeme != ",":
            break
        nxt = item_of(cur.peek(1))
        if nxt is None:
            break
        cur.advance()
        cur.advance()
        names.append(nxt)
    return names


def _parse_arm(cur: _Cursor, query: ParsedQuery) -> bool:
    """Parse one SELECT arm into ``query``. Returns False when the arm is
    structurally broken; the caller then dumps the remainder as residual."""
    if not _is_keyword(cur.peek(), "select"):
        return False
    cur.advance()

    star = cur.peek()
    if star is not None and star.kind is TokenKind.OPERATOR and star.lexeme == "*":
        cur.advance()
        query.projection.append("*")
    else:
        query.projection.extend(_name_list(cur))
        if not query.projection:
            return False

    if not _is_keyword(cur.peek(), "from"):
        return False
    cur.advance()
    query.from_tables.extend(_name_list(cur))
    if not query.from_tables:
        return False

    if _is_keyword(cur.peek(), "where"):
        cur.advance()
        first = _term_at(cur)
        if first is None:
            return False
        term, width = first
        _consume(cur, width)
        query.predicates.append(term)
        while True:
            connective = cur.peek()
            if _is_keyword(connective, "and"):
                logical = LogicalOperator.AND
            elif _is_keyword(connective, "or"):
                logical = LogicalOperator.OR
            else:
                break
            nxt = _term_at(cur, 1)
            if nxt is None:
                break
            term, width = nxt
            cur.advance()
            _consume(cur, width)
            query.logical_operators.append(logical)
            query.predicates.append(term)

    if _is_keyword(cur.peek(), "order"):
        if not _is_keyword(cur.peek(1), "by"):
            return False
        cur.advance()
        cur.advance()
        columns = _name_list(cur, allow_integers=True)
        if not columns:
            return False
        query.order_by.extend(columns)

    return True


def parse_select(tokens: Sequence[Token]) -> ParsedQuery:
    """Parse a token stream into a :class:`ParsedQuery`.

    Every token is either consumed by the grammar or surfaces in
    ``residual_tokens`` (comments are always residual). Statements that do
    not start with SELECT come back as ``command_type = OTHER`` with all
    tokens residual.
    """
    parsed, _ = parse_select_with_accounting(tokens)
    return parsed


def parse_select_with_accounting(
    tokens: Sequence[Token],
) -> tuple[ParsedQuery, list[Token]]:
    """As :func:`parse_select`, also returning the grammar-consumed tokens."""
    comments = [t for t in tokens if t.kind is TokenKind.COMMENT]
    significant = [t for t in tokens if t.kind is not TokenKind.COMMENT]

    query = ParsedQuery(statement_count=_count_statements(tokens))
    cur = _Cursor(significant)

    if not _is_keyword(cur.peek(), "select"):
        query.residual_tokens = sorted(tokens, key=lambda t: t.offset)
        return query, []

    query.command_type = CommandType.SELECT
    residual: list[Token] = []

    if _parse_arm(cur, query):
        while _is_keyword(cur.peek(), "union"):
            union_tok = cur.advance()
            operator = SetOperator.UNION
            all_tok: Token | None = None
            if _is_keyword(cur.peek(), "all"):
                all_tok = cur.advance()
                operator = SetOperator.UNION_ALL
            arm = ParsedQuery(command_type=CommandType.SELECT)
            if _parse_arm(cur, arm):
                query.set_operations.append((operator, arm))
            else:
                residual.append(union_tok)
                if all_tok is not None:
                    residual.append(all_tok)
                break
        trailer = cur.peek()
        if trailer is not None and trailer.kind is TokenKind.PUNCTUATION and trailer.lexeme == ";":
            cur.advance()

    residual.extend(cur.rest())
    residual.extend(comments)
    query.residual_tokens = sorted(residual, key=lambda t: t.offset)
    return query, cur.consumed
