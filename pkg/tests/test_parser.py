"""Lenient SELECT parsing: structure capture and residual accounting."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sqlshield.lexer import TokenKind, tokenize
from sqlshield.parser import (
    CommandType,
    Comparator,
    LogicalOperator,
    OperandKind,
    SetOperator,
    parse_select,
    parse_select_with_accounting,
)


def parse(sql: str):
    return parse_select(tokenize(sql))


def test_parameterized_select_parses_clean():
    parsed = parse("Select username, password from admin where id=?")
    assert parsed.command_type is CommandType.SELECT
    assert parsed.projection == ["username", "password"]
    assert parsed.from_tables == ["admin"]
    assert len(parsed.predicates) == 1
    term = parsed.predicates[0]
    assert (term.lhs.kind, term.lhs.name) == (OperandKind.ATTRIBUTE, "id")
    assert term.comparator is Comparator.EQ
    assert (term.rhs.kind, term.rhs.name) == (OperandKind.OTHER_LITERAL, "?")
    assert parsed.residual_tokens == []
    assert parsed.statement_count == 1


def test_star_projection_with_order_by_position():
    parsed = parse("Select * from admin where ID=10 order by 1")
    assert parsed.projection == ["*"]
    term = parsed.predicates[0]
    assert (term.lhs.name, term.comparator, term.rhs.kind) == (
        "id",
        Comparator.EQ,
        OperandKind.INTEGER_LITERAL,
    )
    assert term.rhs.name == "10"
    assert parsed.order_by == ["1"]
    assert parsed.residual_tokens == []


def test_malformed_trailing_quote_lands_in_residual():
    parsed = parse("Select username from admin where id=5'")
    assert [t.kind for t in parsed.residual_tokens] == [TokenKind.MALFORMED]
    assert len(parsed.predicates) == 1


def test_non_select_statement_is_other_with_all_tokens_residual():
    sql = "drop table users"
    tokens = tokenize(sql)
    parsed = parse_select(tokens)
    assert parsed.command_type is CommandType.OTHER
    assert parsed.residual_tokens == tokens
    assert parsed.projection == []


def test_empty_input_is_other():
    parsed = parse("")
    assert parsed.command_type is CommandType.OTHER
    assert parsed.statement_count == 1


def test_trailing_comment_is_residual_but_predicates_parse():
    parsed = parse("select username, password from admin where fname='' or 1=1 --")
    assert [t.kind for t in parsed.residual_tokens] == [TokenKind.COMMENT]
    assert [t.comparator for t in parsed.predicates] == [Comparator.EQ, Comparator.EQ]
    assert parsed.logical_operators == [LogicalOperator.OR]
    first, second = parsed.predicates
    assert first.lhs.name == "fname"
    assert first.rhs.kind is OperandKind.STRING_LITERAL
    assert second.lhs.kind is OperandKind.INTEGER_LITERAL
    assert second.rhs.kind is OperandKind.INTEGER_LITERAL


def test_logical_operator_count_tracks_predicates():
    parsed = parse("select a from t where x=1 and y=2 or z=3")
    assert len(parsed.predicates) == 3
    assert parsed.logical_operators == [LogicalOperator.AND, LogicalOperator.OR]


def test_dangling_connective_goes_residual():
    parsed = parse("select a from t where x=1 and")
    assert len(parsed.predicates) == 1
    assert parsed.logical_operators == []
    assert [t.lexeme for t in parsed.residual_tokens] == ["and"]


@pytest.mark.parametrize(
    "operator,expected",
    [
        ("=", Comparator.EQ),
        ("<>", Comparator.NEQ),
        ("!=", Comparator.NEQ),
        ("<", Comparator.LT),
        (">", Comparator.GT),
        ("<=", Comparator.LE),
        (">=", Comparator.GE),
    ],
)
def test_comparator_mapping(operator, expected):
    parsed = parse(f"select a from t where x{operator}1")
    assert parsed.predicates[0].comparator is expected


def test_like_comparator_and_negative_integer_operand():
    parsed = parse("select a from t where name like 'x' and id=-10")
    assert parsed.predicates[0].comparator is Comparator.LIKE
    rhs = parsed.predicates[1].rhs
    assert (rhs.kind, rhs.name) == (OperandKind.INTEGER_LITERAL, "-10")


def test_union_chain_is_parsed_recursively():
    parsed = parse("select a from t union select b from u union all select c from v")
    assert parsed.residual_tokens == []
    assert [op for op, _ in parsed.set_operations] == [
        SetOperator.UNION,
        SetOperator.UNION_ALL,
    ]
    arms = [arm for _, arm in parsed.set_operations]
    assert arms[0].projection == ["b"]
    assert arms[1].from_tables == ["v"]


def test_broken_union_arm_goes_residual():
    parsed = parse("select a from t union select 1,2,3")
    assert parsed.set_operations == []
    assert any(t.lexeme.lower() == "union" for t in parsed.residual_tokens)


def test_statement_count_ignores_trailing_semicolon():
    assert parse("select a from t;").statement_count == 1
    assert parse("select a from t").statement_count == 1


def test_statement_count_counts_stacked_statements():
    parsed = parse("select a from t; drop table t")
    assert parsed.statement_count == 2
    assert any(t.lexeme.lower() == "drop" for t in parsed.residual_tokens)
    # comment-only segments are not statements
    assert parse("select a from t; -- bye").statement_count == 1


def test_identifiers_fold_to_lowercase():
    parsed = parse("Select UserName from Admin where IsActive=1 order by UserName")
    assert parsed.projection == ["username"]
    assert parsed.from_tables == ["admin"]
    assert parsed.predicates[0].lhs.name == "isactive"
    assert parsed.order_by == ["username"]


def test_join_syntax_lands_in_residual():
    parsed = parse("select a from t join u on t.x=u.y")
    assert parsed.from_tables == ["t"]
    assert any(t.lexeme == "join" for t in parsed.residual_tokens)


_FRAGMENTS = [
    "select", "*", "from", "admin", "users", ",", "where", "id", "name",
    "=", "<", ">=", "<>", "10", "'x'", "''", "?", "0x2f", "and", "or",
    "order", "by", "union", "all", "like", ";", "(", ")", "--note", "/*c*/",
    "drop", "'unterminated", "-", "5'",
]


@st.composite
def sqlish(draw):
    parts = draw(st.lists(st.sampled_from(_FRAGMENTS), max_size=25))
    return " ".join(parts)


@settings(max_examples=400)
@given(st.one_of(sqlish(), st.text(max_size=120)))
def test_every_token_is_consumed_or_residual(source):
    tokens = tokenize(source)
    parsed, consumed = parse_select_with_accounting(tokens)
    accounted = sorted(consumed + parsed.residual_tokens, key=lambda t: (t.offset, t.lexeme))
    assert accounted == sorted(tokens, key=lambda t: (t.offset, t.lexeme))
    assert len(parsed.logical_operators) == max(0, len(parsed.predicates) - 1)
    assert parsed.statement_count >= 1


@settings(max_examples=200)
@given(sqlish())
def test_parse_is_deterministic(source):
    assert parse(source) == parse(source)


def test_clean_select_has_no_residual_and_one_statement():
    for sql in (
        "select a from t",
        "Select username, password from admin where id=? ;",
        "select * from t order by a, b",
    ):
        parsed = parse(sql)
        assert parsed.residual_tokens == []
        assert parsed.statement_count == 1
