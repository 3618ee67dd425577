"""Shared fixtures, generators and independent oracles for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from sqlshield.fingerprint import (
    AbstractOperand,
    FingerprintRepository,
    FingerprintTerm,
    OperandClass,
    QueryFingerprint,
)
from sqlshield.lexer import TokenKind, tokenize
from sqlshield.parser import LogicalOperator, SetOperator
from sqlshield.rules import ATTR_PREFIX, TABLE_PREFIX, MiningParams
from sqlshield.training import read_log, train

REPO_ROOT = Path(__file__).resolve().parents[1]
DATA_DIR = REPO_ROOT / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

# The four legitimate queries the sample profile is trained from.
TRAINING_QUERIES = [
    "Select username, password from admin where id=?",
    "Select username, password from admin where id<?",
    "Select * from admin where username=? order by username",
    "Select username, product from admin where salary<? and IsActive=?",
]

ATTACK_ANOMALY = "Select username, password from Admin where id=1 or 1=1--"
ATTACK_MISUSE = "Select username, password from admin where id=5'"


@pytest.fixture(scope="session")
def bundle():
    return train(read_log((DATA_DIR / "training.log").read_bytes(), "training.log"))


@pytest.fixture(scope="session")
def bundle_dir(tmp_path_factory, bundle):
    from sqlshield.training import save_bundle

    directory = tmp_path_factory.mktemp("profile")
    save_bundle(bundle, directory)
    return directory


# --- random fingerprint/repository generators (plain random, for bulk loops) ---

_TABLES = ["admin", "users", "orders", "t1", "t2"]
_COLUMNS = ["id", "username", "password", "salary", "isactive", "product", "qty"]
_LITERAL_CLASSES = [
    OperandClass.INTEGER_LITERAL,
    OperandClass.STRING_LITERAL,
    OperandClass.OTHER_LITERAL,
]


def random_operand(rng: random.Random) -> AbstractOperand:
    if rng.random() < 0.5:
        return AbstractOperand(OperandClass.ATTRIBUTE, name=rng.choice(_COLUMNS))
    return AbstractOperand(rng.choice(_LITERAL_CLASSES))


def random_arm(rng: random.Random) -> QueryFingerprint:
    projection = ("*",) if rng.random() < 0.2 else tuple(
        rng.sample(_COLUMNS, rng.randint(1, 3))
    )
    term_count = rng.randint(0, 3)
    return QueryFingerprint(
        projection=projection,
        from_tables=tuple(rng.sample(_TABLES, rng.randint(1, 2))),
        terms=tuple(
            FingerprintTerm(random_operand(rng), random_operand(rng))
            for _ in range(term_count)
        ),
        logical_operators=tuple(
            rng.choice([LogicalOperator.AND, LogicalOperator.OR])
            for _ in range(max(0, term_count - 1))
        ),
        order_by=tuple(rng.sample(_COLUMNS, rng.randint(0, 2))),
    )


def random_fingerprint(rng: random.Random) -> QueryFingerprint:
    head = random_arm(rng)
    if rng.random() >= 0.25:
        return head
    chain = tuple(
        (rng.choice([SetOperator.UNION, SetOperator.UNION_ALL]), random_arm(rng))
        for _ in range(rng.randint(1, 2))
    )
    return QueryFingerprint(
        projection=head.projection,
        from_tables=head.from_tables,
        terms=head.terms,
        logical_operators=head.logical_operators,
        order_by=head.order_by,
        set_operators=chain,
    )


def random_repository(rng: random.Random, max_entries: int = 10) -> FingerprintRepository:
    return FingerprintRepository(
        tuple(random_fingerprint(rng) for _ in range(rng.randint(1, max_entries)))
    )


# --- independent mining oracle: naive pair counting over all (table, attr) ---


def brute_force_rules(
    transactions: list[set[str]], params: MiningParams
) -> dict[tuple[str, str], tuple[float, float]]:
    n = len(transactions)
    tables = sorted({i for t in transactions for i in t if i.startswith(TABLE_PREFIX)})
    attrs = sorted({i for t in transactions for i in t if i.startswith(ATTR_PREFIX)})
    out: dict[tuple[str, str], tuple[float, float]] = {}
    for table_item in tables:
        table_count = sum(1 for t in transactions if table_item in t)
        for attr_item in attrs:
            joint = sum(1 for t in transactions if table_item in t and attr_item in t)
            if joint == 0:
                continue
            support = joint / n
            confidence = joint / table_count
            if support >= params.min_support and confidence >= params.min_confidence:
                key = (table_item[len(TABLE_PREFIX) :], attr_item[len(ATTR_PREFIX) :])
                out[key] = (support, confidence)
    return out


# --- same-class literal substitution for closure tests ---

_STRING_BODY_CHARS = "abcdefghij0123456789 _"


def substitute_literals(sql: str, rng: random.Random) -> str:
    """Rewrite every literal of ``sql`` with a random literal of the same class."""
    out: list[str] = []
    position = 0
    for token in tokenize(sql):
        out.append(sql[position : token.offset])
        if token.kind is TokenKind.INTEGER_LITERAL:
            out.append(str(rng.randint(0, 10**6)))
        elif token.kind is TokenKind.STRING_LITERAL:
            body = "".join(
                rng.choice(_STRING_BODY_CHARS) for _ in range(rng.randint(0, 8))
            )
            out.append(f"'{body}'")
        elif token.kind in (TokenKind.PARAMETER_MARKER, TokenKind.HEX_LITERAL):
            if rng.random() < 0.75:
                out.append("?")
            else:
                digits = "".join(
                    rng.choice("0123456789abcdef") for _ in range(2 * rng.randint(1, 4))
                )
                out.append(f"0x{digits}")
        else:
            out.append(token.lexeme)
        position = token.offset + len(token.lexeme)
    out.append(sql[position:])
    return "".join(out)


def assert_lossless(source: str, tokens) -> None:
    """Tokens plus interstitial whitespace must reproduce the source exactly."""
    position = 0
    for token in tokens:
        gap = source[position : token.offset]
        assert all(c.isspace() for c in gap), f"non-whitespace gap {gap!r} before {token}"
        end = token.offset + len(token.lexeme)
        assert source[token.offset : end] == token.lexeme
        position = end
    assert all(c.isspace() for c in source[position:])
