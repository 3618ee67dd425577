"""Two-phase detection pipeline: anomaly check, then misuse check.

Phase one extracts (table -> attribute) relations from the query under
test and requires every one of them to exist in the trained rule profile;
a missing relation means the selection condition deviates from normal
behavior. Phase two runs only for queries that pass phase one and contain
a suspicious keyword: the query's fingerprint must structurally match a
stored fingerprint with the same projection and from clause, otherwise
the keyword is not part of any known-legitimate query shape.

A query is benign only when its relations are all known and either no
keyword occurs or the structural comparison succeeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .fingerprint import (
    FingerprintRepository,
    OperandClass,
    QueryFingerprint,
    RepositoryKey,
    abstract_literals,
    repository_key,
    structural_equals,
)
from .keywords import KeywordHit, keyword_scan
from .lexer import tokenize
from .parser import CommandType, parse_select
from .rules import Relation, RuleProfile, profile_contains
from .training import ProfileBundle


class Outcome(Enum):
    BENIGN = "benign"
    INTRUSION = "intrusion"


class Phase(Enum):
    ANOMALY = "anomaly"
    MISUSE = "misuse"
    NONE = "none"


@dataclass(frozen=True)
class MissingRelation:
    """Anomaly verdict detail: the first relation absent from the profile."""

    relation: Relation

    def describe(self) -> str:
        return f"missing_relation {self.relation.table}->{self.relation.attribute}"


def _describe_key(key: RepositoryKey) -> str:
    return f"key={','.join(key.projection)}/{','.join(key.from_tables)}"


@dataclass(frozen=True)
class StructureMismatch:
    """Misuse verdict detail: keyword hits with no structurally equal stored query."""

    hits: tuple[KeywordHit, ...]
    key: RepositoryKey

    def describe(self) -> str:
        return f"structure_mismatch {_describe_key(self.key)}"


@dataclass(frozen=True)
class NoStoredQueryForKey:
    """Misuse verdict detail: nothing trained under this projection/from key."""

    key: RepositoryKey

    def describe(self) -> str:
        return f"no_stored_query_for_key {_describe_key(self.key)}"


Reason = Union[MissingRelation, StructureMismatch, NoStoredQueryForKey]


@dataclass(frozen=True)
class Verdict:
    outcome: Outcome
    phase: Phase
    reason: Reason | None
    relations_checked: tuple[Relation, ...] = ()
    hits: tuple[KeywordHit, ...] = ()

    def __post_init__(self) -> None:
        if self.outcome is Outcome.BENIGN:
            if self.phase is not Phase.NONE or self.reason is not None:
                raise ValueError("a benign verdict carries no phase and no reason")
        else:
            if self.phase is Phase.NONE or self.reason is None:
                raise ValueError("an intrusion verdict needs a phase and a reason")


def _benign(relations: tuple[Relation, ...], hits: tuple[KeywordHit, ...]) -> Verdict:
    return Verdict(Outcome.BENIGN, Phase.NONE, None, relations, hits)


def extract_relations(fp: QueryFingerprint) -> list[Relation]:
    """Relations of the query under test, in occurrence order, deduplicated.

    For each from table: the left operand of every term contributes its
    attribute name or, for literals, its raw text (so ``1=1`` yields a
    relation to ``1``); right operands contribute only when they are
    attributes, since a literal on the right is the normal shape of a
    selection condition; order-by columns contribute like attributes.
    """
    relations: list[Relation] = []
    seen: set[Relation] = set()

    def emit(table: str, attribute: str | None) -> None:
        if attribute is None:
            return
        relation = Relation(table, attribute)
        if relation not in seen:
            seen.add(relation)
            relations.append(relation)

    for table in fp.from_tables:
        for term in fp.terms:
            lhs = term.lhs
            emit(table, lhs.name if lhs.cls is OperandClass.ATTRIBUTE else lhs.raw)
            if term.rhs.cls is OperandClass.ATTRIBUTE:
                emit(table, term.rhs.name)
        for column in fp.order_by:
            emit(table, column)
    return relations


def anomaly_check(relations: list[Relation], profile: RuleProfile) -> bool:
    """True (intrusion) unless every relation is covered by the profile.

    An empty relation list passes vacuously: with nothing user-shaped in
    the selection condition there is nothing to deviate.
    """
    return not all(profile_contains(profile, relation) for relation in relations)


def misuse_check(
    fp: QueryFingerprint, hits: list[KeywordHit], repo: FingerprintRepository
) -> bool:
    """True (intrusion) when no stored fingerprint under the query's key is
    structurally equal. Callers invoke this only with at least one hit."""
    stored = repo.lookup(repository_key(fp))
    if not stored:
        return True
    return not any(structural_equals(fp, candidate) for candidate in stored)


def detect(
    source: str, bundle: ProfileBundle, *, permit_unknown_statements: bool = False
) -> Verdict:
    """Classify one query against a trained profile bundle.

    Pipeline: tokenize, parse, abstract, anomaly check; on pass, keyword
    scan; on hits, misuse check. Statements that are not SELECTs are never
    silently trusted: they come back as intrusions unless
    ``permit_unknown_statements`` is set and they carry no keyword.
    """
    parsed = parse_select(tokenize(source))

    if parsed.command_type is not CommandType.SELECT:
        hits = tuple(keyword_scan(source, bundle.keywords))
        key = RepositoryKey((), ())
        if hits:
            return Verdict(Outcome.INTRUSION, Phase.MISUSE, StructureMismatch(hits, key), (), hits)
        if permit_unknown_statements:
            return _benign((), ())
        return Verdict(Outcome.INTRUSION, Phase.MISUSE, NoStoredQueryForKey(key), (), ())

    fp = abstract_literals(parsed)
    relations = tuple(extract_relations(fp))

    for relation in relations:
        if not profile_contains(bundle.rules, relation):
            return Verdict(
                Outcome.INTRUSION, Phase.ANOMALY, MissingRelation(relation), relations, ()
            )

    hits = tuple(keyword_scan(source, bundle.keywords))
    if not hits:
        return _benign(relations, ())

    if misuse_check(fp, list(hits), bundle.repository):
        key = repository_key(fp)
        if not bundle.repository.lookup(key):
            reason: Reason = NoStoredQueryForKey(key)
        else:
            reason = StructureMismatch(hits, key)
        return Verdict(Outcome.INTRUSION, Phase.MISUSE, reason, relations, hits)
    return _benign(relations, hits)
