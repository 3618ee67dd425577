"""Literal-abstracted query fingerprints and their XML repository.

A fingerprint keeps the structural skeleton of a SELECT (projection, from
tables, predicate shape, order-by, union chain) while collapsing literal
values to their class, so that e.g. ``id=42`` and ``id=17`` coincide. The
comparison operator is deliberately not part of the structure: ``id=?``
and ``id<?`` produce the same fingerprint.

Repositories serialize to a small XML dialect::

    <AllQueries>
      <Query no="1">
        <commandType>select</commandType>
        <query_column>username</query_column>
        <fromClause>admin</fromClause>
        <LHS>id</LHS>
        <RHS>Integer_literal</RHS>
      </Query>
    </AllQueries>

Child order inside ``<Query>`` is fixed: one ``commandType``, one or more
``query_column``, one or more ``fromClause``, alternating ``LHS``/``RHS``
pairs separated by ``logical_operator``, optional ``orderBy`` elements,
then optional ``setOperator`` elements each followed by the elements of
the next union arm. The writer is canonical (2-space indent, one element
per line); the reader additionally accepts legacy tag casings such as
``FromClause`` and legacy class spellings such as ``Integer Literal``.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from xml.sax.saxutils import escape

from .errors import NotASelectError, RepositoryFormatError
from .parser import CommandType, LogicalOperator, Operand, OperandKind, ParsedQuery, SetOperator


class OperandClass(Enum):
    ATTRIBUTE = "attribute"
    INTEGER_LITERAL = "integer_literal"
    STRING_LITERAL = "string_literal"
    OTHER_LITERAL = "other_literal"


_CLASS_BY_KIND = {
    OperandKind.ATTRIBUTE: OperandClass.ATTRIBUTE,
    OperandKind.INTEGER_LITERAL: OperandClass.INTEGER_LITERAL,
    OperandKind.STRING_LITERAL: OperandClass.STRING_LITERAL,
    OperandKind.OTHER_LITERAL: OperandClass.OTHER_LITERAL,
}

_XML_CLASS_NAMES = {
    OperandClass.INTEGER_LITERAL: "Integer_literal",
    OperandClass.STRING_LITERAL: "String_literal",
    OperandClass.OTHER_LITERAL: "Other_literal",
}


@dataclass(frozen=True, eq=False)
class AbstractOperand:
    """Operand with its value abstracted away.

    ``name`` is set for attribute operands only. ``raw`` carries the source
    literal text for detection-time relation extraction; it is metadata,
    excluded from equality and never serialized (repository loads leave it
    None).

    Equality distinguishes attributes (by name) from literals, but not one
    literal class from another: a concrete integer, a string, and a
    parameter marker all stand for "a user-supplied value here", so a live
    query matches the trained shape regardless of which class the training
    log happened to contain. Serialization still records the class.
    """

    cls: OperandClass
    name: str | None = None
    raw: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if (self.cls is OperandClass.ATTRIBUTE) != (self.name is not None):
            raise ValueError("name must be set exactly for attribute operands")

    def _shape(self) -> tuple[bool, str | None]:
        if self.cls is OperandClass.ATTRIBUTE:
            return (True, self.name)
        return (False, None)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AbstractOperand):
            return NotImplemented
        return self._shape() == other._shape()

    def __hash__(self) -> int:
        return hash(self._shape())


@dataclass(frozen=True)
class FingerprintTerm:
    lhs: AbstractOperand
    rhs: AbstractOperand


@dataclass(frozen=True)
class QueryFingerprint:
    """Structural skeleton of one SELECT; hashable and value-compared."""

    projection: tuple[str, ...]
    from_tables: tuple[str, ...]
    terms: tuple[FingerprintTerm, ...] = ()
    logical_operators: tuple[LogicalOperator, ...] = ()
    order_by: tuple[str, ...] = ()
    set_operators: tuple[tuple[SetOperator, "QueryFingerprint"], ...] = ()
    residual_count: int = 0
    statement_count: int = 1
    command_type: str = "select"

    def __post_init__(self) -> None:
        if self.command_type != "select":
            raise ValueError("fingerprints describe SELECT statements only")
        if len(self.logical_operators) != max(0, len(self.terms) - 1):
            raise ValueError("need exactly one logical operator between adjacent terms")
        if self.residual_count < 0 or self.statement_count < 1:
            raise ValueError("residual_count must be >= 0 and statement_count >= 1")
        for _, arm in self.set_operators:
            if arm.set_operators:
                raise ValueError("union chains are stored flat; arms cannot nest further")


@dataclass(frozen=True)
class RepositoryKey:
    """Retrieval key: projection plus from clause, both canonical."""

    projection: tuple[str, ...]
    from_tables: tuple[str, ...]


@dataclass
class FingerprintRepository:
    """Ordered fingerprint store with a key index; treat as immutable."""

    entries: tuple[QueryFingerprint, ...]
    index: dict[RepositoryKey, list[int]] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        self.entries = tuple(self.entries)
        self.index = {}
        for position, entry in enumerate(self.entries):
            self.index.setdefault(repository_key(entry), []).append(position)

    def lookup(self, key: RepositoryKey) -> list[QueryFingerprint]:
        return [self.entries[i] for i in self.index.get(key, [])]

    def __len__(self) -> int:
        return len(self.entries)


def _abstract_operand(operand: Operand) -> AbstractOperand:
    cls = _CLASS_BY_KIND[operand.kind]
    if cls is OperandClass.ATTRIBUTE:
        return AbstractOperand(cls, name=operand.name)
    return AbstractOperand(cls, raw=operand.name)


def abstract_literals(parsed: ParsedQuery) -> QueryFingerprint:
    """Collapse a parsed SELECT to its fingerprint.

    Attribute operands keep their names, literals keep only their class,
    comparators are dropped. Raises :class:`NotASelectError` for
    ``command_type = OTHER`` so callers can skip such records.
    """
    if parsed.command_type is not CommandType.SELECT:
        raise NotASelectError("only SELECT statements can be fingerprinted")
    arms = []
    for operator, sub in parsed.set_operations:
        arm = abstract_literals(sub)
        arms.append((operator, arm))
    return QueryFingerprint(
        projection=tuple(parsed.projection),
        from_tables=tuple(parsed.from_tables),
        terms=tuple(
            FingerprintTerm(_abstract_operand(t.lhs), _abstract_operand(t.rhs))
            for t in parsed.predicates
        ),
        logical_operators=tuple(parsed.logical_operators),
        order_by=tuple(parsed.order_by),
        set_operators=tuple(arms),
        residual_count=len(parsed.residual_tokens),
        statement_count=parsed.statement_count,
    )


def structural_equals(a: QueryFingerprint, b: QueryFingerprint) -> bool:
    """True iff a and b have identical structure.

    Compares command type, projection, from tables, term shape (attribute
    operands by name, literal operands as literals), logical operators,
    order-by, union chain, residual count and statement count. Literal
    values, literal classes and comparison operators never participate, so
    a live ``id=42`` matches a trained ``id=?``.
    """
    return a == b


def repository_key(fp: QueryFingerprint) -> RepositoryKey:
    return RepositoryKey(fp.projection, fp.from_tables)


def _operand_text(operand: AbstractOperand) -> str:
    if operand.cls is OperandClass.ATTRIBUTE:
        assert operand.name is not None
        return operand.name
    return _XML_CLASS_NAMES[operand.cls]


def _write_arm(fp: QueryFingerprint, lines: list[str], indent: str) -> None:
    lines.append(f"{indent}<commandType>select</commandType>")
    for column in fp.projection:
        lines.append(f"{indent}<query_column>{escape(column)}</query_column>")
    for table in fp.from_tables:
        lines.append(f"{indent}<fromClause>{escape(table)}</fromClause>")
    for position, term in enumerate(fp.terms):
        if position > 0:
            value = fp.logical_operators[position - 1].value
            lines.append(f"{indent}<logical_operator>{value}</logical_operator>")
        lines.append(f"{indent}<LHS>{escape(_operand_text(term.lhs))}</LHS>")
        lines.append(f"{indent}<RHS>{escape(_operand_text(term.rhs))}</RHS>")
    for column in fp.order_by:
        lines.append(f"{indent}<orderBy>{escape(column)}</orderBy>")
    for operator, arm in fp.set_operators:
        lines.append(f"{indent}<setOperator>{operator.value}</setOperator>")
        _write_arm(arm, lines, indent)


def repository_to_xml(repo: FingerprintRepository) -> bytes:
    """Serialize a repository in the canonical format (UTF-8 bytes).

    Refuses entries that are not clean single statements or that lack a
    projection or from clause, since such fingerprints must never be part
    of a trained profile.
    """
    if not repo.entries:
        return b"<AllQueries></AllQueries>\n"
    lines = ["<AllQueries>"]
    for number, fp in enumerate(repo.entries, start=1):
        if fp.residual_count > 0:
            raise RepositoryFormatError(
                f"query {number}: refusing to store a fingerprint with residual tokens"
            )
        if fp.statement_count != 1:
            raise RepositoryFormatError(
                f"query {number}: refusing to store a multi-statement fingerprint"
            )
        for arm in (fp, *(sub for _, sub in fp.set_operators)):
            if not arm.projection or not arm.from_tables:
                raise RepositoryFormatError(
                    f"query {number}: fingerprint lacks a projection or from clause"
                )
        lines.append(f'  <Query no="{number}">')
        _write_arm(fp, lines, "    ")
        lines.append("  </Query>")
    lines.append("</AllQueries>")
    return ("\n".join(lines) + "\n").encode("utf-8")


_CANONICAL_TAGS = {
    "commandtype": "commandType",
    "query_column": "query_column",
    "fromclause": "fromClause",
    "lhs": "LHS",
    "rhs": "RHS",
    "logical_operator": "logical_operator",
    "orderby": "orderBy",
    "setoperator": "setOperator",
}

_CLASS_BY_XML_NAME = {
    "integer_literal": OperandClass.INTEGER_LITERAL,
    "string_literal": OperandClass.STRING_LITERAL,
    "other_literal": OperandClass.OTHER_LITERAL,
}


def _normalize_tag(tag: str) -> str | None:
    return _CANONICAL_TAGS.get(tag.strip().lower())


def _operand_from_text(text: str) -> AbstractOperand:
    # Legacy spellings like "Integer Literal" normalize to class names;
    # anything else is an attribute name.
    normalized = text.strip().lower().replace(" ", "_")
    cls = _CLASS_BY_XML_NAME.get(normalized)
    if cls is not None:
        return AbstractOperand(cls)
    return AbstractOperand(OperandClass.ATTRIBUTE, name=text.strip().lower())


class _ArmBuilder:
    def __init__(self) -> None:
        self.projection: list[str] = []
        self.from_tables: list[str] = []
        self.terms: list[FingerprintTerm] = []
        self.logical_operators: list[LogicalOperator] = []
        self.order_by: list[str] = []
        self.pending_lhs: AbstractOperand | None = None
        self.expect_term = False

    def build(self, where: str) -> QueryFingerprint:
        if self.pending_lhs is not None or self.expect_term:
            raise RepositoryFormatError(f"{where}: dangling LHS or logical_operator")
        if not self.projection:
            raise RepositoryFormatError(f"{where}: missing query_column")
        if not self.from_tables:
            raise RepositoryFormatError(f"{where}: missing fromClause")
        return QueryFingerprint(
            projection=tuple(self.projection),
            from_tables=tuple(self.from_tables),
            terms=tuple(self.terms),
            logical_operators=tuple(self.logical_operators),
            order_by=tuple(self.order_by),
        )


def _parse_query_element(element: ET.Element, number: int) -> QueryFingerprint:
    where = f"query {number}"
    arms: list[tuple[SetOperator | None, _ArmBuilder]] = []
    current: _ArmBuilder | None = None
    pending_operator: SetOperator | None = None

    for child in element:
        tag = _normalize_tag(child.tag)
        if tag is None:
            raise RepositoryFormatError(f"{where}: unknown element <{child.tag}>")
        text = (child.text or "").strip()
        if not text:
            raise RepositoryFormatError(f"{where}: element <{child.tag}> has no text")

        if tag == "commandType":
            # A second commandType is valid only right after a setOperator.
            if current is not None:
                raise RepositoryFormatError(f"{where}: misplaced <commandType>")
            normalized = " ".join(text.lower().split())
            if normalized not in ("select", "select command"):
                raise RepositoryFormatError(f"{where}: unsupported command type {text!r}")
            current = _ArmBuilder()
            arms.append((pending_operator, current))
            pending_operator = None
            continue

        if current is None:
            raise RepositoryFormatError(f"{where}: <{child.tag}> before <commandType>")

        if tag == "setOperator":
            normalized = text.lower().replace(" ", "_")
            if normalized == "union":
                pending_operator = SetOperator.UNION
            elif normalized == "union_all":
                pending_operator = SetOperator.UNION_ALL
            else:
                raise RepositoryFormatError(f"{where}: unsupported set operator {text!r}")
            current = None
            continue

        if tag == "query_column":
            if current.from_tables or current.terms or current.order_by:
                raise RepositoryFormatError(f"{where}: misplaced <query_column>")
            current.projection.append(text.lower())
        elif tag == "fromClause":
            if current.terms or current.order_by:
                raise RepositoryFormatError(f"{where}: misplaced <{child.tag}>")
            current.from_tables.append(text.lower())
        elif tag == "LHS":
            if current.pending_lhs is not None or current.order_by:
                raise RepositoryFormatError(f"{where}: misplaced <LHS>")
            if current.terms and not current.expect_term:
                raise RepositoryFormatError(
                    f"{where}: <LHS> must follow a <logical_operator>"
                )
            current.pending_lhs = _operand_from_text(text)
        elif tag == "RHS":
            if current.pending_lhs is None:
                raise RepositoryFormatError(f"{where}: <RHS> without preceding <LHS>")
            current.terms.append(FingerprintTerm(current.pending_lhs, _operand_from_text(text)))
            current.pending_lhs = None
            current.expect_term = False
        elif tag == "logical_operator":
            if not current.terms or current.pending_lhs is not None or current.expect_term:
                raise RepositoryFormatError(f"{where}: misplaced <logical_operator>")
            if current.order_by:
                raise RepositoryFormatError(f"{where}: <logical_operator> after <orderBy>")
            normalized = text.lower()
            if normalized == "and":
                current.logical_operators.append(LogicalOperator.AND)
            elif normalized == "or":
                current.logical_operators.append(LogicalOperator.OR)
            else:
                raise RepositoryFormatError(f"{where}: unsupported logical operator {text!r}")
            current.expect_term = True
        elif tag == "orderBy":
            if current.pending_lhs is not None or current.expect_term:
                raise RepositoryFormatError(f"{where}: misplaced <orderBy>")
            current.order_by.append(text.lower())
        else:  # pragma: no cover - tag map and branches are exhaustive
            raise RepositoryFormatError(f"{where}: unknown element <{child.tag}>")

    if pending_operator is not None:
        raise RepositoryFormatError(f"{where}: <setOperator> without a following arm")
    if not arms:
        raise RepositoryFormatError(f"{where}: missing <commandType>")

    head = arms[0][1].build(where)
    chain = []
    for operator, builder in arms[1:]:
        assert operator is not None
        chain.append((operator, builder.build(where)))
    if not chain:
        return head
    return QueryFingerprint(
        projection=head.projection,
        from_tables=head.from_tables,
        terms=head.terms,
        logical_operators=head.logical_operators,
        order_by=head.order_by,
        set_operators=tuple(chain),
    )


def repository_from_xml(data: bytes | str) -> FingerprintRepository:
    """Parse repository XML, accepting legacy tag and class spellings.

    Raises :class:`RepositoryFormatError` naming the offending element and
    query number on malformed or unexpected input.
    """
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise RepositoryFormatError(f"not well-formed XML: {exc}") from exc
    if root.tag.strip().lower() != "allqueries":
        raise RepositoryFormatError(f"unexpected root element <{root.tag}>")

    entries = []
    for position, element in enumerate(root, start=1):
        if element.tag.strip().lower() != "query":
            raise RepositoryFormatError(f"entry {position}: unexpected element <{element.tag}>")
        declared = element.get("no")
        if declared is not None and declared.strip() != str(position):
            raise RepositoryFormatError(
                f"query {position}: numbering mismatch (no={declared!r})"
            )
        entries.append(_parse_query_element(element, position))
    return FingerprintRepository(tuple(entries))
