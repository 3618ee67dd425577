"""Association-rule mining over the fingerprint repository.

Each stored fingerprint becomes one transaction whose items are its from
tables (``table:name``) and the attributes appearing in its predicate
terms and order-by columns (``attr:name``). Literal-class operands carry
no item: values are user-supplied and must not shape the baseline. Mining
keeps every (table -> attribute) pair whose support and confidence reach
the configured minima; the result is the profile of normal behavior the
anomaly phase checks relations against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import ProfileFormatError, TrainingError
from .fingerprint import FingerprintRepository, OperandClass, QueryFingerprint

TABLE_PREFIX = "table:"
ATTR_PREFIX = "attr:"


@dataclass(frozen=True)
class Relation:
    """A (table -> selection attribute) pair; the unit the anomaly phase tests."""

    table: str
    attribute: str


@dataclass(frozen=True)
class AssociationRule:
    antecedent: str
    consequent: str
    support: float
    confidence: float


@dataclass(frozen=True)
class MiningParams:
    min_support: float = 0.0
    min_confidence: float = 0.0

    def __post_init__(self) -> None:
        for name in ("min_support", "min_confidence"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be within [0, 1], got {value!r}")


@dataclass(frozen=True)
class RuleProfile:
    """Mined rules plus the parameters and transaction count that produced them."""

    rules: frozenset[AssociationRule]
    params: MiningParams
    transaction_count: int
    _pairs: frozenset[tuple[str, str]] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        pairs = frozenset((r.antecedent, r.consequent) for r in self.rules)
        if len(pairs) != len(self.rules):
            raise ValueError("duplicate (antecedent, consequent) pairs in profile")
        object.__setattr__(self, "_pairs", pairs)


def _arm_items(fp: QueryFingerprint) -> set[str]:
    items = {TABLE_PREFIX + table for table in fp.from_tables}
    for term in fp.terms:
        for operand in (term.lhs, term.rhs):
            if operand.cls is OperandClass.ATTRIBUTE:
                items.add(ATTR_PREFIX + (operand.name or ""))
    for column in fp.order_by:
        items.add(ATTR_PREFIX + column)
    return items


def transactions_from(repo: FingerprintRepository) -> list[set[str]]:
    """One item set per stored fingerprint (top-level arm only; union arms
    are covered by the structural check, not the rule profile)."""
    return [_arm_items(fp) for fp in repo.entries]


def frequent_itemsets(
    transactions: list[set[str]], min_support: float, max_size: int = 2
) -> dict[frozenset[str], int]:
    """Apriori frequent-itemset counts up to ``max_size`` items.

    An itemset is frequent when it occurs in at least one transaction and
    its support (count / number of transactions) is >= ``min_support``.
    Candidates of size k are joined from frequent (k-1)-itemsets sharing a
    prefix and pruned unless every (k-1)-subset is frequent.
    """
    n = len(transactions)
    if n == 0:
        return {}

    def is_frequent(count: int) -> bool:
        return count >= 1 and count / n >= min_support

    counts: dict[frozenset[str], int] = {}
    singles: dict[frozenset[str], int] = {}
    for transaction in transactions:
        for item in transaction:
            key = frozenset((item,))
            singles[key] = singles.get(key, 0) + 1
    level = {k: c for k, c in singles.items() if is_frequent(c)}
    counts.update(level)

    size = 2
    while level and size <= max_size:
        previous = set(level)
        ordered = sorted(previous, key=lambda s: sorted(s))
        candidates: set[frozenset[str]] = set()
        for a, b in combinations(ordered, 2):
            union = a | b
            if len(union) != size:
                continue
            if all(frozenset(sub) in previous for sub in combinations(union, size - 1)):
                candidates.add(union)
        tally = dict.fromkeys(candidates, 0)
        for transaction in transactions:
            for candidate in candidates:
                if candidate <= transaction:
                    tally[candidate] += 1
        level = {k: c for k, c in tally.items() if is_frequent(c)}
        counts.update(level)
        size += 1
    return counts


def mine_rules(repo: FingerprintRepository, params: MiningParams) -> RuleProfile:
    """Mine ``table -> attribute`` rules from a repository.

    support    = count(table with attribute) / transactions
    confidence = count(table with attribute) / count(table)

    A rule survives when both reach the params' minima. Raises
    :class:`TrainingError` for an empty repository.
    """
    transactions = transactions_from(repo)
    n = len(transactions)
    if n == 0:
        raise TrainingError("cannot mine rules from an empty repository")

    counts = frequent_itemsets(transactions, params.min_support, max_size=2)
    rules = []
    for itemset, count in counts.items():
        if len(itemset) != 2:
            continue
        tables = [i for i in itemset if i.startswith(TABLE_PREFIX)]
        attrs = [i for i in itemset if i.startswith(ATTR_PREFIX)]
        if len(tables) != 1 or len(attrs) != 1:
            continue
        table_count = counts[frozenset((tables[0],))]
        support = count / n
        confidence = count / table_count
        if support >= params.min_support and confidence >= params.min_confidence:
            rules.append(
                AssociationRule(
                    antecedent=tables[0][len(TABLE_PREFIX) :],
                    consequent=attrs[0][len(ATTR_PREFIX) :],
                    support=support,
                    confidence=confidence,
                )
            )
    return RuleProfile(frozenset(rules), params, n)


def profile_contains(profile: RuleProfile, rel: Relation) -> bool:
    """True iff the profile holds a rule ``rel.table -> rel.attribute``."""
    return (rel.table, rel.attribute) in profile._pairs


_HEADER_PREFIX = "# ssf-rules v1 "


def save_profile(profile: RuleProfile) -> bytes:
    """Serialize a profile to its line format (UTF-8 bytes).

    Header followed by one ``<table> -> <attribute> <support> <confidence>``
    line per rule, sorted for determinism; rates use fixed 6-decimal
    formatting.
    """
    lines = [
        f"# ssf-rules v1 transactions={profile.transaction_count}"
        f" min_support={profile.params.min_support:.6f}"
        f" min_confidence={profile.params.min_confidence:.6f}"
    ]
    for rule in sorted(profile.rules, key=lambda r: (r.antecedent, r.consequent)):
        lines.append(
            f"{rule.antecedent} -> {rule.consequent}"
            f" {rule.support:.6f} {rule.confidence:.6f}"
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_profile(data: bytes | str) -> RuleProfile:
    """Parse the profile format; raises :class:`ProfileFormatError` with the
    offending line number on malformed input."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise ProfileFormatError("missing '# ssf-rules v1' header", line_number=1)

    header: dict[str, str] = {}
    for part in lines[0][len(_HEADER_PREFIX) :].split():
        key, _, value = part.partition("=")
        header[key] = value
    try:
        transaction_count = int(header["transactions"])
        params = MiningParams(
            min_support=float(header["min_support"]),
            min_confidence=float(header["min_confidence"]),
        )
    except (KeyError, ValueError) as exc:
        raise ProfileFormatError(f"bad header field: {exc}", line_number=1) from exc

    rules = []
    for number, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        head, sep, tail = stripped.partition(" -> ")
        fields = tail.rsplit(None, 2)
        if not sep or len(fields) != 3:
            raise ProfileFormatError(f"unparseable rule line {stripped!r}", line_number=number)
        consequent, support_text, confidence_text = fields
        try:
            support = float(support_text)
            confidence = float(confidence_text)
        except ValueError as exc:
            raise ProfileFormatError(f"bad rate: {exc}", line_number=number) from exc
        rules.append(AssociationRule(head.strip(), consequent.strip(), support, confidence))
    try:
        return RuleProfile(frozenset(rules), params, transaction_count)
    except ValueError as exc:
        raise ProfileFormatError(str(exc)) from exc
