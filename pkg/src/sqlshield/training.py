"""Query-log ingestion, profile training, and the on-disk bundle.

Training assumes the log holds only legitimate traffic. Records that do
not parse as one clean SELECT (non-SELECT statements, residual tokens,
stacked statements) are skipped loudly: they end up in the manifest's
skipped-lines report instead of being learned, keeping the trained
baseline auditable.

A trained profile persists as a bundle directory of four files:

    queries.xml    fingerprint repository
    rules.profile  mined association rules
    keywords.txt   suspicious keywords
    manifest.txt   training metadata and the skip report
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .errors import BundleError, BundleIntegrityError, LogDecodeError, TrainingError
from .fingerprint import (
    FingerprintRepository,
    abstract_literals,
    repository_from_xml,
    repository_to_xml,
)
from .keywords import KeywordSet, dump_keywords, load_keywords
from .lexer import tokenize
from .parser import CommandType, parse_select
from .rules import MiningParams, RuleProfile, load_profile, mine_rules, save_profile

SKIP_NON_SELECT = "non_select"
SKIP_MULTIPLE_STATEMENTS = "multiple_statements"
SKIP_RESIDUAL_TOKENS = "residual_tokens"
SKIP_INCOMPLETE_SELECT = "incomplete_select"

BUNDLE_FILES = ("queries.xml", "rules.profile", "keywords.txt", "manifest.txt")


@dataclass(frozen=True)
class LogRecord:
    line_number: int
    sql: str
    source_tag: str | None = None


@dataclass(frozen=True)
class SkippedRecord:
    line_number: int
    reason: str
    sql: str
    source_tag: str | None = None


@dataclass(frozen=True)
class TrainingManifest:
    created: str
    record_count: int
    trained_count: int
    params: MiningParams
    skipped: tuple[SkippedRecord, ...] = ()


@dataclass
class ProfileBundle:
    """Everything the detector needs: repository, rules, keywords, manifest."""

    repository: FingerprintRepository
    rules: RuleProfile
    keywords: KeywordSet
    manifest: TrainingManifest

    def __post_init__(self) -> None:
        if self.rules.transaction_count != len(self.repository.entries):
            raise BundleIntegrityError(
                f"rule profile counts {self.rules.transaction_count} transactions"
                f" but the repository holds {len(self.repository.entries)} queries"
            )


def _looks_like_timestamp(text: str) -> bool:
    try:
        datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        return False
    return True


def read_log(data: bytes, source_tag: str | None = None) -> list[LogRecord]:
    """Parse a query log into records.

    One record per non-blank, non-``#`` line. A line of the form
    ``<ISO-8601 timestamp>\\t<user>\\t<sql>`` keeps only the sql field.
    Raises :class:`LogDecodeError` for bytes that are not UTF-8.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LogDecodeError("log is not valid UTF-8", byte_offset=exc.start) from exc

    records = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) >= 3 and _looks_like_timestamp(parts[0].strip()):
            stripped = "\t".join(parts[2:]).strip()
            if not stripped:
                continue
        records.append(LogRecord(line_number=number, sql=stripped, source_tag=source_tag))
    return records


def train(
    records: list[LogRecord],
    params: MiningParams = MiningParams(),
    keywords: KeywordSet | None = None,
) -> ProfileBundle:
    """Build a profile bundle from log records.

    Raises :class:`TrainingError` when no record yields a clean SELECT.
    """
    keywords = keywords if keywords is not None else KeywordSet.default()
    entries = []
    skipped = []
    for record in records:
        parsed = parse_select(tokenize(record.sql))
        if parsed.command_type is not CommandType.SELECT:
            reason = SKIP_NON_SELECT
        elif parsed.statement_count > 1:
            reason = SKIP_MULTIPLE_STATEMENTS
        elif parsed.residual_tokens:
            reason = SKIP_RESIDUAL_TOKENS
        elif not parsed.projection or not parsed.from_tables:
            # e.g. a bare "select a from": no leftovers, but nothing storable
            reason = SKIP_INCOMPLETE_SELECT
        else:
            entries.append(abstract_literals(parsed))
            continue
        skipped.append(
            SkippedRecord(record.line_number, reason, record.sql, record.source_tag)
        )
    if not entries:
        raise TrainingError("no usable SELECT statements in the training log")

    repository = FingerprintRepository(tuple(entries))
    rules = mine_rules(repository, params)
    manifest = TrainingManifest(
        created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        record_count=len(records),
        trained_count=len(entries),
        params=params,
        skipped=tuple(skipped),
    )
    return ProfileBundle(repository, rules, keywords, manifest)


def _dump_manifest(manifest: TrainingManifest) -> str:
    lines = [
        f"created: {manifest.created}",
        f"records: {manifest.record_count}",
        f"trained: {manifest.trained_count}",
        f"skipped: {len(manifest.skipped)}",
        f"min_support: {manifest.params.min_support:.6f}",
        f"min_confidence: {manifest.params.min_confidence:.6f}",
    ]
    if manifest.skipped:
        lines.append("skipped_lines:")
        for record in manifest.skipped:
            tag = record.source_tag or "-"
            lines.append(f"\t{record.line_number}\t{record.reason}\t{tag}\t{record.sql}")
    return "\n".join(lines) + "\n"


def _load_manifest(text: str) -> TrainingManifest:
    fields: dict[str, str] = {}
    skipped = []
    in_table = False
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line == "skipped_lines:":
            in_table = True
            continue
        if in_table:
            parts = line.lstrip("\t").split("\t", 3)
            if len(parts) != 4:
                raise BundleError(f"manifest.txt line {number}: bad skipped-line row")
            line_no, reason, tag, sql = parts
            try:
                skipped.append(
                    SkippedRecord(int(line_no), reason, sql, None if tag == "-" else tag)
                )
            except ValueError as exc:
                raise BundleError(f"manifest.txt line {number}: {exc}") from exc
            continue
        key, sep, value = line.partition(": ")
        if not sep:
            raise BundleError(f"manifest.txt line {number}: expected 'key: value'")
        fields[key] = value
    try:
        return TrainingManifest(
            created=fields["created"],
            record_count=int(fields["records"]),
            trained_count=int(fields["trained"]),
            params=MiningParams(
                min_support=float(fields["min_support"]),
                min_confidence=float(fields["min_confidence"]),
            ),
            skipped=tuple(skipped),
        )
    except (KeyError, ValueError) as exc:
        raise BundleError(f"manifest.txt: missing or bad field ({exc})") from exc


def save_bundle(bundle: ProfileBundle, directory: str | Path) -> None:
    """Write the four bundle files, creating the directory if needed."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    (path / "queries.xml").write_bytes(repository_to_xml(bundle.repository))
    (path / "rules.profile").write_bytes(save_profile(bundle.rules))
    (path / "keywords.txt").write_text(dump_keywords(bundle.keywords), encoding="utf-8")
    (path / "manifest.txt").write_text(_dump_manifest(bundle.manifest), encoding="utf-8")


def load_bundle(directory: str | Path) -> ProfileBundle:
    """Read a bundle directory back, validating cross-file consistency."""
    path = Path(directory)
    for name in BUNDLE_FILES:
        if not (path / name).is_file():
            raise BundleError(f"profile bundle is missing {name} (in {path})")

    repository = repository_from_xml((path / "queries.xml").read_bytes())
    rules = load_profile((path / "rules.profile").read_bytes())
    keywords = load_keywords((path / "keywords.txt").read_text(encoding="utf-8"))
    manifest = _load_manifest((path / "manifest.txt").read_text(encoding="utf-8"))

    if rules.transaction_count != len(repository.entries):
        raise BundleIntegrityError(
            f"rules.profile counts {rules.transaction_count} transactions"
            f" but queries.xml holds {len(repository.entries)} queries"
        )
    return ProfileBundle(repository, rules, keywords, manifest)
