"""Command-line interface: train, detect, scan, evaluate.

Exit codes: 0 success (all benign), 2 at least one intrusion found,
1 operational error, 64 usage error. Verdict output is one TSV line per
query (``<BENIGN|INTRUSION>\\t<phase|->\\t<reason|->\\t<sql>``) so results
compose in shell pipelines; --pretty switches to a human layout.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .detector import Outcome, Phase, Verdict, detect
from .errors import SqlShieldError
from .keywords import KeywordSet, load_keywords
from .rules import MiningParams
from .training import LogRecord, ProfileBundle, load_bundle, read_log, save_bundle, train

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INTRUSION = 2
EXIT_USAGE = 64

PROFILE_ENV_VAR = "SSF_PROFILE"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit code 64."""

    def error(self, message: str):  # noqa: D102 - argparse override
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class EvalReport:
    """Confusion counts and derived rates for a labeled corpus."""

    true_positive: int = 0
    false_positive: int = 0
    true_negative: int = 0
    false_negative: int = 0
    anomaly_intrusions: int = 0
    misuse_intrusions: int = 0

    @property
    def total(self) -> int:
        return (
            self.true_positive
            + self.false_positive
            + self.true_negative
            + self.false_negative
        )

    @staticmethod
    def _rate(numerator: int, denominator: int) -> float:
        return numerator / denominator if denominator else 0.0

    @property
    def precision(self) -> float:
        return self._rate(self.true_positive, self.true_positive + self.false_positive)

    @property
    def recall(self) -> float:
        return self._rate(self.true_positive, self.true_positive + self.false_negative)

    @property
    def false_positive_rate(self) -> float:
        return self._rate(self.false_positive, self.false_positive + self.true_negative)

    def tally(self, label: str, verdict: Verdict) -> None:
        intrusion = verdict.outcome is Outcome.INTRUSION
        if intrusion:
            if verdict.phase is Phase.ANOMALY:
                self.anomaly_intrusions += 1
            else:
                self.misuse_intrusions += 1
        if label == "attack":
            if intrusion:
                self.true_positive += 1
            else:
                self.false_negative += 1
        else:
            if intrusion:
                self.false_positive += 1
            else:
                self.true_negative += 1


def _verdict_columns(verdict: Verdict) -> tuple[str, str, str]:
    if verdict.outcome is Outcome.BENIGN:
        return "BENIGN", "-", "-"
    assert verdict.reason is not None
    return "INTRUSION", verdict.phase.value, verdict.reason.describe()


def format_verdict(verdict: Verdict, sql: str, pretty: bool = False) -> str:
    outcome, phase, reason = _verdict_columns(verdict)
    if pretty:
        detail = "" if reason == "-" else f" [{phase}] {reason}"
        return f"{outcome:<9}{detail}\n  query: {sql}"
    return f"{outcome}\t{phase}\t{reason}\t{sql}"


def _load_bundle_arg(path: str) -> ProfileBundle:
    return load_bundle(Path(path))


def _detect_all(
    sqls: Sequence[str], bundle: ProfileBundle, jobs: int
) -> list[Verdict]:
    runner: Callable[[str], Verdict] = lambda sql: detect(sql, bundle)
    if jobs > 1 and len(sqls) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(runner, sqls))
    return [runner(sql) for sql in sqls]


def _read_records(paths: Iterable[str]) -> list[LogRecord]:
    records: list[LogRecord] = []
    for path in paths:
        records.extend(read_log(Path(path).read_bytes(), source_tag=path))
    return records


def cmd_train(args: argparse.Namespace) -> int:
    keywords: KeywordSet | None = None
    if args.keywords:
        keywords = load_keywords(Path(args.keywords).read_text(encoding="utf-8"))
    params = MiningParams(min_support=args.min_support, min_confidence=args.min_confidence)
    records = _read_records(args.log)
    bundle = train(records, params=params, keywords=keywords)
    save_bundle(bundle, args.out)
    print(
        f"trained: {bundle.manifest.trained_count} queries,"
        f" {len(bundle.rules.rules)} rules,"
        f" {len(bundle.manifest.skipped)} skipped"
    )
    for skip in bundle.manifest.skipped:
        tag = f"{skip.source_tag}:" if skip.source_tag else ""
        print(f"skipped {tag}{skip.line_number} ({skip.reason}): {skip.sql}", file=sys.stderr)
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    bundle = _load_bundle_arg(args.profile)
    if args.stdin:
        records = read_log(sys.stdin.read().encode("utf-8"), source_tag="<stdin>")
        sqls = [record.sql for record in records]
    else:
        sqls = list(args.query)
    verdicts = _detect_all(sqls, bundle, args.jobs)
    for sql, verdict in zip(sqls, verdicts):
        print(format_verdict(verdict, sql, pretty=args.pretty))
    if any(v.outcome is Outcome.INTRUSION for v in verdicts):
        return EXIT_INTRUSION
    return EXIT_OK


def cmd_scan(args: argparse.Namespace) -> int:
    bundle = _load_bundle_arg(args.profile)
    records = read_log(Path(args.input).read_bytes(), source_tag=args.input)
    verdicts = _detect_all([r.sql for r in records], bundle, args.jobs)
    intrusions = 0
    for record, verdict in zip(records, verdicts):
        print(format_verdict(verdict, record.sql, pretty=args.pretty))
        if verdict.outcome is Outcome.INTRUSION:
            intrusions += 1
    print(f"summary: {len(records) - intrusions} benign, {intrusions} intrusion")
    return EXIT_INTRUSION if intrusions else EXIT_OK


def _parse_corpus(path: str) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    text = Path(path).read_text(encoding="utf-8")
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        label, sep, sql = line.partition("\t")
        label = label.strip()
        if not sep:
            raise SqlShieldError(f"{path}:{number}: expected '<label>\\t<sql>'")
        if label not in ("benign", "attack"):
            raise SqlShieldError(f"{path}:{number}: unknown label {label!r}")
        rows.append((label, sql))
    return rows


def _print_report(report: EvalReport, benign_rows: int, attack_rows: int, fmt: str) -> None:
    if fmt == "tsv":
        print(f"tp\t{report.true_positive}")
        print(f"fp\t{report.false_positive}")
        print(f"tn\t{report.true_negative}")
        print(f"fn\t{report.false_negative}")
        print(f"precision\t{report.precision:.6f}")
        print(f"recall\t{report.recall:.6f}")
        print(f"false_positive_rate\t{report.false_positive_rate:.6f}")
        print(f"phase_anomaly\t{report.anomaly_intrusions}")
        print(f"phase_misuse\t{report.misuse_intrusions}")
        return
    print(f"corpus: {report.total} queries ({benign_rows} benign, {attack_rows} attack)")
    print(f"true_positive:  {report.true_positive}")
    print(f"false_positive: {report.false_positive}")
    print(f"true_negative:  {report.true_negative}")
    print(f"false_negative: {report.false_negative}")
    print(f"precision: {report.precision:.6f}")
    print(f"recall: {report.recall:.6f}")
    print(f"false_positive_rate: {report.false_positive_rate:.6f}")
    print(
        f"intrusions_by_phase: anomaly={report.anomaly_intrusions}"
        f" misuse={report.misuse_intrusions}"
    )


def cmd_evaluate(args: argparse.Namespace) -> int:
    bundle = _load_bundle_arg(args.profile)
    rows = _parse_corpus(args.corpus)
    verdicts = _detect_all([sql for _, sql in rows], bundle, args.jobs)
    report = EvalReport()
    for (label, _), verdict in zip(rows, verdicts):
        report.tally(label, verdict)
    benign_rows = sum(1 for label, _ in rows if label == "benign")
    _print_report(report, benign_rows, len(rows) - benign_rows, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqlshield", description=__doc__.splitlines()[0])
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_profile(p: argparse.ArgumentParser) -> None:
        default = os.environ.get(PROFILE_ENV_VAR)
        p.add_argument(
            "--profile",
            default=default,
            required=default is None,
            help=f"profile bundle directory (default: ${PROFILE_ENV_VAR})",
        )
        p.add_argument("--jobs", type=int, default=1, help="concurrent detections")
        p.add_argument("--pretty", action="store_true", help="human-oriented output")

    p_train = subparsers.add_parser("train", help="train a profile bundle from query logs")
    p_train.add_argument("--log", action="append", required=True, help="query log (repeatable)")
    p_train.add_argument("--out", required=True, help="bundle output directory")
    p_train.add_argument("--min-support", type=float, default=0.0)
    p_train.add_argument("--min-confidence", type=float, default=0.0)
    p_train.add_argument("--keywords", help="keyword file overriding the built-in set")
    p_train.set_defaults(func=cmd_train)

    p_detect = subparsers.add_parser("detect", help="classify queries")
    add_profile(p_detect)
    source = p_detect.add_mutually_exclusive_group(required=True)
    source.add_argument("--query", action="append", help="SQL text (repeatable)")
    source.add_argument("--stdin", action="store_true", help="read queries from stdin")
    p_detect.set_defaults(func=cmd_detect)

    p_scan = subparsers.add_parser("scan", help="classify every record of a log file")
    add_profile(p_scan)
    p_scan.add_argument("--input", required=True, help="log file to scan")
    p_scan.set_defaults(func=cmd_scan)

    p_eval = subparsers.add_parser("evaluate", help="score a labeled corpus")
    add_profile(p_eval)
    p_eval.add_argument("--corpus", required=True, help="TSV file: <benign|attack>\\t<sql>")
    p_eval.add_argument("--format", choices=("text", "tsv"), default="text")
    p_eval.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SqlShieldError, OSError, ValueError) as exc:
        print(f"sqlshield: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def console_main() -> None:
    sys.exit(main())
