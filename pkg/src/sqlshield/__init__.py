"""Hybrid anomaly/misuse SQL-injection detector trained from legitimate query logs."""

from .detector import (
    MissingRelation,
    NoStoredQueryForKey,
    Outcome,
    Phase,
    StructureMismatch,
    Verdict,
    anomaly_check,
    detect,
    extract_relations,
    misuse_check,
)
from .errors import (
    BundleError,
    BundleIntegrityError,
    KeywordFileError,
    LogDecodeError,
    NotASelectError,
    ProfileFormatError,
    RepositoryFormatError,
    SqlShieldError,
    TrainingError,
)
from .fingerprint import (
    AbstractOperand,
    FingerprintRepository,
    FingerprintTerm,
    OperandClass,
    QueryFingerprint,
    RepositoryKey,
    abstract_literals,
    repository_from_xml,
    repository_key,
    repository_to_xml,
    structural_equals,
)
from .keywords import (
    DEFAULT_KEYWORDS,
    DecodeLayer,
    KeywordHit,
    KeywordSet,
    keyword_scan,
    load_keywords,
)
from .lexer import Token, TokenKind, normalize_identifier, tokenize
from .parser import (
    CommandType,
    Comparator,
    LogicalOperator,
    Operand,
    OperandKind,
    ParsedQuery,
    PredicateTerm,
    SetOperator,
    parse_select,
)
from .rules import (
    AssociationRule,
    MiningParams,
    Relation,
    RuleProfile,
    load_profile,
    mine_rules,
    profile_contains,
    save_profile,
    transactions_from,
)
from .training import (
    LogRecord,
    ProfileBundle,
    SkippedRecord,
    TrainingManifest,
    load_bundle,
    read_log,
    save_bundle,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AbstractOperand",
    "AssociationRule",
    "BundleError",
    "BundleIntegrityError",
    "CommandType",
    "Comparator",
    "DEFAULT_KEYWORDS",
    "DecodeLayer",
    "FingerprintRepository",
    "FingerprintTerm",
    "KeywordFileError",
    "KeywordHit",
    "KeywordSet",
    "LogDecodeError",
    "LogRecord",
    "LogicalOperator",
    "MiningParams",
    "MissingRelation",
    "NoStoredQueryForKey",
    "NotASelectError",
    "Operand",
    "OperandClass",
    "OperandKind",
    "Outcome",
    "ParsedQuery",
    "Phase",
    "PredicateTerm",
    "ProfileBundle",
    "ProfileFormatError",
    "QueryFingerprint",
    "Relation",
    "RepositoryFormatError",
    "RepositoryKey",
    "RuleProfile",
    "SetOperator",
    "SkippedRecord",
    "SqlShieldError",
    "StructureMismatch",
    "Token",
    "TokenKind",
    "TrainingError",
    "TrainingManifest",
    "Verdict",
    "abstract_literals",
    "anomaly_check",
    "detect",
    "extract_relations",
    "keyword_scan",
    "load_bundle",
    "load_keywords",
    "load_profile",
    "mine_rules",
    "misuse_check",
    "normalize_identifier",
    "parse_select",
    "profile_contains",
    "read_log",
    "repository_from_xml",
    "repository_key",
    "repository_to_xml",
    "save_bundle",
    "save_profile",
    "structural_equals",
    "tokenize",
    "train",
    "transactions_from",
]
