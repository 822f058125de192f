"""Metacognitive routing engine.

Decides, per task, whether an agent should answer directly, call a tool,
load a skill, verify its answer, or stop, using a dual-confidence utility
with a provenance-based vigilance gate, a delayed probe before any skill
body load, post-offload confidence decontamination, and a high-confidence
failure bank that decays trust in implicated skill cards.
"""

from mesa.backend import (
    BehaviorScript,
    CachedBackend,
    ModelBackend,
    RemoteBackend,
    RemoteConfig,
    ScriptedBackend,
    load_script,
    record_cache,
    remote_backend,
)
from mesa.bank import (
    BankConfig,
    BankEntry,
    TrustUpdate,
    apply_updates,
    hypercorrection_updates,
    read_bank,
    record,
)
from mesa.bench import (
    CONDITIONS,
    BenchmarkItem,
    Condition,
    ConditionName,
    ItemOutcome,
    ResultsTable,
    SliceName,
    ZTestResult,
    condition_by_name,
    emit_report,
    load_suite,
    normal_cdf,
    parse_report,
    run_matrix,
    two_prop_ztest,
)
from mesa.cards import (
    STALE_TRUST_FACTOR,
    TRUST_CEILINGS,
    CardRegistry,
    Diagnostic,
    OffloadingType,
    Provenance,
    SkillCard,
    effective_trust,
    lint_cards,
    load_registry,
)
from mesa.confidence import (
    TOOL_CHANNEL,
    VERIFY_CHANNEL,
    ConfidenceVector,
    DecontaminationConfig,
    conflict_differential,
    decontaminate,
)
from mesa.context import Attachment, TaskContext
from mesa.dsl import (
    And,
    Contains,
    Kind,
    Matches,
    Mime,
    Not,
    Or,
    PredicateExpr,
    eval_predicate,
    is_vacuous,
    parse_predicate,
    print_predicate,
)
from mesa.errors import (
    BankCorruptionError,
    CardFileError,
    ConfigFileError,
    CoverageError,
    IllegalTransitionError,
    MesaError,
    MissingSignalError,
    PredicateSyntaxError,
    RegistryLookupError,
    RemoteBackendError,
    ReplayMissError,
    StaleTrustError,
    SuiteFormatError,
)
from mesa.probe import PROBE_COST, PROBE_SLACK, ProbeStage, ProbeState, begin, bypass, resolve, run_probe
from mesa.router import (
    CLAIM_THRESHOLD,
    Action,
    ActionVariant,
    Decision,
    FinalAnswerClass,
    GoldAction,
    OffloadClass,
    Outcome,
    RoutingConfig,
    TrajectoryRecord,
    build_candidates,
    classify_outcome,
    run_trajectory,
    score_action,
    score_baseline,
    score_key,
    select_action,
    trajectory_from_dict,
    trajectory_to_dict,
    triage_offload,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionVariant",
    "And",
    "Attachment",
    "BankConfig",
    "BankCorruptionError",
    "BankEntry",
    "BehaviorScript",
    "BenchmarkItem",
    "CLAIM_THRESHOLD",
    "CONDITIONS",
    "CachedBackend",
    "CardFileError",
    "CardRegistry",
    "Condition",
    "ConditionName",
    "ConfidenceVector",
    "ConfigFileError",
    "Contains",
    "CoverageError",
    "Decision",
    "DecontaminationConfig",
    "Diagnostic",
    "FinalAnswerClass",
    "GoldAction",
    "IllegalTransitionError",
    "ItemOutcome",
    "Kind",
    "Matches",
    "MesaError",
    "Mime",
    "MissingSignalError",
    "ModelBackend",
    "Not",
    "OffloadClass",
    "OffloadingType",
    "Or",
    "Outcome",
    "PROBE_COST",
    "PROBE_SLACK",
    "PredicateExpr",
    "PredicateSyntaxError",
    "ProbeStage",
    "ProbeState",
    "Provenance",
    "RegistryLookupError",
    "RemoteBackend",
    "RemoteBackendError",
    "RemoteConfig",
    "ReplayMissError",
    "ResultsTable",
    "RoutingConfig",
    "STALE_TRUST_FACTOR",
    "ScriptedBackend",
    "SkillCard",
    "SliceName",
    "StaleTrustError",
    "SuiteFormatError",
    "TOOL_CHANNEL",
    "TRUST_CEILINGS",
    "TaskContext",
    "TrajectoryRecord",
    "TrustUpdate",
    "VERIFY_CHANNEL",
    "ZTestResult",
    "apply_updates",
    "begin",
    "build_candidates",
    "bypass",
    "classify_outcome",
    "condition_by_name",
    "conflict_differential",
    "decontaminate",
    "effective_trust",
    "emit_report",
    "eval_predicate",
    "hypercorrection_updates",
    "is_vacuous",
    "lint_cards",
    "load_registry",
    "load_script",
    "load_suite",
    "normal_cdf",
    "parse_predicate",
    "parse_report",
    "print_predicate",
    "read_bank",
    "record",
    "record_cache",
    "remote_backend",
    "resolve",
    "run_matrix",
    "run_probe",
    "run_trajectory",
    "score_action",
    "score_baseline",
    "score_key",
    "select_action",
    "trajectory_from_dict",
    "trajectory_to_dict",
    "triage_offload",
    "two_prop_ztest",
]
