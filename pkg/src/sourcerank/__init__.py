"""Collaborative ranking of requirements/data sources.

Analysts vote and weight criteria, score candidate sources against
them, and the engine produces per-analyst and group rankings with
disagreement analysis to drive consensus rounds.
"""

from .model import (
    GROUP,
    MISSING,
    SCHEMA_VERSION,
    Analyst,
    Criterion,
    CriterionBallot,
    CriterionScoreSheet,
    DataSource,
    MethodConfig,
    ProblemStatement,
    Round,
    Session,
    SourceScoreMatrix,
    Violation,
    validate_session,
)
from .engine import (
    NormalizedMatrix,
    RankingResult,
    WeightVector,
    compute_ranking,
    dense_ranks,
    group_matrix,
    impute_missing,
    normalize_matrix,
    rank_for_analyst,
    shortlist_criteria,
    weight_criteria,
)
from .discrepancy import (
    DiscrepancyReport,
    FuzzyBands,
    build_report,
    classify_discrepancy,
    classify_relevance,
    pairwise_agreement,
    per_criterion_drilldown,
    round_convergence,
    weight_drilldown,
)
from .io_formats import load_seed_catalog
from .store import SessionStore

__version__ = "0.1.0"

__all__ = [
    "GROUP",
    "MISSING",
    "SCHEMA_VERSION",
    "Analyst",
    "Criterion",
    "CriterionBallot",
    "CriterionScoreSheet",
    "DataSource",
    "DiscrepancyReport",
    "FuzzyBands",
    "MethodConfig",
    "NormalizedMatrix",
    "ProblemStatement",
    "RankingResult",
    "Round",
    "Session",
    "SessionStore",
    "SourceScoreMatrix",
    "Violation",
    "WeightVector",
    "build_report",
    "classify_discrepancy",
    "classify_relevance",
    "compute_ranking",
    "dense_ranks",
    "group_matrix",
    "impute_missing",
    "load_seed_catalog",
    "normalize_matrix",
    "pairwise_agreement",
    "per_criterion_drilldown",
    "rank_for_analyst",
    "round_convergence",
    "shortlist_criteria",
    "validate_session",
    "weight_criteria",
    "weight_drilldown",
]
