"""Disagreement analysis: distances, fuzzy bands and drill-downs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .engine import RankingResult, group_matrix
from .model import CAUSE_LABELS, Session


class OutOfRangeError(ValueError):
    pass


class UnknownCriterionError(KeyError):
    pass


@dataclass(frozen=True)
class FuzzyBands:
    """Band boundaries for relevance/discrepancy interpretation.

    Half-open convention: low/negligible covers [0, low_cut], medium/
    moderate (low_cut, high_cut], high/severe (high_cut, 1].
    """

    low_cut: float = 0.3
    high_cut: float = 0.7

    def __post_init__(self):
        if not 0.0 < self.low_cut < self.high_cut < 1.0:
            raise ValueError("bands require 0 < low_cut < high_cut < 1")


RELEVANCE_BANDS = ("low", "medium", "high")
DISCREPANCY_BANDS = ("negligible", "moderate", "severe")


def _band_index(value: float, bands: FuzzyBands) -> int:
    if not 0.0 <= value <= 1.0:
        raise OutOfRangeError(f"value {value} outside [0, 1]")
    if value <= bands.low_cut:
        return 0
    if value <= bands.high_cut:
        return 1
    return 2


def classify_relevance(score: float, bands: FuzzyBands = FuzzyBands()) -> str:
    """Map a scaled ranking score to low / medium / high."""
    return RELEVANCE_BANDS[_band_index(score, bands)]


def classify_discrepancy(delta: float, bands: FuzzyBands = FuzzyBands()) -> str:
    """Map an absolute score difference to negligible / moderate / severe."""
    return DISCREPANCY_BANDS[_band_index(delta, bands)]


def euclidean(a: dict[str, float], b: dict[str, float]) -> float:
    common = sorted(set(a) & set(b))
    return math.sqrt(sum((a[d] - b[d]) ** 2 for d in common))


def pairwise_agreement(result: RankingResult) -> dict[tuple[str, str], float]:
    """Euclidean distance between every pair of analyst ranking vectors."""
    analysts = result.analyst_ids()
    if len(analysts) < 2:
        raise ValueError("need at least two analysts")
    out: dict[tuple[str, str], float] = {}
    for a, b in itertools.combinations(analysts, 2):
        d = euclidean(result.per_analyst[a], result.per_analyst[b])
        out[(a, b)] = d
        out[(b, a)] = d
    for a in analysts:
        out[(a, a)] = 0.0
    return out


@dataclass
class CriterionBreakdown:
    """Per-analyst normalized columns for one criterion vs the group column."""

    criterion_id: str
    analyst_columns: dict[str, dict[str, float]]
    group_column: dict[str, float]
    per_source_delta: dict[str, float]  # max - min across analysts
    per_source_class: dict[str, str]


def per_criterion_drilldown(
    result: RankingResult, criterion_id: str, bands: FuzzyBands = FuzzyBands()
) -> CriterionBreakdown:
    """The data behind a per-criterion disagreement chart."""
    if criterion_id not in result.criterion_ids():
        raise UnknownCriterionError(criterion_id)
    columns = {m.analyst_id: m.column(criterion_id) for m in result.normalized_matrices}
    group_col = group_matrix(result.normalized_matrices).column(criterion_id)
    deltas = {}
    classes = {}
    for d in group_col:
        values = [col[d] for col in columns.values()]
        delta = max(values) - min(values)
        deltas[d] = delta
        classes[d] = classify_discrepancy(delta, bands)
    return CriterionBreakdown(
        criterion_id=criterion_id,
        analyst_columns=columns,
        group_column=group_col,
        per_source_delta=deltas,
        per_source_class=classes,
    )


@dataclass
class WeightBreakdown:
    """Analyst weight vectors vs the group vector, plus the ranking each
    analyst would obtain using the group weights instead of their own."""

    analyst_weights: dict[str, dict[str, float]]
    group_weights: dict[str, float]
    per_criterion_delta: dict[str, float]
    per_criterion_class: dict[str, str]
    own_weight_ranking: dict[str, dict[str, float]]
    group_weight_ranking: dict[str, dict[str, float]]


def weight_drilldown(result: RankingResult, bands: FuzzyBands = FuzzyBands()) -> WeightBreakdown:
    from .engine import rank_for_analyst  # local to avoid cycle at import time

    analyst_weights = {wv.analyst_id: dict(wv.weights) for wv in result.weights_used}
    group_w = dict(result.group_weights.weights)
    deltas = {}
    classes = {}
    for c in group_w:
        values = [w[c] for w in analyst_weights.values()]
        delta = max(values) - min(values)
        deltas[c] = delta
        classes[c] = classify_discrepancy(delta, bands)
    group_rankings = {
        m.analyst_id: rank_for_analyst(m, result.group_weights)
        for m in result.normalized_matrices
    }
    return WeightBreakdown(
        analyst_weights=analyst_weights,
        group_weights=group_w,
        per_criterion_delta=deltas,
        per_criterion_class=classes,
        own_weight_ranking={a: dict(v) for a, v in result.per_analyst.items()},
        group_weight_ranking=group_rankings,
    )


@dataclass
class DiscrepancyReport:
    pairwise_distances: dict[tuple[str, str], float]
    per_source_spread: dict[str, tuple[float, str]]
    per_criterion_breakdown: dict[str, CriterionBreakdown]
    weight_breakdown: WeightBreakdown
    cause_annotations: dict[str, str] = field(default_factory=dict)

    def annotate(self, entity_id: str, cause: str) -> None:
        if cause not in CAUSE_LABELS:
            raise ValueError(f"unknown cause label {cause!r}")
        self.cause_annotations[entity_id] = cause


def build_report(result: RankingResult, bands: FuzzyBands = FuzzyBands()) -> DiscrepancyReport:
    """Assemble the full disagreement report for a computed round."""
    analysts = result.analyst_ids()
    distances = pairwise_agreement(result) if len(analysts) >= 2 else {(analysts[0], analysts[0]): 0.0}
    spread = {}
    for d in result.source_ids():
        values = [result.per_analyst[a][d] for a in analysts]
        delta = max(values) - min(values)
        # per-analyst scores can exceed 1 only in degenerate configs; clamp for banding
        spread[d] = (delta, classify_discrepancy(min(delta, 1.0), bands))
    breakdowns = {
        c: per_criterion_drilldown(result, c, bands) for c in result.criterion_ids()
    }
    return DiscrepancyReport(
        pairwise_distances=distances,
        per_source_spread=spread,
        per_criterion_breakdown=breakdowns,
        weight_breakdown=weight_drilldown(result, bands),
    )


def mean_pairwise_distance(result: RankingResult) -> float:
    analysts = result.analyst_ids()
    if len(analysts) < 2:
        return 0.0
    pairs = list(itertools.combinations(analysts, 2))
    dist = pairwise_agreement(result)
    return sum(dist[p] for p in pairs) / len(pairs)


def round_convergence(session: Session) -> list[tuple[int, float]]:
    """Mean pairwise analyst distance per computed round, in round order."""
    from .io_formats import result_from_dict  # deserialization lives with the schema

    out = []
    for rnd in session.rounds:
        if rnd.result is None:
            continue
        result = result_from_dict(rnd.result)
        out.append((rnd.index, mean_pairwise_distance(result)))
    if not out:
        raise ValueError("session has no computed rounds")
    return out
