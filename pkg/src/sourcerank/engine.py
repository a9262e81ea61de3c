"""Numeric core: shortlisting, weighting, normalization and ranking.

All operations are pure functions; inputs are never mutated. Two
normalization strategies are supported ("sum" divides each column by
its sum, "max" by its maximum); the strategy used is always recorded in
the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    GROUP,
    MISSING,
    CriterionBallot,
    CriterionScoreSheet,
    MethodConfig,
    SourceScoreMatrix,
)


class EngineError(Exception):
    """Base class for computation failures (bad panel data)."""


class EmptyShortlistError(EngineError):
    """No criterion survived the vote threshold; revise votes or policy."""


class ZeroSheetError(EngineError):
    def __init__(self, analyst_id: str):
        super().__init__(f"analyst {analyst_id!r} scored every criterion 0")
        self.analyst_id = analyst_id


class ZeroColumnError(EngineError):
    def __init__(self, analyst_id: str, criterion_id: str):
        super().__init__(
            f"criterion {criterion_id!r} has no positive score in analyst {analyst_id!r}'s matrix"
        )
        self.analyst_id = analyst_id
        self.criterion_id = criterion_id


class UnimputableError(EngineError):
    def __init__(self, source_id: str, criterion_id: str):
        super().__init__(f"cell ({source_id!r}, {criterion_id!r}) is missing for every analyst")
        self.source_id = source_id
        self.criterion_id = criterion_id


class MissingValuesError(EngineError):
    """Matrices contain MISSING cells and the config forbids imputation."""


class CriterionMismatchError(EngineError):
    pass


class DimensionMismatchError(EngineError):
    pass


@dataclass(frozen=True)
class WeightVector:
    """Normalized criterion weights of one analyst (or the group)."""

    analyst_id: str
    weights: dict[str, float]


@dataclass(frozen=True)
class NormalizedMatrix:
    """Column-normalized source-vs-criterion scores of one analyst."""

    analyst_id: str
    source_ids: tuple[str, ...]
    criterion_ids: tuple[str, ...]
    values: tuple[tuple[float, ...], ...]  # rows: sources, cols: criteria

    def cell(self, source_id: str, criterion_id: str) -> float:
        return self.values[self.source_ids.index(source_id)][self.criterion_ids.index(criterion_id)]

    def column(self, criterion_id: str) -> dict[str, float]:
        j = self.criterion_ids.index(criterion_id)
        return {d: self.values[i][j] for i, d in enumerate(self.source_ids)}


@dataclass
class RankingResult:
    """Per-analyst and group rankings plus every intermediate."""

    per_analyst: dict[str, dict[str, float]]
    group: dict[str, float]
    group_scaled: dict[str, float]
    weights_used: list[WeightVector]
    group_weights: WeightVector
    normalized_matrices: list[NormalizedMatrix]
    config_snapshot: MethodConfig
    degenerate: bool = False
    imputed_cells: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def analyst_ids(self) -> list[str]:
        return list(self.per_analyst)

    def source_ids(self) -> list[str]:
        return list(self.group)

    def criterion_ids(self) -> list[str]:
        return list(self.group_weights.weights)


def shortlist_criteria(
    ballots: list[CriterionBallot],
    policy: str,
    k: int,
    at_least_t: int = 1,
) -> set[str]:
    """Select criteria whose summed votes clear the configured threshold."""
    if k < 1:
        raise EngineError("need at least one analyst")
    if len(ballots) != k:
        raise EngineError(f"expected {k} ballots, got {len(ballots)}")
    criteria = set(ballots[0].votes) if ballots else set()
    totals = {c: sum(b.votes[c] for b in ballots) for c in criteria}
    if policy == "strict-majority":
        kept = {c for c, v in totals.items() if v > k / 2}
    elif policy == "at-least":
        kept = {c for c, v in totals.items() if v >= at_least_t}
    elif policy == "accept-all":
        kept = set(criteria)
    else:
        raise EngineError(f"unknown vote threshold policy {policy!r}")
    if not kept:
        raise EmptyShortlistError("no criterion passed the vote threshold")
    return kept


def _normalize_weights(scores: dict[str, int | float], normalization: str) -> dict[str, float]:
    values = np.array([float(scores[c]) for c in scores])
    if normalization == "max":
        divisor = values.max()
    elif normalization == "sum":
        divisor = values.sum()
    else:
        raise EngineError(f"unknown normalization {normalization!r}")
    return {c: float(scores[c]) / divisor for c in scores}


def weight_criteria(
    sheets: list[CriterionScoreSheet], normalization: str
) -> tuple[list[WeightVector], WeightVector]:
    """Turn raw 0-5 criteria scores into per-analyst and group weights."""
    if not sheets:
        raise EngineError("no score sheets")
    criteria = list(sheets[0].scores)
    for sheet in sheets:
        if set(sheet.scores) != set(criteria):
            raise CriterionMismatchError(
                f"sheet of {sheet.analyst_id!r} covers a different criterion set"
            )
        if all(v == 0 for v in sheet.scores.values()):
            raise ZeroSheetError(sheet.analyst_id)
    per_analyst = [
        WeightVector(s.analyst_id, _normalize_weights(s.scores, normalization)) for s in sheets
    ]
    k = len(per_analyst)
    group = WeightVector(
        GROUP, {c: sum(w.weights[c] for w in per_analyst) / k for c in criteria}
    )
    return per_analyst, group


def impute_missing(matrices: list[SourceScoreMatrix]) -> list[SourceScoreMatrix]:
    """Fill each MISSING cell with the mean of the other analysts' scores.

    Imputed values stay real-valued; inputs are returned untouched when
    nothing is missing.
    """
    if not matrices:
        return []
    out = []
    for m in matrices:
        missing = m.missing_cells()
        if not missing:
            out.append(m)
            continue
        cells = dict(m.cells)
        for key in missing:
            others = [
                o.cells[key]
                for o in matrices
                if o is not m and key in o.cells and o.cells[key] is not MISSING
            ]
            if not others:
                raise UnimputableError(*key)
            cells[key] = float(sum(others)) / len(others)
        out.append(SourceScoreMatrix(m.analyst_id, cells))
    return out


def _matrix_array(
    matrix: SourceScoreMatrix, source_ids: list[str], criterion_ids: list[str]
) -> np.ndarray:
    arr = np.empty((len(source_ids), len(criterion_ids)))
    for i, d in enumerate(source_ids):
        for j, c in enumerate(criterion_ids):
            v = matrix.cells[(d, c)]
            if v is MISSING:
                raise MissingValuesError(
                    f"cell ({d!r}, {c!r}) of analyst {matrix.analyst_id!r} is missing"
                )
            arr[i, j] = float(v)
    return arr


def normalize_matrix(
    matrix: SourceScoreMatrix,
    normalization: str,
    source_ids: list[str] | None = None,
    criterion_ids: list[str] | None = None,
) -> NormalizedMatrix:
    """Divide each criterion column by its sum (or max); zeros stay zero."""
    if source_ids is None:
        source_ids = sorted({d for d, _ in matrix.cells})
    if criterion_ids is None:
        criterion_ids = sorted({c for _, c in matrix.cells})
    arr = _matrix_array(matrix, source_ids, criterion_ids)
    if normalization == "sum":
        divisors = arr.sum(axis=0)
    elif normalization == "max":
        divisors = arr.max(axis=0)
    else:
        raise EngineError(f"unknown normalization {normalization!r}")
    for j, c in enumerate(criterion_ids):
        if divisors[j] <= 0:
            raise ZeroColumnError(matrix.analyst_id, c)
    norm = arr / divisors
    return NormalizedMatrix(
        analyst_id=matrix.analyst_id,
        source_ids=tuple(source_ids),
        criterion_ids=tuple(criterion_ids),
        values=tuple(tuple(float(x) for x in row) for row in norm),
    )


def rank_for_analyst(normalized: NormalizedMatrix, weights: WeightVector) -> dict[str, float]:
    """Weighted mean over criteria: score[d] = sum_c w[c] * normalized[d, c].

    The weights may be the analyst's own vector or the group vector.
    """
    if set(weights.weights) != set(normalized.criterion_ids):
        raise CriterionMismatchError("weights do not cover the matrix's criterion set")
    w = np.array([weights.weights[c] for c in normalized.criterion_ids])
    arr = np.array(normalized.values)
    scores = arr @ w
    return {d: float(scores[i]) for i, d in enumerate(normalized.source_ids)}


def group_matrix(matrices: list[NormalizedMatrix]) -> NormalizedMatrix:
    """Cellwise mean of the analysts' normalized matrices."""
    if not matrices:
        raise DimensionMismatchError("no matrices")
    first = matrices[0]
    for m in matrices[1:]:
        if m.source_ids != first.source_ids or m.criterion_ids != first.criterion_ids:
            raise DimensionMismatchError("matrices do not share dimensions")
    stack = np.array([m.values for m in matrices])
    mean = stack.mean(axis=0)
    return NormalizedMatrix(
        analyst_id=GROUP,
        source_ids=first.source_ids,
        criterion_ids=first.criterion_ids,
        values=tuple(tuple(float(x) for x in row) for row in mean),
    )


def compute_ranking(
    sheets: list[CriterionScoreSheet],
    matrices: list[SourceScoreMatrix],
    config: MethodConfig,
    source_ids: list[str] | None = None,
    criterion_ids: list[str] | None = None,
) -> RankingResult:
    """Run the full pipeline: weights, normalization, per-analyst and group ranks.

    Analyst order follows the sheets; each analyst must appear in both
    sheets and matrices. Source/criterion order defaults to sorted ids.
    """
    if not sheets or not matrices:
        raise EngineError("need at least one sheet and one matrix")
    by_analyst = {m.analyst_id: m for m in matrices}
    if set(by_analyst) != {s.analyst_id for s in sheets}:
        raise EngineError("sheets and matrices cover different analyst sets")

    imputed: dict[str, list[tuple[str, str]]] = {}
    any_missing = any(m.missing_cells() for m in matrices)
    if any_missing:
        if config.missing_value_policy == "reject":
            raise MissingValuesError("matrices contain missing cells and imputation is disabled")
        imputed = {m.analyst_id: m.missing_cells() for m in matrices if m.missing_cells()}
        filled = impute_missing([by_analyst[s.analyst_id] for s in sheets])
        by_analyst = {m.analyst_id: m for m in filled}

    if criterion_ids is None:
        criterion_ids = sorted(sheets[0].scores)
    if source_ids is None:
        first = next(iter(by_analyst.values()))
        source_ids = sorted({d for d, _ in first.cells})

    weight_vectors, group_weights = weight_criteria(sheets, config.normalization)
    normalized = [
        normalize_matrix(by_analyst[s.analyst_id], config.normalization, source_ids, criterion_ids)
        for s in sheets
    ]
    per_analyst = {
        wv.analyst_id: rank_for_analyst(nm, wv) for wv, nm in zip(weight_vectors, normalized)
    }

    k = len(sheets)
    group = {
        d: sum(per_analyst[a][d] for a in per_analyst) / k for d in source_ids
    }
    peak = max(group.values()) if group else 0.0
    degenerate = peak <= 0.0
    if config.scale_final and not degenerate:
        group_scaled = {d: v / peak for d, v in group.items()}
    else:
        group_scaled = dict(group)

    return RankingResult(
        per_analyst=per_analyst,
        group=group,
        group_scaled=group_scaled,
        weights_used=weight_vectors,
        group_weights=group_weights,
        normalized_matrices=normalized,
        config_snapshot=config,
        degenerate=degenerate,
        imputed_cells=imputed,
    )


def dense_ranks(scores: dict[str, float], tol: float = 1e-9) -> list[tuple[int, list[str]]]:
    """Group sources into dense ranks, ties (within tol) sharing a rank."""
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    groups: list[tuple[int, list[str]]] = []
    for d, v in ordered:
        if groups and abs(scores[groups[-1][1][0]] - v) <= tol:
            groups[-1][1].append(d)
        else:
            groups.append((len(groups) + 1, [d]))
    return groups
