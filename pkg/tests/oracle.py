"""Independent naive re-implementation of the ranking pipeline.

Deliberately written with plain Python loops and no shared code so it
can serve as an oracle for the engine. Keep it dumb.
"""

from __future__ import annotations


def naive_weights(sheet: dict[str, float], normalization: str) -> dict[str, float]:
    if normalization == "max":
        div = max(sheet.values())
    else:
        div = 0.0
        for v in sheet.values():
            div += v
    return {c: v / div for c, v in sheet.items()}


def naive_pipeline(
    sheets: dict[str, dict[str, float]],
    matrices: dict[str, dict[tuple[str, str], float]],
    normalization: str,
    scale_final: bool,
    source_ids: list[str],
    criterion_ids: list[str],
):
    """Returns (per_analyst, group, group_scaled) as plain dicts."""
    per_analyst = {}
    for analyst in sheets:
        weights = naive_weights(sheets[analyst], normalization)
        cells = matrices[analyst]
        normalized = {}
        for c in criterion_ids:
            column = [cells[(d, c)] for d in source_ids]
            div = max(column) if normalization == "max" else sum(column)
            for d in source_ids:
                normalized[(d, c)] = cells[(d, c)] / div
        scores = {}
        for d in source_ids:
            total = 0.0
            for c in criterion_ids:
                total += weights[c] * normalized[(d, c)]
            scores[d] = total
        per_analyst[analyst] = scores

    k = len(sheets)
    group = {}
    for d in source_ids:
        total = 0.0
        for analyst in sheets:
            total += per_analyst[analyst][d]
        group[d] = total / k

    peak = max(group.values()) if group else 0.0
    if scale_final and peak > 0:
        group_scaled = {d: v / peak for d, v in group.items()}
    else:
        group_scaled = dict(group)
    return per_analyst, group, group_scaled


def naive_group_weight_ranking(
    sheets: dict[str, dict[str, float]],
    matrices: dict[str, dict[tuple[str, str], float]],
    normalization: str,
    source_ids: list[str],
    criterion_ids: list[str],
) -> dict[str, float]:
    """The alternative route: group weights applied to the averaged matrix."""
    k = len(sheets)
    group_w = {c: 0.0 for c in criterion_ids}
    for analyst in sheets:
        w = naive_weights(sheets[analyst], normalization)
        for c in criterion_ids:
            group_w[c] += w[c] / k

    mean_matrix = {}
    for d in source_ids:
        for c in criterion_ids:
            mean_matrix[(d, c)] = 0.0
    for analyst in sheets:
        cells = matrices[analyst]
        for c in criterion_ids:
            column = [cells[(d, c)] for d in source_ids]
            div = max(column) if normalization == "max" else sum(column)
            for d in source_ids:
                mean_matrix[(d, c)] += (cells[(d, c)] / div) / k

    out = {}
    for d in source_ids:
        total = 0.0
        for c in criterion_ids:
            total += group_w[c] * mean_matrix[(d, c)]
        out[d] = total
    return out
