import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sourcerank.model import (
    Criterion,
    CriterionScoreSheet,
    DataSource,
    ProblemStatement,
    SourceScoreMatrix,
)


def a2_sheets():
    return [
        CriterionScoreSheet("A1", {"c1": 3, "c2": 5}),
        CriterionScoreSheet("A2", {"c1": 4, "c2": 2}),
    ]


def a2_matrices():
    return [
        SourceScoreMatrix(
            "A1", {("d1", "c1"): 4, ("d1", "c2"): 1, ("d2", "c1"): 2, ("d2", "c2"): 3}
        ),
        SourceScoreMatrix(
            "A2", {("d1", "c1"): 5, ("d1", "c2"): 5, ("d2", "c1"): 0, ("d2", "c2"): 5}
        ),
    ]


# frozen from the hand trace of the sum-normalization pipeline on the
# fixture above (done before the engine was written)
A2_EXPECTED = {
    "y1": {"d1": 0.40625, "d2": 0.59375},
    "y2": {"d1": 5 / 6, "d2": 1 / 6},
    "group": {"d1": 0.6197916666666666, "d2": 0.3802083333333333},
    "scaled": {"d1": 1.0, "d2": 0.6134453781512605},
    "distance": 0.6039870422635093,
}


def make_problem():
    return ProblemStatement(
        current_situation="sellers cannot see their performance",
        desired_situation="sellers get insight and grow trade volume",
        gap_quantification="improve seller trade volume by 15%",
        candidate_solutions=("seller performance dashboard",),
        trigger="many sellers lag behind",
    )


@pytest.fixture
def problem():
    return make_problem()


def random_instance(rng: random.Random, k_max=3, n_max=4, m_max=3):
    """Random valid panel: nonzero sheets, per-analyst nonzero columns."""
    k = rng.randint(1, k_max)
    n = rng.randint(2, n_max)
    m = rng.randint(1, m_max)
    analysts = [f"a{i}" for i in range(1, k + 1)]
    sources = [f"d{i}" for i in range(1, n + 1)]
    criteria = [f"c{i}" for i in range(1, m + 1)]

    sheets = []
    for a in analysts:
        scores = {c: rng.randint(0, 5) for c in criteria}
        if all(v == 0 for v in scores.values()):
            scores[rng.choice(criteria)] = rng.randint(1, 5)
        sheets.append(CriterionScoreSheet(a, scores))

    matrices = []
    for a in analysts:
        cells = {}
        for c in criteria:
            column = [rng.randint(0, 5) for _ in sources]
            if all(v == 0 for v in column):
                column[rng.randrange(n)] = rng.randint(1, 5)
            for d, v in zip(sources, column):
                cells[(d, c)] = v
        matrices.append(SourceScoreMatrix(a, cells))
    return analysts, sources, criteria, sheets, matrices


def make_catalog_items(criteria_ids, source_ids):
    criteria = [Criterion(c, name=c) for c in criteria_ids]
    sources = [DataSource(d, name=d, category="other") for d in source_ids]
    return criteria, sources
