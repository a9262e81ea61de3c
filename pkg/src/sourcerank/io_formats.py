"""Import/export: CSV round files in, JSON results and chart series out.

CSV dialect: comma-separated, UTF-8, first row header, doubled-quote
quoting. An empty cell means MISSING; a literal 0 means "does not
favorably contribute" -- the two are never conflated.
"""

from __future__ import annotations

import csv
import io
import json
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

from .discrepancy import DiscrepancyReport, FuzzyBands
from .engine import NormalizedMatrix, RankingResult, WeightVector
from .model import (
    GROUP,
    MISSING,
    SCHEMA_VERSION,
    CellValue,
    CriterionBallot,
    CriterionScoreSheet,
    Session,
    SourceScoreMatrix,
    _config_from_dict,
    _config_to_dict,
    session_from_dict,
    session_to_dict,
)


class ImportError_(Exception):
    """Base class for round-file import failures."""


class ParseError(ImportError_):
    def __init__(self, file: str, line: int, column: int, reason: str):
        super().__init__(f"{file}:{line}:{column}: {reason}")
        self.file = file
        self.line = line
        self.column = column
        self.reason = reason


class OutOfScaleValueError(ParseError):
    def __init__(self, file: str, line: int, column: int, value: str):
        super().__init__(file, line, column, f"value {value!r} outside the 0-5 scale")
        self.value = value


class InconsistentAnalystsError(ImportError_):
    pass


# ---------------------------------------------------------------------------
# Canonical JSON with 12-significant-digit reals


def format_real(x: float) -> str:
    """Render a real with 12 significant digits, always float-typed."""
    s = format(float(x), ".12g")
    if "e" not in s and "E" not in s and "." not in s and s not in ("inf", "-inf", "nan"):
        s += ".0"
    return s


def _canon(obj, out: list[str]) -> None:
    if obj is None or obj is True or obj is False:
        out.append(json.dumps(obj))
    elif isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, float):
        out.append(format_real(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k), ensure_ascii=False))
            out.append(":")
            _canon(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _canon(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj) -> str:
    """Deterministic JSON text: insertion order kept, reals at 12 digits."""
    out: list[str] = []
    _canon(obj, out)
    return "".join(out)


# ---------------------------------------------------------------------------
# RankingResult / DiscrepancyReport serialization


def result_to_dict(result: RankingResult) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "config": _config_to_dict(result.config_snapshot),
        "analysts": result.analyst_ids(),
        "sources": result.source_ids(),
        "criteria": result.criterion_ids(),
        "weights": {wv.analyst_id: wv.weights for wv in result.weights_used},
        "group_weights": result.group_weights.weights,
        "normalized_matrices": {
            m.analyst_id: {
                "sources": list(m.source_ids),
                "criteria": list(m.criterion_ids),
                "values": [list(row) for row in m.values],
            }
            for m in result.normalized_matrices
        },
        "per_analyst": result.per_analyst,
        "group": result.group,
        "group_scaled": result.group_scaled,
        "degenerate": result.degenerate,
        "imputed_cells": {a: [list(c) for c in cells] for a, cells in result.imputed_cells.items()},
    }


def result_from_dict(d: dict) -> RankingResult:
    matrices = [
        NormalizedMatrix(
            analyst_id=a,
            source_ids=tuple(m["sources"]),
            criterion_ids=tuple(m["criteria"]),
            values=tuple(tuple(float(x) for x in row) for row in m["values"]),
        )
        for a, m in d["normalized_matrices"].items()
    ]
    return RankingResult(
        per_analyst={a: {s: float(v) for s, v in row.items()} for a, row in d["per_analyst"].items()},
        group={s: float(v) for s, v in d["group"].items()},
        group_scaled={s: float(v) for s, v in d["group_scaled"].items()},
        weights_used=[
            WeightVector(a, {c: float(v) for c, v in w.items()}) for a, w in d["weights"].items()
        ],
        group_weights=WeightVector(GROUP, {c: float(v) for c, v in d["group_weights"].items()}),
        normalized_matrices=matrices,
        config_snapshot=_config_from_dict(d["config"]),
        degenerate=d.get("degenerate", False),
        imputed_cells={
            a: [tuple(c) for c in cells] for a, cells in d.get("imputed_cells", {}).items()
        },
    )


def report_to_dict(report: DiscrepancyReport) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "pairwise_distances": [
            {"a": a, "b": b, "distance": v}
            for (a, b), v in sorted(report.pairwise_distances.items())
            if a < b
        ],
        "per_source_spread": {
            d: {"spread": s, "class": c} for d, (s, c) in report.per_source_spread.items()
        },
        "per_criterion_breakdown": {
            cid: {
                "analyst_columns": bd.analyst_columns,
                "group_column": bd.group_column,
                "per_source_delta": bd.per_source_delta,
                "per_source_class": bd.per_source_class,
            }
            for cid, bd in report.per_criterion_breakdown.items()
        },
        "weight_breakdown": {
            "analyst_weights": report.weight_breakdown.analyst_weights,
            "group_weights": report.weight_breakdown.group_weights,
            "per_criterion_delta": report.weight_breakdown.per_criterion_delta,
            "per_criterion_class": report.weight_breakdown.per_criterion_class,
            "own_weight_ranking": report.weight_breakdown.own_weight_ranking,
            "group_weight_ranking": report.weight_breakdown.group_weight_ranking,
        },
        "cause_annotations": report.cause_annotations,
    }


# ---------------------------------------------------------------------------
# Chart series (labels + per-analyst arrays + group array)


def ranking_chart_series(result: RankingResult, bands: FuzzyBands = FuzzyBands()) -> dict:
    sources = result.source_ids()
    return {
        "kind": "ranking",
        "labels": sources,
        "series": [
            {"name": a, "values": [result.per_analyst[a][d] for d in sources]}
            for a in result.analyst_ids()
        ],
        "group": [result.group_scaled[d] for d in sources],
        "bands": {"low_cut": bands.low_cut, "high_cut": bands.high_cut},
    }


def weight_chart_series(result: RankingResult, bands: FuzzyBands = FuzzyBands()) -> dict:
    criteria = result.criterion_ids()
    return {
        "kind": "weights",
        "labels": criteria,
        "series": [
            {"name": wv.analyst_id, "values": [wv.weights[c] for c in criteria]}
            for wv in result.weights_used
        ],
        "group": [result.group_weights.weights[c] for c in criteria],
        "bands": {"low_cut": bands.low_cut, "high_cut": bands.high_cut},
    }


def criterion_chart_series(
    result: RankingResult, criterion_id: str, bands: FuzzyBands = FuzzyBands()
) -> dict:
    from .discrepancy import per_criterion_drilldown

    bd = per_criterion_drilldown(result, criterion_id, bands)
    sources = list(bd.group_column)
    return {
        "kind": "criterion",
        "criterion": criterion_id,
        "labels": sources,
        "series": [
            {"name": a, "values": [col[d] for d in sources]}
            for a, col in bd.analyst_columns.items()
        ],
        "group": [bd.group_column[d] for d in sources],
        "bands": {"low_cut": bands.low_cut, "high_cut": bands.high_cut},
    }


def convergence_chart_series(series: list[tuple[int, float]]) -> dict:
    return {
        "kind": "convergence",
        "labels": [idx for idx, _ in series],
        "series": [{"name": "mean pairwise distance", "values": [v for _, v in series]}],
        "group": [v for _, v in series],
        "bands": None,
    }


# ---------------------------------------------------------------------------
# CSV round files


@dataclass
class RoundInputs:
    """Typed content of one round's CSV files."""

    analyst_ids: list[str]
    criterion_ids: list[str]
    source_ids: list[str]
    ballots: list[CriterionBallot] = field(default_factory=list)
    sheets: list[CriterionScoreSheet] = field(default_factory=list)
    matrices: list[SourceScoreMatrix] = field(default_factory=list)


def _read_rows(path: Path) -> list[list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.reader(fh)]


def _check_header(rows: list[list[str]], path: Path, first_col: str) -> list[str]:
    if not rows or len(rows[0]) < 2:
        raise ParseError(path.name, 1, 1, f"expected header '{first_col},<name>,...'")
    header = rows[0]
    names = [h.strip() for h in header[1:]]
    if any(not n for n in names):
        raise ParseError(path.name, 1, 2 + names.index(""), "empty column name")
    if len(set(names)) != len(names):
        raise ParseError(path.name, 1, 1, "duplicate column names")
    return names


def _parse_score(cell: str, path: Path, line: int, col: int, *, binary: bool = False,
                 allow_missing: bool = False) -> CellValue:
    text = cell.strip()
    if text == "":
        if allow_missing:
            return MISSING
        raise ParseError(path.name, line, col, "empty cell not allowed here")
    try:
        value = int(text)
    except ValueError:
        raise ParseError(path.name, line, col, f"not an integer: {text!r}") from None
    if binary:
        if value not in (0, 1):
            raise ParseError(path.name, line, col, f"vote must be 0 or 1, got {value}")
    elif not 0 <= value <= 5:
        raise OutOfScaleValueError(path.name, line, col, text)
    return value


def read_votes_csv(path: Path) -> tuple[list[CriterionBallot], list[str]]:
    rows = _read_rows(path)
    criteria = _check_header(rows, path, "analyst")
    ballots = []
    for li, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(criteria) + 1:
            raise ParseError(path.name, li, 1, f"expected {len(criteria) + 1} cells, got {len(row)}")
        analyst = row[0].strip()
        if not analyst:
            raise ParseError(path.name, li, 1, "empty analyst id")
        votes = {
            c: _parse_score(row[j + 1], path, li, j + 2, binary=True)
            for j, c in enumerate(criteria)
        }
        ballots.append(CriterionBallot(analyst, votes))
    return ballots, criteria


def read_scores_csv(path: Path) -> tuple[list[CriterionScoreSheet], list[str]]:
    rows = _read_rows(path)
    criteria = _check_header(rows, path, "analyst")
    sheets = []
    for li, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(criteria) + 1:
            raise ParseError(path.name, li, 1, f"expected {len(criteria) + 1} cells, got {len(row)}")
        analyst = row[0].strip()
        if not analyst:
            raise ParseError(path.name, li, 1, "empty analyst id")
        scores = {
            c: _parse_score(row[j + 1], path, li, j + 2) for j, c in enumerate(criteria)
        }
        sheets.append(CriterionScoreSheet(analyst, scores))
    return sheets, criteria


def read_matrix_csv(path: Path, analyst_id: str) -> tuple[SourceScoreMatrix, list[str], list[str]]:
    rows = _read_rows(path)
    criteria = _check_header(rows, path, "source")
    cells: dict[tuple[str, str], CellValue] = {}
    sources = []
    for li, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(criteria) + 1:
            raise ParseError(path.name, li, 1, f"expected {len(criteria) + 1} cells, got {len(row)}")
        source = row[0].strip()
        if not source:
            raise ParseError(path.name, li, 1, "empty source name")
        if source in sources:
            raise ParseError(path.name, li, 1, f"duplicate source {source!r}")
        sources.append(source)
        for j, c in enumerate(criteria):
            cells[(source, c)] = _parse_score(row[j + 1], path, li, j + 2, allow_missing=True)
    return SourceScoreMatrix(analyst_id, cells), sources, criteria


def import_round(directory: str | Path) -> RoundInputs:
    """Read criteria_votes.csv (optional), criteria_scores.csv and
    matrix_<analyst>.csv files from one directory into typed objects."""
    directory = Path(directory)
    scores_path = directory / "criteria_scores.csv"
    if not scores_path.exists():
        raise ImportError_(f"missing {scores_path.name} in {directory}")
    sheets, criteria = read_scores_csv(scores_path)
    sheet_analysts = [s.analyst_id for s in sheets]

    ballots: list[CriterionBallot] = []
    votes_path = directory / "criteria_votes.csv"
    if votes_path.exists():
        ballots, vote_criteria = read_votes_csv(votes_path)
        if set(vote_criteria) < set(criteria):
            raise ImportError_("criteria_scores.csv names criteria absent from criteria_votes.csv")
        if sorted(b.analyst_id for b in ballots) != sorted(sheet_analysts):
            raise InconsistentAnalystsError("votes and scores files name different analysts")

    matrices = []
    sources: list[str] = []
    for analyst in sheet_analysts:
        m_path = directory / f"matrix_{analyst}.csv"
        if not m_path.exists():
            raise InconsistentAnalystsError(f"no matrix file for analyst {analyst!r}")
        matrix, m_sources, m_criteria = read_matrix_csv(m_path, analyst)
        if set(m_criteria) != set(criteria):
            raise ImportError_(
                f"{m_path.name} criteria differ from criteria_scores.csv"
            )
        if not sources:
            sources = m_sources
        elif set(m_sources) != set(sources):
            raise ImportError_(f"{m_path.name} sources differ from the other matrices")
        matrices.append(matrix)

    extra = {
        p.stem[len("matrix_"):]
        for p in directory.glob("matrix_*.csv")
    } - set(sheet_analysts)
    if extra:
        raise InconsistentAnalystsError(
            f"matrix files for analysts not in criteria_scores.csv: {sorted(extra)}"
        )

    return RoundInputs(
        analyst_ids=sheet_analysts,
        criterion_ids=criteria,
        source_ids=sources,
        ballots=ballots,
        sheets=sheets,
        matrices=matrices,
    )


def restrict_sheets(sheets: list[CriterionScoreSheet], keep: set[str]) -> list[CriterionScoreSheet]:
    return [
        CriterionScoreSheet(s.analyst_id, {c: v for c, v in s.scores.items() if c in keep})
        for s in sheets
    ]


def restrict_matrices(matrices: list[SourceScoreMatrix], keep: set[str]) -> list[SourceScoreMatrix]:
    return [
        SourceScoreMatrix(m.analyst_id, {k: v for k, v in m.cells.items() if k[1] in keep})
        for m in matrices
    ]


def export_result(
    result: RankingResult,
    report: DiscrepancyReport,
    out_dir: str | Path,
    bands: FuzzyBands = FuzzyBands(),
) -> dict[str, Path]:
    """Write result.json, discrepancies.json and chart-series files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}

    def write(name: str, payload: dict) -> None:
        path = out_dir / name
        path.write_text(dumps_canonical(payload) + "\n", encoding="utf-8")
        written[name] = path

    write("result.json", result_to_dict(result))
    write("discrepancies.json", report_to_dict(report))
    write("chart_ranking.json", ranking_chart_series(result, bands))
    write("chart_weights.json", weight_chart_series(result, bands))
    for cid in result.criterion_ids():
        write(f"chart_criterion_{cid}.json", criterion_chart_series(result, cid, bands))
    return written


# ---------------------------------------------------------------------------
# Session bundle (zip of round CSVs + session.json)


def write_bundle(session: Session, round_dir: str | Path, bundle_path: str | Path) -> Path:
    bundle_path = Path(bundle_path)
    round_dir = Path(round_dir)
    with zipfile.ZipFile(bundle_path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("session.json", dumps_canonical(session_to_dict(session)) + "\n")
        for path in sorted(round_dir.glob("*.csv")):
            zf.write(path, path.name)
    return bundle_path


def read_bundle(bundle_path: str | Path, extract_dir: str | Path) -> Session:
    extract_dir = Path(extract_dir)
    extract_dir.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(bundle_path) as zf:
        zf.extractall(extract_dir)
    data = json.loads((extract_dir / "session.json").read_text(encoding="utf-8"))
    return session_from_dict(data)


# ---------------------------------------------------------------------------
# Seed catalogs


CRITERIA_CATALOG = (
    {
        "category": "Benefits in terms of knowledge",
        "high_level": "Level, type of knowledge",
        "detailed": [
            "Domain",
            "Customer needs and wishes",
            "Product technologies or features",
            "Business processes",
            "Laws, regulations, standards",
        ],
    },
    {
        "category": "Benefits in terms of experience",
        "high_level": "Amount, type of experience",
        "detailed": [
            "The product",
            "Similar products",
            "Specific market segments",
            "Domain",
            "Product technologies",
        ],
    },
    {
        "category": "Benefits in terms of financial value",
        "high_level": "Revenue, potential revenue, profit",
        "detailed": ["Customer life-time value", "Price per purchase"],
    },
    {
        "category": "Costs",
        "high_level": "Associated costs, indirect costs",
        "detailed": ["Access", "Establishing access", "Maintaining access"],
    },
    {
        "category": "Penalties",
        "high_level": "Opportunity cost",
        "detailed": [
            "Business",
            "Market",
            "Technical",
            "Financial",
            "Reputation",
            "Dissatisfaction of other stakeholders",
        ],
    },
    {
        "category": "Risks",
        "high_level": "Generic risk",
        "detailed": [
            "Human errors",
            "Technical risks",
            "Implementation risks",
            "Volatility",
            "Business risks",
            "Time",
            "Budget",
            "Project scope",
            "Dependencies",
            "Reputation",
            "Legitimacy",
        ],
    },
    {
        "category": "Temporal context",
        "high_level": "Timing",
        "detailed": [
            "Lead time",
            "Time to access",
            "Timeliness of data",
            "Frequency of access",
        ],
    },
    {
        "category": "Suitability for use",
        "high_level": "Ease of use",
        "detailed": [
            "Ease of access",
            "Mutual trust",
            "Understandability",
            "Granularity",
            "Analyzability",
            "Accuracy",
            "Overhead",
        ],
    },
    {
        "category": "Behavioral",
        "high_level": "Suitability for collaboration",
        "detailed": [
            "Availability",
            "Interest to contribute",
            "Commitment",
            "Volatility",
            "Trustworthiness",
            "Willingness to experiment",
            "Capacity to volunteer resources for collaboration",
            "Power",
            "Leverage",
        ],
    },
)

SOURCES_CATALOG = (
    {
        "category": "Internal stakeholders",
        "high_level": "Engineers, product managers, business stakeholders",
        "detailed": [
            "Product engineers",
            "Architects",
            "Customer service representatives",
            "Sales representatives",
            "Managers",
            "Company executives",
        ],
    },
    {
        "category": "External stakeholders",
        "high_level": "Users",
        "detailed": [
            "Premium customers",
            "Freemium customers",
            "Prospects",
            "End users",
            "Partners",
            "Competitors",
            "Suppliers",
            "Lawmakers",
            "Regulators",
        ],
    },
    {
        "category": "Analytics",
        "high_level": "Product usage data",
        "detailed": ["Telemetry data", "User data", "User behavior analysis"],
    },
    {
        "category": "Reports",
        "high_level": "Market research",
        "detailed": [
            "Market analysis",
            "Public surveys",
            "Trends",
            "Analysis of similar products",
        ],
    },
    {
        "category": "Environment",
        "high_level": "Domain knowledge",
        "detailed": [
            "Domain experts",
            "Technology standards",
            "Laws",
            "Regulations",
            "Industry conventions",
            "Opinion leaders",
        ],
    },
)


@dataclass(frozen=True)
class SeedCatalog:
    criteria: tuple = CRITERIA_CATALOG
    sources: tuple = SOURCES_CATALOG


def load_seed_catalog() -> SeedCatalog:
    """Return the built-in bootstrap catalogs (immutable)."""
    return SeedCatalog()
