"""Domain types for collaborative source ranking sessions.

Pure value types plus invariant validation. All computation lives in
:mod:`sourcerank.engine` and :mod:`sourcerank.discrepancy`; persistence
in :mod:`sourcerank.store`.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Optional, Union

SCHEMA_VERSION = 1

SCALE_MIN = 0
SCALE_MAX = 5

# Soft capacity limits; configuration, not semantics.
MAX_ANALYSTS = 64
MAX_CRITERIA = 256
MAX_SOURCES = 1024

#: Sentinel used as analyst_id for group-level vectors/matrices.
GROUP = "__group__"

SOURCE_CATEGORIES = (
    "internal-stakeholder",
    "external-stakeholder",
    "analytics",
    "report",
    "environment",
    "other",
)

SESSION_STATES = ("drafting", "voting", "weighting", "scoring", "computed", "closed")

CAUSE_LABELS = ("mistake", "misunderstanding", "different-perspective", "unresolved")


class _Missing:
    """Explicit marker for a cell the analyst did not score.

    Distinct from a literal 0, which means "does not favorably
    contribute". A missing cell must be imputed (or rejected) before any
    ranking computation.
    """

    _instance: Optional["_Missing"] = None

    def __new__(cls) -> "_Missing":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __deepcopy__(self, memo: dict) -> "_Missing":
        return self

    def __copy__(self) -> "_Missing":
        return self


MISSING = _Missing()

CellValue = Union[int, float, _Missing]


class ModelError(Exception):
    """Raised when a value object cannot be constructed at all."""


@dataclass(frozen=True)
class Violation:
    """One broken invariant, reported as data rather than an exception."""

    kind: str
    entity_id: str
    message: str


@dataclass(frozen=True)
class ProblemStatement:
    current_situation: str
    desired_situation: str
    gap_quantification: str
    candidate_solutions: tuple[str, ...] = ()
    trigger: str = ""

    def violations(self) -> list[Violation]:
        out = []
        for name in ("current_situation", "desired_situation", "gap_quantification"):
            if not getattr(self, name).strip():
                out.append(Violation("EmptyField", "problem", f"{name} must be non-empty"))
        if not self.candidate_solutions or not any(s.strip() for s in self.candidate_solutions):
            out.append(
                Violation("EmptyField", "problem", "at least one candidate solution required")
            )
        return out


@dataclass(frozen=True)
class Analyst:
    id: str
    display_name: str
    role_label: str = ""


@dataclass(frozen=True)
class Criterion:
    id: str
    name: str
    category: str = ""
    description: str = ""


@dataclass(frozen=True)
class DataSource:
    id: str
    name: str
    category: str = "other"
    description: str = ""


def check_score(value: Any) -> int:
    """Validate an elicited ordinal score, returning it as an int."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise ModelError(f"score must be an integer, got {value!r}")
    if not SCALE_MIN <= value <= SCALE_MAX:
        raise ModelError(f"score {value} outside [{SCALE_MIN}, {SCALE_MAX}]")
    return value


@dataclass(frozen=True)
class CriterionBallot:
    """Binary relevant/not-relevant votes of one analyst over all criteria."""

    analyst_id: str
    votes: dict[str, int]

    def violations(self, criterion_ids: set[str]) -> list[Violation]:
        out = []
        if set(self.votes) != criterion_ids:
            out.append(
                Violation(
                    "CriterionSetMismatch",
                    self.analyst_id,
                    "ballot must cover exactly the session's criteria",
                )
            )
        for cid, v in self.votes.items():
            if v not in (0, 1):
                out.append(Violation("NonBinaryVote", self.analyst_id, f"vote for {cid} is {v!r}"))
        return out


@dataclass(frozen=True)
class CriterionScoreSheet:
    """One analyst's 0-5 relevance scores over the shortlisted criteria."""

    analyst_id: str
    scores: dict[str, int]

    def violations(self, criterion_ids: set[str]) -> list[Violation]:
        out = []
        if set(self.scores) != criterion_ids:
            out.append(
                Violation(
                    "CriterionSetMismatch",
                    self.analyst_id,
                    "sheet must cover exactly the shortlisted criteria",
                )
            )
        for cid, v in self.scores.items():
            if not isinstance(v, int) or isinstance(v, bool) or not SCALE_MIN <= v <= SCALE_MAX:
                out.append(Violation("OutOfScale", self.analyst_id, f"score for {cid} is {v!r}"))
        if self.scores and all(v == 0 for v in self.scores.values()):
            out.append(
                Violation(
                    "ZeroSheet",
                    self.analyst_id,
                    "all-zero sheet has no defined max-normalization",
                )
            )
        return out


@dataclass(frozen=True)
class SourceScoreMatrix:
    """One analyst's source-vs-criterion scores; cells may be MISSING.

    Keys must cover exactly sources x shortlisted criteria. Imputed
    cells become real-valued, hence the float in the value union.
    """

    analyst_id: str
    cells: dict[tuple[str, str], CellValue]

    def violations(self, source_ids: set[str], criterion_ids: set[str]) -> list[Violation]:
        out = []
        expected = {(d, c) for d in source_ids for c in criterion_ids}
        if set(self.cells) != expected:
            out.append(
                Violation(
                    "CellSetMismatch",
                    self.analyst_id,
                    "matrix must cover exactly sources x shortlisted criteria",
                )
            )
        for key, v in self.cells.items():
            if v is MISSING:
                continue
            if isinstance(v, bool):
                out.append(Violation("OutOfScale", self.analyst_id, f"cell {key} is {v!r}"))
            elif isinstance(v, int):
                if not SCALE_MIN <= v <= SCALE_MAX:
                    out.append(Violation("OutOfScale", self.analyst_id, f"cell {key} is {v!r}"))
            elif isinstance(v, float):
                # imputed mean; still bounded by the scale
                if not SCALE_MIN <= v <= SCALE_MAX:
                    out.append(Violation("OutOfScale", self.analyst_id, f"cell {key} is {v!r}"))
            else:
                out.append(Violation("BadCell", self.analyst_id, f"cell {key} is {v!r}"))
        return out

    def missing_cells(self) -> list[tuple[str, str]]:
        return [k for k, v in self.cells.items() if v is MISSING]


@dataclass(frozen=True)
class MethodConfig:
    normalization: str = "sum"  # "sum" | "max"
    vote_threshold_policy: str = "strict-majority"  # | "at-least" | "accept-all"
    at_least_t: int = 1
    scale_final: bool = True
    missing_value_policy: str = "impute-analyst-average"  # | "reject"
    quorum: str | int = "all"

    def violations(self, analyst_count: int | None = None) -> list[Violation]:
        out = []
        if self.normalization not in ("sum", "max"):
            out.append(Violation("BadConfig", "config", f"normalization {self.normalization!r}"))
        if self.vote_threshold_policy not in ("strict-majority", "at-least", "accept-all"):
            out.append(
                Violation("BadConfig", "config", f"policy {self.vote_threshold_policy!r}")
            )
        if self.vote_threshold_policy == "at-least":
            hi = analyst_count if analyst_count is not None else MAX_ANALYSTS
            if not 1 <= self.at_least_t <= hi:
                out.append(
                    Violation("BadConfig", "config", f"at_least_t {self.at_least_t} not in [1, k]")
                )
        if self.missing_value_policy not in ("impute-analyst-average", "reject"):
            out.append(
                Violation("BadConfig", "config", f"missing policy {self.missing_value_policy!r}")
            )
        if self.quorum != "all" and (not isinstance(self.quorum, int) or self.quorum < 1):
            out.append(Violation("BadConfig", "config", f"quorum {self.quorum!r}"))
        return out


@dataclass
class Round:
    """One complete pass: ballots, sheets, matrices, computed result.

    Rounds are append-only; a completed round (result present) is never
    revised. The shortlist is fixed when voting closes and copied
    forward into consensus rounds.
    """

    index: int
    shortlist: Optional[list[str]] = None
    ballots: list[CriterionBallot] = field(default_factory=list)
    sheets: list[CriterionScoreSheet] = field(default_factory=list)
    matrices: list[SourceScoreMatrix] = field(default_factory=list)
    result: Optional[dict] = None  # serialized RankingResult
    notes: str = ""

    def completed(self) -> bool:
        return self.result is not None


@dataclass
class Session:
    id: str
    problem: ProblemStatement
    analysts: list[Analyst] = field(default_factory=list)
    criteria: list[Criterion] = field(default_factory=list)
    sources: list[DataSource] = field(default_factory=list)
    config: MethodConfig = field(default_factory=MethodConfig)
    rounds: list[Round] = field(default_factory=list)
    state: str = "drafting"

    def analyst_ids(self) -> set[str]:
        return {a.id for a in self.analysts}

    def criterion_ids(self) -> set[str]:
        return {c.id for c in self.criteria}

    def source_ids(self) -> set[str]:
        return {d.id for d in self.sources}

    def current_round(self) -> Round:
        if not self.rounds:
            raise ModelError("session has no rounds")
        return self.rounds[-1]


_STATE_TRANSITIONS = {
    "drafting": {"voting", "closed"},
    "voting": {"weighting", "closed"},
    "weighting": {"scoring", "closed"},
    "scoring": {"computed", "closed"},
    "computed": {"scoring", "closed"},
    "closed": set(),
}


def legal_transition(current: str, target: str) -> bool:
    return target in _STATE_TRANSITIONS.get(current, set())


def _dup_ids(items) -> list[str]:
    seen, dups = set(), []
    for item in items:
        if item.id in seen and item.id not in dups:
            dups.append(item.id)
        seen.add(item.id)
    return dups


def validate_session(session: Session) -> list[Violation]:
    """Collect every invariant violation; empty list means computable."""
    out: list[Violation] = []
    out.extend(session.problem.violations())
    out.extend(session.config.violations(len(session.analysts)))

    for label, items in (
        ("analyst", session.analysts),
        ("criterion", session.criteria),
        ("source", session.sources),
    ):
        for dup in _dup_ids(items):
            out.append(Violation("DuplicateId", dup, f"duplicate {label} id {dup!r}"))

    for c in session.criteria:
        if not c.name.strip():
            out.append(Violation("EmptyField", c.id, "criterion name must be non-empty"))
    for d in session.sources:
        if d.category not in SOURCE_CATEGORIES:
            out.append(Violation("BadCategory", d.id, f"unknown source category {d.category!r}"))

    if session.state not in SESSION_STATES:
        out.append(Violation("BadState", session.id, f"unknown state {session.state!r}"))
    if len(session.analysts) > MAX_ANALYSTS:
        out.append(Violation("TooMany", session.id, f"more than {MAX_ANALYSTS} analysts"))
    if len(session.criteria) > MAX_CRITERIA:
        out.append(Violation("TooMany", session.id, f"more than {MAX_CRITERIA} criteria"))
    if len(session.sources) > MAX_SOURCES:
        out.append(Violation("TooMany", session.id, f"more than {MAX_SOURCES} sources"))

    analyst_ids = session.analyst_ids()
    all_criteria = session.criterion_ids()
    source_ids = session.source_ids()

    for rnd in session.rounds:
        shortlist = set(rnd.shortlist) if rnd.shortlist is not None else all_criteria
        for group_name, submissions in (
            ("ballot", rnd.ballots),
            ("sheet", rnd.sheets),
            ("matrix", rnd.matrices),
        ):
            seen = set()
            for sub in submissions:
                if sub.analyst_id not in analyst_ids:
                    out.append(
                        Violation(
                            "UnknownAnalyst", sub.analyst_id, f"{group_name} from unknown analyst"
                        )
                    )
                if sub.analyst_id in seen:
                    out.append(
                        Violation(
                            "DuplicateSubmission",
                            sub.analyst_id,
                            f"more than one {group_name} per analyst in round {rnd.index}",
                        )
                    )
                seen.add(sub.analyst_id)
        for ballot in rnd.ballots:
            out.extend(ballot.violations(all_criteria))
        for sheet in rnd.sheets:
            out.extend(sheet.violations(shortlist))
        for matrix in rnd.matrices:
            out.extend(matrix.violations(source_ids, shortlist))

        # a criterion column must be scorable by at least one analyst
        if rnd.matrices and len(rnd.matrices) == len(session.analysts):
            for cid in sorted(shortlist):
                col_values = [
                    m.cells.get((did, cid))
                    for m in rnd.matrices
                    for did in source_ids
                ]
                present = [v for v in col_values if v is not MISSING and v is not None]
                if present and all(v == 0 for v in present):
                    out.append(
                        Violation(
                            "ZeroColumn",
                            cid,
                            f"criterion {cid} has no positive score across the panel",
                        )
                    )
    return out


# ---------------------------------------------------------------------------
# Serialization


def _problem_to_dict(p: ProblemStatement) -> dict:
    return {
        "current_situation": p.current_situation,
        "desired_situation": p.desired_situation,
        "gap_quantification": p.gap_quantification,
        "candidate_solutions": list(p.candidate_solutions),
        "trigger": p.trigger,
    }


def _problem_from_dict(d: dict) -> ProblemStatement:
    return ProblemStatement(
        current_situation=d["current_situation"],
        desired_situation=d["desired_situation"],
        gap_quantification=d["gap_quantification"],
        candidate_solutions=tuple(d.get("candidate_solutions", ())),
        trigger=d.get("trigger", ""),
    )


def _matrix_to_dict(m: SourceScoreMatrix) -> dict:
    cells: dict[str, dict[str, Any]] = {}
    for (did, cid), v in m.cells.items():
        cells.setdefault(did, {})[cid] = None if v is MISSING else v
    return {"analyst_id": m.analyst_id, "cells": cells}


def _matrix_from_dict(d: dict) -> SourceScoreMatrix:
    cells: dict[tuple[str, str], CellValue] = {}
    for did, row in d["cells"].items():
        for cid, v in row.items():
            cells[(did, cid)] = MISSING if v is None else v
    return SourceScoreMatrix(analyst_id=d["analyst_id"], cells=cells)


def _round_to_dict(r: Round) -> dict:
    return {
        "index": r.index,
        "shortlist": r.shortlist,
        "ballots": [{"analyst_id": b.analyst_id, "votes": b.votes} for b in r.ballots],
        "sheets": [{"analyst_id": s.analyst_id, "scores": s.scores} for s in r.sheets],
        "matrices": [_matrix_to_dict(m) for m in r.matrices],
        "result": r.result,
        "notes": r.notes,
    }


def _round_from_dict(d: dict) -> Round:
    return Round(
        index=d["index"],
        shortlist=d.get("shortlist"),
        ballots=[CriterionBallot(b["analyst_id"], dict(b["votes"])) for b in d.get("ballots", [])],
        sheets=[
            CriterionScoreSheet(s["analyst_id"], dict(s["scores"])) for s in d.get("sheets", [])
        ],
        matrices=[_matrix_from_dict(m) for m in d.get("matrices", [])],
        result=d.get("result"),
        notes=d.get("notes", ""),
    )


def _config_to_dict(c: MethodConfig) -> dict:
    return {
        "normalization": c.normalization,
        "vote_threshold_policy": c.vote_threshold_policy,
        "at_least_t": c.at_least_t,
        "scale_final": c.scale_final,
        "missing_value_policy": c.missing_value_policy,
        "quorum": c.quorum,
    }


def _config_from_dict(d: dict) -> MethodConfig:
    return MethodConfig(
        normalization=d.get("normalization", "sum"),
        vote_threshold_policy=d.get("vote_threshold_policy", "strict-majority"),
        at_least_t=d.get("at_least_t", 1),
        scale_final=d.get("scale_final", True),
        missing_value_policy=d.get("missing_value_policy", "impute-analyst-average"),
        quorum=d.get("quorum", "all"),
    )


def session_to_dict(s: Session) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "id": s.id,
        "problem": _problem_to_dict(s.problem),
        "analysts": [
            {"id": a.id, "display_name": a.display_name, "role_label": a.role_label}
            for a in s.analysts
        ],
        "criteria": [
            {"id": c.id, "name": c.name, "category": c.category, "description": c.description}
            for c in s.criteria
        ],
        "sources": [
            {"id": d.id, "name": d.name, "category": d.category, "description": d.description}
            for d in s.sources
        ],
        "config": _config_to_dict(s.config),
        "rounds": [_round_to_dict(r) for r in s.rounds],
        "state": s.state,
    }


def session_from_dict(d: dict) -> Session:
    if d.get("schema") != SCHEMA_VERSION:
        raise ModelError(f"unsupported schema version {d.get('schema')!r}")
    return Session(
        id=d["id"],
        problem=_problem_from_dict(d["problem"]),
        analysts=[
            Analyst(a["id"], a.get("display_name", ""), a.get("role_label", ""))
            for a in d.get("analysts", [])
        ],
        criteria=[
            Criterion(c["id"], c.get("name", ""), c.get("category", ""), c.get("description", ""))
            for c in d.get("criteria", [])
        ],
        sources=[
            DataSource(x["id"], x.get("name", ""), x.get("category", "other"), x.get("description", ""))
            for x in d.get("sources", [])
        ],
        config=_config_from_dict(d.get("config", {})),
        rounds=[_round_from_dict(r) for r in d.get("rounds", [])],
        state=d.get("state", "drafting"),
    )
