"""File-backed session persistence with optimistic concurrency.

One JSON document per session under ``<data-dir>/sessions/``; every
accepted write bumps a monotonically increasing revision. Writers check
the revision they read (compare-and-swap); a mismatch is a
RevisionConflict and the caller re-reads and retries. Completed rounds
are never mutated.
"""

from __future__ import annotations

import copy
import os
import tempfile
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import engine
from .io_formats import dumps_canonical, result_to_dict
from .model import (
    Analyst,
    CriterionBallot,
    CriterionScoreSheet,
    Criterion,
    DataSource,
    MethodConfig,
    ProblemStatement,
    Round,
    SCHEMA_VERSION,
    Session,
    SourceScoreMatrix,
    Violation,
    legal_transition,
    session_from_dict,
    session_to_dict,
)
import json


class StoreError(Exception):
    pass


class UnknownSessionError(StoreError):
    pass


class RevisionConflictError(StoreError):
    def __init__(self, expected: int, actual: int):
        super().__init__(f"expected revision {expected}, store has {actual}")
        self.expected = expected
        self.actual = actual


class WrongStateError(StoreError):
    def __init__(self, state: str, wanted: str):
        super().__init__(f"session is in state {state!r}, operation requires {wanted!r}")
        self.state = state
        self.wanted = wanted


class IllegalTransitionError(StoreError):
    pass


class IncompleteSubmissionsError(StoreError):
    def __init__(self, missing: list[str]):
        super().__init__(f"missing submissions from analysts: {', '.join(sorted(missing))}")
        self.missing = sorted(missing)


class SubmissionInvalidError(StoreError):
    def __init__(self, violations: list[Violation]):
        super().__init__("; ".join(f"{v.kind}({v.entity_id}): {v.message}" for v in violations))
        self.violations = violations


@dataclass
class CatalogEdit:
    """Full replacement of the criteria or sources catalog (PUT semantics)."""

    kind: str  # "criteria" | "sources"
    items: list


Submission = CriterionBallot | CriterionScoreSheet | SourceScoreMatrix | CatalogEdit

_SUBMISSION_STATE = {
    CriterionBallot: "voting",
    CriterionScoreSheet: "weighting",
    SourceScoreMatrix: "scoring",
    CatalogEdit: "drafting",
}


class SessionStore:
    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)

    # -- record I/O ---------------------------------------------------------

    def _path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.json"

    def _read(self, session_id: str) -> dict:
        path = self._path(session_id)
        if not path.exists():
            raise UnknownSessionError(session_id)
        return json.loads(path.read_text(encoding="utf-8"))

    def _write(self, session_id: str, record: dict) -> None:
        # tmp file + atomic rename: a reader sees the old or the new
        # record, never a torn one
        path = self._path(session_id)
        fd, tmp = tempfile.mkstemp(dir=self.sessions_dir, prefix=f".{session_id}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(dumps_canonical(record) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def _record(self, session: Session, revision: int) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "session_id": session.id,
            "revision": revision,
            "updated_at": datetime.now(timezone.utc).isoformat(),
            "payload": session_to_dict(session),
        }

    # -- public API ---------------------------------------------------------

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self.sessions_dir.glob("*.json"))

    def create_session(
        self, problem: ProblemStatement, config: MethodConfig | None = None
    ) -> str:
        violations = problem.violations()
        if violations:
            raise SubmissionInvalidError(violations)
        config = config or MethodConfig()
        bad = config.violations()
        if bad:
            raise SubmissionInvalidError(bad)
        session_id = uuid.uuid4().hex
        session = Session(id=session_id, problem=problem, config=config)
        self._write(session_id, self._record(session, 1))
        return session_id

    def load(self, session_id: str) -> tuple[Session, int]:
        record = self._read(session_id)
        return session_from_dict(record["payload"]), record["revision"]

    def register_analyst(
        self, session_id: str, expected_revision: int, analyst: Analyst
    ) -> int:
        session, revision = self.load(session_id)
        self._check_revision(expected_revision, revision)
        if session.state != "drafting":
            raise WrongStateError(session.state, "drafting")
        if analyst.id in session.analyst_ids():
            raise SubmissionInvalidError(
                [Violation("DuplicateId", analyst.id, "analyst id already registered")]
            )
        session.analysts.append(analyst)
        new_rev = revision + 1
        self._write(session_id, self._record(session, new_rev))
        return new_rev

    def submit(
        self, session_id: str, expected_revision: int, submission: Submission
    ) -> tuple[int, bool]:
        """Apply one submission atomically. Returns (revision, changed).

        Re-submitting an artifact identical to the stored one is a no-op
        that reports the current revision with changed=False.
        """
        session, revision = self.load(session_id)
        self._check_revision(expected_revision, revision)

        wanted = _SUBMISSION_STATE[type(submission)]
        if session.state != wanted:
            raise WrongStateError(session.state, wanted)

        if isinstance(submission, CatalogEdit):
            self._apply_catalog_edit(session, submission)
        else:
            changed = self._apply_artifact(session, submission)
            if not changed:
                return revision, False

        new_rev = revision + 1
        self._write(session_id, self._record(session, new_rev))
        return new_rev, True

    def advance_state(self, session_id: str, target_state: str) -> tuple[Session, int]:
        session, revision = self.load(session_id)
        if not legal_transition(session.state, target_state):
            raise IllegalTransitionError(f"{session.state} -> {target_state}")

        if target_state == "voting":
            self._require_catalogs(session)
            session.rounds.append(Round(index=0))
        elif target_state == "weighting":
            self._close_voting(session)
        elif target_state == "scoring":
            if session.state == "computed":
                prior = session.current_round()
                # weights carry over; analysts only re-score the matrices
                session.rounds.append(
                    Round(
                        index=prior.index + 1,
                        shortlist=prior.shortlist,
                        sheets=[copy.deepcopy(s) for s in prior.sheets],
                    )
                )
            else:
                self._check_quorum(session, [s.analyst_id for s in session.current_round().sheets])
        elif target_state == "computed":
            self._compute_current_round(session)
        elif target_state == "closed":
            pass

        session.state = target_state
        new_rev = revision + 1
        self._write(session_id, self._record(session, new_rev))
        return session, new_rev

    # -- helpers ------------------------------------------------------------

    @staticmethod
    def _check_revision(expected: int, actual: int) -> None:
        if expected != actual:
            raise RevisionConflictError(expected, actual)

    @staticmethod
    def _require_catalogs(session: Session) -> None:
        missing = []
        if not session.analysts:
            missing.append("analysts")
        if not session.criteria:
            missing.append("criteria")
        if not session.sources:
            missing.append("sources")
        if missing:
            raise IllegalTransitionError(f"cannot open voting without: {', '.join(missing)}")

    def _apply_catalog_edit(self, session: Session, edit: CatalogEdit) -> None:
        if edit.kind == "criteria":
            items = [i for i in edit.items if isinstance(i, Criterion)]
            if len(items) != len(edit.items):
                raise SubmissionInvalidError(
                    [Violation("BadItem", "criteria", "catalog items must be criteria")]
                )
            ids = [c.id for c in items]
            if len(set(ids)) != len(ids):
                raise SubmissionInvalidError(
                    [Violation("DuplicateId", "criteria", "duplicate criterion ids")]
                )
            session.criteria = items
        elif edit.kind == "sources":
            items = [i for i in edit.items if isinstance(i, DataSource)]
            if len(items) != len(edit.items):
                raise SubmissionInvalidError(
                    [Violation("BadItem", "sources", "catalog items must be data sources")]
                )
            ids = [d.id for d in items]
            if len(set(ids)) != len(ids):
                raise SubmissionInvalidError(
                    [Violation("DuplicateId", "sources", "duplicate source ids")]
                )
            session.sources = items
        else:
            raise SubmissionInvalidError(
                [Violation("BadItem", edit.kind, "unknown catalog kind")]
            )

    def _apply_artifact(self, session: Session, artifact) -> bool:
        rnd = session.current_round()
        if rnd.completed():
            raise WrongStateError(session.state, "an open round")
        if artifact.analyst_id not in session.analyst_ids():
            raise SubmissionInvalidError(
                [Violation("UnknownAnalyst", artifact.analyst_id, "analyst not registered")]
            )

        shortlist = set(rnd.shortlist) if rnd.shortlist is not None else session.criterion_ids()
        if isinstance(artifact, CriterionBallot):
            violations = artifact.violations(session.criterion_ids())
            bucket = rnd.ballots
        elif isinstance(artifact, CriterionScoreSheet):
            violations = artifact.violations(shortlist)
            bucket = rnd.sheets
        else:
            violations = artifact.violations(session.source_ids(), shortlist)
            bucket = rnd.matrices
        if violations:
            raise SubmissionInvalidError(violations)

        for i, existing in enumerate(bucket):
            if existing.analyst_id == artifact.analyst_id:
                if existing == artifact:
                    return False
                bucket[i] = artifact
                return True
        bucket.append(artifact)
        return True

    def _check_quorum(self, session: Session, submitted: list[str]) -> None:
        all_ids = session.analyst_ids()
        if session.config.quorum == "all":
            missing = all_ids - set(submitted)
            if missing:
                raise IncompleteSubmissionsError(sorted(missing))
        else:
            if len(set(submitted)) < int(session.config.quorum):
                missing = all_ids - set(submitted)
                raise IncompleteSubmissionsError(sorted(missing))

    def _close_voting(self, session: Session) -> None:
        rnd = session.current_round()
        policy = session.config.vote_threshold_policy
        if policy == "accept-all" and not rnd.ballots:
            rnd.shortlist = sorted(session.criterion_ids())
            return
        self._check_quorum(session, [b.analyst_id for b in rnd.ballots])
        kept = engine.shortlist_criteria(
            rnd.ballots, policy, len(rnd.ballots), session.config.at_least_t
        )
        rnd.shortlist = sorted(kept)

    def _compute_current_round(self, session: Session) -> None:
        rnd = session.current_round()
        sheet_ids = {s.analyst_id for s in rnd.sheets}
        matrix_ids = {m.analyst_id for m in rnd.matrices}
        self._check_quorum(session, sorted(matrix_ids))
        if not matrix_ids <= sheet_ids:
            raise IncompleteSubmissionsError(sorted(matrix_ids - sheet_ids))
        sheets = [s for s in rnd.sheets if s.analyst_id in matrix_ids]
        shortlist = sorted(rnd.shortlist) if rnd.shortlist else sorted(session.criterion_ids())
        result = engine.compute_ranking(
            sheets,
            rnd.matrices,
            session.config,
            source_ids=sorted(session.source_ids()),
            criterion_ids=shortlist,
        )
        rnd.result = result_to_dict(result)
