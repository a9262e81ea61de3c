"""HTTP API for live workshop sessions.

Resource-oriented JSON routes over the session store. The service never
computes anything itself: all numerics are delegated to the engine and
discrepancy modules via the store. Tokens are bearer secrets; the
facilitator token can advance state and edit catalogs, analyst tokens
can only submit their own artifacts and read results.
"""

from __future__ import annotations

import json
import secrets
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .discrepancy import build_report, mean_pairwise_distance
from .engine import EngineError
from .io_formats import (
    convergence_chart_series,
    criterion_chart_series,
    dumps_canonical,
    report_to_dict,
    result_from_dict,
)
from .model import (
    Analyst,
    Criterion,
    CriterionBallot,
    CriterionScoreSheet,
    DataSource,
    MISSING,
    SourceScoreMatrix,
    _config_from_dict,
    _problem_from_dict,
    session_to_dict,
)
from .store import (
    CatalogEdit,
    IllegalTransitionError,
    IncompleteSubmissionsError,
    RevisionConflictError,
    SessionStore,
    StoreError,
    SubmissionInvalidError,
    UnknownSessionError,
    WrongStateError,
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: list | None = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or []


class TokenRegistry:
    """Per-session bearer secrets, persisted next to the session files."""

    def __init__(self, data_dir: str | Path):
        self.tokens_dir = Path(data_dir) / "tokens"
        self.tokens_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.tokens_dir / f"{session_id}.json"

    def _load(self, session_id: str) -> dict:
        path = self._path(session_id)
        if not path.exists():
            return {"facilitator": None, "analysts": {}}
        return json.loads(path.read_text(encoding="utf-8"))

    def _save(self, session_id: str, data: dict) -> None:
        self._path(session_id).write_text(json.dumps(data), encoding="utf-8")

    def issue_facilitator(self, session_id: str) -> str:
        data = self._load(session_id)
        data["facilitator"] = secrets.token_hex(16)
        self._save(session_id, data)
        return data["facilitator"]

    def issue_analyst(self, session_id: str, analyst_id: str) -> str:
        data = self._load(session_id)
        data["analysts"][analyst_id] = secrets.token_hex(16)
        self._save(session_id, data)
        return data["analysts"][analyst_id]

    def resolve(self, session_id: str, secret: str) -> tuple[str, str | None]:
        """Return (role, analyst_id) for a secret; raises ApiError on miss."""
        data = self._load(session_id)
        if secret and data.get("facilitator") == secret:
            return "facilitator", None
        for aid, tok in data.get("analysts", {}).items():
            if secrets.compare_digest(tok, secret):
                return "analyst", aid
        raise ApiError(401, "bad_token", "unknown or missing bearer token")


def _bearer(request: Request) -> str:
    auth = request.headers.get("authorization", "")
    if not auth.lower().startswith("bearer "):
        raise ApiError(401, "bad_token", "missing Authorization: Bearer header")
    return auth[7:].strip()


def _if_match(request: Request) -> int:
    value = request.headers.get("if-match")
    if value is None:
        raise ApiError(428, "missing_if_match", "If-Match header with the current revision required")
    try:
        return int(value.strip().strip('"'))
    except ValueError:
        raise ApiError(400, "bad_if_match", f"If-Match must be a revision number, got {value!r}")


def _etag(revision: int) -> str:
    return f'"{revision}"'


def _canonical_json(payload: dict, status: int = 200, headers: dict | None = None) -> Response:
    return Response(
        content=dumps_canonical(payload),
        status_code=status,
        media_type="application/json",
        headers=headers or {},
    )


def _matrix_from_wire(analyst_id: str, cells: dict) -> SourceScoreMatrix:
    parsed = {}
    for did, row in cells.items():
        for cid, v in row.items():
            parsed[(did, cid)] = MISSING if v is None else v
    return SourceScoreMatrix(analyst_id, parsed)


def create_app(data_dir: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    store = SessionStore(data_dir)
    tokens = TokenRegistry(data_dir)
    app = FastAPI(title="sourcerank workshop service", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    def translate(exc: Exception) -> ApiError:
        if isinstance(exc, UnknownSessionError):
            return ApiError(404, "unknown_session", str(exc))
        if isinstance(exc, RevisionConflictError):
            return ApiError(409, "revision_conflict", str(exc))
        if isinstance(exc, WrongStateError):
            return ApiError(409, "wrong_state", str(exc))
        if isinstance(exc, IncompleteSubmissionsError):
            return ApiError(409, "incomplete_submissions", str(exc), details=exc.missing)
        if isinstance(exc, IllegalTransitionError):
            return ApiError(409, "illegal_transition", str(exc))
        if isinstance(exc, SubmissionInvalidError):
            details = [
                {"kind": v.kind, "entity_id": v.entity_id, "message": v.message}
                for v in exc.violations
            ]
            return ApiError(422, "invalid_submission", "submission failed validation", details)
        if isinstance(exc, EngineError):
            return ApiError(409, "degenerate_input", str(exc))
        if isinstance(exc, StoreError):
            return ApiError(500, "storage_failure", str(exc))
        raise exc

    def auth(request: Request, session_id: str) -> tuple[str, str | None]:
        return tokens.resolve(session_id, _bearer(request))

    def require_facilitator(request: Request, session_id: str) -> None:
        role, _ = auth(request, session_id)
        if role != "facilitator":
            raise ApiError(403, "forbidden", "facilitator token required")

    def load_or_404(session_id: str):
        try:
            return store.load(session_id)
        except UnknownSessionError as exc:
            raise translate(exc)

    def stored_result(session, round_index: int):
        for rnd in session.rounds:
            if rnd.index == round_index:
                if rnd.result is None:
                    raise ApiError(404, "not_computed", f"round {round_index} has no result yet")
                return rnd.result
        raise ApiError(404, "unknown_round", f"no round {round_index}")

    # -- session lifecycle --------------------------------------------------

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        try:
            problem = _problem_from_dict(body["problem"])
            config = _config_from_dict(body.get("config", {}))
        except (KeyError, TypeError) as exc:
            raise ApiError(422, "bad_request", f"malformed session body: {exc}")
        try:
            session_id = store.create_session(problem, config)
        except StoreError as exc:
            raise translate(exc)
        facilitator_token = tokens.issue_facilitator(session_id)
        return _canonical_json(
            {"session_id": session_id, "revision": 1, "facilitator_token": facilitator_token},
            status=201,
            headers={"ETag": _etag(1)},
        )

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str, request: Request):
        auth(request, session_id)
        session, revision = load_or_404(session_id)
        if request.headers.get("if-none-match") == _etag(revision):
            return Response(status_code=304, headers={"ETag": _etag(revision)})
        return _canonical_json(
            {"revision": revision, "session": session_to_dict(session)},
            headers={"ETag": _etag(revision)},
        )

    @app.post("/sessions/{session_id}/analysts", status_code=201)
    async def register_analyst(session_id: str, request: Request):
        require_facilitator(request, session_id)
        expected = _if_match(request)
        body = await request.json()
        try:
            analyst = Analyst(
                id=body["id"],
                display_name=body.get("display_name", ""),
                role_label=body.get("role_label", ""),
            )
        except KeyError as exc:
            raise ApiError(422, "bad_request", f"missing field {exc}")
        try:
            revision = store.register_analyst(session_id, expected, analyst)
        except StoreError as exc:
            raise translate(exc)
        analyst_token = tokens.issue_analyst(session_id, analyst.id)
        return _canonical_json(
            {"revision": revision, "analyst_id": analyst.id, "analyst_token": analyst_token},
            status=201,
            headers={"ETag": _etag(revision)},
        )

    @app.put("/sessions/{session_id}/criteria")
    async def put_criteria(session_id: str, request: Request):
        require_facilitator(request, session_id)
        expected = _if_match(request)
        body = await request.json()
        items = [
            Criterion(
                id=c["id"],
                name=c.get("name", c["id"]),
                category=c.get("category", ""),
                description=c.get("description", ""),
            )
            for c in body
        ]
        try:
            revision, _ = store.submit(session_id, expected, CatalogEdit("criteria", items))
        except StoreError as exc:
            raise translate(exc)
        return _canonical_json({"revision": revision}, headers={"ETag": _etag(revision)})

    @app.put("/sessions/{session_id}/sources")
    async def put_sources(session_id: str, request: Request):
        require_facilitator(request, session_id)
        expected = _if_match(request)
        body = await request.json()
        items = [
            DataSource(
                id=d["id"],
                name=d.get("name", d["id"]),
                category=d.get("category", "other"),
                description=d.get("description", ""),
            )
            for d in body
        ]
        try:
            revision, _ = store.submit(session_id, expected, CatalogEdit("sources", items))
        except StoreError as exc:
            raise translate(exc)
        return _canonical_json({"revision": revision}, headers={"ETag": _etag(revision)})

    # -- submissions --------------------------------------------------------

    def check_round(session_id: str, round_index: int) -> None:
        session, _ = load_or_404(session_id)
        if not session.rounds or session.current_round().index != round_index:
            raise ApiError(409, "wrong_round", f"round {round_index} is not open for submissions")

    def submit_artifact(request: Request, session_id: str, round_index: int, artifact):
        role, analyst_id = auth(request, session_id)
        if role == "analyst" and analyst_id != artifact.analyst_id:
            raise ApiError(403, "forbidden", "analysts may only submit their own artifacts")
        check_round(session_id, round_index)
        expected = _if_match(request)
        try:
            revision, changed = store.submit(session_id, expected, artifact)
        except StoreError as exc:
            raise translate(exc)
        status = 201 if changed else 200
        return _canonical_json(
            {"revision": revision, "changed": changed},
            status=status,
            headers={"ETag": _etag(revision)},
        )

    @app.post("/sessions/{session_id}/rounds/{round_index}/ballots")
    async def post_ballot(session_id: str, round_index: int, request: Request):
        body = await request.json()
        artifact = CriterionBallot(body["analyst_id"], dict(body["votes"]))
        return submit_artifact(request, session_id, round_index, artifact)

    @app.post("/sessions/{session_id}/rounds/{round_index}/sheets")
    async def post_sheet(session_id: str, round_index: int, request: Request):
        body = await request.json()
        artifact = CriterionScoreSheet(body["analyst_id"], dict(body["scores"]))
        return submit_artifact(request, session_id, round_index, artifact)

    @app.post("/sessions/{session_id}/rounds/{round_index}/matrices")
    async def post_matrix(session_id: str, round_index: int, request: Request):
        body = await request.json()
        artifact = _matrix_from_wire(body["analyst_id"], body["cells"])
        return submit_artifact(request, session_id, round_index, artifact)

    # -- state advancement --------------------------------------------------

    @app.post("/sessions/{session_id}/advance")
    async def advance(session_id: str, request: Request):
        require_facilitator(request, session_id)
        body = await request.json()
        target = body.get("target")
        if not target:
            raise ApiError(422, "bad_request", "body must name a target state")
        try:
            session, revision = store.advance_state(session_id, target)
        except StoreError as exc:
            raise translate(exc)
        payload = {"revision": revision, "state": session.state}
        if target == "computed":
            payload["result"] = session.current_round().result
        return _canonical_json(payload, headers={"ETag": _etag(revision)})

    # -- read models --------------------------------------------------------

    def read_response(request: Request, revision: int, payload: dict) -> Response:
        if request.headers.get("if-none-match") == _etag(revision):
            return Response(status_code=304, headers={"ETag": _etag(revision)})
        return _canonical_json(payload, headers={"ETag": _etag(revision)})

    @app.get("/sessions/{session_id}/rounds/{round_index}/result")
    async def get_result(session_id: str, round_index: int, request: Request):
        auth(request, session_id)
        session, revision = load_or_404(session_id)
        return read_response(request, revision, stored_result(session, round_index))

    @app.get("/sessions/{session_id}/rounds/{round_index}/discrepancies")
    async def get_discrepancies(session_id: str, round_index: int, request: Request):
        auth(request, session_id)
        session, revision = load_or_404(session_id)
        result = result_from_dict(stored_result(session, round_index))
        report = build_report(result)
        return read_response(request, revision, report_to_dict(report))

    @app.get("/sessions/{session_id}/rounds/{round_index}/drilldown")
    async def get_drilldown(session_id: str, round_index: int, request: Request, criterion: str):
        auth(request, session_id)
        session, revision = load_or_404(session_id)
        result = result_from_dict(stored_result(session, round_index))
        if criterion not in result.criterion_ids():
            raise ApiError(404, "unknown_criterion", f"no criterion {criterion!r} in this round")
        return read_response(request, revision, criterion_chart_series(result, criterion))

    @app.get("/sessions/{session_id}/convergence")
    async def get_convergence(session_id: str, request: Request):
        auth(request, session_id)
        session, revision = load_or_404(session_id)
        series = [
            (rnd.index, mean_pairwise_distance(result_from_dict(rnd.result)))
            for rnd in session.rounds
            if rnd.result is not None
        ]
        return read_response(request, revision, convergence_chart_series(series))

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="webapp")

    return app
