"""HTTP session API serving the annotation UI and other clients.

Single-process service over file-backed sessions. Engine errors map onto
statuses by their code: validation 400, state 409, not_found 404,
transport 502, config 500. A rejected request never touches the stored
session file.
"""

from __future__ import annotations

import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..config import SessionConfig, data_dir, session_config_from_dict
from ..core import SamplingPool
from ..data import load_pairs_jsonl, pair_from_dict
from ..errors import PromptLoopError, ValidationError
from ..service import SessionService
from ..session import AnnotationSubmission, SessionState, prompt_preview, session_to_dict
from .schemas import (
    AnnotateRequest,
    AnnotationRecordModel,
    ApiErrorModel,
    CreateSessionRequest,
    CreateSessionResponse,
    EvaluationReportModel,
    HistoryResponse,
    IterateResponse,
    PendingPairModel,
    PromptResponse,
    SessionSnapshot,
    SessionSummary,
)

STATUS_BY_CODE = {
    "validation": 400,
    "state": 409,
    "not_found": 404,
    "transport": 502,
    "config": 500,
}


def _error_response(code: str, message: str, detail=None) -> JSONResponse:
    body = ApiErrorModel(code=code, message=message, detail=detail)
    return JSONResponse(status_code=STATUS_BY_CODE[code], content=body.model_dump())


def _config_from_model(model) -> SessionConfig:
    raw = model.model_dump()
    templates = {k: v for k, v in raw.pop("templates", {}).items() if v is not None}
    if templates:
        raw["templates"] = templates
    return session_config_from_dict(raw)


def _summary(state: SessionState) -> SessionSummary:
    return SessionSummary(
        session_id=state.session_id,
        iteration=state.iteration,
        phase=state.phase,
        demonstration_count=len(state.demonstrations),
        pending_batch=state.pending_batch,
        stop_reason=state.stop_reason,
    )


def _report_model(report) -> EvaluationReportModel:
    return EvaluationReportModel(
        iteration=report.iteration,
        per_example=[(r.pair_id, r.predicted, r.gold) for r in report.per_example],
        true_positives=report.true_positives,
        false_positives=report.false_positives,
        false_negatives=report.false_negatives,
        true_negatives=report.true_negatives,
        unparseable_count=report.unparseable_count,
        accuracy=report.accuracy,
        precision=report.precision,
        recall=report.recall,
        f1=report.f1,
    )


def _load_side(inline, path_value, *, require_gold: bool, what: str) -> SamplingPool:
    if inline is not None and path_value is not None:
        raise ValidationError(f"pass either {what} inline or {what}_path, not both")
    if inline is not None:
        pairs = [pair_from_dict(item.model_dump(exclude_none=True)) for item in inline]
        pool = SamplingPool(pairs)
        if require_gold:
            missing = [pair.id for pair in pool.pairs if pair.gold is None]
            if missing:
                raise ValidationError(f"evaluation pairs missing gold labels: {missing[:5]}")
        return pool
    if path_value is not None:
        return load_pairs_jsonl(Path(path_value), require_gold=require_gold)
    raise ValidationError(f"missing {what}: pass {what} inline or {what}_path")


def create_app(sessions_dir: str | Path | None = None, static_dir: str | Path | None = None) -> FastAPI:
    service = SessionService(data_dir(sessions_dir))
    app = FastAPI(title="promptloop session API", version="0.1.0")

    @app.exception_handler(PromptLoopError)
    async def engine_error_handler(_: Request, exc: PromptLoopError):
        return _error_response(exc.code, exc.message, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def body_error_handler(_: Request, exc: RequestValidationError):
        return _error_response("validation", "invalid request body", exc.errors())

    @app.post("/sessions", response_model=CreateSessionResponse)
    def create_session(body: CreateSessionRequest):
        session_id = body.session_id or f"session-{uuid.uuid4().hex[:12]}"
        config = _config_from_model(body.config)
        pool = _load_side(body.pool, body.pool_path, require_gold=False, what="pool")
        eval_set = _load_side(body.eval_set, body.eval_path, require_gold=True, what="eval_set")
        state = service.create_session(session_id, config, pool, eval_set)
        return CreateSessionResponse(session_id=state.session_id)

    @app.get("/sessions/{session_id}", response_model=SessionSnapshot)
    def get_session(session_id: str):
        state = service.get_session(session_id)
        return SessionSnapshot(state=session_to_dict(state))

    @app.post("/sessions/{session_id}/iterate", response_model=IterateResponse)
    def iterate(session_id: str):
        state, batch = service.iterate(session_id)
        scores = {
            score.pair_id: score for score in state.scores_for_iteration(state.iteration + 1)
        }
        pending = []
        for pair_id in batch:
            pair = state.pool.get(pair_id)
            score = scores.get(pair_id)
            pending.append(
                PendingPairModel(
                    pair_id=pair_id,
                    left=dict(pair.left.attributes),
                    right=dict(pair.right.attributes),
                    votes=list(score.votes) if score else None,
                    positive_ratio=float(score.positive_ratio) if score else None,
                    entropy=score.entropy if score else None,
                )
            )
        return IterateResponse(
            session_id=state.session_id,
            iteration=state.iteration + 1,
            phase=state.phase,
            require_explanation=state.config.explanations_required,
            pending=pending,
        )

    @app.post("/sessions/{session_id}/annotations", response_model=SessionSummary)
    def annotate(session_id: str, body: AnnotateRequest):
        submissions = None
        if body.submissions is not None:
            submissions = [
                AnnotationSubmission(
                    pair_id=item.pair_id, label=item.label, explanation=item.explanation
                )
                for item in body.submissions
            ]
        state = service.annotate(session_id, submissions, simulate=body.simulate)
        return _summary(state)

    @app.post("/sessions/{session_id}/evaluate", response_model=EvaluationReportModel)
    def evaluate_session(session_id: str):
        _, report = service.evaluate(session_id)
        return _report_model(report)

    @app.get("/sessions/{session_id}/prompt", response_model=PromptResponse)
    def get_prompt(session_id: str):
        state = service.get_session(session_id)
        return PromptResponse(
            session_id=state.session_id,
            prompt=prompt_preview(state),
            demonstration_count=len(state.demonstrations),
        )

    @app.get("/sessions/{session_id}/history", response_model=HistoryResponse)
    def get_history(session_id: str):
        state = service.get_session(session_id)
        return HistoryResponse(
            session_id=state.session_id,
            annotations=[
                AnnotationRecordModel(
                    iteration=record.iteration,
                    pair_id=record.pair_id,
                    label=record.label,
                    explanation=record.explanation,
                )
                for record in state.annotation_history
            ],
            evaluations=[_report_model(report) for report in state.evaluation_history],
        )

    @app.get("/sessions/{session_id}/summary", response_model=SessionSummary)
    def get_summary(session_id: str):
        return _summary(service.get_session(session_id))

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
