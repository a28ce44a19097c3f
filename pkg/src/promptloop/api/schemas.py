"""Pydantic request/response models for the session API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class BackendModel(BaseModel):
    type: Literal["synthetic", "http"] = "synthetic"
    model_id: str = "default"
    max_output_tokens: int = 256
    threshold: float = 0.5
    gain: float = 4.0
    demo_radius: float = 0.15
    demo_gain_step: float = 2.0
    base_url: Optional[str] = None
    timeout: float = 30.0
    max_in_flight: int = 4


class TemplatesModel(BaseModel):
    task_description: Optional[str] = None
    input_template: Optional[str] = None
    answer_instruction: Optional[str] = None
    answer_instruction_reasoned: Optional[str] = None


class ConfigModel(BaseModel):
    strategy: Literal["random", "self_consistency"] = "self_consistency"
    batch_size: int = 2
    committee_size: int = 3
    mode: Literal["incremental", "fixed"] = "incremental"
    seed: int = 0
    candidate_cap: Optional[int] = None
    require_explanation: Optional[bool] = None
    evaluate_each_iteration: bool = True
    max_iterations: Optional[int] = None
    backend: BackendModel = Field(default_factory=BackendModel)
    templates: TemplatesModel = Field(default_factory=TemplatesModel)


class PairModel(BaseModel):
    id: str
    left: dict[str, str]
    right: dict[str, str]
    gold: Optional[int] = None


class CreateSessionRequest(BaseModel):
    session_id: Optional[str] = None
    config: ConfigModel = Field(default_factory=ConfigModel)
    pool: Optional[list[PairModel]] = None
    eval_set: Optional[list[PairModel]] = None
    pool_path: Optional[str] = None
    eval_path: Optional[str] = None


class CreateSessionResponse(BaseModel):
    session_id: str


class ScoreModel(BaseModel):
    pair_id: str
    votes: list[int]
    positive_ratio: float
    entropy: float


class PendingPairModel(BaseModel):
    pair_id: str
    left: dict[str, str]
    right: dict[str, str]
    votes: Optional[list[int]] = None
    positive_ratio: Optional[float] = None
    entropy: Optional[float] = None


class IterateResponse(BaseModel):
    session_id: str
    iteration: int
    phase: str
    require_explanation: bool
    pending: list[PendingPairModel]


class SubmissionModel(BaseModel):
    pair_id: str
    label: int
    explanation: Optional[str] = None


class AnnotateRequest(BaseModel):
    submissions: Optional[list[SubmissionModel]] = None
    simulate: bool = False


class SessionSummary(BaseModel):
    session_id: str
    iteration: int
    phase: str
    demonstration_count: int
    pending_batch: Optional[list[str]] = None
    stop_reason: Optional[str] = None


class EvaluationReportModel(BaseModel):
    iteration: int
    per_example: list[tuple[str, Optional[int], int]]
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    unparseable_count: int
    accuracy: float
    precision: float
    recall: float
    f1: float


class AnnotationRecordModel(BaseModel):
    iteration: int
    pair_id: str
    label: int
    explanation: Optional[str] = None


class HistoryResponse(BaseModel):
    session_id: str
    annotations: list[AnnotationRecordModel]
    evaluations: list[EvaluationReportModel]


class PromptResponse(BaseModel):
    session_id: str
    prompt: str
    demonstration_count: int


class SessionSnapshot(BaseModel):
    """Full persisted state of a session, minus any secrets."""

    state: dict[str, Any]


class ApiErrorModel(BaseModel):
    code: Literal["validation", "state", "transport", "not_found", "config"]
    message: str
    detail: Optional[Any] = None
