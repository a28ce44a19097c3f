"""Session orchestration: the sample / annotate / update / evaluate loop.

A session owns all mutable state. Operations validate first and mutate only
once all work has succeeded, so a failed call leaves the state exactly as it
was. Randomness is derived from the configured seed plus the iteration
number, which makes pause/resume runs identical to uninterrupted ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .backends import Backend
from .config import SessionConfig, session_config_from_dict
from .core import EntityPair, EntityRecord, SamplingPool, UncertaintyScore, validate_label
from .data import pair_from_dict, pair_to_dict
from .errors import PoolExhaustedError, SessionLoadError, StateError, ValidationError
from .evaluation import EvaluationReport, PerExampleResult, evaluate
from .prompting import Demonstration, PromptSpec, render_prompt
from .sampling import cap_candidates, sample_random, score_pair, select_top_k, update_demonstrations

SESSION_FILE_VERSION = "1"

PHASE_IDLE = "idle"
PHASE_AWAITING = "awaiting_annotation"
PHASE_EVALUATING = "evaluating"
PHASES = (PHASE_IDLE, PHASE_AWAITING, PHASE_EVALUATING)

SIMULATED_EXPLANATION = {
    1: "Simulated annotation from the gold label: the records are a match.",
    0: "Simulated annotation from the gold label: the records are not a match.",
}

STOP_USER = "user"
STOP_POOL_EXHAUSTED = "pool_exhausted"
STOP_MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class AnnotationSubmission:
    pair_id: str
    label: int
    explanation: str | None = None

    def __post_init__(self):
        validate_label(self.label)


@dataclass(frozen=True)
class AnnotationRecord:
    iteration: int
    pair_id: str
    label: int
    explanation: str | None


@dataclass(frozen=True)
class ScoreRecord:
    iteration: int
    score: UncertaintyScore


@dataclass
class SessionState:
    session_id: str
    config: SessionConfig
    pool: SamplingPool
    eval_set: SamplingPool
    iteration: int = 0
    demonstrations: list[Demonstration] = field(default_factory=list)
    pending_batch: list[str] | None = None
    annotation_history: list[AnnotationRecord] = field(default_factory=list)
    score_history: list[ScoreRecord] = field(default_factory=list)
    evaluation_history: list[EvaluationReport] = field(default_factory=list)
    phase: str = PHASE_IDLE
    stop_reason: str | None = None

    def __post_init__(self):
        if not self.session_id:
            raise ValidationError("session id must be nonempty")
        if self.phase not in PHASES:
            raise ValidationError(f"unknown phase: {self.phase!r}")
        pool_ids = set(self.pool.ids())
        overlap = pool_ids & set(self.eval_set.ids())
        if overlap:
            raise ValidationError(f"evaluation set overlaps pool: {sorted(overlap)[:5]}")
        missing_gold = [pair.id for pair in self.eval_set.pairs if pair.gold is None]
        if missing_gold:
            raise ValidationError(f"evaluation pairs missing gold labels: {missing_gold[:5]}")
        for demo in self.demonstrations:
            if demo.pair.id not in pool_ids:
                raise ValidationError(f"demonstration pair not in pool: {demo.pair.id}")
        if (self.pending_batch is not None and len(self.pending_batch) > 0) != (
            self.phase == PHASE_AWAITING
        ):
            raise ValidationError("pending batch must be nonempty exactly when awaiting annotation")

    # -- derived views ---------------------------------------------------

    def annotated_ids(self) -> set[str]:
        return {record.pair_id for record in self.annotation_history}

    def prompt_spec(self) -> PromptSpec:
        """The current prompt: demonstrations so far plus configured text."""
        templates = self.config.templates
        reasoned = any(demo.explanation for demo in self.demonstrations)
        return PromptSpec(
            task_description=templates.task_description,
            demonstrations=tuple(self.demonstrations),
            input_template=templates.input_template,
            answer_instruction=(
                templates.answer_instruction_reasoned if reasoned else templates.answer_instruction
            ),
        )

    def scores_for_iteration(self, iteration: int) -> list[UncertaintyScore]:
        return [record.score for record in self.score_history if record.iteration == iteration]

    def _derived_seed(self, purpose: str, iteration: int) -> str:
        return f"{self.config.sampling.seed}:{purpose}:{iteration}"


def start_iteration(state: SessionState, backend: Backend) -> list[str]:
    """Run the configured sampling strategy and queue a batch for annotation."""
    if state.phase != PHASE_IDLE:
        raise StateError(f"cannot start an iteration while {state.phase}")
    cfg = state.config.sampling
    max_iterations = state.config.max_iterations
    if max_iterations is not None and state.iteration >= max_iterations:
        raise StateError(f"max iterations reached ({max_iterations})")
    next_iteration = state.iteration + 1
    excluded = state.annotated_ids()

    scores: list[UncertaintyScore] = []
    if cfg.strategy == "random":
        batch = sample_random(
            state.pool, excluded, cfg.batch_size, state._derived_seed("random", next_iteration)
        )
    else:
        candidates = [pair.id for pair in state.pool.pairs if pair.id not in excluded]
        if len(candidates) < cfg.batch_size:
            raise PoolExhaustedError(
                f"pool exhausted: {len(candidates)} candidates remaining, "
                f"{cfg.batch_size} requested"
            )
        candidates = cap_candidates(
            candidates, cfg.candidate_cap, state._derived_seed("cap", next_iteration)
        )
        spec = state.prompt_spec()
        scores = [
            score_pair(
                state.pool.get(pair_id),
                spec,
                cfg.committee_size,
                backend,
                model_id=state.config.backend.model_id,
                max_output_tokens=state.config.backend.max_output_tokens,
            )
            for pair_id in candidates
        ]
        batch = select_top_k(scores, cfg.batch_size)

    state.score_history.extend(ScoreRecord(next_iteration, score) for score in scores)
    state.pending_batch = list(batch)
    state.phase = PHASE_AWAITING
    return list(batch)


def submit_annotations(state: SessionState, submissions: list[AnnotationSubmission]) -> None:
    """Fold a complete batch of annotations into the demonstration set.

    All-or-nothing: the submissions must cover the pending batch exactly,
    and any validation failure leaves the state untouched.
    """
    if state.phase != PHASE_AWAITING:
        raise StateError(f"no batch awaiting annotation (phase is {state.phase})")
    pending = set(state.pending_batch or [])
    submitted = [submission.pair_id for submission in submissions]
    if len(set(submitted)) != len(submitted):
        dupes = sorted({pid for pid in submitted if submitted.count(pid) > 1})
        raise ValidationError(f"duplicate submissions for: {dupes}")
    unknown = set(submitted) - pending
    if unknown:
        raise ValidationError(f"submissions for pairs not in pending batch: {sorted(unknown)}")
    missing = pending - set(submitted)
    if missing:
        raise ValidationError(
            f"all-or-nothing: batch incomplete, missing annotations for {sorted(missing)}"
        )

    require_explanation = state.config.explanations_required
    cleaned: dict[str, AnnotationSubmission] = {}
    for submission in submissions:
        explanation = (submission.explanation or "").strip() or None
        if require_explanation and explanation is None:
            raise ValidationError(f"explanation required for pair {submission.pair_id}")
        cleaned[submission.pair_id] = AnnotationSubmission(
            pair_id=submission.pair_id, label=submission.label, explanation=explanation
        )

    next_iteration = state.iteration + 1
    ordered = sorted(cleaned.values(), key=lambda s: s.pair_id)
    new_demos = [
        Demonstration(
            pair=state.pool.get(submission.pair_id),
            label=submission.label,
            explanation=submission.explanation,
            annotated_at_iteration=next_iteration,
        )
        for submission in ordered
    ]
    demonstrations = update_demonstrations(state.config.sampling.mode, state.demonstrations, new_demos)

    state.demonstrations = demonstrations
    state.annotation_history.extend(
        AnnotationRecord(next_iteration, s.pair_id, s.label, s.explanation) for s in ordered
    )
    state.pending_batch = None
    state.iteration = next_iteration
    state.phase = PHASE_EVALUATING if state.config.evaluate_each_iteration else PHASE_IDLE


def run_evaluation(state: SessionState, backend: Backend) -> EvaluationReport:
    """Evaluate the current prompt at temperature zero and record the report.

    Runs from the evaluating phase of the loop, or on demand from idle; a
    backend failure leaves the phase unchanged so the call can be retried.
    """
    if state.phase == PHASE_AWAITING:
        raise StateError("cannot evaluate while a batch awaits annotation")
    report = evaluate(
        state.prompt_spec(),
        state.eval_set,
        backend,
        iteration=state.iteration,
        model_id=state.config.backend.model_id,
        max_output_tokens=state.config.backend.max_output_tokens,
    )
    state.evaluation_history.append(report)
    state.phase = PHASE_IDLE
    return report


def prompt_preview(state: SessionState) -> str:
    """Render the current prompt around a placeholder target pair.

    The placeholder mirrors the pool's attribute layout so the preview shows
    exactly what a real target would look like.
    """
    if state.pool.pairs:
        sample = state.pool.pairs[0]
        left = EntityRecord({name: "<value>" for name in sample.left.attributes})
        right = EntityRecord({name: "<value>" for name in sample.right.attributes})
    else:
        left = right = EntityRecord({"attribute": "<value>"})
    placeholder = EntityPair(id="placeholder", left=left, right=right)
    return render_prompt(state.prompt_spec(), placeholder)


def simulated_annotator(state: SessionState) -> list[AnnotationSubmission]:
    """Produce submissions echoing the gold labels of the pending batch."""
    if state.phase != PHASE_AWAITING or not state.pending_batch:
        raise StateError("no pending batch to simulate annotations for")
    submissions = []
    for pair_id in state.pending_batch:
        pair = state.pool.get(pair_id)
        if pair.gold is None:
            raise ValidationError(f"cannot simulate: pair {pair_id} has no gold label")
        explanation = (
            SIMULATED_EXPLANATION[pair.gold] if state.config.explanations_required else None
        )
        submissions.append(
            AnnotationSubmission(pair_id=pair_id, label=pair.gold, explanation=explanation)
        )
    return submissions


# -- persistence ---------------------------------------------------------


def _config_to_dict(config: SessionConfig) -> dict:
    sampling = config.sampling
    return {
        "strategy": sampling.strategy,
        "batch_size": sampling.batch_size,
        "committee_size": sampling.committee_size,
        "mode": sampling.mode,
        "seed": sampling.seed,
        "candidate_cap": sampling.candidate_cap,
        "require_explanation": config.require_explanation,
        "evaluate_each_iteration": config.evaluate_each_iteration,
        "max_iterations": config.max_iterations,
        "backend": {
            "type": config.backend.type,
            "model_id": config.backend.model_id,
            "max_output_tokens": config.backend.max_output_tokens,
            "threshold": config.backend.threshold,
            "gain": config.backend.gain,
            "demo_radius": config.backend.demo_radius,
            "demo_gain_step": config.backend.demo_gain_step,
            "base_url": config.backend.base_url,
            "timeout": config.backend.timeout,
            "max_in_flight": config.backend.max_in_flight,
        },
        "templates": {
            "task_description": config.templates.task_description,
            "input_template": config.templates.input_template,
            "answer_instruction": config.templates.answer_instruction,
            "answer_instruction_reasoned": config.templates.answer_instruction_reasoned,
        },
    }


def _config_from_dict(raw: dict) -> SessionConfig:
    return session_config_from_dict(raw)


def _report_to_dict(report: EvaluationReport) -> dict:
    return {
        "iteration": report.iteration,
        "per_example": [[r.pair_id, r.predicted, r.gold] for r in report.per_example],
        "true_positives": report.true_positives,
        "false_positives": report.false_positives,
        "false_negatives": report.false_negatives,
        "true_negatives": report.true_negatives,
        "unparseable_count": report.unparseable_count,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
    }


def _report_from_dict(raw: dict) -> EvaluationReport:
    return EvaluationReport(
        iteration=raw["iteration"],
        per_example=tuple(
            PerExampleResult(pair_id=entry[0], predicted=entry[1], gold=entry[2])
            for entry in raw["per_example"]
        ),
        true_positives=raw["true_positives"],
        false_positives=raw["false_positives"],
        false_negatives=raw["false_negatives"],
        true_negatives=raw["true_negatives"],
        unparseable_count=raw["unparseable_count"],
        accuracy=raw["accuracy"],
        precision=raw["precision"],
        recall=raw["recall"],
        f1=raw["f1"],
    )


def session_to_dict(state: SessionState) -> dict:
    return {
        "version": SESSION_FILE_VERSION,
        "session_id": state.session_id,
        "config": _config_to_dict(state.config),
        "pool": [pair_to_dict(pair) for pair in state.pool.pairs],
        "eval_set": [pair_to_dict(pair) for pair in state.eval_set.pairs],
        "iteration": state.iteration,
        "phase": state.phase,
        "pending_batch": state.pending_batch,
        "stop_reason": state.stop_reason,
        "demonstrations": [
            {
                "pair_id": demo.pair.id,
                "label": demo.label,
                "explanation": demo.explanation,
                "annotated_at_iteration": demo.annotated_at_iteration,
            }
            for demo in state.demonstrations
        ],
        "annotation_history": [
            {
                "iteration": record.iteration,
                "pair_id": record.pair_id,
                "label": record.label,
                "explanation": record.explanation,
            }
            for record in state.annotation_history
        ],
        "score_history": [
            {
                "iteration": record.iteration,
                "pair_id": record.score.pair_id,
                "votes": list(record.score.votes),
                "positive_ratio": str(record.score.positive_ratio),
                "entropy": record.score.entropy,
            }
            for record in state.score_history
        ],
        "evaluation_history": [_report_to_dict(report) for report in state.evaluation_history],
    }


def session_from_dict(doc: dict) -> SessionState:
    version = doc.get("version")
    if version != SESSION_FILE_VERSION:
        raise SessionLoadError(
            f"unsupported session file version {version!r} (expected {SESSION_FILE_VERSION!r})"
        )
    field_name = "session"
    try:
        field_name = "config"
        config = _config_from_dict(doc["config"])
        field_name = "pool"
        pool = SamplingPool([pair_from_dict(raw) for raw in doc["pool"]])
        field_name = "eval_set"
        eval_set = SamplingPool([pair_from_dict(raw) for raw in doc["eval_set"]])
        field_name = "demonstrations"
        demonstrations = [
            Demonstration(
                pair=pool.get(raw["pair_id"]),
                label=raw["label"],
                explanation=raw.get("explanation"),
                annotated_at_iteration=raw["annotated_at_iteration"],
            )
            for raw in doc["demonstrations"]
        ]
        field_name = "annotation_history"
        annotations = [
            AnnotationRecord(
                iteration=raw["iteration"],
                pair_id=raw["pair_id"],
                label=raw["label"],
                explanation=raw.get("explanation"),
            )
            for raw in doc["annotation_history"]
        ]
        field_name = "score_history"
        scores = [
            ScoreRecord(
                iteration=raw["iteration"],
                score=UncertaintyScore(
                    pair_id=raw["pair_id"],
                    votes=tuple(raw["votes"]),
                    positive_ratio=Fraction(raw["positive_ratio"]),
                    entropy=raw["entropy"],
                ),
            )
            for raw in doc["score_history"]
        ]
        field_name = "evaluation_history"
        evaluations = [_report_from_dict(raw) for raw in doc["evaluation_history"]]
        field_name = "session"
        return SessionState(
            session_id=doc["session_id"],
            config=config,
            pool=pool,
            eval_set=eval_set,
            iteration=doc["iteration"],
            demonstrations=demonstrations,
            pending_batch=doc["pending_batch"],
            annotation_history=annotations,
            score_history=scores,
            evaluation_history=evaluations,
            phase=doc["phase"],
            stop_reason=doc.get("stop_reason"),
        )
    except SessionLoadError:
        raise
    except (KeyError, IndexError, TypeError, ValueError, ValidationError) as exc:
        raise SessionLoadError(f"bad session field {field_name!r}: {exc}") from exc


def save_session(state: SessionState, path: str | Path) -> None:
    """Write the full state as one JSON document (atomic replace)."""
    path = Path(path)
    payload = json.dumps(session_to_dict(state), indent=2, ensure_ascii=False) + "\n"
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    tmp.replace(path)


def load_session(path: str | Path) -> SessionState:
    """Reconstruct a session from disk; the result equals the saved state."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SessionLoadError(f"cannot read session file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SessionLoadError(f"corrupt session file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SessionLoadError(f"corrupt session file {path}: not a JSON object")
    return session_from_dict(doc)
