"""Active few-shot prompt refinement for binary entity matching.

Iteratively picks the most ambiguous pool pairs via a committee of LLM runs
at a temperature ladder, routes them to an annotator, folds the annotations
into few-shot demonstrations, and evaluates the resulting prompt.
"""

from .backends import (
    CompletionContext,
    CompletionRequest,
    CompletionResponse,
    HttpBackend,
    HttpBackendConfig,
    SyntheticBackend,
    SyntheticBackendConfig,
    pair_similarity,
    synthetic_positive_probability,
)
from .config import BackendSettings, SessionConfig, Templates, build_backend
from .core import (
    EntityPair,
    EntityRecord,
    SamplingPool,
    UncertaintyScore,
    entropy,
    ordered_selection_count,
    positive_ratio,
    temperature_schedule,
)
from .evaluation import EvaluationReport, evaluate
from .prompting import Demonstration, PromptSpec, parse_label, render_prompt
from .sampling import (
    SamplingConfig,
    sample_random,
    score_pair,
    select_top_k,
    update_demonstrations,
)
from .service import SessionService
from .session import (
    AnnotationSubmission,
    SessionState,
    load_session,
    run_evaluation,
    save_session,
    simulated_annotator,
    start_iteration,
    submit_annotations,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSubmission",
    "BackendSettings",
    "CompletionContext",
    "CompletionRequest",
    "CompletionResponse",
    "Demonstration",
    "EntityPair",
    "EntityRecord",
    "EvaluationReport",
    "HttpBackend",
    "HttpBackendConfig",
    "PromptSpec",
    "SamplingConfig",
    "SamplingPool",
    "SessionConfig",
    "SessionService",
    "SessionState",
    "SyntheticBackend",
    "SyntheticBackendConfig",
    "Templates",
    "UncertaintyScore",
    "build_backend",
    "entropy",
    "evaluate",
    "load_session",
    "ordered_selection_count",
    "pair_similarity",
    "parse_label",
    "positive_ratio",
    "render_prompt",
    "run_evaluation",
    "sample_random",
    "save_session",
    "score_pair",
    "select_top_k",
    "simulated_annotator",
    "start_iteration",
    "submit_annotations",
    "synthetic_positive_probability",
    "temperature_schedule",
    "update_demonstrations",
]
