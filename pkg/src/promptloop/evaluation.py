"""Prompt evaluation against held-out labeled pairs.

Every evaluation call runs at temperature zero, one backend call per pair,
and folds the parsed predictions into a confusion matrix. An unparseable
completion counts as a wrong prediction of the opposite class, so refusals
cannot inflate the metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import Backend, CompletionContext, CompletionRequest, gather_completions
from .core import MATCH, SamplingPool
from .errors import ValidationError
from .prompting import PromptSpec, parse_label, render_prompt


@dataclass(frozen=True)
class PerExampleResult:
    pair_id: str
    predicted: int | None
    gold: int


@dataclass(frozen=True)
class EvaluationReport:
    iteration: int
    per_example: tuple[PerExampleResult, ...]
    true_positives: int
    false_positives: int
    false_negatives: int
    true_negatives: int
    unparseable_count: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    @property
    def total(self) -> int:
        return len(self.per_example)


def _safe_div(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else 0.0


def build_report(iteration: int, results: list[PerExampleResult]) -> EvaluationReport:
    """Tally confusion counts and metrics from per-pair outcomes."""
    tp = fp = fn = tn = unparseable = 0
    for result in results:
        predicted = result.predicted
        if predicted is None:
            unparseable += 1
            predicted = 1 - result.gold
        if result.gold == MATCH:
            if predicted == MATCH:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == MATCH:
                fp += 1
            else:
                tn += 1
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    return EvaluationReport(
        iteration=iteration,
        per_example=tuple(results),
        true_positives=tp,
        false_positives=fp,
        false_negatives=fn,
        true_negatives=tn,
        unparseable_count=unparseable,
        accuracy=_safe_div(tp + tn, len(results)),
        precision=precision,
        recall=recall,
        f1=_safe_div(2 * precision * recall, precision + recall),
    )


def evaluate(
    spec: PromptSpec,
    eval_set: SamplingPool,
    backend: Backend,
    *,
    iteration: int = 0,
    model_id: str = "default",
    max_output_tokens: int = 256,
) -> EvaluationReport:
    """Score the current prompt on the evaluation set at temperature zero.

    All gold labels are validated before the first backend call; results are
    tallied in pair-id order so the report is deterministic however the
    backend schedules the calls.
    """
    missing = [pair.id for pair in eval_set.pairs if pair.gold is None]
    if missing:
        raise ValidationError(f"evaluation pairs missing gold labels: {missing[:5]}")
    ordered = sorted(eval_set.pairs, key=lambda pair: pair.id)
    requests = [
        CompletionRequest(
            prompt_text=render_prompt(spec, pair),
            temperature=0.0,
            max_output_tokens=max_output_tokens,
            model_id=model_id,
            context=CompletionContext(pair=pair, demonstrations=spec.demonstrations),
        )
        for pair in ordered
    ]
    responses = gather_completions(backend, requests)
    results = [
        PerExampleResult(pair_id=pair.id, predicted=parse_label(response.text), gold=pair.gold)
        for pair, response in zip(ordered, responses)
    ]
    return build_report(iteration, results)
