"""Active sampling: random and committee-disagreement strategies.

The committee strategy runs the current prompt against each candidate at a
ladder of temperatures, measures disagreement as binary entropy of the vote
ratio, and picks the most ambiguous candidates for annotation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Literal, Sequence

from .backends import Backend, CompletionContext, CompletionRequest, gather_completions
from .core import MATCH, SamplingPool, UncertaintyScore, temperature_schedule
from .errors import PoolExhaustedError, ValidationError
from .prompting import Demonstration, PromptSpec, parse_label, render_prompt

Strategy = Literal["random", "self_consistency"]
Mode = Literal["incremental", "fixed"]

STRATEGIES = ("random", "self_consistency")
MODES = ("incremental", "fixed")


@dataclass(frozen=True)
class SamplingConfig:
    strategy: Strategy = "self_consistency"
    batch_size: int = 2
    committee_size: int = 3
    mode: Mode = "incremental"
    seed: int = 0
    candidate_cap: int | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy: {self.strategy!r}")
        if self.mode not in MODES:
            raise ValidationError(f"unknown mode: {self.mode!r}")
        if self.batch_size < 1:
            raise ValidationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.committee_size < 2:
            raise ValidationError(f"committee too small: m={self.committee_size}")
        if self.candidate_cap is not None and self.candidate_cap < self.batch_size:
            raise ValidationError(
                f"candidate_cap ({self.candidate_cap}) must be at least batch_size "
                f"({self.batch_size})"
            )


def sample_random(
    pool: SamplingPool,
    excluded: set[str],
    k: int,
    seed: int | str,
) -> list[str]:
    """Draw k distinct unannotated pair ids uniformly, reproducibly."""
    candidates = [pair.id for pair in pool.pairs if pair.id not in excluded]
    if len(candidates) < k:
        raise PoolExhaustedError(
            f"pool exhausted: {len(candidates)} candidates remaining, {k} requested"
        )
    return random.Random(seed).sample(candidates, k)


def cap_candidates(
    candidate_ids: Sequence[str],
    cap: int | None,
    seed: int | str,
) -> list[str]:
    """Limit how many candidates get scored, via a seeded shuffle."""
    if cap is None or len(candidate_ids) <= cap:
        return list(candidate_ids)
    shuffled = list(candidate_ids)
    random.Random(seed).shuffle(shuffled)
    return shuffled[:cap]


def _resolve_vote(parsed: int | None, votes_so_far: Sequence[int]) -> int:
    """Map an unparseable completion to the committee's minority label.

    A confused model is evidence of ambiguity, so the replacement maximizes
    recorded disagreement; ties resolve to the positive label.
    """
    if parsed is not None:
        return parsed
    positives = sum(1 for v in votes_so_far if v == MATCH)
    negatives = len(votes_so_far) - positives
    if positives < negatives:
        return MATCH
    if negatives < positives:
        return 0
    return MATCH


def score_pair(
    pair,
    spec: PromptSpec,
    m: int,
    backend: Backend,
    *,
    model_id: str = "default",
    max_output_tokens: int = 256,
) -> UncertaintyScore:
    """Run the same prompt m times across the temperature ladder and score.

    The prompt is rendered once; votes are recorded in schedule order even
    when the backend runs requests concurrently.
    """
    prompt = render_prompt(spec, pair)
    temperatures = temperature_schedule(m)
    requests = [
        CompletionRequest(
            prompt_text=prompt,
            temperature=t,
            max_output_tokens=max_output_tokens,
            model_id=model_id,
            context=CompletionContext(
                pair=pair,
                demonstrations=spec.demonstrations,
                temperature_index=index,
            ),
        )
        for index, t in enumerate(temperatures)
    ]
    responses = gather_completions(backend, requests)
    votes: list[int] = []
    for response in responses:
        votes.append(_resolve_vote(parse_label(response.text), votes))
    return UncertaintyScore.from_votes(pair.id, votes)


def select_top_k(scores: Sequence[UncertaintyScore], k: int) -> list[str]:
    """Ids of the k most ambiguous scores.

    Ordered by descending entropy, ties broken by ascending pair id so the
    selection is reproducible and invariant under input permutation.
    """
    if not scores:
        raise ValidationError("no scores to select from")
    if k > len(scores):
        raise ValidationError(f"k={k} exceeds number of scores ({len(scores)})")
    ranked = sorted(scores, key=lambda s: (-s.entropy, s.pair_id))
    return [score.pair_id for score in ranked[:k]]


def update_demonstrations(
    mode: Mode,
    current: Sequence[Demonstration],
    new: Sequence[Demonstration],
) -> list[Demonstration]:
    """Fold a freshly annotated batch into the demonstration set.

    Incremental mode accumulates batches across iterations; fixed mode
    replaces the set with the new batch (history keeps the old ones).
    """
    if mode not in MODES:
        raise ValidationError(f"unknown mode: {mode!r}")
    if not new:
        raise ValidationError("new demonstration batch is empty")
    current_ids = {demo.pair.id for demo in current}
    for demo in new:
        if demo.pair.id in current_ids:
            raise ValidationError(f"already demonstrated: {demo.pair.id}")
    if mode == "fixed":
        return list(new)
    return list(current) + list(new)
