"""Completion backends: a real chat-completions HTTP client and a
deterministic synthetic stand-in.

The synthetic backend turns each pair's token overlap into a positive-class
probability that steepens around a decision threshold as boundary
demonstrations accumulate. It exists so the whole sampling/annotation/
evaluation loop can run offline with reproducible, analyzable behavior:
ambiguous pairs literally cluster at the threshold.
"""

from __future__ import annotations

import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .core import EntityPair
from .errors import ConfigError, PromptLoopError, ProtocolError, TransportError, ValidationError
from .prompting import Demonstration

BASE_URL_ENV = "APE_LLM_BASE_URL"
API_KEY_ENV = "APE_LLM_API_KEY"

_TOKEN_RE = re.compile(r"[0-9a-z]+")


@dataclass(frozen=True)
class CompletionContext:
    """Structured view of the request for backends that need more than text.

    The synthetic backend keys its seeded vote streams on the pair id and the
    committee temperature index, and inspects the live demonstration list to
    compute its effective gain. The HTTP backend ignores this entirely.
    """

    pair: EntityPair
    demonstrations: tuple[Demonstration, ...] = ()
    temperature_index: int = 0


@dataclass(frozen=True)
class CompletionRequest:
    prompt_text: str
    temperature: float
    max_output_tokens: int = 256
    model_id: str = "default"
    context: CompletionContext | None = None

    def __post_init__(self):
        if not self.prompt_text:
            raise ValidationError("prompt_text must be nonempty")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValidationError(f"temperature outside [0, 1]: {self.temperature}")
        if self.max_output_tokens < 1:
            raise ValidationError(f"max_output_tokens must be positive: {self.max_output_tokens}")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    backend_id: str
    latency: float


class Backend(Protocol):
    backend_id: str
    max_in_flight: int

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


def record_tokens(record_lines: Sequence[str]) -> set[str]:
    """Lowercased alphanumeric tokens of a record's attribute values."""
    tokens: set[str] = set()
    for line in record_lines:
        tokens.update(_TOKEN_RE.findall(line.lower()))
    return tokens


def pair_similarity(pair: EntityPair) -> float:
    """Token-level Jaccard similarity between the two records.

    All attribute values of a record are pooled into one token set
    (lowercased, split on whitespace and punctuation). A record with no
    tokens yields similarity 0.
    """
    left = record_tokens(list(pair.left.attributes.values()))
    right = record_tokens(list(pair.right.attributes.values()))
    if not left or not right:
        return 0.0
    union = left | right
    return len(left & right) / len(union)


@dataclass(frozen=True)
class SyntheticBackendConfig:
    """Parameters of the synthetic decision model.

    ``threshold`` is the similarity at which a pair is maximally ambiguous;
    ``gain`` controls how fast confidence grows away from it. Demonstrations
    whose own similarity lies within ``demo_radius`` of the threshold add
    ``demo_gain_step`` to the effective gain, so boundary annotations sharpen
    the model's decisions.
    """

    threshold: float = 0.5
    gain: float = 4.0
    demo_radius: float = 0.15
    demo_gain_step: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError(f"threshold must lie in (0, 1): {self.threshold}")
        if not 0.0 < self.demo_radius <= 1.0:
            raise ValidationError(f"demo_radius must lie in (0, 1]: {self.demo_radius}")
        if self.gain <= 0.0:
            raise ValidationError(f"gain must be positive: {self.gain}")
        if self.demo_gain_step <= 0.0:
            raise ValidationError(f"demo_gain_step must be positive: {self.demo_gain_step}")


def synthetic_positive_probability(
    similarity: float,
    demonstrations: Sequence[Demonstration],
    config: SyntheticBackendConfig,
) -> float:
    """Positive-class probability of the synthetic model for one pair."""
    if not 0.0 <= similarity <= 1.0:
        raise ValidationError(f"similarity outside [0, 1]: {similarity}")
    near_boundary = sum(
        1
        for demo in demonstrations
        if abs(pair_similarity(demo.pair) - config.threshold) <= config.demo_radius
    )
    effective_gain = config.gain + config.demo_gain_step * near_boundary
    p = 0.5 + (similarity - config.threshold) * effective_gain
    return min(1.0, max(0.0, p))


class SyntheticBackend:
    """Deterministic offline backend.

    At temperature t the answer is "yes" with probability
    (1 - t) * step(p >= 0.5) + t * p, drawn from a stream seeded by
    (seed, pair id, temperature index), so replays are bit-identical and
    concurrent calls cannot perturb each other. At t = 0 the output is a
    pure function of the request.
    """

    backend_id = "synthetic"
    max_in_flight = 1

    def __init__(self, config: SyntheticBackendConfig):
        self.config = config
        self._similarity_cache: dict[str, float] = {}

    def _similarity(self, pair: EntityPair) -> float:
        cached = self._similarity_cache.get(pair.id)
        if cached is None:
            cached = pair_similarity(pair)
            self._similarity_cache[pair.id] = cached
        return cached

    def positive_probability(self, pair: EntityPair, demonstrations: Sequence[Demonstration]) -> float:
        near_boundary = sum(
            1
            for demo in demonstrations
            if abs(self._similarity(demo.pair) - self.config.threshold) <= self.config.demo_radius
        )
        effective_gain = self.config.gain + self.config.demo_gain_step * near_boundary
        p = 0.5 + (self._similarity(pair) - self.config.threshold) * effective_gain
        return min(1.0, max(0.0, p))

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        ctx = request.context
        if ctx is None:
            raise ConfigError("synthetic backend needs a completion context (pair + demonstrations)")
        p = self.positive_probability(ctx.pair, ctx.demonstrations)
        t = request.temperature
        p_yes = (1.0 - t) * (1.0 if p >= 0.5 else 0.0) + t * p
        stream = random.Random(f"{self.config.seed}:{ctx.pair.id}:{ctx.temperature_index}")
        text = "yes" if stream.random() < p_yes else "no"
        return CompletionResponse(text=text, backend_id=self.backend_id, latency=0.0)


@dataclass(frozen=True)
class HttpBackendConfig:
    """Connection settings for a chat-completions-compatible endpoint."""

    base_url: str | None = None
    timeout: float = 30.0
    max_in_flight: int = 4
    retry_attempts: int = 3
    backoff_base: float = 0.5


class HttpBackend:
    """Client for the de-facto chat-completions wire protocol.

    POSTs one message per request, forwards the temperature verbatim, and
    reads the first choice's message content. Transient failures (network
    errors, 429, 5xx) are retried with exponential backoff and jitter before
    surfacing; other non-success statuses fail immediately.
    """

    backend_id = "http"

    def __init__(self, config: HttpBackendConfig | None = None, transport: httpx.BaseTransport | None = None):
        self.config = config or HttpBackendConfig()
        self.max_in_flight = self.config.max_in_flight
        base_url = self.config.base_url or os.environ.get(BASE_URL_ENV, "")
        if not base_url:
            raise ConfigError(f"no LLM base URL configured (set {BASE_URL_ENV} or backend.base_url)")
        api_key = os.environ.get(API_KEY_ENV, "")
        if not api_key:
            raise ConfigError(f"missing LLM credential (set {API_KEY_ENV})")
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=self.config.timeout,
            transport=transport,
        )
        self._jitter = random.Random()

    def close(self) -> None:
        self._client.close()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        payload = {
            "model": request.model_id,
            "messages": [{"role": "user", "content": request.prompt_text}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        started = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(self.config.retry_attempts):
            if attempt:
                delay = self.config.backoff_base * 2 ** (attempt - 1)
                time.sleep(delay * (1.0 + self._jitter.random()))
            try:
                response = self._client.post("/chat/completions", json=payload)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code in (429,) or response.status_code >= 500:
                last_error = ProtocolError(
                    f"LLM endpoint returned {response.status_code}",
                    status=response.status_code,
                    body=response.text,
                )
                continue
            if response.status_code != 200:
                raise ProtocolError(
                    f"LLM endpoint returned {response.status_code}",
                    status=response.status_code,
                    body=response.text,
                )
            return self._parse(response, started)
        if isinstance(last_error, ProtocolError):
            raise last_error
        raise TransportError(
            f"LLM request failed after {self.config.retry_attempts} attempts: {last_error}"
        )

    def _parse(self, response: httpx.Response, started: float) -> CompletionResponse:
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise ProtocolError(
                f"malformed completion payload: {exc}",
                status=response.status_code,
                body=response.text[:2000],
            ) from exc
        if text is None:
            text = ""
        return CompletionResponse(
            text=text,
            backend_id=self.backend_id,
            latency=time.monotonic() - started,
        )


def _tag_error(exc: Exception, request: CompletionRequest) -> None:
    if isinstance(exc, PromptLoopError) and request.context is not None:
        ctx = request.context
        exc.message = f"pair {ctx.pair.id} (temperature index {ctx.temperature_index}): {exc.message}"
        exc.args = (exc.message,)


def gather_completions(backend: Backend, requests: Sequence[CompletionRequest]) -> list[CompletionResponse]:
    """Run several completions, concurrently when the backend allows it.

    Results come back in request order regardless of completion order; a
    failure is reported for the earliest failing request, tagged with its
    committee temperature index.
    """
    limit = getattr(backend, "max_in_flight", 1)
    if limit <= 1 or len(requests) <= 1:
        results = []
        for request in requests:
            try:
                results.append(backend.complete(request))
            except Exception as exc:
                _tag_error(exc, request)
                raise
        return results
    with ThreadPoolExecutor(max_workers=min(limit, len(requests))) as pool:
        futures = [pool.submit(backend.complete, request) for request in requests]
        results = []
        for request, future in zip(requests, futures):
            try:
                results.append(future.result())
            except Exception as exc:
                _tag_error(exc, request)
                raise
    return results
