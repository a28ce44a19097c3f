import json
from pathlib import Path

import pytest

from promptloop.core import EntityPair, EntityRecord, SamplingPool


def build_pair(pair_id: str, shared: int, union: int, gold: int | None = None) -> EntityPair:
    """Pair whose token-Jaccard similarity is exactly shared/union.

    Both records get `shared` common tokens; the remaining union tokens are
    split between the two sides as distinct fillers.
    """
    if not 0 <= shared <= union:
        raise ValueError("need 0 <= shared <= union")
    common = [f"s{j}" for j in range(shared)]
    rest = union - shared
    left_extra = [f"l{j}" for j in range(rest // 2 + rest % 2)]
    right_extra = [f"r{j}" for j in range(rest // 2)]
    left = common + left_extra
    right = common + right_extra
    return EntityPair(
        id=pair_id,
        left=EntityRecord({"title": " ".join(left) or "blank"}),
        right=EntityRecord({"title": " ".join(right) or "blank"}),
        gold=gold,
    )


def grid_pool(n: int, prefix: str = "p", gold_threshold: float | None = None) -> SamplingPool:
    """Pool of n pairs whose similarities form the uniform grid i/(n-1)."""
    pairs = []
    for i in range(n):
        gold = None
        if gold_threshold is not None:
            gold = 1 if i / (n - 1) >= gold_threshold else 0
        pairs.append(build_pair(f"{prefix}{i:03d}", shared=i, union=n - 1, gold=gold))
    return SamplingPool(pairs)


class RecordingBackend:
    """Wraps a backend and records every request, in call order."""

    def __init__(self, inner, backend_id: str | None = None):
        self.inner = inner
        self.backend_id = backend_id or f"recording({inner.backend_id})"
        self.max_in_flight = 1
        self.requests = []

    def complete(self, request):
        self.requests.append(request)
        return self.inner.complete(request)


class ScriptedBackend:
    """Returns canned completion texts in sequence."""

    backend_id = "scripted"
    max_in_flight = 1

    def __init__(self, texts):
        self.texts = list(texts)
        self.requests = []

    def complete(self, request):
        from promptloop.backends import CompletionResponse

        self.requests.append(request)
        text = self.texts[(len(self.requests) - 1) % len(self.texts)]
        return CompletionResponse(text=text, backend_id=self.backend_id, latency=0.0)


def write_pairs_jsonl(path: Path, pool: SamplingPool) -> Path:
    from promptloop.data import pair_to_dict

    lines = [json.dumps(pair_to_dict(pair)) for pair in pool.pairs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def tiny_pool():
    return grid_pool(6, prefix="p", gold_threshold=0.5)


@pytest.fixture
def tiny_eval():
    return grid_pool(4, prefix="e", gold_threshold=0.5)
