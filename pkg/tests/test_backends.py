import json
import random

import httpx
import pytest

from promptloop.backends import (
    API_KEY_ENV,
    BASE_URL_ENV,
    CompletionContext,
    CompletionRequest,
    CompletionResponse,
    HttpBackend,
    HttpBackendConfig,
    SyntheticBackend,
    SyntheticBackendConfig,
    gather_completions,
    pair_similarity,
    synthetic_positive_probability,
)
from promptloop.core import EntityPair, EntityRecord
from promptloop.errors import ConfigError, ProtocolError, TransportError, ValidationError
from promptloop.prompting import Demonstration

from conftest import build_pair


def pair_from_tokens(pid, left, right):
    return EntityPair(pid, EntityRecord({"title": left}), EntityRecord({"title": right}))


class TestPairSimilarity:
    def test_identical_records(self):
        pair = pair_from_tokens("p", "alpha beta gamma", "alpha beta gamma")
        assert pair_similarity(pair) == 1.0

    def test_disjoint_records(self):
        pair = pair_from_tokens("p", "alpha beta", "gamma delta")
        assert pair_similarity(pair) == 0.0

    def test_half_overlap(self):
        pair = pair_from_tokens("p", "a b c", "b c d")
        assert pair_similarity(pair) == 0.5

    def test_tokenization_is_case_and_punctuation_insensitive(self):
        pair = pair_from_tokens("p", "Alpha, BETA.", "alpha beta")
        assert pair_similarity(pair) == 1.0

    def test_no_tokens_means_zero(self):
        pair = pair_from_tokens("p", "...", "alpha")
        assert pair_similarity(pair) == 0.0

    def test_builder_hits_exact_grid_values(self):
        for shared, union in [(0, 7), (3, 7), (7, 7), (24, 49)]:
            pair = build_pair("p", shared, union)
            assert pair_similarity(pair) == shared / union


class TestSyntheticProbability:
    def test_boundary_is_maximally_ambiguous(self):
        config = SyntheticBackendConfig()
        assert synthetic_positive_probability(0.5, [], config) == 0.5

    def test_clamp_saturates(self):
        config = SyntheticBackendConfig(gain=4.0)
        assert synthetic_positive_probability(1.0, [], config) == 1.0
        assert synthetic_positive_probability(0.0, [], config) == 0.0

    def test_gain_and_demo_gain(self):
        config = SyntheticBackendConfig(threshold=0.5, gain=4.0, demo_gain_step=2.0)
        assert synthetic_positive_probability(0.55, [], config) == pytest.approx(0.7, abs=1e-12)
        boundary_demo = Demonstration(build_pair("d", 2, 4), 1, annotated_at_iteration=1)
        assert pair_similarity(boundary_demo.pair) == 0.5
        assert synthetic_positive_probability(0.55, [boundary_demo], config) == pytest.approx(
            0.8, abs=1e-12
        )

    def test_far_demo_does_not_change_gain(self):
        config = SyntheticBackendConfig(demo_radius=0.15)
        far_demo = Demonstration(build_pair("d", 0, 4), 0, annotated_at_iteration=1)
        assert synthetic_positive_probability(0.55, [far_demo], config) == pytest.approx(0.7)

    def test_similarity_domain(self):
        with pytest.raises(ValidationError):
            synthetic_positive_probability(1.5, [], SyntheticBackendConfig())

    def test_boundary_demos_never_soften_decisions(self):
        config = SyntheticBackendConfig(threshold=0.5, gain=3.0)
        demo = Demonstration(build_pair("d", 5, 10), 1, annotated_at_iteration=1)
        for shared in range(0, 21):
            similarity = shared / 20
            before = synthetic_positive_probability(similarity, [], config)
            after = synthetic_positive_probability(similarity, [demo], config)
            assert abs(after - 0.5) >= abs(before - 0.5) - 1e-12


def request_for(pair, temperature, index=0, demos=()):
    return CompletionRequest(
        prompt_text="prompt",
        temperature=temperature,
        context=CompletionContext(pair=pair, demonstrations=tuple(demos), temperature_index=index),
    )


class TestSyntheticBackend:
    def test_deterministic_at_zero_temperature(self):
        backend = SyntheticBackend(SyntheticBackendConfig(seed=9))
        high = build_pair("hi", 9, 10)  # similarity 0.9
        low = build_pair("lo", 1, 10)  # similarity 0.1
        assert backend.complete(request_for(high, 0.0)).text == "yes"
        assert backend.complete(request_for(low, 0.0)).text == "no"
        # pure function of the request: repeat calls agree
        assert backend.complete(request_for(high, 0.0)).text == "yes"

    def test_replay_with_same_seed_is_bit_identical(self):
        pairs = [build_pair(f"p{i}", i, 10) for i in range(11)]
        def run():
            backend = SyntheticBackend(SyntheticBackendConfig(seed=123))
            return [
                backend.complete(request_for(pair, t, index)).text
                for pair in pairs
                for index, t in enumerate([0.0, 0.5, 1.0])
            ]
        assert run() == run()

    def test_streams_are_keyed_per_pair_and_temperature_index(self):
        backend = SyntheticBackend(SyntheticBackendConfig(seed=1))
        pair = build_pair("p", 5, 10)
        # calling in any order yields the same per-slot votes
        forward = [backend.complete(request_for(pair, 1.0, i)).text for i in range(3)]
        backward = [backend.complete(request_for(pair, 1.0, i)).text for i in (2, 1, 0)][::-1]
        assert forward == backward

    def test_context_required(self):
        backend = SyntheticBackend(SyntheticBackendConfig())
        with pytest.raises(ConfigError):
            backend.complete(CompletionRequest(prompt_text="x", temperature=0.0))

    def test_matches_module_level_probability(self):
        config = SyntheticBackendConfig(threshold=0.4, gain=2.5, demo_gain_step=1.5, seed=3)
        backend = SyntheticBackend(config)
        rng = random.Random(0)
        demos = [
            Demonstration(build_pair(f"d{i}", rng.randint(0, 8), 8), 1, annotated_at_iteration=1)
            for i in range(3)
        ]
        for i in range(9):
            pair = build_pair(f"q{i}", i, 8)
            assert backend.positive_probability(pair, demos) == pytest.approx(
                synthetic_positive_probability(i / 8, demos, config), abs=1e-15
            )


class TestCompletionRequest:
    def test_temperature_range(self):
        with pytest.raises(ValidationError):
            CompletionRequest(prompt_text="x", temperature=1.5)

    def test_prompt_nonempty(self):
        with pytest.raises(ValidationError):
            CompletionRequest(prompt_text="", temperature=0.0)


def make_http_backend(monkeypatch, handler, **config):
    monkeypatch.setenv(BASE_URL_ENV, "http://llm.test/v1")
    monkeypatch.setenv(API_KEY_ENV, "sk-test")
    transport = httpx.MockTransport(handler)
    return HttpBackend(HttpBackendConfig(backoff_base=0.0, **config), transport=transport)


def chat_response(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


class TestHttpBackend:
    def test_missing_credentials(self, monkeypatch):
        monkeypatch.setenv(BASE_URL_ENV, "http://llm.test/v1")
        monkeypatch.delenv(API_KEY_ENV, raising=False)
        with pytest.raises(ConfigError, match=API_KEY_ENV):
            HttpBackend(HttpBackendConfig())

    def test_missing_base_url(self, monkeypatch):
        monkeypatch.delenv(BASE_URL_ENV, raising=False)
        monkeypatch.setenv(API_KEY_ENV, "sk-test")
        with pytest.raises(ConfigError, match=BASE_URL_ENV):
            HttpBackend(HttpBackendConfig())

    def test_forwards_temperature_verbatim(self, monkeypatch):
        seen = []

        def handler(request):
            seen.append(json.loads(request.content))
            return chat_response("yes")

        backend = make_http_backend(monkeypatch, handler)
        for temperature in [0.0, 0.5, 1.0]:
            response = backend.complete(
                CompletionRequest(prompt_text="p", temperature=temperature, model_id="m-1")
            )
            assert response.text == "yes"
        assert [body["temperature"] for body in seen] == [0.0, 0.5, 1.0]
        assert all(body["model"] == "m-1" for body in seen)
        assert seen[0]["messages"] == [{"role": "user", "content": "p"}]

    def test_auth_header_sent(self, monkeypatch):
        headers = []

        def handler(request):
            headers.append(request.headers.get("authorization"))
            return chat_response("ok")

        backend = make_http_backend(monkeypatch, handler)
        backend.complete(CompletionRequest(prompt_text="p", temperature=0.0))
        assert headers == ["Bearer sk-test"]

    def test_retries_transient_then_succeeds(self, monkeypatch):
        calls = []

        def handler(request):
            calls.append(1)
            if len(calls) < 3:
                return httpx.Response(503, text="busy")
            return chat_response("recovered")

        backend = make_http_backend(monkeypatch, handler)
        response = backend.complete(CompletionRequest(prompt_text="p", temperature=0.0))
        assert response.text == "recovered"
        assert len(calls) == 3

    def test_gives_up_after_three_attempts(self, monkeypatch):
        calls = []

        def handler(request):
            calls.append(1)
            raise httpx.ConnectError("refused")

        backend = make_http_backend(monkeypatch, handler)
        with pytest.raises(TransportError, match="3 attempts"):
            backend.complete(CompletionRequest(prompt_text="p", temperature=0.0))
        assert len(calls) == 3

    def test_client_error_fails_fast_with_status_and_body(self, monkeypatch):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(401, text="bad key")

        backend = make_http_backend(monkeypatch, handler)
        with pytest.raises(ProtocolError) as excinfo:
            backend.complete(CompletionRequest(prompt_text="p", temperature=0.0))
        assert excinfo.value.status == 401
        assert "bad key" in excinfo.value.body
        assert len(calls) == 1

    def test_malformed_payload_is_protocol_error(self, monkeypatch):
        backend = make_http_backend(
            monkeypatch, lambda request: httpx.Response(200, json={"nope": True})
        )
        with pytest.raises(ProtocolError, match="malformed"):
            backend.complete(CompletionRequest(prompt_text="p", temperature=0.0))


class TestGatherCompletions:
    def test_orders_results_by_request(self):
        backend = SyntheticBackend(SyntheticBackendConfig(seed=5))
        backend.max_in_flight = 4
        pairs = [build_pair(f"p{i}", i, 10) for i in range(8)]
        requests = [request_for(pair, 0.0) for pair in pairs]
        sequential = [backend.complete(request).text for request in requests]
        assert [r.text for r in gather_completions(backend, requests)] == sequential

    def test_errors_tagged_with_pair_and_temperature_index(self):
        class Exploding:
            backend_id = "boom"
            max_in_flight = 1

            def complete(self, request):
                raise TransportError("socket closed")

        request = request_for(build_pair("p7", 2, 4), 0.5, index=1)
        with pytest.raises(TransportError, match=r"pair p7 \(temperature index 1\)"):
            gather_completions(Exploding(), [request])
