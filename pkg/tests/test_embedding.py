"""Embedding providers: hash embedder purity, wire client, normalization."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biorag.embedding import (
    EmbeddingProviderConfig,
    embed_batch,
    embed_deterministic,
    remote_embed_request,
)
from biorag.errors import (
    DimensionMismatch,
    EmptyInput,
    HttpError,
    MalformedResponse,
    ProviderUnreachable,
)


def _cos(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.dot(a.astype(np.float64), b.astype(np.float64)))


class TestDeterministicEmbedder:
    def test_repeatable(self):
        a = embed_deterministic("breast cancer screening", 64)
        b = embed_deterministic("breast cancer screening", 64)
        assert np.array_equal(a, b)

    def test_unit_norm(self):
        vec = embed_deterministic("some tokens here", 32)
        assert abs(np.linalg.norm(vec.astype(np.float64)) - 1.0) < 1e-6
        assert vec.dtype == np.float32

    def test_shared_vocabulary_scores_higher(self):
        base = embed_deterministic("breast cancer screening", 384)
        near = embed_deterministic("breast cancer screening tests", 384)
        far = embed_deterministic("rust compiler borrow checker", 384)
        assert _cos(base, near) > _cos(base, far)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            embed_deterministic("", 64)

    def test_punctuation_only_is_empty(self):
        with pytest.raises(EmptyInput):
            embed_deterministic("...!!!", 64)

    def test_dimension_floor(self):
        with pytest.raises(ValueError):
            embed_deterministic("text", 7)

    def test_case_insensitive(self):
        assert np.array_equal(
            embed_deterministic("Breast Cancer", 64),
            embed_deterministic("breast cancer", 64),
        )

    @given(
        st.lists(
            st.text(alphabet="abcdefgh0123", min_size=1, max_size=10),
            min_size=1,
            max_size=8,
        ),
        st.sampled_from([8, 16, 64, 384]),
    )
    @settings(max_examples=150)
    def test_always_unit_norm(self, words, d):
        vec = embed_deterministic(" ".join(words), d)
        assert vec.shape == (d,)
        assert abs(np.linalg.norm(vec.astype(np.float64)) - 1.0) < 1e-6


class TestProviderConfig:
    def test_fingerprint_format(self):
        cfg = EmbeddingProviderConfig(kind="remote", model_name="m", dimension=384)
        assert cfg.fingerprint() == "remote:m:384"

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingProviderConfig(kind="local")

    def test_bad_dimension_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingProviderConfig(dimension=0)


class TestEmbedBatch:
    def test_deterministic_batch_order(self):
        provider = EmbeddingProviderConfig(kind="deterministic", dimension=32)
        vecs = embed_batch(["alpha", "beta"], provider)
        assert len(vecs) == 2
        assert np.array_equal(vecs[0], embed_deterministic("alpha", 32))
        assert np.array_equal(vecs[1], embed_deterministic("beta", 32))

    def test_empty_list(self):
        provider = EmbeddingProviderConfig(kind="deterministic", dimension=32)
        with pytest.raises(EmptyInput):
            embed_batch([], provider)

    def test_blank_element(self):
        provider = EmbeddingProviderConfig(kind="deterministic", dimension=32)
        with pytest.raises(EmptyInput):
            embed_batch(["ok", "   "], provider)


class TestRemoteClient:
    def _provider(self, url: str, **kw) -> EmbeddingProviderConfig:
        kw.setdefault("dimension", 16)
        return EmbeddingProviderConfig(
            kind="remote", endpoint_url=url, model_name="stub-model", **kw
        )

    def test_round_trip_matches_hash_embedder(self, stub):
        state, url = stub
        vecs = embed_batch(["one text", "two text"], self._provider(url))
        assert np.allclose(vecs[0], embed_deterministic("one text", 16), atol=1e-6)
        assert np.allclose(vecs[1], embed_deterministic("two text", 16), atol=1e-6)

    def test_batch_splitting(self, stub):
        state, url = stub
        provider = self._provider(url, max_batch=2)
        vecs = embed_batch(["a1", "b2", "c3", "d4", "e5"], provider)
        assert len(vecs) == 5
        sizes = [len(req["input"]) for req in state.embed_requests()]
        assert sizes == [2, 2, 1]

    def test_out_of_order_response_is_reordered(self, stub):
        state, url = stub
        state.embed_queue.append(("reversed",))
        vecs = embed_batch(["one text", "two text"], self._provider(url))
        assert np.allclose(vecs[0], embed_deterministic("one text", 16), atol=1e-6)

    def test_wrong_dimension(self, stub):
        state, url = stub
        state.embed_queue.append(("wrong_dim",))
        with pytest.raises(DimensionMismatch):
            embed_batch(["text here"], self._provider(url))

    def test_wrong_arity(self, stub):
        state, url = stub
        state.embed_queue.append(("short",))
        with pytest.raises(MalformedResponse):
            embed_batch(["one text", "two text"], self._provider(url))

    def test_malformed_body(self, stub):
        state, url = stub
        state.embed_queue.append(("malformed",))
        with pytest.raises(MalformedResponse):
            embed_batch(["text here"], self._provider(url))

    def test_500_thrice_exhausts_retries(self, stub, monkeypatch):
        monkeypatch.setattr("biorag.embedding._BACKOFF_BASE_S", 0.001)
        state, url = stub
        state.embed_queue.extend([("status", 500)] * 3)
        with pytest.raises(ProviderUnreachable):
            remote_embed_request(["text here"], self._provider(url))
        assert len(state.embed_requests()) == 3

    def test_transient_500_then_success(self, stub, monkeypatch):
        monkeypatch.setattr("biorag.embedding._BACKOFF_BASE_S", 0.001)
        state, url = stub
        state.embed_queue.append(("status", 503))
        vecs = embed_batch(["text here"], self._provider(url))
        assert len(vecs) == 1
        assert len(state.embed_requests()) == 2

    def test_client_error_is_immediate(self, stub):
        state, url = stub
        state.embed_queue.append(("status", 400, "bad request"))
        with pytest.raises(HttpError) as err:
            embed_batch(["text here"], self._provider(url))
        assert err.value.status == 400
        assert len(state.embed_requests()) == 1

    def test_unreachable_endpoint(self, monkeypatch):
        monkeypatch.setattr("biorag.embedding._BACKOFF_BASE_S", 0.001)
        provider = self._provider("http://127.0.0.1:9", timeout_ms=200)
        with pytest.raises(ProviderUnreachable):
            embed_batch(["text here"], provider)

    def test_request_carries_model_and_input(self, stub):
        state, url = stub
        embed_batch(["payload text"], self._provider(url))
        (req,) = state.embed_requests()
        assert req == {"model": "stub-model", "input": ["payload text"]}
