import json
import subprocess
import sys
import threading

import numpy as np
import pytest

from gwpkan.embeddings import (
    EMBED_DIM, EmbeddingCache, EmbeddingError, EmbeddingServiceError,
    HttpEmbeddingClient, PseudoEmbeddingClient, embed_texts, pseudo_embed,
    text_digest,
)


class TestPseudoEmbed:
    def test_deterministic(self):
        a = pseudo_embed("a")
        b = pseudo_embed("a")
        np.testing.assert_array_equal(a.values, b.values)

    def test_unit_norm(self):
        for text in ("a", "ethanol production", "x" * 500):
            assert abs(np.linalg.norm(pseudo_embed(text).values) - 1.0) <= 1e-9

    def test_near_orthogonal_pairs(self):
        # sampled oracle: distinct texts should be close to orthogonal
        rng = np.random.default_rng(0)
        words = [f"word{i}" for i in range(200)]
        ok = 0
        for _ in range(100):
            i, j = rng.choice(200, 2, replace=False)
            cos = float(pseudo_embed(words[i]).values
                        @ pseudo_embed(words[j]).values)
            ok += abs(cos) < 0.2
        assert ok >= 99

    def test_empty_string_rejected(self):
        with pytest.raises(EmbeddingError):
            pseudo_embed("")

    def test_stable_across_process_restart(self):
        code = ("from gwpkan.embeddings import pseudo_embed; "
                "print(repr(float(pseudo_embed('restart-check').values[:8].sum())))")
        outs = {subprocess.run([sys.executable, "-c", code], check=True,
                               capture_output=True, text=True).stdout.strip()
                for _ in range(2)}
        assert len(outs) == 1
        expected = repr(float(pseudo_embed("restart-check").values[:8].sum()))
        assert outs == {expected}


class TestCache:
    def test_round_trip_bit_identical(self, tmp_path):
        path = str(tmp_path / "cache.jsonl")
        cache = EmbeddingCache(path)
        vec = pseudo_embed("hello").values
        cache.put(text_digest("hello"), "tag", vec)
        reloaded = EmbeddingCache(path)
        got = reloaded.get(text_digest("hello"), "tag")
        np.testing.assert_array_equal(got, vec)

    def test_keyed_by_model_tag(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "cache.jsonl"))
        cache.put("d", "tag-a", np.ones(EMBED_DIM))
        assert cache.get("d", "tag-b") is None

    def test_truncated_tail_skipped(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = EmbeddingCache(str(path))
        cache.put("d1", "t", np.ones(EMBED_DIM))
        with open(path, "a") as fh:
            fh.write('{"digest": "d2", "model_tag": "t", "values": [1.0, 2.')
        reloaded = EmbeddingCache(str(path))
        assert reloaded.get("d1", "t") is not None
        assert reloaded.get("d2", "t") is None


class FakeClient:
    model_tag = "fake"

    def __init__(self, dim=EMBED_DIM, fail_times=0):
        self.calls = 0
        self.dim = dim
        self.fail_times = fail_times

    def embed_batch(self, texts):
        self.calls += 1
        if self.calls <= self.fail_times:
            raise EmbeddingServiceError("transient")
        return [np.full(self.dim, float(len(t))) for t in texts]


class TestEmbedTexts:
    def test_cache_hit_returns_identical_vector(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "c.jsonl"))
        client = FakeClient()
        first = embed_texts(["alpha"], client, cache)
        second = embed_texts(["alpha"], client, cache)
        np.testing.assert_array_equal(first[0].values, second[0].values)
        assert client.calls == 1  # second call served from cache

    def test_output_order_matches_input(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "c.jsonl"))
        texts = ["aa", "b", "cccc", "b"]
        out = embed_texts(texts, FakeClient(), cache, batch_size=2)
        assert [v.values[0] for v in out] == [2.0, 1.0, 4.0, 1.0]

    def test_vector_length_validated(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "c.jsonl"))
        with pytest.raises(EmbeddingServiceError, match="length"):
            embed_texts(["a"], FakeClient(dim=7), cache)

    def test_empty_text_names_index(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "c.jsonl"))
        with pytest.raises(EmbeddingError, match="index 2"):
            embed_texts(["a", "b", "", "c"], FakeClient(), cache)

    def test_batching_and_parallel_fetch(self, tmp_path):
        cache = EmbeddingCache(str(tmp_path / "c.jsonl"))
        client = FakeClient()
        texts = [f"t{i}" for i in range(10)]
        out = embed_texts(texts, client, cache, batch_size=3, parallel_batches=2)
        assert len(out) == 10
        assert client.calls == 4  # ceil(10 / 3)


def _serve(handler_cls):
    from http.server import HTTPServer

    server = HTTPServer(("127.0.0.1", 0), handler_cls)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server


class TestHttpClient:
    def test_success_and_retry_on_5xx(self):
        from http.server import BaseHTTPRequestHandler

        state = {"calls": 0}

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                state["calls"] += 1
                if state["calls"] <= 2:
                    self.send_response(503)
                    self.end_headers()
                    return
                length = int(self.headers["Content-Length"])
                body = json.loads(self.rfile.read(length))
                data = [{"index": i, "embedding": [0.5] * EMBED_DIM}
                        for i in range(len(body["input"]))]
                payload = json.dumps({"data": data}).encode()
                self.send_response(200)
                self.send_header("Content-Type", "application/json")
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *a):
                pass

        server = _serve(Handler)
        try:
            client = HttpEmbeddingClient(
                endpoint=f"http://127.0.0.1:{server.server_port}/embed",
                model_tag="test", max_retries=3, backoff_base=0.01)
            vectors = client.embed_batch(["x", "y"])
            assert len(vectors) == 2
            assert vectors[0].shape == (EMBED_DIM,)
            assert state["calls"] == 3
        finally:
            server.shutdown()

    def test_bounded_retries_then_error(self):
        from http.server import BaseHTTPRequestHandler

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                self.send_response(500)
                self.end_headers()

            def log_message(self, *a):
                pass

        server = _serve(Handler)
        try:
            client = HttpEmbeddingClient(
                endpoint=f"http://127.0.0.1:{server.server_port}/embed",
                model_tag="test", max_retries=2, backoff_base=0.01)
            with pytest.raises(EmbeddingServiceError, match="3 attempts"):
                client.embed_batch(["x"])
        finally:
            server.shutdown()

    def test_wrong_length_from_service(self):
        from http.server import BaseHTTPRequestHandler

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                payload = json.dumps(
                    {"data": [{"index": 0, "embedding": [1.0, 2.0]}]}).encode()
                self.send_response(200)
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *a):
                pass

        server = _serve(Handler)
        try:
            client = HttpEmbeddingClient(
                endpoint=f"http://127.0.0.1:{server.server_port}/embed",
                model_tag="test", max_retries=0)
            with pytest.raises(EmbeddingServiceError, match="length"):
                client.embed_batch(["x"])
        finally:
            server.shutdown()
