import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from colluscan.embedders import (FileBackedProvider, HashEmbedder,
                                 ProviderError, RemoteProvider, make_provider,
                                 text_key)

PROBES = [
    # (text, near-duplicate, unrelated)
    ("free likes now", "free likes now!", "quantum chemistry"),
    ("please subscribe to my channel", "please subscribe to my channel!!",
     "the weather forecast for tuesday"),
    ("great video bro", "Great video bro :)", "differential equations"),
    ("check out this song", "check out this song pls", "tax filing deadline"),
    ("nice content keep going", "nice content keep going!",
     "photosynthesis in plants"),
]


def test_embed_deterministic():
    emb = HashEmbedder(seed=3, dim=64)
    a = emb.embed(["hello world"])
    b = emb.embed(["hello world"])
    np.testing.assert_array_equal(a, b)
    again = HashEmbedder(seed=3, dim=64).embed(["hello world"])
    np.testing.assert_array_equal(a, again)


def test_unit_norm():
    emb = HashEmbedder(seed=0, dim=32)
    vecs = emb.embed([t for triple in PROBES for t in triple])
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-9)


def test_seed_changes_vectors():
    a = HashEmbedder(seed=1, dim=64).embed(["same text"])
    b = HashEmbedder(seed=2, dim=64).embed(["same text"])
    assert not np.allclose(a, b)


def test_dim_floor():
    with pytest.raises(ValueError):
        HashEmbedder(seed=0, dim=4)


def test_probe_set_near_duplicates_beat_unrelated():
    emb = HashEmbedder(seed=0, dim=64)
    for text, near, unrelated in PROBES:
        t, n, u = emb.embed([text, near, unrelated])
        assert float(t @ n) > float(t @ u)


def test_order_preserved():
    emb = HashEmbedder(seed=0, dim=32)
    texts = ["alpha", "beta", "gamma"]
    batch = emb.embed(texts)
    singles = np.stack([emb.embed([t])[0] for t in texts])
    np.testing.assert_array_equal(batch, singles)


# --- file-backed provider ----------------------------------------------------

def write_vectors_file(path, texts, vectors, model_id="test-model"):
    lines = [f"# model_id={model_id} dim={vectors.shape[1]}"]
    for t, v in zip(texts, vectors):
        lines.append(text_key(t) + " " + " ".join(f"{x:.9f}" for x in v))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def test_file_backed_lookup(tmp_path):
    emb = HashEmbedder(seed=0, dim=16)
    texts = ["one", "two", "three"]
    vectors = emb.embed(texts)
    path = tmp_path / "vectors.txt"
    write_vectors_file(path, texts, vectors)
    provider = FileBackedProvider(path)
    assert provider.provider_id == "test-model"
    assert provider.dim == 16
    got = provider.embed(["two", "one"])
    np.testing.assert_allclose(got[0], vectors[1], atol=1e-8)
    np.testing.assert_allclose(got[1], vectors[0], atol=1e-8)


def test_file_backed_missing_text_fails_loudly(tmp_path):
    emb = HashEmbedder(seed=0, dim=16)
    path = tmp_path / "vectors.txt"
    write_vectors_file(path, ["known"], emb.embed(["known"]))
    provider = FileBackedProvider(path)
    with pytest.raises(ProviderError) as err:
        provider.embed(["known", "unknown"])
    assert err.value.batch == ["unknown"]


def test_file_backed_missing_file():
    with pytest.raises(ProviderError):
        FileBackedProvider("/nonexistent/vectors.txt")


# --- remote provider ---------------------------------------------------------

class StubHandler(BaseHTTPRequestHandler):
    emb = HashEmbedder(seed=9, dim=24)
    fail = False

    def do_POST(self):
        if self.path != "/embed":
            self.send_error(404)
            return
        if StubHandler.fail:
            self.send_error(503)
            return
        length = int(self.headers["Content-Length"])
        payload = json.loads(self.rfile.read(length))
        vectors = self.emb.embed(payload["texts"])
        body = json.dumps({"vectors": vectors.tolist(),
                           "model_id": "stub-encoder", "dim": 24}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    StubHandler.fail = False
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_remote_provider_round_trip(stub_server):
    provider = RemoteProvider(stub_server)
    vecs = provider.embed(["a", "b", "c"])
    assert vecs.shape == (3, 24)
    assert provider.provider_id == "stub-encoder"
    np.testing.assert_allclose(np.linalg.norm(vecs, axis=1), 1.0, atol=1e-9)
    direct = StubHandler.emb.embed(["a", "b", "c"])
    np.testing.assert_allclose(vecs, direct, atol=1e-9)


def test_remote_provider_chunks_large_batches(stub_server):
    provider = RemoteProvider(stub_server)
    texts = [f"text {i}" for i in range(520)]
    vecs = provider.embed(texts)
    assert vecs.shape == (520, 24)


def test_remote_provider_error_carries_batch(stub_server):
    StubHandler.fail = True
    provider = RemoteProvider(stub_server)
    with pytest.raises(ProviderError) as err:
        provider.embed(["x", "y"])
    assert err.value.batch == ["x", "y"]


def test_make_provider_dispatch(tmp_path, stub_server):
    assert isinstance(make_provider("hash"), HashEmbedder)
    emb = HashEmbedder(seed=0, dim=16)
    path = tmp_path / "v.txt"
    write_vectors_file(path, ["t"], emb.embed(["t"]))
    assert isinstance(make_provider(f"file:{path}"), FileBackedProvider)
    assert isinstance(make_provider(f"remote:{stub_server}"), RemoteProvider)
    with pytest.raises(ValueError):
        make_provider("bogus")
