"""Text embedding providers behind one capability contract.

A provider maps a batch of UTF-8 texts to an order-aligned batch of
unit-normalized vectors, deterministically per (provider_id, text). Three
implementations: a seeded hashing embedder (no external resources, used as
the default and in tests), a file-backed provider fed by the embedding
sidecar's batch mode, and an HTTP client for a running sidecar.
"""

from __future__ import annotations

import hashlib
import json
import urllib.request
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np


class ProviderError(Exception):
    """Embedding failure; carries the batch that could not be embedded."""

    def __init__(self, message: str, batch: Sequence[str] = ()):
        super().__init__(message)
        self.batch = list(batch)


class EmbeddingProvider(Protocol):
    provider_id: str
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


def _normalize_rows(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    norms = np.where(norms > 0, norms, 1.0)
    return vectors / norms


class HashEmbedder:
    """Seeded character n-gram hashing into a fixed-dimension unit vector.

    Identical texts map to identical vectors; texts sharing most of their
    surface form share most n-gram buckets and therefore score a higher
    cosine than unrelated texts. A deterministic stand-in for a sentence
    encoder; no model files involved.
    """

    NGRAM_SIZES = (3, 4, 5)

    def __init__(self, seed: int = 0, dim: int = 64):
        if dim < 8:
            raise ValueError("dim must be >= 8")
        self.seed = seed
        self.dim = dim
        self.provider_id = f"hash-ngram:{dim}:{seed}"
        self._key = seed.to_bytes(8, "little", signed=True)
        self._cache: dict[str, np.ndarray] = {}

    def _features(self, text: str):
        padded = f" {text.lower().strip()} "
        feats = list(padded.split())
        for n in self.NGRAM_SIZES:
            feats.extend(padded[i:i + n] for i in range(max(len(padded) - n + 1, 0)))
        return feats or [padded]

    def _embed_one(self, text: str) -> np.ndarray:
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        vec = np.zeros(self.dim)
        for feat in self._features(text):
            digest = hashlib.blake2b(feat.encode("utf-8"), key=self._key,
                                     digest_size=8).digest()
            value = int.from_bytes(digest, "little")
            idx = value % self.dim
            sign = 1.0 if (value >> 62) & 1 else -1.0
            vec[idx] += sign
        norm = np.linalg.norm(vec)
        if norm == 0:
            vec[0] = 1.0
        else:
            vec /= norm
        self._cache[text] = vec
        return vec

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self._embed_one(t) for t in texts])


def text_key(text: str) -> str:
    """Stable lookup key used by the file-backed vectors format."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class FileBackedProvider:
    """Vectors file lookup: one line per text, ``<sha256-of-text> v1 .. vd``.

    Lines starting with ``#`` are headers; a ``# model_id=... dim=...``
    header names the provider. Texts absent from the file fail loudly.
    """

    def __init__(self, path):
        path = Path(path)
        if not path.is_file():
            raise ProviderError(f"vectors file not found: {path}")
        self.provider_id = f"file:{path.name}"
        vectors: dict[str, np.ndarray] = {}
        dim = None
        with path.open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    for part in line[1:].split():
                        if part.startswith("model_id="):
                            self.provider_id = part.split("=", 1)[1]
                    continue
                parts = line.split()
                if len(parts) < 2:
                    raise ProviderError(f"malformed vectors line {line_no}")
                vec = np.asarray([float(p) for p in parts[1:]], dtype=float)
                if dim is None:
                    dim = len(vec)
                elif len(vec) != dim:
                    raise ProviderError(
                        f"inconsistent vector dimension at line {line_no}")
                vectors[parts[0]] = vec
        if dim is None:
            raise ProviderError(f"vectors file is empty: {path}")
        self.dim = dim
        self._vectors = vectors

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        rows, missing = [], []
        for t in texts:
            vec = self._vectors.get(text_key(t))
            if vec is None:
                missing.append(t)
            else:
                rows.append(vec)
        if missing:
            raise ProviderError(
                f"{len(missing)} texts missing from vectors file", batch=missing)
        return _normalize_rows(np.stack(rows))


class RemoteProvider:
    """HTTP client for the embedding sidecar's ``POST /embed`` endpoint."""

    MAX_BATCH = 256

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.provider_id = f"remote:{self.base_url}"
        self.dim = 0  # learned from the first response

    def _post(self, texts: Sequence[str]) -> dict:
        payload = json.dumps({"texts": list(texts)}).encode("utf-8")
        req = urllib.request.Request(
            self.base_url + "/embed", data=payload,
            headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return json.loads(resp.read().decode("utf-8"))
        except Exception as exc:
            raise ProviderError(f"embed request failed: {exc}", batch=texts) from exc

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        chunks = []
        for start in range(0, len(texts), self.MAX_BATCH):
            batch = list(texts[start:start + self.MAX_BATCH])
            obj = self._post(batch)
            vectors = np.asarray(obj["vectors"], dtype=float)
            if len(vectors) != len(batch):
                raise ProviderError("response vectors misaligned with batch",
                                    batch=batch)
            self.dim = int(obj.get("dim", vectors.shape[1]))
            self.provider_id = obj.get("model_id", self.provider_id)
            chunks.append(vectors)
        return _normalize_rows(np.concatenate(chunks, axis=0))


def make_provider(spec: str, seed: int = 0) -> EmbeddingProvider:
    """Build a provider from a CLI-style spec: ``hash``, ``file:PATH``, ``remote:URL``."""
    if spec == "hash":
        return HashEmbedder(seed=seed, dim=64)
    if spec.startswith("file:"):
        return FileBackedProvider(spec[len("file:"):])
    if spec.startswith("remote:"):
        return RemoteProvider(spec[len("remote:"):])
    raise ValueError(f"unknown embedder spec '{spec}'")
