"""Encoder backends behind one tiny interface.

``load_encoder`` resolves EMBED_MODEL_ID into an encoder object exposing
``model_id``, ``dim`` and ``encode(texts) -> (n, dim) unit vectors``. Two
backends: a deterministic 512-dimensional character n-gram hashing
encoder that needs no model files (the default, id ``hash:v1``), and any
sentence-transformers model named by its id. Normalization happens here,
so every backend honors the unit-norm contract.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

DEFAULT_MODEL_ID = "hash:v1"
DIM = 512


def _normalize(vectors: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    norms = np.where(norms > 0, norms, 1.0)
    return vectors / norms


class HashTextEncoder:
    """Seeded n-gram hashing into a fixed 512-dimensional unit vector.

    Deterministic per text, no external resources; surface-form overlap
    translates into cosine similarity, which is all the probe-ordering
    acceptance asks of an encoder.
    """

    NGRAM_SIZES = (3, 4, 5)

    def __init__(self, model_id: str = DEFAULT_MODEL_ID, dim: int = DIM):
        self.model_id = model_id
        self.dim = dim
        self._key = hashlib.sha256(model_id.encode("utf-8")).digest()[:8]

    def _features(self, text: str):
        padded = f" {text.lower().strip()} "
        feats = list(padded.split())
        for n in self.NGRAM_SIZES:
            feats.extend(padded[i:i + n]
                         for i in range(max(len(padded) - n + 1, 0)))
        return feats or [padded]

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim))
        for row, text in enumerate(texts):
            for feat in self._features(text):
                digest = hashlib.blake2b(feat.encode("utf-8"), key=self._key,
                                         digest_size=8).digest()
                value = int.from_bytes(digest, "little")
                sign = 1.0 if (value >> 62) & 1 else -1.0
                out[row, value % self.dim] += sign
            if not out[row].any():
                out[row, 0] = 1.0
        return _normalize(out)


class SbertEncoder:
    """sentence-transformers wrapper; requires the model to be available."""

    def __init__(self, model_id: str):
        from sentence_transformers import SentenceTransformer
        self.model_id = model_id
        self._model = SentenceTransformer(model_id)
        self.dim = int(self._model.get_sentence_embedding_dimension())

    def encode(self, texts: Sequence[str]) -> np.ndarray:
        vectors = np.asarray(self._model.encode(list(texts),
                                                convert_to_numpy=True),
                             dtype=float)
        return _normalize(vectors)


def load_encoder(model_id: str = DEFAULT_MODEL_ID):
    """Resolve a model id; raises if the named model cannot be loaded."""
    if model_id.startswith("hash:"):
        return HashTextEncoder(model_id=model_id)
    return SbertEncoder(model_id)
