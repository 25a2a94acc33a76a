"""Word mover's distance via the exact transportation LP."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linprog


@dataclass(frozen=True)
class WmdResult:
    distance: float
    similarity: float  # 1 / (1 + distance)


def load_word_vectors(path) -> dict[str, np.ndarray]:
    """Read a ``token v1 v2 ... vk`` resource file."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            vec = np.asarray([float(p) for p in parts[1:]], dtype=float)
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(f"inconsistent vector size at line {line_no}")
            vectors[parts[0]] = vec
    return vectors


def _nbow(tokens: list[str], word_vectors: dict[str, np.ndarray]):
    counts = Counter(t for t in tokens if t in word_vectors)
    if not counts:
        raise ValueError("document has no in-vocabulary tokens")
    words = sorted(counts)
    weights = np.array([counts[w] for w in words], dtype=float)
    weights /= weights.sum()
    vectors = np.stack([word_vectors[w] for w in words])
    return weights, vectors


def wmd(doc_a: list[str], doc_b: list[str],
        word_vectors: dict[str, np.ndarray]) -> WmdResult:
    """Minimum-cost transport between two normalized bags of words.

    Ground cost is the Euclidean distance between word vectors; the
    transportation problem is solved exactly as a linear program.
    """
    a, va = _nbow(doc_a, word_vectors)
    b, vb = _nbow(doc_b, word_vectors)
    m, n = len(a), len(b)
    cost = np.linalg.norm(va[:, None, :] - vb[None, :, :], axis=2)
    if m == 1 and n == 1:
        d = float(cost[0, 0])
        return WmdResult(distance=d, similarity=1.0 / (1.0 + d))
    # Row-sum and column-sum equality constraints over the m*n flows.
    n_vars = m * n
    a_eq = np.zeros((m + n, n_vars))
    for i in range(m):
        a_eq[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        a_eq[m + j, j::n] = 1.0
    b_eq = np.concatenate([a, b])
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"transport LP failed: {res.message}")
    d = float(res.fun)
    d = max(d, 0.0)
    return WmdResult(distance=d, similarity=1.0 / (1.0 + d))


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, the WMD scorer's preprocessing."""
    out, current = [], []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            out.append("".join(current))
            current = []
    if current:
        out.append("".join(current))
    return out
