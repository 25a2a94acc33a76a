"""Comment similarity score, comment features, and feature fusion.

A video's similarity score is the mean, over peaks, of the mean per-window
maximum match between a query comment and its window context. The match is
either an embedding dot product (unit vectors, so a cosine) or the WMD
similarity transform; the window and peak aggregation is identical for
both scorers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedders import EmbeddingProvider
from .metadata import VideoFeatures
from .peaks import AnomalyFeatures, Peak
from .records import CommentRecord, VideoRecord
from .series import TimeSeries
from .windows import Window, make_windows, select_peak_comments
from .wmd import tokenize, wmd

DEFAULT_WINDOW_SIZE = 10

FUSED_FEATURE_NAMES = (
    "activeness", "favorability", "duration",
    "peak_count", "avg_peak_area",
    "similarity", "total_comments",
)


@dataclass(frozen=True)
class CommentFeatures:
    similarity: float
    total_comments: int
    flags: tuple[str, ...] = ()

    def vector(self) -> np.ndarray:
        return np.array([self.similarity, self.total_comments], dtype=float)


@dataclass(frozen=True)
class FusedFeature:
    vector: np.ndarray  # (activeness, favorability, duration, peak_count,
    #                      avg_peak_area, similarity, total_comments)
    video_id: str

    def __post_init__(self):
        if self.vector.shape != (7,):
            raise ValueError("fused feature must have exactly 7 entries")
        if not np.all(np.isfinite(self.vector)):
            raise ValueError("fused feature entries must be finite")


def similarity_eta(per_peak_windows: dict[int, list[Window]],
                   provider: EmbeddingProvider):
    """Mean over peaks of mean per-window max query-context similarity.

    Returns ``(eta, per_peak_scores)``. Peaks contributing no windows do
    not enter the average; with no scorable windows at all, eta is 0 and
    the caller flags it.
    """
    texts = set()
    for windows in per_peak_windows.values():
        for win in windows:
            texts.add(win.query.text)
            texts.update(c.text for c in win.context)
    if not texts:
        return 0.0, {}
    ordered = sorted(texts)
    vectors = provider.embed(ordered)
    lookup = {t: vectors[i] for i, t in enumerate(ordered)}
    per_peak: dict[int, float] = {}
    for peak_index in sorted(per_peak_windows):
        windows = per_peak_windows[peak_index]
        if not windows:
            continue
        scores = []
        for win in windows:
            q = lookup[win.query.text]
            best = max(float(q @ lookup[c.text]) for c in win.context)
            scores.append(best)
        per_peak[peak_index] = float(np.mean(scores))
    if not per_peak:
        return 0.0, {}
    eta = float(np.mean(list(per_peak.values())))
    return eta, per_peak


def similarity_eta_wmd(per_peak_windows: dict[int, list[Window]],
                       word_vectors: dict[str, np.ndarray]):
    """Same aggregation as :func:`similarity_eta` with the WMD similarity.

    Query-context pairs without in-vocabulary tokens are skipped; windows
    where nothing is scorable are dropped and reported in the flags.
    """
    per_peak: dict[int, float] = {}
    flags: list[str] = []
    for peak_index in sorted(per_peak_windows):
        scores = []
        for win in per_peak_windows[peak_index]:
            pair_scores = []
            for c in win.context:
                try:
                    pair_scores.append(
                        wmd(tokenize(win.query.text), tokenize(c.text),
                            word_vectors).similarity)
                except ValueError:
                    continue
            if pair_scores:
                scores.append(max(pair_scores))
            else:
                flags.append(
                    f"peak {peak_index}: window with no in-vocabulary tokens skipped")
        if scores:
            per_peak[peak_index] = float(np.mean(scores))
    if not per_peak:
        return 0.0, {}, flags
    return float(np.mean(list(per_peak.values()))), per_peak, flags


def comment_features(video: VideoRecord, peaks: list[Peak],
                     comments: list[CommentRecord], series: TimeSeries | None,
                     provider: EmbeddingProvider | None = None,
                     scorer: str = "embedding",
                     word_vectors: dict[str, np.ndarray] | None = None,
                     window_size: int = DEFAULT_WINDOW_SIZE) -> CommentFeatures:
    """Comment feature pair (similarity score, total comment count)."""
    total = len(comments)
    if not peaks or series is None:
        return CommentFeatures(similarity=0.0, total_comments=total,
                               flags=("no peaks: similarity = 0",))
    per_peak_comments = select_peak_comments(comments, peaks, series)
    per_peak_windows = {
        i: make_windows(lst, window_size, peak_index=i)
        for i, lst in per_peak_comments.items()
    }
    flags: list[str] = []
    if scorer == "embedding":
        if provider is None:
            raise ValueError("embedding scorer needs a provider")
        eta, per_peak = similarity_eta(per_peak_windows, provider)
    elif scorer == "wmd":
        if word_vectors is None:
            raise ValueError("wmd scorer needs word vectors")
        eta, per_peak, flags = similarity_eta_wmd(per_peak_windows, word_vectors)
    else:
        raise ValueError(f"unknown scorer '{scorer}'")
    if not per_peak:
        flags.append("no scorable windows: similarity = 0")
    return CommentFeatures(similarity=eta, total_comments=total,
                           flags=tuple(flags))


def fuse(v_m: VideoFeatures, v_a: AnomalyFeatures,
         v_c: CommentFeatures, video_id: str = "") -> FusedFeature:
    """Fixed-order 7-vector: metadata (collate) + anomaly + comment parts."""
    if not isinstance(v_m, VideoFeatures):
        raise TypeError("first component must be VideoFeatures")
    if not isinstance(v_a, AnomalyFeatures):
        raise TypeError("second component must be AnomalyFeatures")
    if not isinstance(v_c, CommentFeatures):
        raise TypeError("third component must be CommentFeatures")
    if v_m.mode != "collate":
        raise ValueError("fusion expects collate-mode video features")
    vec = np.concatenate([v_m.vector(), v_a.vector(), v_c.vector()])
    return FusedFeature(vector=vec, video_id=video_id)
