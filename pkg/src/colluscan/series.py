"""Binned comment-count time series for one video."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .records import CommentRecord

DAY = 86400


@dataclass(frozen=True)
class TimeSeries:
    video_id: str
    bin_width: int
    t0: int
    values: np.ndarray  # shape (n_bins,) for the univariate default
    mode: str  # "cumulative" or "increment"

    def __len__(self) -> int:
        return len(self.values)

    def to_increment(self) -> "TimeSeries":
        if self.mode == "increment":
            return self
        vals = np.diff(self.values, prepend=0.0)
        return TimeSeries(self.video_id, self.bin_width, self.t0, vals, "increment")

    def to_cumulative(self) -> "TimeSeries":
        if self.mode == "cumulative":
            return self
        vals = np.cumsum(self.values)
        return TimeSeries(self.video_id, self.bin_width, self.t0, vals, "cumulative")


def build_time_series(comments: list[CommentRecord], bin_width: int = DAY,
                      mode: str = "increment") -> TimeSeries:
    """Bin one video's comments into fixed-width counts.

    Bins are anchored at the first comment and span through the last one
    inclusive. Cumulative mode gives running totals, increment mode per-bin
    counts; prefix-summing the latter reproduces the former exactly.
    """
    if not comments:
        raise ValueError("cannot build a time series from zero comments")
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if mode not in ("cumulative", "increment"):
        raise ValueError(f"unknown mode '{mode}'")
    video_id = comments[0].video_id
    times = np.array([c.timestamp for c in comments], dtype=np.int64)
    t0 = int(times.min())
    n_bins = int((times.max() - t0) // bin_width) + 1
    idx = (times - t0) // bin_width
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    if mode == "cumulative":
        counts = np.cumsum(counts)
    return TimeSeries(video_id=video_id, bin_width=int(bin_width), t0=t0,
                      values=counts, mode=mode)
