"""Peak-time comment selection and fixed-size query windows."""

from __future__ import annotations

from dataclasses import dataclass

from .peaks import Peak, peak_interval_seconds
from .records import CommentRecord
from .series import TimeSeries


@dataclass(frozen=True)
class Window:
    query: CommentRecord
    context: tuple[CommentRecord, ...]
    peak_index: int


def select_peak_comments(comments: list[CommentRecord], peaks: list[Peak],
                         series: TimeSeries) -> dict[int, list[CommentRecord]]:
    """Assign comments to the peak interval containing their timestamp.

    Intervals are closed on both ends; when intervals overlap, the earlier
    peak claims the comment so per-peak sets stay disjoint. ``comments``
    must be sorted by timestamp; peaks must be in series-bin coordinates.
    """
    intervals = [peak_interval_seconds(p, series) for p in peaks]
    out: dict[int, list[CommentRecord]] = {i: [] for i in range(len(peaks))}
    for comment in comments:
        for i, (start, end) in enumerate(intervals):
            if start <= comment.timestamp <= end:
                out[i].append(comment)
                break
    return {i: lst for i, lst in out.items() if lst}


def make_windows(peak_comments: list[CommentRecord], w: int,
                 peak_index: int = 0) -> list[Window]:
    """Slide a width-``w`` window over one peak's comments.

    The last comment of each window is the query, the rest its context.
    Peaks with fewer than ``w`` comments but at least 2 yield a single
    window over everything; fewer than 2 comments yield none.
    """
    if w < 2:
        raise ValueError("window size must be >= 2")
    n = len(peak_comments)
    if n < 2:
        return []
    if n < w:
        return [Window(query=peak_comments[-1],
                       context=tuple(peak_comments[:-1]),
                       peak_index=peak_index)]
    windows = []
    for j in range(n - w + 1):
        chunk = peak_comments[j:j + w]
        windows.append(Window(query=chunk[-1], context=tuple(chunk[:-1]),
                              peak_index=peak_index))
    return windows
