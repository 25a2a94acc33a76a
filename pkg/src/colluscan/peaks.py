"""Peak geometry over anomaly-score sequences and propagation metrics.

Peak finding follows the classic signal-processing semantics: a peak is a
strict local maximum (plateaus resolve to their midpoint), filtered by
height and prominence; widths are measured at a level interpolated between
the apex and its prominence base. scipy provides the crossings, the
trapezoidal peak area and everything downstream is computed here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import find_peaks, peak_widths

from .records import VideoRecord
from .series import TimeSeries

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class Peak:
    apex: int
    height: float
    left: float
    right: float
    width: float
    area: float


@dataclass(frozen=True)
class AnomalyFeatures:
    peak_count: int
    avg_peak_area: float

    def vector(self) -> np.ndarray:
        return np.array([self.peak_count, self.avg_peak_area], dtype=float)


@dataclass(frozen=True)
class PeakParams:
    min_height: float = 0.0
    min_prominence: float = 0.0
    width_eval_rel_height: float = 0.5


def detect_peaks(scores: np.ndarray, params: PeakParams) -> list[Peak]:
    """Find peaks with height/prominence thresholds and interpolated widths.

    The area is the trapezoidal integral of the (piecewise-linear) score
    signal between the interpolated left and right crossings, clipped
    below at zero. An empty list is a valid result.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or len(scores) == 0:
        raise ValueError("scores must be a non-empty 1-D sequence")
    apexes, props = find_peaks(scores, height=params.min_height,
                               prominence=params.min_prominence)
    if len(apexes) == 0:
        return []
    widths, _, lefts, rights = peak_widths(
        scores, apexes, rel_height=params.width_eval_rel_height,
        prominence_data=(props["prominences"], props["left_bases"],
                         props["right_bases"]))
    peaks = []
    for apex, width, left, right in zip(apexes, widths, lefts, rights):
        area = _segment_area(scores, float(left), float(right))
        peaks.append(Peak(apex=int(apex), height=float(scores[apex]),
                          left=float(left), right=float(right),
                          width=float(width), area=area))
    return peaks


def _segment_area(scores: np.ndarray, left: float, right: float) -> float:
    """Trapezoidal integral of the linearly-interpolated signal on [left, right]."""
    if right <= left:
        return 0.0
    xs = [left]
    first = int(np.ceil(left))
    last = int(np.floor(right))
    xs.extend(float(i) for i in range(first, last + 1) if left < i < right)
    xs.append(right)
    xs = np.asarray(xs)
    ys = np.interp(xs, np.arange(len(scores)), scores)
    ys = np.clip(ys, 0.0, None)
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    return float(trapezoid(ys, xs))


def anomaly_features(peaks: list[Peak]) -> AnomalyFeatures:
    """Peak count and mean peak area (zero for a peakless video)."""
    if not peaks:
        return AnomalyFeatures(peak_count=0, avg_peak_area=0.0)
    return AnomalyFeatures(
        peak_count=len(peaks),
        avg_peak_area=float(np.mean([p.area for p in peaks])),
    )


def shift_peaks(peaks: list[Peak], offset: int) -> list[Peak]:
    """Translate peak geometry from score-sequence positions to series bins.

    Anomaly scores start ``offset`` bins into the series (the predictor
    needs a full horizon of history), so peak positions must be shifted
    before they are compared against comment timestamps.
    """
    return [replace(p, apex=p.apex + offset, left=p.left + offset,
                    right=p.right + offset) for p in peaks]


def peak_interval_seconds(peak: Peak, series: TimeSeries) -> tuple[float, float]:
    """Closed wall-clock interval [start, end] covered by a peak."""
    start = series.t0 + peak.left * series.bin_width
    end = series.t0 + peak.right * series.bin_width
    return start, end


def propagation_metrics(peaks: list[Peak], series: TimeSeries,
                        video: VideoRecord) -> dict:
    """Initial burst delay and collusion-episode lifetime, in days.

    Both are None when no peaks were detected. Peaks must already be in
    series-bin coordinates (see :func:`shift_peaks`).
    """
    if not peaks:
        return {"initial_burst_days": None, "lifetime_days": None}
    ordered = sorted(peaks, key=lambda p: p.apex)
    first, last = ordered[0], ordered[-1]
    burst_time = series.t0 + first.left * series.bin_width
    initial_burst = (burst_time - video.publish_time) / SECONDS_PER_DAY
    lifetime = (last.right - first.left) * series.bin_width / SECONDS_PER_DAY
    return {"initial_burst_days": initial_burst, "lifetime_days": lifetime}
