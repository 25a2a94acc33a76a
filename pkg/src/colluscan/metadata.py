"""Static per-video and per-channel feature extraction.

Video features: activeness (likes per view), favorability (dislike share of
rated actions), view rate (views per day of age), and duration in seconds.
The collate mode drops view rate, since genuinely popular videos can match
collusive ones on that axis. Channel features are the five raw counts in a
fixed order. Both extractors are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .records import ChannelRecord, VideoRecord

SECONDS_PER_DAY = 86400.0

VIDEO_FEATURE_NAMES_FULL = ("activeness", "favorability", "view_rate", "duration")
VIDEO_FEATURE_NAMES_COLLATE = ("activeness", "favorability", "duration")
CHANNEL_FEATURE_NAMES = (
    "hidden_subscriber_count", "video_count", "subscriber_count",
    "view_count", "comment_count",
)


@dataclass(frozen=True)
class VideoFeatures:
    activeness: float
    favorability: float
    view_rate: Optional[float]
    duration: float
    mode: str  # "full" or "collate"
    flags: tuple[str, ...] = ()

    def vector(self) -> np.ndarray:
        if self.mode == "full":
            return np.array(
                [self.activeness, self.favorability, self.view_rate, self.duration],
                dtype=float,
            )
        return np.array(
            [self.activeness, self.favorability, self.duration], dtype=float
        )


@dataclass(frozen=True)
class ChannelFeatures:
    hidden_subscriber_count: int
    video_count: int
    subscriber_count: int
    view_count: int
    comment_count: int

    def vector(self) -> np.ndarray:
        return np.array(
            [self.hidden_subscriber_count, self.video_count, self.subscriber_count,
             self.view_count, self.comment_count],
            dtype=float,
        )


def extract_video_features(video: VideoRecord, mode: str = "full",
                           now: Optional[int] = None) -> VideoFeatures:
    """Compute the four static video features at reference time ``now``.

    Zero denominators fall back to 0 and are flagged; video age is floored
    at one second's worth of days so just-published videos do not blow up
    the view rate.
    """
    if mode not in ("full", "collate"):
        raise ValueError(f"unknown mode '{mode}'")
    if now is None:
        import time
        now = int(time.time())
    if now < video.publish_time:
        raise ValueError("reference time precedes publish time")
    flags = []
    if video.views > 0:
        activeness = video.likes / video.views
    else:
        activeness = 0.0
        flags.append("activeness: views = 0")
    rated = video.likes + video.dislikes
    if rated > 0:
        favorability = video.dislikes / rated
    else:
        favorability = 0.0
        flags.append("favorability: likes + dislikes = 0")
    view_rate: Optional[float] = None
    if mode == "full":
        age_days = max((now - video.publish_time) / SECONDS_PER_DAY,
                       1.0 / SECONDS_PER_DAY)
        view_rate = video.views / age_days
    return VideoFeatures(
        activeness=activeness,
        favorability=favorability,
        view_rate=view_rate,
        duration=float(video.duration_s),
        mode=mode,
        flags=tuple(flags),
    )


def extract_channel_features(channel: ChannelRecord) -> ChannelFeatures:
    """Five raw counts in the fixed order (hidden, video, subscriber, view, comment)."""
    return ChannelFeatures(
        hidden_subscriber_count=channel.hidden_subscriber_count,
        video_count=channel.video_count,
        subscriber_count=channel.subscriber_count,
        view_count=channel.view_count,
        comment_count=channel.comment_count,
    )


def rating(video: VideoRecord) -> Optional[float]:
    """Likes share of rated actions; a report field, not a model feature."""
    rated = video.likes + video.dislikes
    if rated == 0:
        return None
    return video.likes / rated
