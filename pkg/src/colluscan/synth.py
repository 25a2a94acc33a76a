"""Seeded synthetic corpus with ground-truth collusion labels.

Organic videos accumulate comments from a homogeneous Poisson process with
per-video rate jitter. Collusive videos add burst windows of multiplied
rate whose comments are near-duplicate variants of pool texts, and their
engagement counts skew the way collusive entities do: inflated likes per
view, very few dislikes. Collusive channels draw subscribers from a shared
exchange pool, which wires them into a dense co-subscriber graph.
Everything is a pure function of the config and its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .records import (ChannelRecord, CommentRecord, Corpus, SubscriptionEdge,
                      VideoRecord)

REFERENCE_NOW = 1_700_000_000  # fixed "ingestion" instant for determinism
DAY = 86400

DEFAULT_POOL = (
    "nice video bro",
    "please check my channel",
    "subscribe back and like",
    "great content keep it up",
    "awesome video love it",
    "supporting your channel friend",
    "done liked and subscribed",
    "wow amazing work",
    "this deserves more views",
    "watching from my phone great stuff",
)

ORGANIC_VOCAB = (
    "really enjoyed the part about music editing today thanks for sharing "
    "interesting tutorial camera settings learned something new good "
    "explanation never knew that tried this recipe worked out weather advice "
    "helped me finish my project question about the second step could you "
    "slow down next time funny moment at the end my dog loved it rewatching "
    "again first time here found this randomly"
).split()

PROMO_WORDS = ("free", "best", "top", "viral", "giveaway", "boost")
PLAIN_WORDS = ("diary", "vlog", "update", "review", "lesson", "walkthrough")

GENRE_POOL_COLLUSIVE = ("MU", "MU", "MU", "EN", "GA", "PB", "HS")
GENRE_POOL_ORGANIC = ("MU", "EN", "GA", "PB", "ED", "ST", "TE", "CO", "NP", "SP")


@dataclass(frozen=True)
class BurstSpec:
    count_range: tuple[int, int] = (30, 120)
    rate_multiplier: float = 25.0
    duration_range_days: tuple[float, float] = (1.0, 3.0)
    near_duplicate_prob: float = 0.9


@dataclass(frozen=True)
class SyntheticConfig:
    n_collusive: int = 200
    n_organic: int = 200
    organic_rate_per_day: float = 1.5
    burst: BurstSpec = field(default_factory=BurstSpec)
    comment_pool: tuple[str, ...] = DEFAULT_POOL
    n_exchange_subscribers: int = 0  # 0 = twice n_collusive (sparse projection)
    exchange_subscriptions: tuple[int, int] = (2, 5)
    organic_subscriptions: tuple[int, int] = (2, 8)
    window_days: tuple[float, float] = (60.0, 120.0)
    seed: int = 0

    def validate(self) -> None:
        if self.n_collusive < 0 or self.n_organic < 0:
            raise ValueError("entity counts must be non-negative")
        if self.organic_rate_per_day <= 0:
            raise ValueError("organic rate must be positive")
        if not (0.0 <= self.burst.near_duplicate_prob <= 1.0):
            raise ValueError("near-duplicate probability must be in [0, 1]")
        if self.burst.rate_multiplier <= 0:
            raise ValueError("rate multiplier must be positive")
        if self.burst.count_range[0] < 1 or self.burst.count_range[0] > self.burst.count_range[1]:
            raise ValueError("bad burst count range")

    def to_obj(self) -> dict:
        obj = asdict(self)
        return obj


def _perturb(text: str, rng: np.random.Generator) -> str:
    """Small edits that keep the surface form recognizably the same."""
    suffixes = ("", "!", "!!", " pls", " now", " :)", "?")
    out = text + suffixes[int(rng.integers(0, len(suffixes)))]
    if rng.random() < 0.3:
        out = out.capitalize()
    if rng.random() < 0.2 and " " in out:
        words = out.split(" ")
        i = int(rng.integers(0, len(words)))
        words.insert(i, words[i])
        out = " ".join(words)
    return out


def _organic_text(rng: np.random.Generator) -> str:
    n = int(rng.integers(4, 11))
    idx = rng.integers(0, len(ORGANIC_VOCAB), size=n)
    return " ".join(ORGANIC_VOCAB[i] for i in idx)


def _title(rng: np.random.Generator, collusive: bool) -> str:
    words = PROMO_WORDS if collusive else PLAIN_WORDS
    a = words[int(rng.integers(0, len(words)))]
    b = words[int(rng.integers(0, len(words)))]
    return f"{a} {b} video {int(rng.integers(1, 100))}"


def generate_synthetic_corpus(config: SyntheticConfig,
                              with_trace: bool = False):
    """Build the corpus; ``with_trace=True`` also returns the per-video
    generation parameters (organic rate, burst windows) for audit passes."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    corpus = Corpus()
    trace: dict[str, dict] = {}
    comment_serial = 0

    def add_comments(video_id: str, times: np.ndarray, texts: list[str]):
        nonlocal comment_serial
        order = np.argsort(times, kind="stable")
        for k in order:
            comment_serial += 1
            corpus.comments.append(CommentRecord(
                comment_id=f"c{comment_serial:07d}",
                video_id=video_id,
                author_id=f"a{int(rng.integers(0, 5000)):05d}",
                text=texts[k],
                timestamp=int(times[k]),
            ))

    n_total = config.n_collusive + config.n_organic
    for v_idx in range(n_total):
        collusive = v_idx < config.n_collusive
        video_id = f"v{v_idx:05d}"
        window = rng.uniform(*config.window_days)
        publish = int(REFERENCE_NOW - window * DAY)
        rate = config.organic_rate_per_day * float(rng.lognormal(0.0, 0.35))

        n_base = int(rng.poisson(rate * window))
        times = publish + rng.uniform(0.0, window * DAY, size=n_base)
        texts = [_organic_text(rng) for _ in range(n_base)]
        bursts = []

        if collusive:
            for _ in range(int(rng.integers(1, 4))):
                dur = float(rng.uniform(*config.burst.duration_range_days))
                target_rate = config.burst.rate_multiplier * rate
                n_burst = max(config.burst.count_range[0],
                              int(round(target_rate * dur)))
                if n_burst > config.burst.count_range[1]:
                    n_burst = config.burst.count_range[1]
                    dur = n_burst / target_rate
                start = rng.uniform(0.05, 0.8) * window
                burst_times = publish + (start + rng.uniform(0, dur, size=n_burst)) * DAY
                pool_text = config.comment_pool[
                    int(rng.integers(0, len(config.comment_pool)))]
                burst_texts = []
                for _ in range(n_burst):
                    if rng.random() < config.burst.near_duplicate_prob:
                        burst_texts.append(_perturb(pool_text, rng))
                    else:
                        burst_texts.append(_organic_text(rng))
                times = np.concatenate([times, burst_times])
                texts.extend(burst_texts)
                bursts.append({"start": publish + start * DAY,
                               "duration_days": dur, "count": n_burst})

        add_comments(video_id, times, texts)
        trace[video_id] = {"organic_rate_per_day": rate, "bursts": bursts,
                           "window_days": window}

        if collusive:
            # a behaviorally homogeneous population: inflated likes per
            # view, almost no dislikes, short videos
            views = int(rng.lognormal(8.0, 0.3)) + 50
            alpha = max(float(rng.normal(0.25, 0.04)), 0.01)
            beta = abs(float(rng.normal(0.02, 0.012)))
            duration_s = max(int(rng.normal(270, 40)), 60)
        else:
            views = int(rng.lognormal(8.0, 0.8)) + 50
            alpha = rng.uniform(0.002, 0.02)
            beta = rng.uniform(0.1, 0.4)
            duration_s = int(rng.uniform(300, 1800))
        likes = max(int(views * alpha), 1)
        dislikes = int(likes * beta / max(1.0 - beta, 1e-9))
        genres = GENRE_POOL_COLLUSIVE if collusive else GENRE_POOL_ORGANIC
        corpus.videos.append(VideoRecord(
            video_id=video_id,
            channel_id=f"ch{v_idx:05d}",
            publish_time=publish,
            duration_s=duration_s,
            views=views,
            likes=likes,
            dislikes=dislikes,
            comment_count=len(times),
            genre=genres[int(rng.integers(0, len(genres)))],
            title=_title(rng, collusive),
            uploader_verified=bool(rng.random() < (0.02 if collusive else 0.1)),
            label="collusive" if collusive else "other",
        ))

    _add_channels(config, rng, corpus)
    if with_trace:
        return corpus, trace
    return corpus


def _add_channels(config: SyntheticConfig, rng: np.random.Generator,
                  corpus: Corpus) -> None:
    organic_serial = 0
    pool_size = config.n_exchange_subscribers or max(2 * config.n_collusive, 8)
    for c_idx in range(config.n_collusive + config.n_organic):
        collusive = c_idx < config.n_collusive
        channel_id = f"ch{c_idx:05d}"
        if collusive:
            record = ChannelRecord(
                channel_id=channel_id,
                title=_title(rng, True),
                country=("US", "ID", "IN", None)[int(rng.integers(0, 4))],
                hidden_subscriber_count=int(rng.lognormal(3.0, 0.3)),
                video_count=int(rng.lognormal(4.7, 0.3)),
                subscriber_count=int(rng.lognormal(10.0, 0.3)),
                view_count=int(rng.lognormal(15.5, 0.3)),
                comment_count=int(rng.lognormal(6.0, 0.3)),
                label="collusive",
            )
            lo, hi = config.exchange_subscriptions
            n_subs = int(rng.integers(lo, hi + 1))
            pool = rng.choice(pool_size, size=min(n_subs, pool_size),
                              replace=False)
            for s in sorted(int(p) for p in pool):
                corpus.subscriptions.append(SubscriptionEdge(
                    channel_id=channel_id, subscriber_id=f"xs{s:05d}"))
        else:
            record = ChannelRecord(
                channel_id=channel_id,
                title=_title(rng, False),
                country=("US", "GB", "DE", "BR", "JP", None)[int(rng.integers(0, 6))],
                hidden_subscriber_count=int(rng.random() < 0.1),
                video_count=int(rng.lognormal(3.0, 1.2)),
                subscriber_count=int(rng.lognormal(7.0, 2.0)),
                view_count=int(rng.lognormal(10.0, 2.5)),
                comment_count=int(rng.lognormal(4.0, 1.5)),
                label="other",
            )
            lo, hi = config.organic_subscriptions
            for _ in range(int(rng.integers(lo, hi + 1))):
                organic_serial += 1
                corpus.subscriptions.append(SubscriptionEdge(
                    channel_id=channel_id,
                    subscriber_id=f"os{organic_serial:06d}"))
        corpus.channels.append(record)
