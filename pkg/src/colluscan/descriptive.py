"""Descriptive corpus distributions and propagation summary tables."""

from __future__ import annotations

from importlib import resources

from .records import Corpus, GENRES

COUNT_BUCKETS = ("zero_one", "low", "medium", "high")
DAY_THRESHOLDS = (1, 7, 30, 90, 365)

_STOPWORDS: frozenset | None = None


def stopwords() -> frozenset:
    """Bundled stopword list (versioned resource, keeps term counts reproducible)."""
    global _STOPWORDS
    if _STOPWORDS is None:
        text = resources.files("colluscan").joinpath(
            "resources/stopwords.txt").read_text(encoding="utf-8")
        _STOPWORDS = frozenset(
            w.strip() for w in text.splitlines()
            if w.strip() and not w.startswith("#"))
    return _STOPWORDS


def count_bucket(count: int) -> str:
    """Bucket edges exactly as reported: low is 1 < c < 100, medium is
    100 <= c <= 1000, high is c > 1000; 0 and 1 get their own bucket."""
    if count <= 1:
        return "zero_one"
    if count < 100:
        return "low"
    if count <= 1000:
        return "medium"
    return "high"


def term_frequencies(titles) -> dict[str, int]:
    """Lowercase, drop stopwords and tokens of length <= 2, count the rest."""
    sw = stopwords()
    freq: dict[str, int] = {}
    for title in titles:
        token = []
        for ch in title.lower():
            if ch.isalnum():
                token.append(ch)
                continue
            word = "".join(token)
            token = []
            if len(word) > 2 and word not in sw:
                freq[word] = freq.get(word, 0) + 1
        word = "".join(token)
        if len(word) > 2 and word not in sw:
            freq[word] = freq.get(word, 0) + 1
    return freq


def descriptive_distributions(corpus: Corpus) -> dict:
    """Genre histogram, title terms, count buckets, and country histogram."""
    genre_hist = {g: 0 for g in GENRES}
    for v in corpus.videos:
        genre_hist[v.genre] += 1

    terms = term_frequencies(v.title for v in corpus.videos)

    buckets = {}
    for field in ("video_count", "subscriber_count", "view_count"):
        hist = {b: 0 for b in COUNT_BUCKETS}
        for c in corpus.channels:
            hist[count_bucket(getattr(c, field))] += 1
        buckets[field] = hist

    country_hist: dict[str, int] = {"unspecified": 0}
    for c in corpus.channels:
        key = c.country if c.country else "unspecified"
        country_hist[key] = country_hist.get(key, 0) + 1

    return {
        "genre_histogram": genre_hist,
        "title_term_frequencies": dict(
            sorted(terms.items(), key=lambda kv: (-kv[1], kv[0]))),
        "count_buckets": buckets,
        "country_histogram": country_hist,
    }


def propagation_report(per_video_metrics: dict[str, dict]) -> dict:
    """Cumulative fractions of burst delays and lifetimes at day thresholds.

    ``per_video_metrics`` maps video id to the propagation metrics dict;
    videos without peaks are excluded from the CDF denominators and
    counted separately.
    """
    bursts, lifetimes, no_peaks = [], [], 0
    for metrics in per_video_metrics.values():
        if metrics["initial_burst_days"] is None:
            no_peaks += 1
            continue
        bursts.append(metrics["initial_burst_days"])
        lifetimes.append(metrics["lifetime_days"])

    def cdf(values):
        if not values:
            return {}
        n = len(values)
        return {str(day): sum(1 for v in values if v <= day) / n
                for day in DAY_THRESHOLDS}

    return {
        "n_videos_with_peaks": len(bursts),
        "n_videos_without_peaks": no_peaks,
        "initial_burst_cdf": cdf(bursts),
        "lifetime_cdf": cdf(lifetimes),
    }
