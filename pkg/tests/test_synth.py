import numpy as np
import pytest

from colluscan.records import save_corpus
from colluscan.synth import (DAY, BurstSpec, SyntheticConfig,
                             generate_synthetic_corpus)


def small_config(**overrides):
    base = dict(n_collusive=8, n_organic=8, seed=5)
    base.update(overrides)
    return SyntheticConfig(**base)


def test_label_counts_exact():
    corpus = generate_synthetic_corpus(small_config(n_collusive=6, n_organic=9))
    labels = [v.label for v in corpus.videos]
    assert labels.count("collusive") == 6
    assert labels.count("other") == 9
    channel_labels = [c.label for c in corpus.channels]
    assert channel_labels.count("collusive") == 6
    assert channel_labels.count("other") == 9


def test_same_seed_byte_identical_files(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    save_corpus(generate_synthetic_corpus(small_config()), a)
    save_corpus(generate_synthetic_corpus(small_config()), b)
    for name in ("videos.jsonl", "comments.jsonl", "channels.jsonl",
                 "subscriptions.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_different_seed_differs():
    c1 = generate_synthetic_corpus(small_config(seed=1))
    c2 = generate_synthetic_corpus(small_config(seed=2))
    assert c1.videos != c2.videos


def test_every_collusive_video_has_audited_burst():
    config = small_config(n_collusive=20, n_organic=5, seed=11)
    corpus, trace = generate_synthetic_corpus(config, with_trace=True)
    by_video = corpus.comments_by_video()
    multiplier = config.burst.rate_multiplier
    for v in corpus.videos:
        if v.label != "collusive":
            continue
        stamps = np.array([c.timestamp for c in by_video[v.video_id]])
        organic_rate = trace[v.video_id]["organic_rate_per_day"]
        ok = False
        for burst in trace[v.video_id]["bursts"]:
            lo = burst["start"]
            hi = lo + burst["duration_days"] * DAY
            inside = int(((stamps >= lo) & (stamps <= hi)).sum())
            rate = inside / max(burst["duration_days"], 1e-9)
            if rate >= (multiplier / 2.0) * organic_rate:
                ok = True
                break
        assert ok, v.video_id


def test_collusive_metadata_skew():
    corpus = generate_synthetic_corpus(small_config(n_collusive=30,
                                                    n_organic=30, seed=3))
    def mean_ratio(label, num, den):
        vals = [getattr(v, num) / max(getattr(v, den), 1)
                for v in corpus.videos if v.label == label]
        return float(np.mean(vals))

    # collusive videos: inflated likes per view, very few dislikes
    assert mean_ratio("collusive", "likes", "views") > \
        3 * mean_ratio("other", "likes", "views")
    beta_coll = np.mean([v.dislikes / max(v.likes + v.dislikes, 1)
                         for v in corpus.videos if v.label == "collusive"])
    beta_org = np.mean([v.dislikes / max(v.likes + v.dislikes, 1)
                        for v in corpus.videos if v.label == "other"])
    assert beta_coll < beta_org


def test_collusive_channels_share_subscribers():
    corpus = generate_synthetic_corpus(small_config(n_collusive=20,
                                                    n_organic=20, seed=9))
    collusive = {c.channel_id for c in corpus.channels
                 if c.label == "collusive"}
    subs: dict = {}
    for e in corpus.subscriptions:
        subs.setdefault(e.channel_id, set()).add(e.subscriber_id)
    shared = 0
    ids = sorted(collusive)
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if subs.get(ids[i], set()) & subs.get(ids[j], set()):
                shared += 1
    assert shared > len(ids)  # exchange pool wires a dense co-subscriber graph


def test_comment_count_field_matches_generated():
    corpus = generate_synthetic_corpus(small_config())
    by_video = corpus.comments_by_video()
    for v in corpus.videos:
        assert v.comment_count == len(by_video.get(v.video_id, []))


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        generate_synthetic_corpus(small_config(organic_rate_per_day=0.0))
    with pytest.raises(ValueError):
        generate_synthetic_corpus(small_config(
            burst=BurstSpec(near_duplicate_prob=1.5)))
    with pytest.raises(ValueError):
        generate_synthetic_corpus(small_config(n_collusive=-1))


def test_timestamps_not_before_publish():
    corpus = generate_synthetic_corpus(small_config())
    publish = {v.video_id: v.publish_time for v in corpus.videos}
    for c in corpus.comments:
        assert c.timestamp >= publish[c.video_id]
