import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colluscan.metadata import (extract_channel_features,
                                extract_video_features, rating)
from colluscan.records import ChannelRecord

from conftest import NOW, video


def test_activeness_direct_ratio():
    feats = extract_video_features(video(likes=50, views=200), now=NOW)
    assert feats.activeness == 0.25


def test_favorability_and_view_rate():
    v = video(likes=30, dislikes=10, views=700,
              publish_time=NOW - 7 * 86400)
    feats = extract_video_features(v, now=NOW)
    assert feats.favorability == pytest.approx(0.25)
    assert feats.view_rate == pytest.approx(100.0)


def test_zero_denominators_flagged():
    v = video(likes=0, dislikes=0, views=0)
    feats = extract_video_features(v, now=NOW)
    assert feats.activeness == 0.0
    assert feats.favorability == 0.0
    assert len(feats.flags) == 2


def test_duration_is_seconds():
    feats = extract_video_features(video(duration_s=360), now=NOW)
    assert feats.duration == 360.0


def test_collate_mode_drops_view_rate_only():
    v = video(likes=30, dislikes=10, views=700)
    full = extract_video_features(v, mode="full", now=NOW)
    collate = extract_video_features(v, mode="collate", now=NOW)
    assert collate.view_rate is None
    assert collate.vector().shape == (3,)
    assert full.vector().shape == (4,)
    np.testing.assert_array_equal(collate.vector(),
                                  np.delete(full.vector(), 2))


def test_just_published_video_age_floor():
    v = video(publish_time=NOW, views=100)
    feats = extract_video_features(v, now=NOW)
    assert np.isfinite(feats.view_rate)
    assert feats.view_rate == pytest.approx(100 * 86400)


@given(scale=st.integers(min_value=1, max_value=1000))
@settings(max_examples=30, deadline=None)
def test_favorability_scale_invariant(scale):
    base = extract_video_features(video(likes=30, dislikes=10), now=NOW)
    scaled = extract_video_features(
        video(likes=30 * scale, dislikes=10 * scale), now=NOW)
    assert scaled.favorability == pytest.approx(base.favorability)


@given(scale=st.integers(min_value=1, max_value=1000))
@settings(max_examples=30, deadline=None)
def test_activeness_linear_in_likes(scale):
    base = extract_video_features(video(likes=3, views=600), now=NOW)
    scaled = extract_video_features(video(likes=3 * scale, views=600), now=NOW)
    assert scaled.activeness == pytest.approx(base.activeness * scale)


def channel(**overrides):
    fields = dict(channel_id="ch1", title="t", country=None,
                  hidden_subscriber_count=1, video_count=10,
                  subscriber_count=100, view_count=1000, comment_count=50)
    fields.update(overrides)
    return ChannelRecord(**fields)


def test_channel_vector_fixed_order():
    vec = extract_channel_features(channel()).vector()
    np.testing.assert_array_equal(vec, [1, 10, 100, 1000, 50])


def test_channel_zero_vector():
    vec = extract_channel_features(channel(
        hidden_subscriber_count=0, video_count=0, subscriber_count=0,
        view_count=0, comment_count=0)).vector()
    np.testing.assert_array_equal(vec, np.zeros(5))


def test_rating_report_field():
    assert rating(video(likes=9, dislikes=1)) == pytest.approx(0.9)
    assert rating(video(likes=0, dislikes=0)) is None
