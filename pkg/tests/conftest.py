import numpy as np
import pytest

from colluscan.records import CommentRecord, VideoRecord

NOW = 1_700_000_000


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def video(video_id="v1", publish_time=NOW - 30 * 86400, views=1000, likes=50,
          dislikes=10, duration_s=300, genre="MU", label=None,
          comment_count=0):
    return VideoRecord(
        video_id=video_id, channel_id="ch1", publish_time=publish_time,
        duration_s=duration_s, views=views, likes=likes, dislikes=dislikes,
        comment_count=comment_count, genre=genre, title="free best video 1",
        uploader_verified=False, label=label,
    )


def comment(comment_id, video_id="v1", timestamp=NOW - 86400, text="nice"):
    return CommentRecord(comment_id=comment_id, video_id=video_id,
                         author_id="a1", text=text, timestamp=timestamp)


@pytest.fixture
def make_video():
    return video


@pytest.fixture
def make_comment():
    return comment
