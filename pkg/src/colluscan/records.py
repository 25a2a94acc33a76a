"""Domain records, line-delimited corpus ingestion, and validation.

Every corpus lives on disk as four line-delimited UTF-8 JSON files
(``videos.jsonl``, ``comments.jsonl``, ``channels.jsonl``,
``subscriptions.jsonl``), one object per line, timestamps as integer UNIX
seconds. Malformed lines are rejected with a line number and reason, never
dropped silently; suspicious-but-usable records (e.g. a comment timestamped
before its video was published) are accepted and flagged.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Optional

GENRES = (
    "GA", "EN", "TE", "FA", "MU", "PB", "AV", "ED",
    "CO", "NP", "HS", "ST", "SP", "PA", "NA",
)

LABELS = ("collusive", "other")

CORPUS_FILES = {
    "videos": "videos.jsonl",
    "comments": "comments.jsonl",
    "channels": "channels.jsonl",
    "subscriptions": "subscriptions.jsonl",
}


class CorpusError(Exception):
    """Fatal corpus problem (unreadable file, unusable after validation)."""


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    channel_id: str
    publish_time: int
    duration_s: int
    views: int
    likes: int
    dislikes: int
    comment_count: int
    genre: str
    title: str
    uploader_verified: bool
    label: Optional[str] = None


@dataclass(frozen=True)
class CommentRecord:
    comment_id: str
    video_id: str
    author_id: str
    text: str
    timestamp: int


@dataclass(frozen=True)
class ChannelRecord:
    channel_id: str
    title: str
    country: Optional[str]
    hidden_subscriber_count: int
    video_count: int
    subscriber_count: int
    view_count: int
    comment_count: int
    label: Optional[str] = None


@dataclass(frozen=True)
class SubscriptionEdge:
    channel_id: str
    subscriber_id: str


@dataclass
class RejectedLine:
    line_no: int
    reason: str


@dataclass
class Flag:
    record_id: str
    reason: str


@dataclass
class LoadReport:
    kind: str
    accepted: int = 0
    rejected: list[RejectedLine] = field(default_factory=list)
    flagged: list[Flag] = field(default_factory=list)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    @property
    def n_flagged(self) -> int:
        return len(self.flagged)


@dataclass
class Corpus:
    """Immutable after load; safe to share read-only across workers."""

    videos: list[VideoRecord] = field(default_factory=list)
    comments: list[CommentRecord] = field(default_factory=list)
    channels: list[ChannelRecord] = field(default_factory=list)
    subscriptions: list[SubscriptionEdge] = field(default_factory=list)

    def comments_of(self, video_id: str) -> list[CommentRecord]:
        return [c for c in self.comments if c.video_id == video_id]

    def comments_by_video(self) -> dict[str, list[CommentRecord]]:
        out: dict[str, list[CommentRecord]] = {}
        for c in self.comments:
            out.setdefault(c.video_id, []).append(c)
        for lst in out.values():
            lst.sort(key=lambda c: (c.timestamp, c.comment_id))
        return out

    def video_by_id(self) -> dict[str, VideoRecord]:
        return {v.video_id: v for v in self.videos}


def _require(obj: dict, name: str):
    if name not in obj:
        raise ValueError(f"missing field '{name}'")
    return obj[name]


def _as_count(obj: dict, name: str) -> int:
    raw = _require(obj, name)
    if isinstance(raw, bool) or not isinstance(raw, int):
        raise ValueError(f"field '{name}' must be an integer")
    if raw < 0:
        raise ValueError("count < 0")
    return raw


def _as_str(obj: dict, name: str) -> str:
    raw = _require(obj, name)
    if not isinstance(raw, str) or not raw:
        raise ValueError(f"field '{name}' must be a non-empty string")
    return raw


def _as_label(obj: dict) -> Optional[str]:
    raw = obj.get("label")
    if raw is None:
        return None
    if raw not in LABELS:
        raise ValueError(f"unknown label '{raw}'")
    return raw


def _parse_video(obj: dict, now: int) -> VideoRecord:
    publish_time = _as_count(obj, "publish_time")
    if publish_time > now:
        raise ValueError("publish_time after ingestion time")
    genre = _as_str(obj, "genre")
    if genre not in GENRES:
        raise ValueError(f"unknown genre '{genre}'")
    verified = _require(obj, "uploader_verified")
    if not isinstance(verified, bool):
        raise ValueError("field 'uploader_verified' must be a boolean")
    title = _require(obj, "title")
    if not isinstance(title, str):
        raise ValueError("field 'title' must be a string")
    return VideoRecord(
        video_id=_as_str(obj, "video_id"),
        channel_id=_as_str(obj, "channel_id"),
        publish_time=publish_time,
        duration_s=_as_count(obj, "duration_s"),
        views=_as_count(obj, "views"),
        likes=_as_count(obj, "likes"),
        dislikes=_as_count(obj, "dislikes"),
        comment_count=_as_count(obj, "comment_count"),
        genre=genre,
        title=title,
        uploader_verified=verified,
        label=_as_label(obj),
    )


def _parse_comment(obj: dict, now: int) -> CommentRecord:
    text = _require(obj, "text")
    if not isinstance(text, str) or not text.strip():
        raise ValueError("empty comment text")
    return CommentRecord(
        comment_id=_as_str(obj, "comment_id"),
        video_id=_as_str(obj, "video_id"),
        author_id=_as_str(obj, "author_id"),
        text=text,
        timestamp=_as_count(obj, "timestamp"),
    )


def _parse_channel(obj: dict, now: int) -> ChannelRecord:
    country = obj.get("country")
    if country is not None and not isinstance(country, str):
        raise ValueError("field 'country' must be a string")
    title = _require(obj, "title")
    if not isinstance(title, str):
        raise ValueError("field 'title' must be a string")
    hidden = obj.get("hidden_subscriber_count")
    # Sources that only expose a boolean flag map true -> 1, false -> 0.
    if isinstance(hidden, bool):
        hidden = int(hidden)
        obj = dict(obj, hidden_subscriber_count=hidden)
    return ChannelRecord(
        channel_id=_as_str(obj, "channel_id"),
        title=title,
        country=country,
        hidden_subscriber_count=_as_count(obj, "hidden_subscriber_count"),
        video_count=_as_count(obj, "video_count"),
        subscriber_count=_as_count(obj, "subscriber_count"),
        view_count=_as_count(obj, "view_count"),
        comment_count=_as_count(obj, "comment_count"),
        label=_as_label(obj),
    )


def _parse_subscription(obj: dict, now: int) -> SubscriptionEdge:
    return SubscriptionEdge(
        channel_id=_as_str(obj, "channel_id"),
        subscriber_id=_as_str(obj, "subscriber_id"),
    )


_PARSERS = {
    "videos": _parse_video,
    "comments": _parse_comment,
    "channels": _parse_channel,
    "subscriptions": _parse_subscription,
}


def load_records(path, kind: str, now: Optional[int] = None):
    """Load one line-delimited record file.

    Returns ``(records, LoadReport)``. Unknown ``kind`` or an unreadable file
    is fatal (:class:`CorpusError`); a malformed line becomes a
    record-level rejection carrying its line number and reason.
    """
    if kind not in _PARSERS:
        raise CorpusError(f"unknown record kind '{kind}'")
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"cannot read {path}")
    if now is None:
        now = int(time.time())
    parser = _PARSERS[kind]
    report = LoadReport(kind=kind)
    records = []
    seen_ids: set = set()
    id_field = {"videos": "video_id", "comments": "comment_id",
                "channels": "channel_id"}.get(kind)
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                rec = parser(obj, now)
            except ValueError as exc:
                report.rejected.append(RejectedLine(line_no, str(exc)))
                continue
            if kind == "subscriptions":
                key = (rec.channel_id, rec.subscriber_id)
            else:
                key = getattr(rec, id_field)
            if key in seen_ids:
                report.rejected.append(RejectedLine(line_no, "duplicate record"))
                continue
            seen_ids.add(key)
            records.append(rec)
            report.accepted += 1
    return records, report


@dataclass
class CorpusReport:
    per_file: dict[str, LoadReport]
    flags: list[Flag] = field(default_factory=list)

    @property
    def accepted(self) -> int:
        return sum(r.accepted for r in self.per_file.values())

    @property
    def n_rejected(self) -> int:
        return sum(r.n_rejected for r in self.per_file.values())

    @property
    def n_flagged(self) -> int:
        return len(self.flags) + sum(r.n_flagged for r in self.per_file.values())


def load_corpus(directory, now: Optional[int] = None):
    """Load every corpus file present under ``directory``.

    Missing files are treated as empty record sets so a corpus may carry
    only the kinds a task needs. Cross-file checks (comment timestamped
    before its video's publish time) flag records without dropping them.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"not a directory: {directory}")
    corpus = Corpus()
    per_file: dict[str, LoadReport] = {}
    for kind, fname in CORPUS_FILES.items():
        path = directory / fname
        if not path.is_file():
            per_file[kind] = LoadReport(kind=kind)
            continue
        records, report = load_records(path, kind, now=now)
        per_file[kind] = report
        setattr(corpus, kind, records)
    report = CorpusReport(per_file=per_file)
    publish = {v.video_id: v.publish_time for v in corpus.videos}
    for c in corpus.comments:
        t0 = publish.get(c.video_id)
        if t0 is not None and c.timestamp < t0:
            report.flags.append(Flag(c.comment_id, "timestamp before video publish"))
    return corpus, report


def _record_to_obj(rec) -> dict:
    obj = asdict(rec)
    return {k: v for k, v in obj.items() if v is not None}


def save_corpus(corpus: Corpus, directory) -> None:
    """Write the four corpus files; loading them back is field-identical."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for kind, fname in CORPUS_FILES.items():
        records = getattr(corpus, kind)
        write_jsonl(directory / fname, (_record_to_obj(r) for r in records))


def write_jsonl(path, objs: Iterable[dict]) -> None:
    """Atomic line-delimited JSON writer (write-temp-then-rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, sort_keys=True) + "\n")
    tmp.replace(path)
