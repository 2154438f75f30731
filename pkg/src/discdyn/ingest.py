"""Reading post archives and turning threads into cumulative step responses.

The initial post of a thread is treated as the unit-step input at ``t = 0``;
the output is the running count of *replies* that follow it.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import IO

import numpy as np

SECONDS_PER_UNIT = {"hour": 3600.0, "day": 86400.0}
TIME_UNITS = tuple(SECONDS_PER_UNIT)

# 3x the largest hour-unit L+T among the reference discussions
DEFAULT_QUIET_WINDOW_HOURS = 72.0


class InputError(ValueError):
    """The post source could not be read."""


class EmptyInputError(InputError):
    """The source was readable but held no usable post records."""


def check_time_unit(time_unit: str) -> str:
    if time_unit not in SECONDS_PER_UNIT:
        raise ValueError(f"time_unit must be one of {TIME_UNITS}, got {time_unit!r}")
    return time_unit


@dataclass(frozen=True)
class PostRecord:
    thread_id: str
    timestamp: datetime
    author: str | None = None

    def __post_init__(self):
        if not self.thread_id:
            raise ValueError("thread_id must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")


@dataclass(frozen=True)
class DiscussionThread:
    thread_id: str
    posts: tuple[PostRecord, ...]

    def __post_init__(self):
        if not self.posts:
            raise ValueError(f"thread {self.thread_id!r} has no posts")
        stamps = [p.timestamp for p in self.posts]
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise ValueError(f"thread {self.thread_id!r} posts are not time-ordered")

    @property
    def initial_post(self) -> PostRecord:
        return self.posts[0]

    @property
    def n_replies(self) -> int:
        return len(self.posts) - 1


@dataclass(frozen=True)
class StepResponseSeries:
    """Cumulative reply count ``y`` against elapsed time ``t`` since the initial post.

    ``horizon`` is the elapsed time at which observation stopped (the archive
    end), when known. ``sampled`` marks noiseless test-mode series produced by
    sampling a closed-form response; their ``y`` values are real-valued samples
    of a continuous curve rather than jumps at reply instants.
    """

    t: np.ndarray
    y: np.ndarray
    time_unit: str = "hour"
    final_count: float = 0
    complete: bool = False
    horizon: float | None = None
    sampled: bool = False
    thread_id: str | None = field(default=None, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "y", y)
        check_time_unit(self.time_unit)
        if t.ndim != 1 or t.shape != y.shape or t.size == 0:
            raise ValueError("t and y must be non-empty 1-d arrays of equal length")
        # sampled logistic responses legitimately start above zero
        if t[0] != 0 or (y[0] != 0 and not self.sampled):
            raise ValueError("series must start at (0, 0)")
        if np.any(np.diff(t) < 0) or np.any(np.diff(y) < 0):
            raise ValueError("t and y must be nondecreasing")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(y)):
            raise ValueError("series contains non-finite values")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.y.tolist()))

    @property
    def t_end(self) -> float:
        """Last observed elapsed time, including the archive horizon if known."""
        if self.horizon is not None:
            return max(float(self.horizon), float(self.t[-1]))
        return float(self.t[-1])

    def in_unit(self, time_unit: str) -> StepResponseSeries:
        """Same series re-expressed in another time unit."""
        scale = SECONDS_PER_UNIT[self.time_unit] / SECONDS_PER_UNIT[check_time_unit(time_unit)]
        return StepResponseSeries(
            t=self.t * scale,
            y=self.y,
            time_unit=time_unit,
            final_count=self.final_count,
            complete=self.complete,
            horizon=None if self.horizon is None else self.horizon * scale,
            sampled=self.sampled,
            thread_id=self.thread_id,
        )


def parse_timestamp(text: str) -> datetime:
    """Parse ISO-8601 with an explicit offset, or integer epoch seconds, to UTC."""
    text = text.strip()
    if not text:
        raise ValueError("empty timestamp")
    if text.lstrip("+-").isdigit():
        return datetime.fromtimestamp(int(text), tz=timezone.utc)
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no UTC offset")
    return stamp.astimezone(timezone.utc)


def format_timestamp(stamp: datetime) -> str:
    return stamp.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _record_from_fields(thread_id, timestamp, author) -> PostRecord:
    if not isinstance(thread_id, str) or not isinstance(timestamp, (str, int)):
        raise ValueError("bad field types")
    if isinstance(timestamp, bool):
        raise ValueError("bad timestamp")
    stamp = parse_timestamp(str(timestamp))
    author = author if isinstance(author, str) and author else None
    return PostRecord(thread_id.strip(), stamp, author)


def parse_posts(source: IO[bytes] | IO[str] | bytes | str, format: str = "csv") -> tuple[list[PostRecord], int]:
    """Read post records from CSV or JSON-lines.

    Returns the well-formed records in input order and the number of
    malformed rows that were skipped.
    """
    if format not in ("csv", "jsonl"):
        raise ValueError(f"unknown format {format!r}")
    try:
        if isinstance(source, (bytes, str)):
            raw = source
        else:
            raw = source.read()
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"cannot read post source: {exc}") from exc
    text = text.lstrip("\ufeff")

    records: list[PostRecord] = []
    skipped = 0
    if format == "csv":
        reader = csv.DictReader(io.StringIO(text))
        fields = reader.fieldnames or []
        if "thread_id" not in fields or "timestamp" not in fields:
            raise InputError("CSV header must contain thread_id,timestamp[,author]")
        for row in reader:
            try:
                records.append(_record_from_fields(row.get("thread_id"), row.get("timestamp"), row.get("author")))
            except (ValueError, TypeError, OverflowError):
                skipped += 1
    else:
        for line in text.splitlines():
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                records.append(_record_from_fields(obj.get("thread_id"), obj.get("timestamp"), obj.get("author")))
            except (ValueError, TypeError, AttributeError, OverflowError):
                skipped += 1

    if not records:
        raise EmptyInputError(f"no parseable post records ({skipped} malformed)")
    return records, skipped


def write_posts_csv(threads: Iterable[DiscussionThread], stream: IO[str]) -> None:
    """Write threads in the CSV layout ``parse_posts`` reads."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["thread_id", "timestamp", "author"])
    for thread in threads:
        for post in thread.posts:
            writer.writerow([post.thread_id, format_timestamp(post.timestamp), post.author or ""])


def group_threads(records: Iterable[PostRecord]) -> list[DiscussionThread]:
    by_id: dict[str, list[PostRecord]] = {}
    for rec in records:
        by_id.setdefault(rec.thread_id, []).append(rec)
    # sorted() is stable, so equal timestamps keep input order
    return [
        DiscussionThread(tid, tuple(sorted(posts, key=lambda p: p.timestamp)))
        for tid, posts in by_id.items()
    ]


def build_step_response(
    thread: DiscussionThread,
    time_unit: str = "hour",
    archive_end: datetime | None = None,
) -> StepResponseSeries:
    check_time_unit(time_unit)
    scale = SECONDS_PER_UNIT[time_unit]
    origin = thread.initial_post.timestamp
    replies = thread.posts[1:]
    t = [0.0] + [(p.timestamp - origin).total_seconds() / scale for p in replies]
    y = list(range(len(replies) + 1))
    horizon = None
    if archive_end is not None:
        horizon = max((archive_end - origin).total_seconds() / scale, t[-1])
    return StepResponseSeries(
        t=np.array(t),
        y=np.array(y, dtype=float),
        time_unit=time_unit,
        final_count=len(replies),
        horizon=horizon,
        thread_id=thread.thread_id,
    )


def detect_steady_state(series: StepResponseSeries, quiet_window: float) -> bool:
    """True when observation continued at least ``quiet_window`` past the last reply."""
    if not quiet_window > 0:
        raise ValueError("quiet_window must be positive")
    if series.horizon is None:
        return False
    return series.horizon - float(series.t[-1]) >= quiet_window


def mark_steady_state(series: StepResponseSeries, quiet_window: float) -> StepResponseSeries:
    """Copy of ``series`` with ``complete`` set by :func:`detect_steady_state`."""
    return replace(series, complete=detect_steady_state(series, quiet_window))


def series_from_posts(
    records: Sequence[PostRecord],
    time_unit: str = "hour",
    quiet_window: float | None = None,
    archive_end: datetime | None = None,
) -> list[StepResponseSeries]:
    """Group, convert and close every thread in an archive.

    The archive end defaults to the latest timestamp among all records.
    ``quiet_window`` is in ``time_unit``; it defaults to 72 hours.
    """
    if archive_end is None:
        archive_end = max(r.timestamp for r in records)
    if quiet_window is None:
        quiet_window = DEFAULT_QUIET_WINDOW_HOURS * 3600.0 / SECONDS_PER_UNIT[time_unit]
    out = []
    for thread in group_threads(records):
        series = build_step_response(thread, time_unit, archive_end=archive_end)
        out.append(mark_steady_state(series, quiet_window))
    return out
