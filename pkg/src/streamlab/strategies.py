"""Per-session download-rate functions for the three streaming strategies.

A trace is a sorted list of transferring segments; idle time (OFF periods)
is the gap between segments.  Each segment carries its byte count as an
integer so byte totals are exact.
"""

from __future__ import annotations

import csv
import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._validation import ValidationError, check_non_negative
from .domain import StrategyConfig, StrategyKind, VideoParams


class Segment(NamedTuple):
    start: float
    end: float
    rate: float
    nbytes: int


@dataclass(frozen=True, eq=False)
class SessionTrace:
    """Piecewise-constant download rate of one session (session-relative time)."""

    video: VideoParams
    config: StrategyConfig
    starts: np.ndarray
    ends: np.ndarray
    rates: np.ndarray
    nbytes: np.ndarray

    @property
    def segments(self):
        return [Segment(float(s), float(e), float(r), int(b))
                for s, e, r, b in zip(self.starts, self.ends, self.rates, self.nbytes)]

    @property
    def download_duration(self):
        return float(self.ends[-1]) if len(self.ends) else 0.0

    @property
    def total_bytes(self):
        return int(self.nbytes.sum())

    def __len__(self):
        return len(self.starts)

    def rate_at(self, t):
        """Download rate at session-relative time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.starts, t, side="right") - 1
        safe = np.clip(idx, 0, max(len(self) - 1, 0))
        inside = (idx >= 0) & (t < self.ends[safe]) if len(self) else np.zeros_like(t, bool)
        out = np.where(inside, self.rates[safe] if len(self) else 0.0, 0.0)
        return out if out.ndim else float(out)

    def square_integral(self):
        """Closed-form integral of the squared rate over the session."""
        return float(np.sum(self.rates * self.nbytes))


def _make_trace(video, config, starts, ends, rates, nbytes):
    return SessionTrace(video, config,
                        np.asarray(starts, dtype=float), np.asarray(ends, dtype=float),
                        np.asarray(rates, dtype=float), np.asarray(nbytes, dtype=np.int64))


@functools.lru_cache(maxsize=4096)
def build_trace(video: VideoParams, config: StrategyConfig) -> SessionTrace:
    """Generate the download schedule of ``video`` under ``config``.

    ON-OFF strategies send the buffering amount at ``on_rate``, then one
    block per cycle: ON for ``block/on_rate`` seconds, OFF for the rest of
    the cycle period ``block / (k * encoding_rate)``.  The final block may be
    partial and is not followed by an OFF period.

    Returned traces are cached and shared; treat them as read-only.
    """
    g = config.on_rate
    e = video.encoding_rate
    if g <= e:
        raise ValidationError(
            f"on_rate ({g}) must exceed the encoding rate ({e}); the network is assumed over-provisioned")
    size = video.size()
    if not config.kind.is_on_off:
        return _make_trace(video, config, [0.0], [size / g], [g], [size])

    buf = config.buffer_for(video)
    steady = config.accumulation_ratio * e
    if buf >= size or g <= steady:
        return _make_trace(video, config, [0.0], [size / g], [g], [size])

    q = config.block_size
    n_full, rem = divmod(size - buf, q)
    t0 = buf / g
    period = q / steady
    sizes = [q] * n_full + ([rem] if rem else [])
    starts = t0 + period * np.arange(len(sizes))
    nbytes = np.array(sizes, dtype=np.int64)
    ends = starts + nbytes / g
    if buf:
        starts = np.concatenate([[0.0], starts])
        ends = np.concatenate([[t0], ends])
        nbytes = np.concatenate([[buf], nbytes])
    return _make_trace(video, config, starts, ends, np.full(len(starts), g), nbytes)


def steady_rate(config, video):
    """Average steady-state download rate, ``k * encoding_rate``."""
    if not config.kind.is_on_off:
        raise ValidationError("NoOnOff sessions have no steady-state phase")
    return config.accumulation_ratio * video.encoding_rate


def downloaded_by(trace, t):
    """Cumulative bytes downloaded by session-relative time(s) ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValidationError("t must be >= 0")
    cum = np.concatenate([[0], np.cumsum(trace.nbytes)])
    idx = np.searchsorted(trace.starts, t_arr, side="right") - 1
    safe = np.clip(idx, 0, len(trace) - 1)
    within = np.clip(t_arr - trace.starts[safe], 0.0, trace.ends[safe] - trace.starts[safe])
    partial = np.minimum(trace.rates[safe] * within, trace.nbytes[safe])
    out = np.where(idx < 0, 0.0, cum[safe] + partial)
    out = np.where(t_arr >= trace.download_duration, float(cum[-1]), out)
    return out if out.ndim else float(out)


def truncate_trace(trace, byte_limit):
    """Copy of ``trace`` that stops once ``byte_limit`` bytes have been sent."""
    byte_limit = int(round(check_non_negative(byte_limit, "byte_limit")))
    if byte_limit >= trace.total_bytes:
        return trace
    cum = np.cumsum(trace.nbytes)
    last = int(np.searchsorted(cum, byte_limit, side="left"))
    before = int(cum[last - 1]) if last else 0
    tail = byte_limit - before
    starts = trace.starts[:last + 1].copy()
    ends = trace.ends[:last + 1].copy()
    rates = trace.rates[:last + 1].copy()
    nbytes = trace.nbytes[:last + 1].copy()
    if tail == 0:
        starts, ends, rates, nbytes = starts[:-1], ends[:-1], rates[:-1], nbytes[:-1]
    else:
        nbytes[-1] = tail
        ends[-1] = starts[-1] + tail / rates[-1]
    return _make_trace(trace.video, trace.config, starts, ends, rates, nbytes)


# -- CSV --------------------------------------------------------------------

SEGMENT_HEADER = ("start_s", "end_s", "rate_Bps")


def write_segments_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SEGMENT_HEADER)
        for s, e, r in zip(trace.starts, trace.ends, trace.rates):
            w.writerow((repr(float(s)), repr(float(e)), repr(float(r))))


def read_segments_csv(path):
    """Read a segment CSV into ``(starts, ends, rates)`` arrays."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != SEGMENT_HEADER:
        raise ValidationError(f"{path}: expected header {','.join(SEGMENT_HEADER)}")
    data = np.array([[float(c) for c in row] for row in rows[1:] if row], dtype=float)
    if data.size == 0:
        return np.empty(0), np.empty(0), np.empty(0)
    starts, ends, rates = data.T
    if np.any(ends <= starts) or np.any(rates < 0) or np.any(starts[1:] < ends[:-1]):
        raise ValidationError(f"{path}: segments must be sorted, non-overlapping, with start < end")
    return starts, ends, rates


def segments_to_records(starts, ends, rates, quantum):
    """Sample a segment schedule into flow records at a fixed quantum.

    Record ``j`` at time ``j * quantum`` holds the bytes transferred in
    ``((j - 1) * quantum, j * quantum]``.  Intervals with no transfer emit no
    record, as a packet capture would show nothing.  Byte counts are
    integers and sum to the rounded total of the schedule.
    """
    if quantum <= 0:
        raise ValidationError("quantum must be > 0")
    starts = np.asarray(starts, float)
    ends = np.asarray(ends, float)
    rates = np.asarray(rates, float)
    if starts.size == 0:
        return np.empty(0), np.empty(0, dtype=np.int64)
    n = int(np.ceil(ends[-1] / quantum - 1e-9)) + 1
    grid = np.arange(n + 1) * quantum
    seg_bytes = rates * (ends - starts)
    cum_at_start = np.concatenate([[0.0], np.cumsum(seg_bytes)])
    idx = np.searchsorted(starts, grid, side="right") - 1
    safe = np.clip(idx, 0, len(starts) - 1)
    within = np.clip(grid - starts[safe], 0.0, ends[safe] - starts[safe])
    cum = np.where(idx < 0, 0.0, cum_at_start[safe] + rates[safe] * within)
    cum_int = np.round(cum).astype(np.int64)
    per = np.diff(cum_int)
    times = grid[1:]
    keep = per > 0
    return times[keep], per[keep]
