"""Diagnose streaming strategies from flow records.

A flow record is ``(timestamp_s, bytes)``: the bytes seen since the previous
record of the same session.  Gaps between non-empty records longer than an
idle threshold split the transfer into blocks separated by OFF periods.
The end of the buffering phase is taken to be the start of the first OFF
period, so the first block holds the buffering amount plus whatever block
was sent back-to-back with it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from ._validation import ValidationError, check_positive, check_records
from .domain import SHORT_LONG_BLOCK_THRESHOLD, StrategyKind

DEFAULT_IDLE_GAP = 0.1
RECORD_HEADER = ("timestamp_s", "bytes")


class Block(NamedTuple):
    start: float
    end: float
    nbytes: int


class OffPeriod(NamedTuple):
    start: float
    end: float

    @property
    def duration(self):
        return self.end - self.start


def segment_on_off(records, idle_gap_threshold=DEFAULT_IDLE_GAP):
    """Split records into ``(blocks, off_periods)``.

    Zero-byte records are ignored.  Block times are the timestamps of its
    first and last record.
    """
    check_positive(idle_gap_threshold, "idle_gap_threshold")
    ts, nb = check_records(records)
    keep = nb > 0
    ts, nb = ts[keep], nb[keep]
    if ts.size == 0:
        return [], []
    breaks = np.flatnonzero(np.diff(ts) > idle_gap_threshold) + 1
    bounds = np.concatenate([[0], breaks, [ts.size]])
    sums = np.add.reduceat(nb, bounds[:-1])
    blocks = [Block(float(ts[i]), float(ts[j - 1]), int(s))
              for i, j, s in zip(bounds[:-1], bounds[1:], sums)]
    offs = [OffPeriod(a.end, b.start) for a, b in zip(blocks, blocks[1:])]
    return blocks, offs


def detect_buffering_end(blocks, off_periods):
    """Start of the first OFF period, or the trace end if there is none."""
    if off_periods:
        return off_periods[0].start
    return blocks[-1].end if blocks else 0.0


def accumulation_ratio(records, buffering_end, encoding_rate):
    """Steady-state average rate over the encoding rate.

    Returns ``None`` when the steady state is empty (the trace ends during
    buffering), which is distinct from a ratio of zero.
    """
    check_positive(encoding_rate, "encoding_rate")
    ts, nb = check_records(records)
    ts, nb = ts[nb > 0], nb[nb > 0]
    if ts.size == 0:
        return None
    span = ts[-1] - buffering_end
    if span <= 0:
        return None
    steady_bytes = int(nb[ts > buffering_end].sum())
    return steady_bytes / span / encoding_rate


def estimate_encoding_rate(total_bytes, video_duration):
    """Encoding rate from payload size and video duration."""
    video_duration = check_positive(video_duration, "video_duration")
    if total_bytes < 0:
        raise ValidationError("total_bytes must be >= 0")
    return total_bytes / video_duration


@dataclass(frozen=True)
class TraceReport:
    buffering_end: float
    buffering_bytes: int
    total_bytes: int
    trace_end: float
    blocks: tuple
    off_periods: tuple
    median_block_size: float | None
    block_dispersion: float | None
    accumulation_ratio: float | None
    estimated_encoding_rate: float | None
    classification: StrategyKind
    idle_gap_threshold: float
    flags: tuple = field(default=())

    @property
    def steady_blocks(self):
        return self.blocks[1:]

    def features(self):
        """Numeric feature vector, NaN where not applicable."""
        nan = float("nan")
        offs = [o.duration for o in self.off_periods]
        return np.array([
            self.buffering_end, self.buffering_bytes, len(self.off_periods),
            nan if self.median_block_size is None else self.median_block_size,
            float(np.median(offs)) if offs else nan,
            nan if self.block_dispersion is None else self.block_dispersion,
            nan if self.accumulation_ratio is None else self.accumulation_ratio,
        ], dtype=float)

    def to_dict(self):
        offs = [o.duration for o in self.off_periods]
        return {
            "classification": self.classification.value,
            "buffering_end_s": self.buffering_end,
            "buffering_bytes": self.buffering_bytes,
            "total_bytes": self.total_bytes,
            "trace_end_s": self.trace_end,
            "block_count": len(self.blocks),
            "off_period_count": len(self.off_periods),
            "median_block_bytes": self.median_block_size,
            "block_iqr_over_median": self.block_dispersion,
            "median_off_s": float(np.median(offs)) if offs else None,
            "accumulation_ratio": self.accumulation_ratio,
            "estimated_encoding_rate_Bps": self.estimated_encoding_rate,
            "idle_gap_threshold_s": self.idle_gap_threshold,
            "flags": ",".join(self.flags),
        }

    def summary(self):
        lines = [f"strategy            {self.classification.value}",
                 f"buffering phase     {self.buffering_bytes} B, ends at {self.buffering_end:.3f} s",
                 f"blocks / OFF        {len(self.blocks)} / {len(self.off_periods)}"]
        if self.median_block_size is not None:
            lines.append(f"median block        {self.median_block_size:.0f} B")
        if self.accumulation_ratio is not None:
            lines.append(f"accumulation ratio  {self.accumulation_ratio:.4f}")
        if self.estimated_encoding_rate is not None:
            lines.append(f"encoding rate       {self.estimated_encoding_rate:.1f} B/s (estimated)")
        for flag in self.flags:
            lines.append(f"warning: {flag}")
        return "\n".join(lines)


def classify(report, block_size_threshold=SHORT_LONG_BLOCK_THRESHOLD):
    """No OFF period: NoOnOff; else short or long by median steady-state block."""
    if not report.off_periods:
        return StrategyKind.NO_ON_OFF
    if report.median_block_size < block_size_threshold:
        return StrategyKind.SHORT_ON_OFF
    return StrategyKind.LONG_ON_OFF


def analyze(records, idle_gap_threshold=DEFAULT_IDLE_GAP, encoding_rate=None,
            video_duration=None, block_size_threshold=SHORT_LONG_BLOCK_THRESHOLD):
    """Full diagnosis of one session's flow records.

    ``encoding_rate`` enables the accumulation ratio.  Without it, a given
    ``video_duration`` is used to estimate the rate from the total payload.
    """
    ts, nb = check_records(records)
    blocks, offs = segment_on_off((ts, nb), idle_gap_threshold)
    total = int(nb.sum())
    trace_end = blocks[-1].end if blocks else 0.0
    buffering_end = detect_buffering_end(blocks, offs)
    buffering_bytes = blocks[0].nbytes if offs else total

    steady = np.array([b.nbytes for b in blocks[1:]], dtype=float)
    median = dispersion = None
    if steady.size:
        median = float(np.median(steady))
        q1, q3 = np.percentile(steady, [25, 75])
        dispersion = float((q3 - q1) / median) if median else None

    estimated = None
    if video_duration is not None:
        estimated = estimate_encoding_rate(total, video_duration)
    rate_for_ratio = encoding_rate if encoding_rate is not None else estimated
    ratio = None
    if rate_for_ratio and offs:
        ratio = accumulation_ratio((ts, nb), buffering_end, rate_for_ratio)

    flags = []
    if dispersion is not None and dispersion > 1.0:
        flags.append("mixed-regime: steady-state block sizes vary widely (IQR/median > 1)")
    durations = np.array([o.duration for o in offs])
    if durations.size and np.mean(durations < 1.5 * idle_gap_threshold) > 0.25:
        flags.append("off-periods-near-threshold: many OFF periods are close to the idle-gap threshold")

    partial = TraceReport(buffering_end, buffering_bytes, total, trace_end, tuple(blocks),
                          tuple(offs), median, dispersion, ratio, estimated,
                          StrategyKind.NO_ON_OFF, float(idle_gap_threshold), tuple(flags))
    kind = classify(partial, block_size_threshold)
    return replace(partial, classification=kind)


# -- CSV --------------------------------------------------------------------

def write_records_csv(timestamps, nbytes, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_HEADER)
        for t, b in zip(timestamps, nbytes):
            w.writerow((repr(float(t)), int(b)))


def read_records_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(c.strip() for c in rows[0]) != RECORD_HEADER:
        raise ValidationError(f"{path}: expected header {','.join(RECORD_HEADER)}")
    try:
        ts = np.array([float(r[0]) for r in rows[1:] if r])
        nb = np.array([float(r[1]) for r in rows[1:] if r])
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed record row ({exc})") from None
    return check_records((ts, nb))


# -- estimator ---------------------------------------------------------------

class StrategyClassifier(ClassifierMixin, TransformerMixin, BaseEstimator):
    """Rule-based strategy classifier over flow-record traces.

    ``X`` is a sequence of traces, each an ``(n, 2)`` array of
    ``(timestamp_s, bytes)`` rows.  Nothing is learned: ``fit`` only
    validates the input and fixes ``classes_``.  ``transform`` returns the
    per-trace feature matrix (see :meth:`TraceReport.features`).
    """

    feature_names = ("buffering_end_s", "buffering_bytes", "off_period_count",
                     "median_block_bytes", "median_off_s", "block_iqr_over_median",
                     "accumulation_ratio")

    def __init__(self, idle_gap_threshold=DEFAULT_IDLE_GAP,
                 block_size_threshold=SHORT_LONG_BLOCK_THRESHOLD):
        self.idle_gap_threshold = idle_gap_threshold
        self.block_size_threshold = block_size_threshold

    def _check_params(self):
        check_positive(self.idle_gap_threshold, "idle_gap_threshold")
        check_positive(self.block_size_threshold, "block_size_threshold")

    def fit(self, X, y=None):
        self._check_params()
        for trace in X:
            check_records(trace)
        self.classes_ = np.array(sorted(k.value for k in StrategyKind))
        self.n_features_out_ = len(self.feature_names)
        return self

    def _reports(self, X):
        from sklearn.utils.validation import check_is_fitted
        check_is_fitted(self, "classes_")
        return [analyze(trace, self.idle_gap_threshold,
                        block_size_threshold=self.block_size_threshold) for trace in X]

    def predict(self, X):
        return np.array([r.classification.value for r in self._reports(X)], dtype=object)

    def transform(self, X):
        reports = self._reports(X)
        if not reports:
            return np.empty((0, len(self.feature_names)))
        return np.vstack([r.features() for r in reports])

    def get_feature_names_out(self, input_features=None):
        return np.array(self.feature_names, dtype=object)
