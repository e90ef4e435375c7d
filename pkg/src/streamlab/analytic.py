"""Closed-form moments of aggregate video traffic and wasted bandwidth.

All formulas assume sessions arrive as a homogeneous Poisson process and
that encoding rate and duration are independent, so that expectations of
products factor into products of expectations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import ValidationError, check_finite, check_non_negative
from .domain import Constant, DiscreteWeighted, Uniform


def mean_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration):
    """Stationary mean of the aggregate rate, ``lambda * E[e] * E[L]``."""
    lam = check_non_negative(arrival_rate, "arrival_rate")
    e = check_non_negative(mean_encoding_rate, "mean_encoding_rate")
    length = check_non_negative(mean_duration, "mean_duration")
    return lam * e * length


def variance_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration, mean_on_rate):
    """Stationary variance of the aggregate rate, ``lambda * E[e] * E[L] * E[G]``.

    ``mean_on_rate`` is the bandwidth during ON periods.  Strategy kind,
    block size and buffering amount do not enter.
    """
    g = check_non_negative(mean_on_rate, "mean_on_rate")
    return mean_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration) * g


def dimension_link(arrival_rate, mean_encoding_rate, mean_duration, mean_on_rate, alpha):
    """Link rate ``mean + alpha * std`` of the aggregate traffic (``alpha >= 1``)."""
    alpha = check_finite(alpha, "alpha")
    if alpha < 1:
        raise ValidationError(f"alpha must be >= 1, got {alpha}")
    mean = mean_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration)
    var = variance_aggregate_rate(arrival_rate, mean_encoding_rate, mean_duration, mean_on_rate)
    return mean + alpha * math.sqrt(var)


@dataclass(frozen=True)
class InterruptionCheck:
    before_complete: bool
    playback_feasible: bool
    downloaded: float
    watched: float


def check_interruption(encoding_rate, duration, buffer_bytes, steady_rate, watch_time):
    """Evaluate both sides of the interruption condition.

    ``before_complete`` is true when the viewer stops before the whole video
    has been downloaded (``e*L > B + G*tau``); ``playback_feasible`` is false
    when the download could not have kept up with playback
    (``B + G*tau < e*tau``).
    """
    e = check_non_negative(encoding_rate, "encoding_rate")
    length = check_non_negative(duration, "duration")
    b = check_non_negative(buffer_bytes, "buffer_bytes")
    g = check_non_negative(steady_rate, "steady_rate")
    tau = check_non_negative(watch_time, "watch_time")
    reachable = b + g * tau
    return InterruptionCheck(before_complete=e * length > reachable,
                             playback_feasible=reachable >= e * tau,
                             downloaded=min(reachable, e * length),
                             watched=e * tau)


def interrupts_before_complete(encoding_rate, duration, buffer_bytes, steady_rate, watch_time):
    return check_interruption(encoding_rate, duration, buffer_bytes,
                              steady_rate, watch_time).before_complete


def full_download_length_threshold(buffer_playback, accumulation_ratio, watched_fraction):
    """Longest video that is fully downloaded before the viewer stops.

    Returns ``buffer_playback / (1 - k * beta)``, or ``math.inf`` when
    ``k * beta >= 1`` (every video completes before the interruption).
    """
    bp = check_non_negative(buffer_playback, "buffer_playback")
    k = check_finite(accumulation_ratio, "accumulation_ratio")
    beta = check_finite(watched_fraction, "watched_fraction")
    if k < 1:
        raise ValidationError(f"accumulation_ratio must be >= 1, got {k}")
    if not 0 < beta < 1:
        raise ValidationError(f"watched_fraction must lie in (0, 1), got {beta}")
    kb = k * beta
    if kb >= 1:
        return math.inf
    return bp / (1.0 - kb)


def unused_bytes(encoding_rate, duration, buffer_bytes, steady_rate, watch_time):
    """Bytes downloaded but never played: ``min(B + G*tau, e*L) - e*tau``."""
    c = check_interruption(encoding_rate, duration, buffer_bytes, steady_rate, watch_time)
    return c.downloaded - c.watched


def _atoms(value, name, n_nodes):
    """(nodes, weights) summarising ``value`` for exact/quadrature expectation."""
    if isinstance(value, Constant):
        return np.array([value.value]), np.array([1.0])
    if isinstance(value, DiscreteWeighted):
        return value.values, value.probabilities
    if isinstance(value, Uniform):
        if value.lo == value.hi:
            return np.array([value.lo]), np.array([1.0])
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        half = 0.5 * (value.hi - value.lo)
        return value.lo + half * (x + 1.0), w / 2.0
    return np.array([check_finite(value, name)]), np.array([1.0])


def _mean_of(value, name):
    if isinstance(value, (Constant, DiscreteWeighted, Uniform)):
        return value.mean()
    return check_finite(value, name)


def mean_wasted_rate(arrival_rate, encoding_rate, duration, watched_fraction,
                     buffer_playback, accumulation_ratio, n_nodes=32):
    """Mean wasted bandwidth ``lambda * E[e] * E[min(B' + k*beta*L, L) - beta*L]``.

    Each argument other than ``arrival_rate`` may be a number or a
    distribution.  Constant and discrete inputs are enumerated exactly;
    uniform inputs use ``n_nodes``-point Gauss-Legendre quadrature (the
    integrand has a kink at the full-download threshold, so expect about
    1e-3 relative error there rather than machine precision).
    """
    lam = check_non_negative(arrival_rate, "arrival_rate")
    mean_e = _mean_of(encoding_rate, "encoding_rate")
    axes = [_atoms(v, n, n_nodes) for v, n in ((duration, "duration"),
                                               (watched_fraction, "watched_fraction"),
                                               (buffer_playback, "buffer_playback"),
                                               (accumulation_ratio, "accumulation_ratio"))]
    (lv, lw), (bv, bw), (pv, pw), (kv, kw) = axes
    if np.any(lv <= 0):
        raise ValidationError("duration must be > 0")
    if np.any((bv <= 0) | (bv >= 1)):
        raise ValidationError("watched_fraction must lie in (0, 1)")
    if np.any(pv < 0):
        raise ValidationError("buffer_playback must be >= 0")
    if np.any(kv < 1):
        raise ValidationError("accumulation_ratio must be >= 1")
    length, beta, bp, k = np.meshgrid(lv, bv, pv, kv, indexing="ij", sparse=True)
    weight = (lw[:, None, None, None] * bw[None, :, None, None]
              * pw[None, None, :, None] * kw[None, None, None, :])
    per_second = np.minimum(bp + k * beta * length, length) - beta * length
    return lam * mean_e * float(np.sum(weight * per_second))


@dataclass(frozen=True)
class ModelInputs:
    """Means feeding the closed-form aggregate model."""

    arrival_rate: float
    mean_encoding_rate: float
    mean_duration: float
    mean_on_rate: float

    def __post_init__(self):
        for name in ("arrival_rate", "mean_encoding_rate", "mean_duration", "mean_on_rate"):
            check_non_negative(getattr(self, name), name)

    @classmethod
    def from_workload(cls, workload):
        on_rates = [cfg.on_rate for cfg in workload.strategies]
        if workload.strategy_mix:
            w = np.array([w for _, w in workload.strategy_mix])
            g = float(np.dot(on_rates, w / w.sum()))
        else:
            g = on_rates[0]
        return cls(workload.arrival_rate, workload.encoding_rate_dist.mean(),
                   workload.duration_dist.mean(), g)

    def mean(self):
        return mean_aggregate_rate(self.arrival_rate, self.mean_encoding_rate, self.mean_duration)

    def variance(self):
        return variance_aggregate_rate(self.arrival_rate, self.mean_encoding_rate,
                                       self.mean_duration, self.mean_on_rate)

    def link_rate(self, alpha):
        return dimension_link(self.arrival_rate, self.mean_encoding_rate,
                              self.mean_duration, self.mean_on_rate, alpha)


def expected_wasted_rate(workload, n_nodes=32):
    """Closed-form mean wasted bandwidth for a single-strategy workload.

    NoOnOff sessions download the whole video at once, so their buffering
    amount is taken to cover the longest possible video.
    """
    if workload.interruption is None:
        return 0.0
    if workload.strategy_mix:
        raise ValidationError("closed-form waste needs a single strategy template")
    cfg = workload.strategy
    if not cfg.kind.is_on_off:
        bp = workload.duration_dist.high
        k = 1.0
    elif cfg.buffer_bytes is not None:
        if not isinstance(workload.encoding_rate_dist, Constant):
            raise ValidationError("buffer_bytes with a random encoding rate breaks the "
                                  "independence the closed form relies on; use buffer_playback")
        bp = cfg.buffer_bytes / workload.encoding_rate_dist.value
        k = cfg.accumulation_ratio
    else:
        bp = cfg.buffer_playback
        k = cfg.accumulation_ratio
    return mean_wasted_rate(workload.arrival_rate, workload.encoding_rate_dist,
                            workload.duration_dist, workload.interruption, bp, k, n_nodes)
