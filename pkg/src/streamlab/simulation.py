"""Monte Carlo superposition of video sessions under Poisson arrivals.

The aggregate rate is sampled on a uniform grid ``t_j = j * dt``: a session
segment ``[a, b)`` contributes its rate to every grid point inside it.
Moments are measured on ``[warmup, horizon)`` only, and replications are
pooled with the parallel (Chan et al.) mean/M2 merge, which does not depend
on the order in which replications finish.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import ValidationError, check_positive
from .analytic import ModelInputs, expected_wasted_rate
from .domain import ARRIVAL_STREAM, VideoParams, WorkloadSpec, make_rng, poisson_arrivals
from .strategies import build_trace, steady_rate, truncate_trace

DEFAULT_DT = 0.01


class WarmupTooShortError(ValidationError):
    def __init__(self, warmup, bound):
        self.warmup = warmup
        self.bound = bound
        super().__init__(
            f"warmup {warmup:g} s is shorter than the longest possible session download "
            f"({bound:g} s); raise warmup or pass allow_short_warmup=True")


@dataclass(frozen=True, eq=False)
class AggregateSeries:
    """Aggregate rate sampled on a uniform grid (one replication)."""

    times: np.ndarray
    rates: np.ndarray
    dt: float
    warmup: float
    horizon: float

    @property
    def window(self):
        return self.times >= self.warmup

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t_s", "R_Bps"))
            for t, r in zip(self.times, self.rates):
                w.writerow((repr(float(t)), repr(float(r))))


@dataclass(frozen=True)
class SessionOutcome:
    index: int
    arrival: float
    encoding_rate: float
    duration: float
    downloaded: int
    unused: float
    download_duration: float


@dataclass(frozen=True)
class ReplicationStats:
    seed: int
    count: int
    mean: float
    m2: float
    wasted_bytes: float
    window_sessions: int
    session_count: int

    @property
    def variance(self):
        return self.m2 / self.count if self.count else 0.0


@dataclass(frozen=True)
class SimSummary:
    empirical_mean: float
    empirical_variance: float
    wasted_mean: float
    session_count: int
    seeds: tuple
    dt: float
    warmup: float
    horizon: float
    replication_means: tuple = field(default=())
    replication_variances: tuple = field(default=())

    def to_dict(self):
        return {
            "empirical_mean_Bps": self.empirical_mean,
            "empirical_variance_Bps2": self.empirical_variance,
            "wasted_mean_Bps": self.wasted_mean,
            "session_count": self.session_count,
            "replications": len(self.seeds),
            "seeds": list(self.seeds),
            "dt_s": self.dt,
            "warmup_s": self.warmup,
            "horizon_s": self.horizon,
        }


def max_download_duration(workload):
    """Longest single-session download any draw of ``workload`` can produce.

    Download time grows with both encoding rate and duration, so the
    bound is taken over the corners of their supports.
    """
    e_dist, l_dist = workload.encoding_rate_dist, workload.duration_dist
    bound = 0.0
    for cfg in workload.strategies:
        for e, length in itertools.product({e_dist.low, e_dist.high}, {l_dist.low, l_dist.high}):
            bound = max(bound, build_trace(VideoParams(e, length), cfg).download_duration)
    return bound


def _byte_limit(video, cfg, watched_fraction):
    """Bytes downloaded when the viewer stops after ``watched_fraction`` of the video."""
    size = video.size()
    if not cfg.kind.is_on_off:
        return size
    tau = watched_fraction * video.duration
    reachable = cfg.buffer_for(video) + steady_rate(cfg, video) * tau
    return min(int(round(reachable)), size)


def run_sessions(workload, arrival_times=None):
    """Per-session traces and outcomes for one replication of ``workload``.

    Returns ``(arrivals, traces, outcomes)``.  ``arrival_times`` overrides
    the Poisson draw, e.g. to place a single session at ``t = 0``.
    """
    if arrival_times is None:
        arrivals = poisson_arrivals(workload.arrival_rate, workload.horizon,
                                    make_rng(workload.seed, ARRIVAL_STREAM))
    else:
        arrivals = np.sort(np.asarray(arrival_times, dtype=float))
    traces, outcomes = [], []
    for n, t_n in enumerate(arrivals):
        video, cfg, beta = workload.draw_session(n)
        trace = build_trace(video, cfg)
        if beta is None:
            downloaded, unused = trace.total_bytes, 0.0
        else:
            downloaded = _byte_limit(video, cfg, beta)
            trace = truncate_trace(trace, downloaded)
            unused = downloaded - video.encoding_rate * beta * video.duration
        traces.append(trace)
        outcomes.append(SessionOutcome(n, float(t_n), video.encoding_rate, video.duration,
                                       int(downloaded), float(unused), trace.download_duration))
    return arrivals, traces, outcomes


def superpose(arrivals, traces, horizon, dt):
    """Aggregate rate on the grid ``j * dt`` for ``j * dt < horizon``."""
    n_grid = int(math.ceil(horizon / dt))
    diff = np.zeros(n_grid + 1)
    if len(traces):
        a = np.concatenate([t_n + tr.starts for t_n, tr in zip(arrivals, traces)])
        b = np.concatenate([t_n + tr.ends for t_n, tr in zip(arrivals, traces)])
        g = np.concatenate([tr.rates for tr in traces])
        i0 = np.clip(np.ceil(a / dt), 0, n_grid).astype(np.int64)
        i1 = np.clip(np.ceil(b / dt), 0, n_grid).astype(np.int64)
        diff += np.bincount(i0, weights=g, minlength=n_grid + 1)
        diff -= np.bincount(i1, weights=g, minlength=n_grid + 1)
    rates = np.cumsum(diff[:n_grid])
    if len(traces) and g.size:
        # running sums of +g/-g leave float residue where the true value is
        # zero; any true nonzero value is at least the smallest segment rate
        rates[rates < 1e-6 * float(g.min())] = 0.0
    return np.arange(n_grid) * dt, rates


def _replicate(workload, dt, arrival_times, keep_series):
    arrivals, traces, outcomes = run_sessions(workload, arrival_times)
    times, rates = superpose(arrivals, traces, workload.horizon, dt)
    window = rates[times >= workload.warmup]
    in_window = [o for o in outcomes if workload.warmup <= o.arrival < workload.horizon]
    mean = float(window.mean()) if window.size else 0.0
    stats = ReplicationStats(
        seed=workload.seed, count=int(window.size), mean=mean,
        m2=float(np.sum((window - mean) ** 2)),
        wasted_bytes=float(sum(o.unused for o in in_window)),
        window_sessions=len(in_window), session_count=len(outcomes))
    series = AggregateSeries(times, rates, dt, workload.warmup, workload.horizon) if keep_series else None
    return stats, series


def pool(stats, dt, warmup, horizon):
    """Merge replication statistics into one summary."""
    stats = sorted(stats, key=lambda s: s.seed)
    count, mean, m2 = 0, 0.0, 0.0
    for s in stats:
        if s.count == 0:
            continue
        total = count + s.count
        delta = s.mean - mean
        mean += delta * s.count / total
        m2 += s.m2 + delta * delta * count * s.count / total
        count = total
    window = horizon - warmup
    wasted = sum(s.wasted_bytes for s in stats) / (window * len(stats)) if stats else 0.0
    return SimSummary(
        empirical_mean=mean, empirical_variance=m2 / count if count else 0.0,
        wasted_mean=wasted, session_count=sum(s.session_count for s in stats),
        seeds=tuple(s.seed for s in stats), dt=dt, warmup=warmup, horizon=horizon,
        replication_means=tuple(s.mean for s in stats),
        replication_variances=tuple(s.variance for s in stats))


def replication_seeds(workload, replications):
    return [workload.seed + i for i in range(replications)]


def simulate(workload, dt=DEFAULT_DT, replications=1, arrival_times=None,
             allow_short_warmup=False, n_jobs=None):
    """Simulate the aggregate rate of ``workload``.

    Replication ``i`` uses seed ``workload.seed + i``.  Returns the series of
    the first replication and the pooled summary.
    """
    dt = check_positive(dt, "dt")
    if int(replications) < 1:
        raise ValidationError("replications must be >= 1")
    if arrival_times is None and not allow_short_warmup:
        bound = max_download_duration(workload)
        if workload.warmup < bound:
            raise WarmupTooShortError(workload.warmup, bound)
    seeds = replication_seeds(workload, int(replications))
    jobs = [(replace(workload, seed=s), dt, arrival_times, i == 0) for i, s in enumerate(seeds)]
    if n_jobs in (None, 1) or len(jobs) == 1:
        results = [_replicate(*job) for job in jobs]
    else:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=n_jobs)(delayed(_replicate)(*job) for job in jobs)
    summary = pool([r[0] for r in results], dt, workload.warmup, workload.horizon)
    return results[0][1], summary


def simulate_with_interruptions(workload, dt=DEFAULT_DT, replications=1, arrival_times=None,
                                allow_short_warmup=False, n_jobs=None):
    """Like :func:`simulate`, but every viewer stops after a sampled fraction.

    A session is cut once it has downloaded ``min(B + k*e*tau, e*L)`` bytes,
    with ``tau = beta * L``; the bytes beyond ``e*tau`` count as wasted.
    """
    if workload.interruption is None:
        raise ValidationError("workload has no interruption distribution")
    return simulate(workload, dt, replications, arrival_times, allow_short_warmup, n_jobs)


def _rel_diff(a, b):
    scale = 0.5 * (abs(a) + abs(b))
    return abs(a - b) / scale if scale else 0.0


@dataclass(frozen=True)
class StrategyComparison:
    summaries: dict
    mean_differences: dict
    variance_differences: dict

    def to_dict(self):
        out = {}
        for name, s in self.summaries.items():
            out[f"{name}.mean_Bps"] = s.empirical_mean
            out[f"{name}.variance_Bps2"] = s.empirical_variance
        for (a, b), d in self.mean_differences.items():
            out[f"mean_rel_diff.{a}~{b}"] = d
        for (a, b), d in self.variance_differences.items():
            out[f"variance_rel_diff.{a}~{b}"] = d
        return out


def compare_strategies(workload, strategies, dt=DEFAULT_DT, replications=1,
                       allow_short_warmup=False, n_jobs=None):
    """Simulate the same arrivals and videos under each strategy.

    ``strategies`` maps names to :class:`StrategyConfig`; all must share
    one ``on_rate``.  Relative differences are ``|a - b| / mean(a, b)``.
    """
    strategies = dict(strategies)
    if not strategies:
        raise ValidationError("no strategies to compare")
    on_rates = {cfg.on_rate for cfg in strategies.values()}
    if len(on_rates) > 1:
        raise ValidationError(
            f"strategies must share one on_rate for a like-for-like comparison, got {sorted(on_rates)}")
    summaries = {}
    for name, cfg in strategies.items():
        w = replace(workload, strategy=cfg, strategy_mix=())
        summaries[name] = simulate(w, dt, replications, None, allow_short_warmup, n_jobs)[1]
    pairs = list(itertools.combinations(strategies, 2))
    return StrategyComparison(
        summaries,
        {p: _rel_diff(summaries[p[0]].empirical_mean, summaries[p[1]].empirical_mean) for p in pairs},
        {p: _rel_diff(summaries[p[0]].empirical_variance, summaries[p[1]].empirical_variance)
         for p in pairs})


class AggregateTrafficSimulator(BaseEstimator):
    """Estimator-style front end to :func:`simulate`.

    ``fit(workload)`` runs the replications and stores ``summary_``,
    ``series_`` (first replication) and ``model_`` (closed-form inputs).
    """

    def __init__(self, dt=DEFAULT_DT, replications=1, allow_short_warmup=False, n_jobs=None):
        self.dt = dt
        self.replications = replications
        self.allow_short_warmup = allow_short_warmup
        self.n_jobs = n_jobs

    def fit(self, workload, y=None, arrival_times=None):
        if not isinstance(workload, WorkloadSpec):
            raise ValidationError(f"expected a WorkloadSpec, got {type(workload).__name__}")
        self.series_, self.summary_ = simulate(
            workload, self.dt, self.replications, arrival_times,
            self.allow_short_warmup, self.n_jobs)
        self.model_ = ModelInputs.from_workload(workload)
        self.interrupted_ = workload.interruption is not None
        self.expected_wasted_ = (expected_wasted_rate(workload)
                                 if self.interrupted_ and not workload.strategy_mix else None)
        return self

    def relative_errors(self):
        """Relative gaps between simulated and closed-form moments."""
        from sklearn.utils.validation import check_is_fitted
        check_is_fitted(self, "summary_")
        out = {}
        if self.model_.mean() > 0 and not self.interrupted_:
            out["mean"] = self.summary_.empirical_mean / self.model_.mean() - 1.0
            out["variance"] = self.summary_.empirical_variance / self.model_.variance() - 1.0
        if self.expected_wasted_:
            out["wasted"] = self.summary_.wasted_mean / self.expected_wasted_ - 1.0
        return out
