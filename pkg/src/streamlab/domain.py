"""Core value types, distributions and seeded random streams.

Units are bytes and seconds throughout; rates are bytes/second.  Sizes
quoted in kB/MB use binary multiples (1 kB = 1024 B, 1 MB = 1,048,576 B).

Random streams come from numpy's PCG64 bit generator.  Every stream is
derived from ``numpy.random.SeedSequence(seed, spawn_key=...)`` so that
stream ``(SESSION_STREAM, n)`` for session ``n`` does not depend on how many
values any other stream consumed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import (ValidationError, check_finite, check_non_negative,
                          check_positive)

MBPS = 125_000
KB = 1024
MB = 1024 * 1024
SHORT_LONG_BLOCK_THRESHOLD = 2_621_440  # 2.5 MB

ARRIVAL_STREAM = 0
SESSION_STREAM = 1


def make_rng(seed, *stream):
    """Independent PCG64 generator for ``seed`` and a stream path."""
    if int(seed) < 0 or int(seed) >= 2**64:
        raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


class StrategyKind(str, enum.Enum):
    NO_ON_OFF = "NoOnOff"
    SHORT_ON_OFF = "ShortOnOff"
    LONG_ON_OFF = "LongOnOff"

    @property
    def is_on_off(self):
        return self is not StrategyKind.NO_ON_OFF

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"none": cls.NO_ON_OFF, "no": cls.NO_ON_OFF,
                   "short": cls.SHORT_ON_OFF, "long": cls.LONG_ON_OFF}
        key = str(value)
        for kind in cls:
            if key == kind.value:
                return kind
        try:
            return aliases[key.lower()]
        except KeyError:
            names = ", ".join(k.value for k in cls)
            raise ValidationError(f"unknown strategy kind {value!r}; expected one of {names}") from None

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class VideoParams:
    """Encoding rate (B/s) and playback duration (s) of one video."""

    encoding_rate: float
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "encoding_rate", check_positive(self.encoding_rate, "encoding_rate"))
        object.__setattr__(self, "duration", check_positive(self.duration, "duration"))
        if self.size() <= 0:
            raise ValidationError("video size rounds to zero bytes")

    def size(self):
        """Video size in whole bytes, ``round(encoding_rate * duration)``."""
        return int(round(self.encoding_rate * self.duration))


@dataclass(frozen=True)
class StrategyConfig:
    """Streaming strategy parameters.

    Give the buffering amount either in bytes (``buffer_bytes``) or in
    seconds of playback (``buffer_playback``); the latter is converted per
    video as ``encoding_rate * buffer_playback``.  ``on_rate`` is the
    bandwidth used while buffering and during ON periods.
    """

    kind: StrategyKind
    on_rate: float
    buffer_bytes: float | None = None
    buffer_playback: float | None = None
    block_size: int | None = None
    accumulation_ratio: float = 1.0

    def __post_init__(self):
        kind = StrategyKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "on_rate", check_positive(self.on_rate, "on_rate"))
        k = check_finite(self.accumulation_ratio, "accumulation_ratio")
        if k < 1:
            raise ValidationError(f"accumulation_ratio must be >= 1, got {k!r}")
        object.__setattr__(self, "accumulation_ratio", k)
        if self.buffer_bytes is not None and self.buffer_playback is not None:
            raise ValidationError("give buffer_bytes or buffer_playback, not both")
        if self.buffer_bytes is not None:
            check_non_negative(self.buffer_bytes, "buffer_bytes")
        if self.buffer_playback is not None:
            check_non_negative(self.buffer_playback, "buffer_playback")
        if not kind.is_on_off:
            return
        if self.block_size is None:
            raise ValidationError(f"{kind} requires block_size")
        q = check_positive(self.block_size, "block_size")
        if q != int(q):
            raise ValidationError(f"block_size must be a whole number of bytes, got {q!r}")
        object.__setattr__(self, "block_size", int(q))
        if kind is StrategyKind.SHORT_ON_OFF and q >= SHORT_LONG_BLOCK_THRESHOLD:
            raise ValidationError(
                f"ShortOnOff requires block_size < {SHORT_LONG_BLOCK_THRESHOLD}, got {int(q)}")
        if kind is StrategyKind.LONG_ON_OFF and q < SHORT_LONG_BLOCK_THRESHOLD:
            raise ValidationError(
                f"LongOnOff requires block_size >= {SHORT_LONG_BLOCK_THRESHOLD}, got {int(q)}")

    def buffer_for(self, video):
        """Buffering amount in whole bytes for ``video``, capped at its size."""
        if self.buffer_bytes is not None:
            b = self.buffer_bytes
        elif self.buffer_playback is not None:
            b = video.encoding_rate * self.buffer_playback
        else:
            b = 0.0
        return min(int(round(b)), video.size())

    def buffer_playback_for(self, video):
        """Buffering amount expressed in seconds of playback."""
        if self.buffer_playback is not None:
            return self.buffer_playback
        return (self.buffer_bytes or 0.0) / video.encoding_rate

    def to_dict(self):
        d = {"kind": self.kind.value, "on_rate": self.on_rate}
        for name in ("buffer_bytes", "buffer_playback", "block_size"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value
        d["accumulation_ratio"] = self.accumulation_ratio
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        unknown = set(d) - {"kind", "on_rate", "buffer_bytes", "buffer_playback",
                            "block_size", "accumulation_ratio"}
        if unknown:
            raise ValidationError(f"strategy: unknown field(s) {sorted(unknown)}")
        if "kind" not in d or "on_rate" not in d:
            raise ValidationError("strategy: 'kind' and 'on_rate' are required")
        return cls(**d)


# -- distributions -----------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", check_finite(self.value, "Constant.value"))

    def sample(self, rng, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def mean(self):
        return self.value

    @property
    def low(self):
        return self.value

    @property
    def high(self):
        return self.value

    def to_dict(self):
        return {"constant": self.value}


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        lo = check_finite(self.lo, "Uniform.lo")
        hi = check_finite(self.hi, "Uniform.hi")
        if lo > hi:
            raise ValidationError(f"Uniform requires lo <= hi, got ({lo}, {hi})")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def sample(self, rng, size=None):
        if self.lo == self.hi:
            return self.lo if size is None else np.full(size, self.lo)
        return rng.uniform(self.lo, self.hi, size)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def low(self):
        return self.lo

    @property
    def high(self):
        return self.hi

    def to_dict(self):
        return {"uniform": [self.lo, self.hi]}


@dataclass(frozen=True)
class DiscreteWeighted:
    atoms: tuple = field(default=())

    def __post_init__(self):
        atoms = tuple((check_finite(v, "DiscreteWeighted value"),
                       check_finite(w, "DiscreteWeighted weight")) for v, w in self.atoms)
        if not atoms:
            raise ValidationError("DiscreteWeighted needs at least one (value, weight) atom")
        if any(w <= 0 for _, w in atoms):
            raise ValidationError("DiscreteWeighted weights must be > 0")
        object.__setattr__(self, "atoms", atoms)

    @property
    def values(self):
        return np.array([v for v, _ in self.atoms])

    @property
    def probabilities(self):
        w = np.array([w for _, w in self.atoms])
        return w / w.sum()

    def sample(self, rng, size=None):
        if len(self.atoms) == 1:
            v = self.atoms[0][0]
            return v if size is None else np.full(size, v)
        idx = rng.choice(len(self.atoms), size=size, p=self.probabilities)
        return self.values[idx] if size is not None else float(self.values[idx])

    def mean(self):
        return float(np.dot(self.values, self.probabilities))

    @property
    def low(self):
        return min(v for v, _ in self.atoms)

    @property
    def high(self):
        return max(v for v, _ in self.atoms)

    def to_dict(self):
        return {"discrete": [[v, w] for v, w in self.atoms]}


DistributionSpec = Constant | Uniform | DiscreteWeighted


def sample(dist, rng, size=None):
    """Draw from ``dist`` using generator ``rng``."""
    return dist.sample(rng, size)


def distribution_from_dict(d):
    """Parse ``{"constant": v}``, ``{"uniform": [lo, hi]}`` or ``{"discrete": [[v, w], ...]}``.

    A bare number is accepted as a constant.
    """
    if isinstance(d, (int, float)) and not isinstance(d, bool):
        return Constant(d)
    if not isinstance(d, dict) or len(d) != 1:
        raise ValidationError(f"malformed distribution {d!r}")
    (key, arg), = d.items()
    if key == "constant":
        return Constant(arg)
    if key == "uniform":
        if not isinstance(arg, (list, tuple)) or len(arg) != 2:
            raise ValidationError(f"uniform needs [lo, hi], got {arg!r}")
        return Uniform(*arg)
    if key == "discrete":
        try:
            atoms = tuple((v, w) for v, w in arg)
        except (TypeError, ValueError):
            raise ValidationError(f"discrete needs [[value, weight], ...], got {arg!r}") from None
        return DiscreteWeighted(atoms)
    raise ValidationError(f"unknown distribution type {key!r}")


def _check_support(dist, name, lo_open=0.0, hi_open=None):
    if dist.low <= lo_open:
        raise ValidationError(f"{name} support must be > {lo_open}, got low={dist.low}")
    if hi_open is not None and dist.high >= hi_open:
        raise ValidationError(f"{name} support must be < {hi_open}, got high={dist.high}")


@dataclass(frozen=True)
class WorkloadSpec:
    """Poisson workload of video sessions.

    ``interruption`` is the distribution of the watched fraction (values in
    (0, 1)); ``None`` means every viewer watches to the end.
    ``strategy_mix`` optionally replaces ``strategy`` with weighted
    ``(StrategyConfig, weight)`` pairs drawn per session.
    """

    arrival_rate: float
    encoding_rate_dist: DistributionSpec
    duration_dist: DistributionSpec
    strategy: StrategyConfig
    horizon: float
    warmup: float = 0.0
    seed: int = 0
    interruption: DistributionSpec | None = None
    strategy_mix: tuple = ()

    def __post_init__(self):
        check_non_negative(self.arrival_rate, "arrival_rate")
        check_positive(self.horizon, "horizon")
        check_non_negative(self.warmup, "warmup")
        if self.warmup >= self.horizon:
            raise ValidationError(f"warmup ({self.warmup}) must be < horizon ({self.horizon})")
        if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        _check_support(self.encoding_rate_dist, "encoding_rate_dist")
        _check_support(self.duration_dist, "duration_dist")
        if self.interruption is not None:
            _check_support(self.interruption, "interruption", 0.0, 1.0)
        mix = tuple((cfg, float(w)) for cfg, w in self.strategy_mix)
        if any(w <= 0 for _, w in mix):
            raise ValidationError("strategy_mix weights must be > 0")
        object.__setattr__(self, "strategy_mix", mix)

    @property
    def strategies(self):
        """All strategy configs a session may use."""
        return tuple(cfg for cfg, _ in self.strategy_mix) or (self.strategy,)

    def draw_session(self, index):
        """Sample ``(video, config, watched_fraction)`` for session ``index``.

        Uses the session's own stream, so the draw depends only on
        ``(seed, index)``.
        """
        rng = make_rng(self.seed, SESSION_STREAM, index)
        e = float(self.encoding_rate_dist.sample(rng))
        length = float(self.duration_dist.sample(rng))
        beta = None if self.interruption is None else float(self.interruption.sample(rng))
        if self.strategy_mix:
            w = np.array([w for _, w in self.strategy_mix])
            cfg = self.strategy_mix[int(rng.choice(len(w), p=w / w.sum()))][0]
        else:
            cfg = self.strategy
        return VideoParams(e, length), cfg, beta


def poisson_arrivals(rate, horizon, rng):
    """Arrival times of a homogeneous Poisson process on ``[0, horizon)``."""
    rate = check_non_negative(rate, "rate")
    horizon = check_positive(horizon, "horizon")
    if rate == 0:
        return np.empty(0)
    mean_count = rate * horizon
    chunk = int(mean_count + 6 * math.sqrt(mean_count) + 16)
    times = np.cumsum(rng.exponential(1.0 / rate, chunk))
    while times[-1] < horizon:
        more = times[-1] + np.cumsum(rng.exponential(1.0 / rate, chunk))
        times = np.concatenate([times, more])
    return times[times < horizon]
