"""JSON scenario files mirroring :class:`WorkloadSpec`.

Schema (all rates in B/s, times in s)::

    {
      "arrival_rate": 0.5,
      "encoding_rate_dist": {"constant": 125000},
      "duration_dist": {"uniform": [60, 180]},
      "interruption": {"discrete": [[0.2, 3], [0.9, 1]]},   # optional
      "strategy": {"kind": "ShortOnOff", "on_rate": 625000,
                   "buffer_playback": 40, "block_size": 65536,
                   "accumulation_ratio": 1.25},
      "strategy_mix": [[{...strategy...}, 0.7], ...],       # optional
      "horizon": 4000, "warmup": 400, "seed": 1
    }

A strategy may instead name a preset, ``{"preset": "youtube-flash"}``, with
any strategy field given alongside it as an override.  Presets are expanded
when a scenario is written back out.
"""

from __future__ import annotations

import json
from dataclasses import replace

from ._validation import ValidationError
from .domain import StrategyConfig, WorkloadSpec, distribution_from_dict
from .presets import preset

_FIELDS = ("arrival_rate", "encoding_rate_dist", "duration_dist", "interruption",
           "strategy", "strategy_mix", "horizon", "warmup", "seed")
_REQUIRED = ("arrival_rate", "encoding_rate_dist", "duration_dist", "strategy", "horizon")


def strategy_from_dict(d):
    if not isinstance(d, dict):
        raise ValidationError(f"strategy must be an object, got {d!r}")
    d = dict(d)
    name = d.pop("preset", None)
    if name is None:
        return StrategyConfig.from_dict(d)
    cfg = preset(name)
    if "buffer_bytes" in d or "buffer_playback" in d:
        cfg = replace(cfg, buffer_bytes=None, buffer_playback=None)
    try:
        return replace(cfg, **d)
    except TypeError as exc:
        raise ValidationError(f"strategy: {exc}") from None


def workload_from_dict(d):
    unknown = set(d) - set(_FIELDS)
    if unknown:
        raise ValidationError(f"scenario: unknown field(s) {sorted(unknown)}")
    missing = [f for f in _REQUIRED if f not in d]
    if missing:
        raise ValidationError(f"scenario: missing field(s) {missing}")
    try:
        interruption = d.get("interruption")
        return WorkloadSpec(
            arrival_rate=d["arrival_rate"],
            encoding_rate_dist=distribution_from_dict(d["encoding_rate_dist"]),
            duration_dist=distribution_from_dict(d["duration_dist"]),
            strategy=strategy_from_dict(d["strategy"]),
            horizon=d["horizon"],
            warmup=d.get("warmup", 0.0),
            seed=d.get("seed", 0),
            interruption=None if interruption is None else distribution_from_dict(interruption),
            strategy_mix=tuple((strategy_from_dict(s), w) for s, w in d.get("strategy_mix", ())),
        )
    except ValidationError as exc:
        raise ValidationError(f"scenario: {exc}") from None


def workload_to_dict(w):
    d = {
        "arrival_rate": w.arrival_rate,
        "encoding_rate_dist": w.encoding_rate_dist.to_dict(),
        "duration_dist": w.duration_dist.to_dict(),
        "interruption": None if w.interruption is None else w.interruption.to_dict(),
        "strategy": w.strategy.to_dict(),
        "horizon": w.horizon,
        "warmup": w.warmup,
        "seed": w.seed,
    }
    if w.strategy_mix:
        d["strategy_mix"] = [[cfg.to_dict(), wt] for cfg, wt in w.strategy_mix]
    return d


def load_scenario(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return workload_from_dict(data)


def dump_scenario(workload, path):
    with open(path, "w") as fh:
        json.dump(workload_to_dict(workload), fh, indent=2, sort_keys=True)
        fh.write("\n")
