"""Strategy templates for the YouTube and Netflix clients measured in 2011.

Values the measurements only bound (block sizes above 2.5 MB, Netflix block
sizes and accumulation ratios) are declared defaults, listed per preset in
``Preset.declared`` and printed with every report that uses them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ._validation import ValidationError
from .domain import KB, MB, MBPS, StrategyConfig, StrategyKind

DEFAULT_ON_RATE = 5 * MBPS


@dataclass(frozen=True)
class Preset:
    name: str
    config: StrategyConfig
    provenance: str
    declared: tuple = ()

    def describe(self):
        cfg = self.config
        parts = [f"{self.name:22s} {cfg.kind.value:10s}"]
        if cfg.kind.is_on_off:
            if cfg.buffer_playback is not None:
                parts.append(f"B'={cfg.buffer_playback:g}s")
            else:
                parts.append(f"B={cfg.buffer_bytes:.0f}B")
            parts.append(f"Q={cfg.block_size}B k={cfg.accumulation_ratio:g}")
        text = " ".join(parts) + f"  [{self.provenance}]"
        if self.declared:
            text += "  declared default: " + ", ".join(self.declared)
        return text


def _cfg(kind, **kw):
    return StrategyConfig(kind=kind, on_rate=DEFAULT_ON_RATE, **kw)


_S, _L, _N = StrategyKind.SHORT_ON_OFF, StrategyKind.LONG_ON_OFF, StrategyKind.NO_ON_OFF

PRESETS = {p.name: p for p in (
    Preset("youtube-flash",
           _cfg(_S, buffer_playback=40.0, block_size=64 * KB, accumulation_ratio=1.25),
           "YouTube Flash, any browser: ~40 s buffered, 64 kB blocks, k ~ 1.25"),
    Preset("youtube-html5-ie",
           _cfg(_S, buffer_bytes=12.5 * MB, block_size=256 * KB, accumulation_ratio=1.05),
           "YouTube HTML5 on Internet Explorer: 10-15 MB buffered, 256 kB blocks, "
           "k mean 1.06 / median 1.04",
           ("buffer_bytes (midpoint of 10-15 MB)",)),
    Preset("youtube-html5-chrome",
           _cfg(_L, buffer_bytes=12.5 * MB, block_size=4 * MB, accumulation_ratio=1.29),
           "YouTube HTML5 on Chrome: 10-15 MB buffered, blocks > 2.5 MB, k median 1.29",
           ("buffer_bytes (midpoint of 10-15 MB)", "block_size (only '> 2.5 MB' measured)")),
    Preset("youtube-android",
           _cfg(_L, buffer_bytes=6 * MB, block_size=4 * MB, accumulation_ratio=1.15),
           "YouTube native Android app: 4-8 MB buffered, blocks > 2.5 MB, k median 1.15",
           ("buffer_bytes (midpoint of 4-8 MB)", "block_size (only '> 2.5 MB' measured)")),
    Preset("youtube-noonoff",
           _cfg(_N),
           "YouTube Flash HD and HTML5 on Firefox: no rate limiting, whole video in one transfer"),
    Preset("netflix-pc",
           _cfg(_S, buffer_bytes=50 * MB, block_size=1 * MB, accumulation_ratio=1.25),
           "Netflix Silverlight on PCs: ~50 MB buffered, blocks somewhat above 256 kB",
           ("block_size (only 'slightly larger than 256 kB', < 2.5 MB)",
            "accumulation_ratio (not measured for Netflix)")),
    Preset("netflix-ipad",
           _cfg(_S, buffer_bytes=10 * MB, block_size=1 * MB, accumulation_ratio=1.25),
           "Netflix native iPad app: ~10 MB buffered, short ON-OFF cycles",
           ("block_size (only '< 2.5 MB')", "accumulation_ratio (not measured for Netflix)")),
    Preset("netflix-android",
           _cfg(_L, buffer_bytes=40 * MB, block_size=4 * MB, accumulation_ratio=1.25),
           "Netflix native Android app: ~40 MB buffered, long ON-OFF cycles",
           ("block_size (only '> 2.5 MB')", "accumulation_ratio (not measured for Netflix)")),
)}


def get_preset(name):
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


def preset(name, on_rate=None):
    """Strategy config of preset ``name``, optionally with another ON rate."""
    cfg = get_preset(name).config
    if on_rate is not None:
        cfg = replace(cfg, on_rate=on_rate)
    return cfg
