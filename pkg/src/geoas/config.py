"""Run configuration: defaults, config-file parsing, flag resolution."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import IO, Mapping

from geoas.errors import FormatError, ParameterError


@dataclass
class RunConfig:
    """Every knob of the pipeline, all seeded, no wall-clock randomness.

    Config files and CLI flags address these by the short key in KEYMAP
    (the file format is one `key value` pair per line).
    """

    node_count: int = 2000
    p: float = 0.40
    q: float = 0.11
    delta: float = 0.048
    seed_size: int = 3
    grid_path: str = ""
    degree_offset: int = 50
    max_locations: int = 36
    max_compactness_km: float = 2000.0
    patience: int = 5000
    link_limit_km: float = 300.0
    attach_limit_km: float = 200.0
    refraction_index: float = 1.62
    light_speed_km_s: float = 299792.458
    access_ms: float = 0.0
    graph_seed: int = 1
    embed_seed: int = 2
    attach_seed: int = 3

    def validate(self) -> None:
        if self.node_count < 3:
            raise ParameterError("nodes must be >= 3")
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0
                and self.p + self.q <= 1.0):
            raise ParameterError(
                f"need 0 <= p, q and p+q <= 1, got p={self.p} q={self.q}")
        if self.seed_size < 3:
            raise ParameterError("seed-size must be >= 3")
        if self.degree_offset < 0:
            raise ParameterError("n must be >= 0")
        if self.max_locations < 1:
            raise ParameterError("N must be >= 1")
        if not self.max_compactness_km > 0:
            raise ParameterError("cmax must be > 0")
        if self.patience < 1:
            raise ParameterError("k must be >= 1")
        if not self.link_limit_km > 0:
            raise ParameterError("lmax must be > 0")
        if not self.attach_limit_km > 0:
            raise ParameterError("hmax must be > 0")
        if not (self.refraction_index > 0 and self.light_speed_km_s > 0):
            raise ParameterError("nf and c must be > 0")
        if self.access_ms < 0:
            raise ParameterError("access must be >= 0")


# config-file / CLI key -> RunConfig field. "n" and "N" are distinct keys.
KEYMAP: dict[str, str] = {
    "nodes": "node_count",
    "p": "p",
    "q": "q",
    "delta": "delta",
    "seed-size": "seed_size",
    "grid": "grid_path",
    "n": "degree_offset",
    "N": "max_locations",
    "cmax": "max_compactness_km",
    "k": "patience",
    "lmax": "link_limit_km",
    "hmax": "attach_limit_km",
    "nf": "refraction_index",
    "c": "light_speed_km_s",
    "access": "access_ms",
    "graph-seed": "graph_seed",
    "embed-seed": "embed_seed",
    "attach-seed": "attach_seed",
}

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, field: str, raw: str):
    ftype = _FIELD_TYPES[field]
    try:
        if ftype == "int":
            return int(raw)
        if ftype == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ParameterError(f"bad value {raw!r} for {key}") from None


def load_config(stream: IO[str], path: str | None = None) -> dict[str, str]:
    """Read `key value` lines into a raw mapping; keys checked, not values."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise FormatError(f"expected 'key value', got {line!r}",
                              path=path, line=lineno)
        key, value = parts[0], parts[1].strip()
        if key not in KEYMAP:
            raise ParameterError(f"unknown config key {key!r}"
                                 + (f" ({path}:{lineno})" if path else ""))
        if key in out:
            raise FormatError(f"duplicate config key {key!r}",
                              path=path, line=lineno)
        out[key] = value
    return out


def resolve_config(file_values: Mapping[str, str] | None = None,
                   flag_values: Mapping[str, object] | None = None) -> RunConfig:
    """Defaults, overridden by the config file, overridden by flags."""
    cfg = RunConfig()
    for key, raw in (file_values or {}).items():
        field = KEYMAP[key]
        setattr(cfg, field, _coerce(key, field, raw))
    for key, value in (flag_values or {}).items():
        if value is None:
            continue
        setattr(cfg, KEYMAP[key], value)
    cfg.validate()
    return cfg


def config_lines(cfg: RunConfig) -> list[str]:
    """The resolved config as `key value` lines, reloadable as a config file."""
    out = []
    for key, field in KEYMAP.items():
        value = getattr(cfg, field)
        if value == "":  # a bare key would not reload
            continue
        out.append(f"{key} {value!r}" if isinstance(value, float)
                   else f"{key} {value}")
    return out
