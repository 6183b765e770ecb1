"""Run configuration.

The defaults reproduce the reference setup end to end: 16-frame scoring
stride, suspicious-window rule max(300, T // 10), fixed gate margin 0.05,
Gaussian smoothing sigma 10 / truncate 4.0, 180-frame window subsample,
10-frame clips spanning +/- 10 s, and 16 description frames.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .backend import BackendEndpoint
from .errors import ConfigError

STAGES = ("vad", "val", "vau")

MARGIN_MODES = ("fixed", "adaptive")

LABEL_SOURCES = ("first_pass", "refined")


@dataclass
class RunConfig:
    stride: int = 16
    margin_mode: str = "fixed"
    margin: float = 0.05
    boundary: float = 0.5
    window_floor: int = 300
    window_divisor: int = 10
    smoothing_sigma: float = 10.0
    smoothing_truncate: float = 4.0
    tag_cap: int = 8
    window_subsample_cap: int = 180
    vau_sample_count: int = 16
    clip_size: int = 10
    clip_radius_seconds: float = 10.0
    prior_override: str | None = None
    overlay_enabled: bool = True
    label_source: str = "first_pass"
    temperature: float = 0.0
    workers: int = 1
    clip_parallel: int = 1

    def __post_init__(self) -> None:
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.margin_mode not in MARGIN_MODES:
            raise ConfigError(f"margin_mode must be one of {MARGIN_MODES}")
        if not 0.0 <= self.margin < 0.5:
            raise ConfigError("margin must lie in [0, 0.5)")
        if not 0.0 < self.boundary < 1.0:
            raise ConfigError("boundary must lie in (0, 1)")
        if self.window_floor < 1 or self.window_divisor < 1:
            raise ConfigError("window rule parameters must be positive")
        if self.label_source not in LABEL_SOURCES:
            raise ConfigError(f"label_source must be one of {LABEL_SOURCES}")
        if min(self.tag_cap, self.window_subsample_cap, self.vau_sample_count, self.clip_size) < 1:
            raise ConfigError("caps and sample counts must be >= 1")
        if self.workers < 1 or self.clip_parallel < 1:
            raise ConfigError("workers and clip_parallel must be >= 1")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class EndpointsConfig:
    """Per-role endpoint settings; roles fall back to the default entry."""

    default: BackendEndpoint | None = None
    roles: dict[str, BackendEndpoint] = field(default_factory=dict)

    def for_role(self, role: str) -> BackendEndpoint:
        endpoint = self.roles.get(role, self.default)
        if endpoint is None:
            raise ConfigError(f"no endpoint configured for role {role!r} and no default")
        return endpoint

    @classmethod
    def from_file(cls, path: str | Path) -> "EndpointsConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        default = BackendEndpoint(**data["default"]) if "default" in data else None
        roles = {name: BackendEndpoint(**cfg) for name, cfg in data.get("roles", {}).items()}
        return cls(default=default, roles=roles)
