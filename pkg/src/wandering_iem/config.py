"""Run configuration shared by the command line and the estimators."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

LETTERS = tuple("123456789")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    theta: float = 0.3  # gamma = exp(i theta) * Gamma
    letter: str = "1"
    depth: int = 14  # fractal clouds
    extreme_depth: int = 14
    n_dirs: int = 64
    psi_depth: int = 10
    ifs_depth: int = 12
    urp_depth: int = 14
    boundary_depth: int = 12
    k_depth: int = 8
    N: int = 5000
    n_orbit: int = 500
    rho: float = 0.4
    tol: float = 1e-9
    slope_tol: float = 1e-6
    out: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.letter not in LETTERS:
            raise ConfigError(f"letter must be one of {''.join(LETTERS)}, got {self.letter!r}")
        for name in ("depth", "extreme_depth", "psi_depth", "ifs_depth", "urp_depth", "boundary_depth",
                     "k_depth", "n_dirs"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("N", "n_orbit"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
        for name in ("tol", "slope_tol", "rho"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0:
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if not isinstance(self.theta, (int, float)) or isinstance(self.theta, bool):
            raise ConfigError(f"theta must be a number, got {self.theta!r}")

    def replace(self, **changes) -> "RunConfig":
        d = asdict(self)
        d.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig(**d)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        return cls.from_json(text)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())
