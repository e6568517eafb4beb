"""Flat ``key = value`` run configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .fit import ParameterGrid, frange, grid_violations
from .model import ModelParams
from .sim import SimConfig


class ConfigError(ValueError):
    def __init__(self, key: str | None, message: str):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


@dataclass
class RunConfig:
    n_societies: int = 4
    n_participants: int = 8
    n_concepts: int = 16
    games_per_pair: int = 6
    memory_size: int = 4
    conformity: float = 0.0
    content: float = 0.0
    innovation: float = 0.01
    innovation_rate: float | None = None
    q_min: float = 0.05
    q_max: float = 1.0
    seed: int = 0
    memory_sizes: tuple[int, ...] = (2, 4, 8, 16)
    conformity_step: float = 0.2
    content_step: float = 0.1
    conformity_values: tuple[float, ...] | None = None
    content_values: tuple[float, ...] | None = None
    threshold: float = 19.0
    out: str = "."

    def resolved(self) -> "RunConfig":
        """Copy with every derived default made explicit."""
        cfg = RunConfig(**asdict(self))
        if cfg.innovation_rate is None:
            cfg.innovation_rate = cfg.innovation
        if cfg.conformity_values is None:
            cfg.conformity_values = tuple(_steps("conformity_step", -1.0, 1.0, cfg.conformity_step))
        if cfg.content_values is None:
            cfg.content_values = tuple(_steps("content_step", 0.0, 1.0, cfg.content_step))
        return cfg

    def true_params(self) -> ModelParams:
        try:
            return ModelParams(self.memory_size, self.conformity, self.content, self.innovation)
        except ValueError as exc:
            raise ConfigError(None, str(exc)) from exc

    def sim_config(self) -> SimConfig:
        try:
            return SimConfig(
                true_params=self.true_params(),
                n_societies=self.n_societies,
                n_participants=self.n_participants,
                n_concepts=self.n_concepts,
                games_per_pair=self.games_per_pair,
                innovation_rate=self.innovation_rate,
                quality_range=(self.q_min, self.q_max),
                seed=self.seed,
            )
        except ValueError as exc:
            raise ConfigError(None, str(exc)) from exc

    def grid_problems(self) -> list[str]:
        cfg = self.resolved()
        return grid_violations(cfg.memory_sizes, cfg.conformity_values, cfg.content_values, cfg.innovation)

    def grid(self) -> ParameterGrid:
        cfg = self.resolved()
        problems = self.grid_problems()
        if problems:
            raise ConfigError(None, "invalid parameter grid: " + "; ".join(problems))
        return ParameterGrid(cfg.memory_sizes, cfg.conformity_values, cfg.content_values, cfg.innovation)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if isinstance(value, tuple):
                value = ", ".join(_fmt(v) for v in value)
            else:
                value = _fmt(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _steps(key: str, lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ConfigError(key, "must be positive")
    try:
        return frange(lo, hi, step)
    except ValueError as exc:
        raise ConfigError(key, str(exc)) from exc


_TYPES = {
    "n_societies": int,
    "n_participants": int,
    "n_concepts": int,
    "games_per_pair": int,
    "memory_size": int,
    "conformity": float,
    "content": float,
    "innovation": float,
    "innovation_rate": float,
    "q_min": float,
    "q_max": float,
    "seed": int,
    "memory_sizes": "ints",
    "conformity_step": float,
    "content_step": float,
    "conformity_values": "floats",
    "content_values": "floats",
    "threshold": float,
    "out": str,
}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "ints":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if kind == "floats":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return kind(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = RunConfig(**asdict(base)) if base else RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"line {lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(key, f"unknown key (line {lineno})")
        setattr(cfg, key, _convert(key, raw))
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    return parse_config(Path(path).read_text())
