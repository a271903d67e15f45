"""Training configuration: dataclass, TOML loading and dotted overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

from .controller import NetworkSpec
from .errors import ConfigurationError
from .sim import ArenaSpec
from .xnes import StrategyConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class TrainConfig:
    """Everything that determines a training run.

    ``seed`` drives every random stream: the optimizer's sampling stream,
    the per-generation episode seeds and the initial layouts. The
    ``strategy.seed`` field is ignored here and overwritten from ``seed``.
    """

    num_robots: int = 3
    t_max: int = 30
    dw_increment: float = 0.5
    max_evaluations: int = 20_000
    seed: int = 0
    initial_sigma: float = 1.0
    workers: int = 1
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    arena: ArenaSpec = field(default_factory=ArenaSpec)
    network: NetworkSpec = field(default_factory=NetworkSpec)

    def validate(self, population_size: int | None = None) -> None:
        if self.num_robots < 1:
            raise ConfigurationError(f"num_robots must be positive, got {self.num_robots}")
        if self.t_max < 1:
            raise ConfigurationError(f"t_max must be positive, got {self.t_max}")
        if self.max_evaluations < 1:
            raise ConfigurationError(f"max_evaluations must be positive, got {self.max_evaluations}")
        if population_size is not None and self.max_evaluations < population_size:
            raise ConfigurationError(
                f"max_evaluations={self.max_evaluations} is smaller than one generation "
                f"({population_size} candidates)")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.initial_sigma > 0 and math.isfinite(self.initial_sigma)):
            raise ConfigurationError(f"initial_sigma must be positive, got {self.initial_sigma}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be >= 1, got {self.workers}")
        self.network.validate_io()
        self.strategy.validate()
        from .objectives import weight_schedule

        weight_schedule(self.dw_increment)


_SECTIONS = {"strategy": StrategyConfig, "arena": ArenaSpec, "network": NetworkSpec}


def config_to_dict(cfg: TrainConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["network"]["layer_sizes"] = list(cfg.network.layer_sizes)
    return d


def config_from_dict(d: Mapping[str, Any]) -> TrainConfig:
    top = {f.name for f in dataclasses.fields(TrainConfig)}
    kwargs: dict[str, Any] = {}
    for key, value in d.items():
        if key not in top:
            raise ConfigurationError(f"unknown config field {key!r}")
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            names = {f.name for f in dataclasses.fields(cls)}
            if not isinstance(value, Mapping):
                raise ConfigurationError(f"[{key}] must be a table")
            extra = set(value) - names
            if extra:
                raise ConfigurationError(f"unknown field(s) in [{key}]: {sorted(extra)}")
            sub = dict(value)
            if key == "network" and "layer_sizes" in sub:
                sub["layer_sizes"] = tuple(sub["layer_sizes"])
            try:
                kwargs[key] = cls(**sub)
            except TypeError as exc:
                raise ConfigurationError(f"bad [{key}] section: {exc}") from None
        else:
            kwargs[key] = value
    try:
        cfg = TrainConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    return _coerce(cfg)


def _coerce(cfg: TrainConfig) -> TrainConfig:
    try:
        return dataclasses.replace(
            cfg, num_robots=int(cfg.num_robots), t_max=int(cfg.t_max),
            dw_increment=float(cfg.dw_increment), max_evaluations=int(cfg.max_evaluations),
            seed=int(cfg.seed), initial_sigma=float(cfg.initial_sigma), workers=int(cfg.workers))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad config value: {exc}") from None


def load_config(path) -> TrainConfig:
    """Read a TOML config; ``"default"`` returns the built-in defaults."""
    if str(path) == "default":
        return TrainConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    # top-level keys may also sit under a [train] table
    flat = dict(data.pop("train", {}))
    flat.update(data)
    return config_from_dict(flat)


def parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(cfg: TrainConfig, overrides: Mapping[str, Any]) -> TrainConfig:
    """Set fields by dotted name, e.g. ``{"strategy.eta_mu": 0.5}``."""
    d = config_to_dict(cfg)
    for key, value in overrides.items():
        parts = key.split(".")
        target = d
        for p in parts[:-1]:
            if p not in target or not isinstance(target[p], dict):
                raise ConfigurationError(f"unknown config section in {key!r}")
            target = target[p]
        if parts[-1] not in target:
            raise ConfigurationError(f"unknown config field {key!r}")
        target[parts[-1]] = value
    return config_from_dict(d)


def config_hash(cfg: TrainConfig) -> str:
    """Digest of the fields that shape the optimization trajectory.

    The evaluation budget and worker count are excluded so a run can be
    resumed with a larger budget or on more cores.
    """
    d = config_to_dict(cfg)
    d.pop("max_evaluations")
    d.pop("workers")
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
