"""Evolving one swarm controller with xNES.

Each candidate genome is scored by running one episode per entry of the
objective-weight schedule and summing the per-step scalarized fitness over
all of them. All candidates of a generation see the same initial layouts
(common random numbers); the layouts change from one generation to the
next.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .config import TrainConfig, config_from_dict, config_hash, config_to_dict
from .controller import NetworkSpec, check_genome, genome_size
from .episode import episode_world, rollout_world
from .errors import CheckpointError, EvaluationError
from .metrics import LOG_HEADER
from .objectives import current_fit, network_fit, weight_schedule
from .rng import derive_seed
from .xnes import XNES, SearchDistribution, StrategyConfig, distribution_from_dict

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "moswarm-checkpoint"
CHECKPOINT_VERSION = 1
GENOME_FORMAT = "moswarm-genome"

_SAMPLING_STREAM = 0
_EPISODE_STREAM = 1


class GenerationRecord(NamedTuple):
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float
    sigma: float


def evaluate_genome(genome, config: TrainConfig, episode_seed: int) -> float:
    """Total scalarized fitness of ``genome`` over the weight schedule."""
    genome = check_genome(genome, config.network)
    fits: list[float] = []
    for k, weights in enumerate(weight_schedule(config.dw_increment)):
        world = episode_world(config.arena, config.num_robots, episode_seed, k)
        obj1, obj2, _ = rollout_world(genome, config.network, world, weights, config.t_max)
        for a, b in zip(obj1.tolist(), obj2.tolist()):
            fits.append(current_fit(weights, a, b))
    return network_fit(fits)


def _evaluate_job(args):
    genome, config, seed = args
    return evaluate_genome(genome, config, seed)


def episode_seed(config: TrainConfig, generation: int) -> int:
    return derive_seed(config.seed, _EPISODE_STREAM, generation)


def strategy_for(config: TrainConfig) -> StrategyConfig:
    return replace(config.strategy, seed=derive_seed(config.seed, _SAMPLING_STREAM))


@dataclass
class TrainState:
    """Everything needed to continue a run exactly where it stopped."""

    config: TrainConfig
    es: XNES
    best_genome: Optional[np.ndarray] = None
    best_fitness: float = -math.inf
    evaluations: int = 0
    log: list = field(default_factory=list)

    @property
    def distribution(self) -> SearchDistribution:
        return self.es.dist

    @classmethod
    def fresh(cls, config: TrainConfig) -> "TrainState":
        dim = genome_size(config.network)
        es = XNES.create(np.zeros(dim), config.initial_sigma, strategy_for(config))
        config.validate(es.dist.population_size)
        return cls(config=config, es=es)


class TrainResult(NamedTuple):
    best_genome: np.ndarray
    best_fitness: float
    distribution: SearchDistribution
    log: list


def train(config: TrainConfig, *, state: Optional[TrainState] = None,
          checkpoint_path=None, checkpoint_every: int = 0, log_path=None) -> TrainResult:
    """Run generations until ``config.max_evaluations`` is reached.

    Pass ``state`` (from :func:`load_checkpoint`) to resume. When
    ``checkpoint_path`` is given a checkpoint is written every
    ``checkpoint_every`` generations (0: only at the end) and also before an
    exception propagates. ``log_path`` receives the generation log as CSV.
    """
    if state is None:
        state = TrainState.fresh(config)
    else:
        if config_hash(state.config) != config_hash(config):
            raise CheckpointError("checkpoint was written under a different configuration")
        state.config = config
        config.validate(state.es.dist.population_size)

    es = state.es
    lam = es.dist.population_size
    log_fh = _open_log(log_path, state.log) if log_path else None
    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        while state.evaluations < config.max_evaluations:
            rng_before = es.rng.bit_generator.state
            try:
                cands = es.ask()
                seed = episode_seed(config, es.dist.generation)
                jobs = [(c.x, config, seed) for c in cands]
                fits = list(pool.map(_evaluate_job, jobs)) if pool else [_evaluate_job(j) for j in jobs]
                for i, f in enumerate(fits):
                    if not math.isfinite(f):
                        raise EvaluationError(f"candidate {i} has non-finite fitness {f}")
            except BaseException:
                es.pending = None
                es.rng.bit_generator.state = rng_before
                raise
            state.evaluations += lam
            i_best = int(np.argmax(fits))
            if fits[i_best] > state.best_fitness:
                state.best_fitness = float(fits[i_best])
                state.best_genome = cands[i_best].x.copy()
            es.tell(fits)
            rec = GenerationRecord(es.dist.generation, state.evaluations, state.best_fitness,
                                   float(np.mean(fits)), es.dist.sigma)
            state.log.append(rec)
            if log_fh:
                log_fh.write(_log_row(rec))
                log_fh.flush()
            if rec.generation % 50 == 0:
                log.info("gen %d evals %d best %.3f mean %.3f sigma %.4f", *rec)
            if checkpoint_path and checkpoint_every and rec.generation % checkpoint_every == 0:
                save_checkpoint(checkpoint_path, state)
    except BaseException:
        if checkpoint_path:
            save_checkpoint(checkpoint_path, state)
        raise
    finally:
        if pool:
            pool.shutdown()
        if log_fh:
            log_fh.close()
    if checkpoint_path:
        save_checkpoint(checkpoint_path, state)
    return TrainResult(state.best_genome, state.best_fitness, es.dist, list(state.log))


# -- log CSV ----------------------------------------------------------------

def _log_row(rec: GenerationRecord) -> str:
    return f"{rec.generation},{rec.evaluations},{rec.best_fitness!r},{rec.mean_fitness!r},{rec.sigma!r}\n"


def _open_log(path, existing):
    fh = open(path, "w", newline="")
    fh.write(",".join(LOG_HEADER) + "\n")
    for rec in existing:
        fh.write(_log_row(rec))
    return fh


def read_log(path) -> list[GenerationRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [GenerationRecord(int(r["generation"]), int(r["evaluations"]), float(r["best_fitness"]),
                             float(r["mean_fitness"]), float(r["sigma"])) for r in rows]


# -- files ------------------------------------------------------------------

def atomic_write_text(path, text: str) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def genome_to_dict(genome, network: NetworkSpec, fitness: Optional[float] = None) -> dict:
    d = {"format": GENOME_FORMAT, "layer_sizes": list(network.layer_sizes),
         "params": [float(v).hex() for v in np.asarray(genome, dtype=float)]}
    if fitness is not None:
        d["fitness"] = float(fitness).hex()
    return d


def genome_from_dict(d: dict):
    try:
        network = NetworkSpec(tuple(d["layer_sizes"]))
        params = np.array([float.fromhex(v) for v in d["params"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed genome record: {exc!r}") from None
    return check_genome(params, network), network


def save_genome(path, genome, network: NetworkSpec, fitness: Optional[float] = None) -> None:
    atomic_write_text(path, json.dumps(genome_to_dict(genome, network, fitness), indent=1) + "\n")


def load_genome(path):
    """Read ``(params, NetworkSpec)`` from a genome file or a checkpoint."""
    data = _read_json(path)
    if data.get("format") == CHECKPOINT_FORMAT:
        if data.get("best_genome") is None:
            raise CheckpointError(f"{path}: checkpoint holds no evaluated genome yet")
        return genome_from_dict(data["best_genome"])
    if data.get("format") != GENOME_FORMAT:
        raise CheckpointError(f"{path}: not a genome or checkpoint file")
    return genome_from_dict(data)


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed or truncated JSON ({exc})") from None
    if not isinstance(data, dict):
        raise CheckpointError(f"{path}: expected a JSON object")
    return data


def checkpoint_to_dict(state: TrainState) -> dict:
    es_state = state.es.state_dict()
    return {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": config_to_dict(state.config),
        "config_hash": config_hash(state.config),
        "distribution": es_state["distribution"],
        "rng": es_state["rng"],
        "evaluations": state.evaluations,
        "best_fitness": float(state.best_fitness).hex(),
        "best_genome": (None if state.best_genome is None
                        else genome_to_dict(state.best_genome, state.config.network)),
        "log_cursor": len(state.log),
        "log": [[r.generation, r.evaluations, r.best_fitness.hex(), r.mean_fitness.hex(), r.sigma.hex()]
                for r in state.log],
    }


def save_checkpoint(path, state: TrainState) -> None:
    atomic_write_text(path, json.dumps(checkpoint_to_dict(state), indent=1) + "\n")


_REQUIRED = ("version", "config", "config_hash", "distribution", "rng", "evaluations",
             "best_fitness", "best_genome", "log_cursor", "log")


def load_checkpoint(path) -> TrainState:
    data = _read_json(path)
    if data.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path}: not a checkpoint (format={data.get('format')!r})")
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise CheckpointError(f"{path}: missing field(s) {missing}")
    if data["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: checkpoint version {data['version']}, expected {CHECKPOINT_VERSION}")
    try:
        config = config_from_dict(data["config"])
    except Exception as exc:
        raise CheckpointError(f"{path}: bad 'config': {exc}") from None
    if config_hash(config) != data["config_hash"]:
        raise CheckpointError(f"{path}: 'config_hash' does not match 'config'")
    try:
        es = XNES.from_state_dict({"distribution": data["distribution"], "rng": data["rng"]})
    except Exception as exc:
        raise CheckpointError(f"{path}: bad 'distribution' or 'rng': {exc!r}") from None
    if es.dist.dim != genome_size(config.network):
        raise CheckpointError(f"{path}: 'distribution' dim {es.dist.dim} does not match network")
    try:
        log_rows = [GenerationRecord(int(g), int(e), float.fromhex(b), float.fromhex(m), float.fromhex(s))
                    for g, e, b, m, s in data["log"]]
        best_fitness = float.fromhex(data["best_fitness"])
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: bad 'log' or 'best_fitness': {exc!r}") from None
    if len(log_rows) != data["log_cursor"]:
        raise CheckpointError(f"{path}: 'log_cursor' {data['log_cursor']} != {len(log_rows)} rows")
    best = None
    if data["best_genome"] is not None:
        best, _ = genome_from_dict(data["best_genome"])
    return TrainState(config=config, es=es, best_genome=best, best_fitness=best_fitness,
                      evaluations=int(data["evaluations"]), log=log_rows)
