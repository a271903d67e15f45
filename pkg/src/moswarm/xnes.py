"""Exponential natural evolution strategies (xNES).

A black-box maximizer over real vectors. The search distribution is
``N(mu, sigma**2 * B @ B.T)`` with ``det(B) = 1``; each generation samples
``x = mu + sigma * B @ z`` for standard normal ``z``, ranks the samples by
fitness, and moves ``(mu, sigma, B)`` along the natural gradient using
exponential-map updates.

Usage::

    es = XNES.create(np.zeros(10), 1.0)
    for _ in range(100):
        cands = es.ask()
        es.tell([f(c.x) for c in cands])
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ConfigurationError, EvaluationError
from .expm import matrix_exponential
from .rng import make_rng, rng_from_state, rng_state


def default_population_size(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(dim)))


def default_eta_sigma(dim: int) -> float:
    return 0.6 * (3 + math.log(dim)) / (dim * math.sqrt(dim))


@dataclass(frozen=True)
class StrategyConfig:
    """Strategy constants. ``None`` fields take dimension-dependent defaults."""

    population_size: Optional[int] = None
    eta_mu: float = 1.0
    eta_sigma: Optional[float] = None
    eta_b: Optional[float] = None
    seed: int = 0

    def resolved(self, dim: int) -> "StrategyConfig":
        cfg = replace(
            self,
            population_size=(self.population_size if self.population_size is not None
                             else default_population_size(dim)),
            eta_sigma=self.eta_sigma if self.eta_sigma is not None else default_eta_sigma(dim),
            eta_b=self.eta_b if self.eta_b is not None else default_eta_sigma(dim),
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.population_size is not None and self.population_size < 2:
            raise ConfigurationError(
                f"population_size must be >= 2, got {self.population_size}")
        for name in ("eta_mu", "eta_sigma", "eta_b"):
            v = getattr(self, name)
            if v is not None and not (v > 0 and math.isfinite(v)):
                raise ConfigurationError(f"{name} must be positive and finite, got {v}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass
class SearchDistribution:
    mu: np.ndarray
    sigma: float
    b_matrix: np.ndarray
    config: StrategyConfig
    generation: int = 0

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def population_size(self) -> int:
        return self.config.population_size


@dataclass
class Candidate:
    z: np.ndarray
    x: np.ndarray
    fitness: Optional[float] = None


class Gradients(NamedTuple):
    delta: np.ndarray
    m: np.ndarray
    sigma: float
    b: np.ndarray


def init_distribution(dim, initial_mu, initial_sigma, config=None) -> SearchDistribution:
    """Centre the search at ``initial_mu`` with step size ``initial_sigma`` and ``B = I``."""
    mu = np.array(initial_mu, dtype=float).reshape(-1)
    if int(dim) != dim or dim < 1:
        raise ConfigurationError(f"dim must be a positive integer, got {dim}")
    if mu.shape[0] != dim:
        raise ConfigurationError(f"initial_mu has length {mu.shape[0]}, expected dim={dim}")
    if not np.all(np.isfinite(mu)):
        raise ConfigurationError("initial_mu must be finite")
    if not (initial_sigma > 0 and math.isfinite(initial_sigma)):
        raise ConfigurationError(f"initial_sigma must be positive, got {initial_sigma}")
    config = (config or StrategyConfig()).resolved(int(dim))
    return SearchDistribution(mu=mu, sigma=float(initial_sigma), b_matrix=np.eye(int(dim)),
                              config=config, generation=0)


def transform(dist: SearchDistribution, z) -> np.ndarray:
    """Map standard-normal draws (one per row) into search space."""
    z = np.asarray(z, dtype=float)
    return dist.mu + dist.sigma * (z @ dist.b_matrix.T)


def sample_population(dist: SearchDistribution, rng: np.random.Generator) -> list[Candidate]:
    z = rng.standard_normal((dist.population_size, dist.dim))
    x = transform(dist, z)
    return [Candidate(z=z[i], x=x[i]) for i in range(len(z))]


def compute_utilities(population_size: int) -> np.ndarray:
    """Log-rank utilities, best rank first, summing to zero."""
    lam = int(population_size)
    if lam < 1:
        raise ConfigurationError(f"population_size must be >= 1, got {population_size}")
    ranks = np.arange(1, lam + 1)
    raw = np.maximum(0.0, math.log(lam / 2 + 1) - np.log(ranks))
    return raw / raw.sum() - 1.0 / lam


def _fitness_array(candidates: Sequence[Candidate]) -> np.ndarray:
    out = np.empty(len(candidates))
    for i, c in enumerate(candidates):
        f = c.fitness
        if f is None:
            raise EvaluationError(f"candidate {i} has no fitness")
        f = float(f)
        if not math.isfinite(f):
            raise EvaluationError(f"candidate {i} has non-finite fitness {f}")
        out[i] = f
    return out


def rank_utilities(fitness) -> np.ndarray:
    """Utility of each candidate (in index order) from its fitness rank.

    Higher fitness is better. Candidates with equal fitness share the mean
    of the utilities their ranks would receive.
    """
    fitness = np.asarray(fitness, dtype=float)
    order = np.argsort(-fitness, kind="stable")
    ranked = compute_utilities(len(fitness))
    u = np.empty(len(fitness))
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and fitness[order[j + 1]] == fitness[order[i]]:
            j += 1
        u[order[i:j + 1]] = ranked[i:j + 1].mean() if j > i else ranked[i]
        i = j + 1
    return u


def compute_gradients(dist: SearchDistribution, candidates: Sequence[Candidate]) -> Gradients:
    if len(candidates) != dist.population_size:
        raise EvaluationError(
            f"expected {dist.population_size} candidates, got {len(candidates)}")
    fitness = _fitness_array(candidates)
    u = rank_utilities(fitness)

    z = np.stack([c.z for c in candidates])
    d = dist.dim
    g_delta = u @ z
    g_m = (z.T * u) @ z - u.sum() * np.eye(d)
    g_sigma = float(np.trace(g_m)) / d
    g_b = g_m - g_sigma * np.eye(d)
    return Gradients(g_delta, g_m, g_sigma, g_b)


def apply_gradients(dist: SearchDistribution, grads: Gradients) -> SearchDistribution:
    cfg = dist.config
    mu = dist.mu + cfg.eta_mu * dist.sigma * (dist.b_matrix @ grads.delta)
    sigma = dist.sigma * math.exp(0.5 * cfg.eta_sigma * grads.sigma)
    b = dist.b_matrix @ matrix_exponential(0.5 * cfg.eta_b * grads.b)
    return SearchDistribution(mu=mu, sigma=sigma, b_matrix=b, config=cfg,
                              generation=dist.generation + 1)


def update_distribution(dist: SearchDistribution, candidates: Sequence[Candidate]) -> SearchDistribution:
    """One natural-gradient step from a fully evaluated population."""
    return apply_gradients(dist, compute_gradients(dist, candidates))


# -- serialization ----------------------------------------------------------

def _hex_list(a) -> list:
    return [float(v).hex() for v in np.asarray(a, dtype=float).reshape(-1)]


def _from_hex(vals) -> np.ndarray:
    return np.array([float.fromhex(v) for v in vals], dtype=float)


def strategy_to_dict(cfg: StrategyConfig) -> dict:
    return {
        "population_size": cfg.population_size,
        "eta_mu": None if cfg.eta_mu is None else float(cfg.eta_mu).hex(),
        "eta_sigma": None if cfg.eta_sigma is None else float(cfg.eta_sigma).hex(),
        "eta_b": None if cfg.eta_b is None else float(cfg.eta_b).hex(),
        "seed": int(cfg.seed),
    }


def strategy_from_dict(d: dict) -> StrategyConfig:
    def f(v):
        return None if v is None else float.fromhex(v) if isinstance(v, str) else float(v)

    return StrategyConfig(population_size=d.get("population_size"), eta_mu=f(d["eta_mu"]),
                          eta_sigma=f(d.get("eta_sigma")), eta_b=f(d.get("eta_b")),
                          seed=int(d.get("seed", 0)))


def distribution_to_dict(dist: SearchDistribution) -> dict:
    """Lossless JSON-ready form; floats are stored as hex strings."""
    return {
        "dim": dist.dim,
        "mu": _hex_list(dist.mu),
        "sigma": float(dist.sigma).hex(),
        "b_matrix": _hex_list(dist.b_matrix),
        "generation": dist.generation,
        "config": strategy_to_dict(dist.config),
    }


def distribution_from_dict(d: dict) -> SearchDistribution:
    dim = int(d["dim"])
    mu = _from_hex(d["mu"])
    b = _from_hex(d["b_matrix"])
    if mu.shape != (dim,) or b.shape != (dim * dim,):
        raise ValueError(f"distribution arrays do not match dim={dim}")
    sigma = float.fromhex(d["sigma"])
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return SearchDistribution(mu=mu, sigma=sigma, b_matrix=b.reshape(dim, dim),
                              config=strategy_from_dict(d["config"]),
                              generation=int(d["generation"]))


# -- ask/tell front end -----------------------------------------------------

@dataclass
class XNES:
    """Stateful ask/tell wrapper around the functional core.

    ``ask`` draws a population from the internal PCG64 stream seeded by
    ``config.seed``; ``tell`` takes fitnesses in candidate-index order.
    """

    dist: SearchDistribution
    rng: np.random.Generator
    pending: Optional[list] = None
    last_gradients: Optional[Gradients] = field(default=None, repr=False)

    @classmethod
    def create(cls, initial_mu, initial_sigma=1.0, config: Optional[StrategyConfig] = None):
        mu = np.asarray(initial_mu, dtype=float)
        dist = init_distribution(mu.shape[0], mu, initial_sigma, config)
        return cls(dist=dist, rng=make_rng(dist.config.seed))

    def ask(self) -> list[Candidate]:
        if self.pending is not None:
            raise EvaluationError("ask() called twice without tell()")
        self.pending = sample_population(self.dist, self.rng)
        return self.pending

    def tell(self, fitnesses) -> SearchDistribution:
        if self.pending is None:
            raise EvaluationError("tell() called before ask()")
        fitnesses = list(fitnesses)
        if len(fitnesses) != len(self.pending):
            raise EvaluationError(
                f"expected {len(self.pending)} fitnesses, got {len(fitnesses)}")
        for c, f in zip(self.pending, fitnesses):
            c.fitness = f
        grads = compute_gradients(self.dist, self.pending)
        self.dist = apply_gradients(self.dist, grads)
        self.last_gradients = grads
        self.pending = None
        return self.dist

    def optimize(self, objective, max_evaluations):
        """Maximize ``objective`` until the evaluation budget is spent.

        Returns ``(best_x, best_fitness, evaluations)`` for the best sample seen.
        """
        best_x, best_f, evals = None, -math.inf, 0
        while evals < max_evaluations:
            cands = self.ask()
            fits = [float(objective(c.x)) for c in cands]
            evals += len(cands)
            i = int(np.argmax(fits))
            if fits[i] > best_f:
                best_x, best_f = cands[i].x.copy(), fits[i]
            self.tell(fits)
        return best_x, best_f, evals

    def state_dict(self) -> dict:
        if self.pending is not None:
            raise EvaluationError("cannot snapshot between ask() and tell()")
        return {"distribution": distribution_to_dict(self.dist), "rng": rng_state(self.rng)}

    @classmethod
    def from_state_dict(cls, state: dict) -> "XNES":
        return cls(dist=distribution_from_dict(state["distribution"]),
                   rng=rng_from_state(state["rng"]))
