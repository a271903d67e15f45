"""Single-episode rollouts at fixed objective weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .controller import NetworkSpec, check_genome
from .objectives import ObjectiveWeights, current_fit
from .rng import make_rng
from .sim import ArenaSpec, WorldState, reset_world


@dataclass
class EpisodeResult:
    weights: ObjectiveWeights
    initial: WorldState
    obj1: np.ndarray          # per-step swarm L1 distance, steps 1..T
    obj2: np.ndarray          # per-step swarm L1 speed, steps 1..T
    trace: Optional[np.ndarray] = None

    @property
    def num_robots(self) -> int:
        return len(self.initial.robots)

    def step_fits(self) -> list[float]:
        return [current_fit(self.weights, a, b) for a, b in zip(self.obj1.tolist(), self.obj2.tolist())]

    def initial_mean_distance(self) -> float:
        return sum(abs(r.x) + abs(r.y) for r in self.initial.robots) / self.num_robots


def episode_world(arena: ArenaSpec, num_robots: int, seed: int, episode_index: int = 0) -> WorldState:
    """Initial layout for episode ``episode_index`` under ``seed``."""
    return reset_world(arena, num_robots, make_rng(seed, episode_index))


def rollout_world(genome, network: NetworkSpec, world: WorldState, weights, steps: int,
                  record: bool = False):
    arena = world.arena
    poses = [(r.x, r.y, r.heading) for r in world.robots]
    return kernels.rollout(genome, network.layer_sizes, poses, float(weights[0]), float(weights[1]),
                           arena.side_length, arena.robot_radius, arena.sensor_max_range,
                           arena.dt, int(steps), record)


def run_episode(genome, network: NetworkSpec, arena: ArenaSpec, weights, num_robots: int,
                steps: int, seed: int, episode_index: int = 0, record: bool = False) -> EpisodeResult:
    network.validate_io()
    genome = check_genome(genome, network)
    weights = ObjectiveWeights(*weights)
    world = episode_world(arena, num_robots, seed, episode_index)
    obj1, obj2, trace = rollout_world(genome, network, world, weights, steps, record)
    return EpisodeResult(weights, world, obj1, obj2, trace)
