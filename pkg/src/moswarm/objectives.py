"""Swarm objectives and their weighted-sum scalarization.

Objective 1 is the summed L1 distance of the robots from the arena centre
(to be minimized); objective 2 is the summed L1 norm of the robots'
realized velocities (to be maximized). Per-step fitness negates the first
so the whole problem is a maximization.
"""

from __future__ import annotations

import math
from typing import Iterable, NamedTuple

from .errors import ConfigurationError, EvaluationError


class ObjectiveWeights(NamedTuple):
    w1: float
    w2: float

    @classmethod
    def from_w1(cls, w1: float) -> "ObjectiveWeights":
        if not 0.0 <= w1 <= 1.0:
            raise ConfigurationError(f"w1 must lie in [0, 1], got {w1}")
        return cls(float(w1), 1.0 - float(w1))


class StepObjectives(NamedTuple):
    obj1_distance: float
    obj2_velocity: float
    current_fit: float


def obj1_distance(world) -> float:
    total = 0.0
    for r in world.robots:
        total += abs(r.x) + abs(r.y)
    return total


def obj2_velocity(world) -> float:
    """Summed ``(|dx| + |dy|) / dt`` over the robots' last realized moves."""
    dt = world.arena.dt
    total = 0.0
    for r in world.robots:
        total += (abs(r.dx) + abs(r.dy)) / dt
    return total


def current_fit(weights, obj1: float, obj2: float) -> float:
    w1, w2 = weights
    return w1 * -1.0 * obj1 + w2 * obj2


def step_objectives(weights, world) -> StepObjectives:
    o1 = obj1_distance(world)
    o2 = obj2_velocity(world)
    return StepObjectives(o1, o2, current_fit(weights, o1, o2))


def weight_schedule(dw_increment: float) -> list[ObjectiveWeights]:
    """Weight pairs ``(1 - dw, dw)`` for dw = 0, inc, 2 inc, ..., 1."""
    inc = float(dw_increment)
    if not 0.0 < inc <= 1.0:
        raise ConfigurationError(f"dw increment must lie in (0, 1], got {dw_increment}")
    steps = round(1.0 / inc)
    if abs(steps * inc - 1.0) > 1e-9:
        raise ConfigurationError(f"dw increment {dw_increment} does not divide 1")
    out = []
    for k in range(steps + 1):
        dw = k / steps
        out.append(ObjectiveWeights(1.0 - dw, dw))
    return out


def network_fit(per_step_fits: Iterable[float]) -> float:
    """Plain sum of per-step fitness over every episode of the schedule."""
    total = 0.0
    n = 0
    for i, v in enumerate(per_step_fits):
        v = float(v)
        if not math.isfinite(v):
            raise EvaluationError(f"per-step fitness {i} is not finite: {v}")
        total += v
        n += 1
    if n == 0:
        raise EvaluationError("network_fit of an empty list")
    return total
