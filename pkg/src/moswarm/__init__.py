"""Evolving a single multi-objective neural controller for a robot swarm.

A fixed 6-5-2 network receives four rangefinder readings plus the two
objective weights and drives every robot of a homogeneous swarm. xNES
trains it in a 2D kinematic simulator against a weighted sum of "stay near
the arena centre" and "move fast".
"""

__version__ = "0.1.0"

from .controller import Action, NetworkSpec, forward, genome_size
from .objectives import ObjectiveWeights, current_fit, network_fit, weight_schedule
from .sim import ArenaSpec, WorldState, reset_world, sense, step_world
from .xnes import XNES, SearchDistribution, StrategyConfig

__all__ = [
    "Action", "ArenaSpec", "NetworkSpec", "ObjectiveWeights", "SearchDistribution",
    "StrategyConfig", "WorldState", "XNES", "current_fit", "forward", "genome_size",
    "network_fit", "reset_world", "sense", "step_world", "weight_schedule",
]
