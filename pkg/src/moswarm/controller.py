"""Fixed-topology feed-forward controller shared by every robot.

The network takes four normalized range readings followed by the two
objective weights and produces a rotation and a forward-velocity command.
Hidden and output units use ``tanh``; the outputs are mapped affinely onto
the command ranges.

Genome layout: for each layer in order, the weight matrix row-major with
one row per output unit, followed by that layer's bias vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConfigurationError

NUM_SENSORS = 4
NUM_WEIGHTS = 2
NUM_COMMANDS = 2
MAX_ROTATION = math.pi / 4
MAX_VELOCITY = 2.0


@dataclass(frozen=True)
class NetworkSpec:
    layer_sizes: tuple = (6, 5, 2)
    activation: str = "tanh"

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(sizes) < 2 or any(s < 1 for s in sizes):
            raise ConfigurationError(f"invalid layer sizes {sizes}")
        if self.activation != "tanh":
            raise ConfigurationError(f"unsupported activation {self.activation!r}")

    def validate_io(self) -> None:
        """Check the input/output widths a robot controller needs."""
        if self.layer_sizes[0] != NUM_SENSORS + NUM_WEIGHTS or self.layer_sizes[-1] != NUM_COMMANDS:
            raise ConfigurationError(
                f"controller needs {NUM_SENSORS + NUM_WEIGHTS} inputs and "
                f"{NUM_COMMANDS} outputs, got layer sizes {self.layer_sizes}")


class Action(NamedTuple):
    rotation: float
    forward_velocity: float


class LayerSlice(NamedTuple):
    fan_in: int
    fan_out: int
    weights: slice
    biases: slice


def genome_size(spec: NetworkSpec) -> int:
    sizes = spec.layer_sizes
    return sum(a * b + b for a, b in zip(sizes[:-1], sizes[1:]))


def encode_layout(spec: NetworkSpec) -> list[LayerSlice]:
    """Where each layer's weights and biases live in the flat genome."""
    out, pos = [], 0
    sizes = spec.layer_sizes
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = slice(pos, pos + fan_in * fan_out)
        pos += fan_in * fan_out
        b = slice(pos, pos + fan_out)
        pos += fan_out
        out.append(LayerSlice(fan_in, fan_out, w, b))
    return out


def check_genome(params, spec: NetworkSpec) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != genome_size(spec):
        raise ConfigurationError(
            f"genome has {params.shape[0]} parameters, spec {spec.layer_sizes} "
            f"needs {genome_size(spec)}")
    return params


def decode(params, spec: NetworkSpec) -> list[tuple[np.ndarray, np.ndarray]]:
    """Split a flat genome into ``(W, b)`` per layer, ``W`` shaped (fan_out, fan_in)."""
    params = check_genome(params, spec)
    return [(params[ls.weights].reshape(ls.fan_out, ls.fan_in).copy(), params[ls.biases].copy())
            for ls in encode_layout(spec)]


def encode(layers: Sequence[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Inverse of :func:`decode`."""
    parts = []
    for w, b in layers:
        parts.append(np.asarray(w, dtype=float).reshape(-1))
        parts.append(np.asarray(b, dtype=float).reshape(-1))
    return np.concatenate(parts)


class Network:
    """A decoded genome, evaluated with plain scalar arithmetic.

    Accumulation order is fixed (bias first, then inputs in index order) so
    results match the compiled rollout kernel bit for bit.
    """

    def __init__(self, params, spec: NetworkSpec = NetworkSpec()):
        params = check_genome(params, spec)
        self.spec = spec
        self._layers = []
        for ls in encode_layout(spec):
            w = params[ls.weights].tolist()
            rows = [w[i * ls.fan_in:(i + 1) * ls.fan_in] for i in range(ls.fan_out)]
            self._layers.append((rows, params[ls.biases].tolist()))

    def activate(self, inputs: Sequence[float]) -> list[float]:
        x = [float(v) for v in inputs]
        if len(x) != self.spec.layer_sizes[0]:
            raise ConfigurationError(
                f"expected {self.spec.layer_sizes[0]} inputs, got {len(x)}")
        for rows, biases in self._layers:
            out = []
            for row, acc in zip(rows, biases):
                for wij, xj in zip(row, x):
                    acc = acc + wij * xj
                out.append(math.tanh(acc))
            x = out
        return x

    def act(self, sensors: Sequence[float], w1: float, w2: float) -> Action:
        out = self.activate((*sensors, w1, w2))
        return scale_outputs(out[0], out[1])


def scale_outputs(rot_out: float, vel_out: float) -> Action:
    """Map ``tanh`` outputs in [-1, 1] to (rotation, velocity) commands."""
    rotation = rot_out * MAX_ROTATION
    velocity = (vel_out + 1.0) * 0.5 * MAX_VELOCITY
    return Action(clamp(rotation, -MAX_ROTATION, MAX_ROTATION), clamp(velocity, 0.0, MAX_VELOCITY))


def clamp(v: float, lo: float, hi: float) -> float:
    return lo if v < lo else hi if v > hi else v


def forward(genome, spec: NetworkSpec, sensors: Sequence[float], weights) -> Action:
    """One controller step for a single robot.

    ``weights`` is an :class:`~moswarm.objectives.ObjectiveWeights` or any
    ``(w1, w2)`` pair.
    """
    spec.validate_io()
    if len(sensors) != NUM_SENSORS:
        raise ConfigurationError(f"expected {NUM_SENSORS} sensor values, got {len(sensors)}")
    w1, w2 = weights
    return Network(genome, spec).act(sensors, w1, w2)
