"""Pure-Python episode rollout, built directly on the reference simulator.

Same signature and results as the compiled ``_rollout`` extension; used when
the extension is missing or ``MOSWARM_PURE_PYTHON`` is set.
"""

import numpy as np

from .controller import Network, NetworkSpec
from .objectives import obj1_distance, obj2_velocity
from .sim import ArenaSpec, sense, step_world, world_from_poses

TRACE_FIELDS = 11


def rollout(params, layer_sizes, poses, w1, w2, side, radius, max_range, dt, steps, record=False):
    """Run ``steps`` control steps from ``poses`` (rows of x, y, heading).

    Returns ``(obj1, obj2, trace)``: per-step objective sums measured after
    each step, and, if ``record``, an array of shape (steps, n, 11) holding
    x, y, heading, dx, dy, four sensor values and the two commands.
    """
    net = Network(np.asarray(params, dtype=float), NetworkSpec(tuple(layer_sizes)))
    world = world_from_poses(ArenaSpec(side, radius, max_range, dt), np.asarray(poses, dtype=float))
    n = len(world.robots)
    obj1 = np.zeros(steps)
    obj2 = np.zeros(steps)
    trace = np.zeros((steps, n, TRACE_FIELDS)) if record else None
    for t in range(steps):
        readings = [sense(world, i) for i in range(n)]
        actions = [net.act(r, w1, w2) for r in readings]
        step_world(world, actions)
        obj1[t] = obj1_distance(world)
        obj2[t] = obj2_velocity(world)
        if record:
            for i, r in enumerate(world.robots):
                trace[t, i] = (r.x, r.y, r.heading, r.dx, r.dy, *readings[i], *actions[i])
    return obj1, obj2, trace
