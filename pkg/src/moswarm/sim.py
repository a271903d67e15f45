"""Low-fidelity 2D kinematic swarm simulator.

A square arena centred on the origin holds circular robots. Each robot
senses with four rangefinders (front, right, back, left), then rotates and
drives forward. Motion that would hit a wall or another robot is clipped
just short of contact, so bodies never overlap.

This module is the reference implementation; the compiled rollout kernel
mirrors its arithmetic operation for operation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .controller import MAX_ROTATION, MAX_VELOCITY, Action, clamp
from .errors import CapacityError, ConfigurationError, UsageError

#: Clearance left between a clipped robot and the obstacle it hit (m).
CONTACT_EPS = 1e-3
#: Consecutive rejected placements before a reset gives up.
MAX_PLACEMENT_TRIES = 10_000
#: Ray offsets from the heading: front, right, back, left.
SENSOR_OFFSETS = (0.0, -math.pi / 2, math.pi, math.pi / 2)
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ArenaSpec:
    side_length: float = 3.7
    robot_radius: float = 0.125
    sensor_max_range: float = 3.7
    dt: float = 1.0

    def __post_init__(self):
        if not self.robot_radius > 0:
            raise ConfigurationError(f"robot_radius must be positive, got {self.robot_radius}")
        if not self.side_length > 4 * self.robot_radius:
            raise ConfigurationError(
                f"side_length {self.side_length} leaves no room for two robots of radius "
                f"{self.robot_radius}")
        if not self.sensor_max_range > 0:
            raise ConfigurationError("sensor_max_range must be positive")
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")

    @property
    def half(self) -> float:
        return self.side_length / 2

    @property
    def limit(self) -> float:
        """Largest |x| or |y| a robot centre may take."""
        return self.side_length / 2 - self.robot_radius


@dataclass
class RobotState:
    x: float
    y: float
    heading: float
    dx: float = 0.0
    dy: float = 0.0

    @property
    def position(self):
        return (self.x, self.y)

    @property
    def last_displacement(self):
        return (self.dx, self.dy)


@dataclass
class WorldState:
    arena: ArenaSpec
    robots: list = field(default_factory=list)
    time: float = 0.0

    def copy(self) -> "WorldState":
        return WorldState(self.arena, [RobotState(r.x, r.y, r.heading, r.dx, r.dy)
                                       for r in self.robots], self.time)


class SensorReading(NamedTuple):
    front: float
    right: float
    back: float
    left: float


def wrap_angle(h: float) -> float:
    """Bring ``h`` into [-pi, pi) assuming it is at most one turn outside."""
    if h >= math.pi:
        h -= TWO_PI
    elif h < -math.pi:
        h += TWO_PI
    return h


def reset_world(arena: ArenaSpec, num_robots: int, rng) -> WorldState:
    """Scatter robots uniformly without overlap, headings uniform in [-pi, pi)."""
    if num_robots < 1:
        raise ConfigurationError(f"num_robots must be positive, got {num_robots}")
    lim = arena.limit
    min_sep = 2 * arena.robot_radius + CONTACT_EPS
    min_sep2 = min_sep * min_sep
    robots: list[RobotState] = []
    while len(robots) < num_robots:
        for _ in range(MAX_PLACEMENT_TRIES):
            x = float(rng.uniform(-lim, lim))
            y = float(rng.uniform(-lim, lim))
            if all((x - r.x) ** 2 + (y - r.y) ** 2 >= min_sep2 for r in robots):
                break
        else:
            raise CapacityError(
                f"could not place robot {len(robots) + 1} of {num_robots} after "
                f"{MAX_PLACEMENT_TRIES} attempts; arena too crowded")
        robots.append(RobotState(x, y, float(rng.uniform(-math.pi, math.pi))))
    return WorldState(arena, robots, 0.0)


def world_from_poses(arena: ArenaSpec, poses: Sequence[tuple]) -> WorldState:
    return WorldState(arena, [RobotState(float(x), float(y), float(h)) for x, y, h in poses], 0.0)


# -- ray geometry -----------------------------------------------------------

def ray_box(px, py, c, s, half):
    """Distance along (c, s) from an interior point to the square |x|,|y| = half."""
    t = math.inf
    if c > 0.0:
        t = min(t, (half - px) / c)
    elif c < 0.0:
        t = min(t, (-half - px) / c)
    if s > 0.0:
        t = min(t, (half - py) / s)
    elif s < 0.0:
        t = min(t, (-half - py) / s)
    return t


def ray_circle(px, py, c, s, cx, cy, rad):
    """First non-negative hit of a ray with a circle, or ``inf``.

    A ray starting on or inside the circle counts as blocked at 0 when it
    points towards the centre and as free otherwise.
    """
    ox = cx - px
    oy = cy - py
    b = ox * c + oy * s
    cc = ox * ox + oy * oy - rad * rad
    if cc <= 0.0:
        return 0.0 if b > 0.0 else math.inf
    if b <= 0.0:
        return math.inf
    disc = b * b - cc
    if disc < 0.0:
        return math.inf
    return b - math.sqrt(disc)


def _check_index(world: WorldState, i: int) -> None:
    if not 0 <= i < len(world.robots):
        raise UsageError(f"robot index {i} out of range for {len(world.robots)} robots")


def sense(world: WorldState, robot_index: int) -> SensorReading:
    """Normalized surface-to-obstacle distances along the four sensor rays."""
    _check_index(world, robot_index)
    arena = world.arena
    me = world.robots[robot_index]
    half, rad, max_range = arena.half, arena.robot_radius, arena.sensor_max_range
    out = []
    for off in SENSOR_OFFSETS:
        ang = me.heading + off
        c = math.cos(ang)
        s = math.sin(ang)
        t = ray_box(me.x, me.y, c, s, half)
        for j, other in enumerate(world.robots):
            if j != robot_index:
                t = min(t, ray_circle(me.x, me.y, c, s, other.x, other.y, rad))
        raw = t - rad
        if raw < 0.0:
            raw = 0.0
        if raw > max_range:
            raw = max_range
        out.append(raw / max_range)
    return SensorReading(*out)


def _position_ok(world: WorldState, i: int, x: float, y: float) -> bool:
    arena = world.arena
    lim = arena.limit
    if x > lim or x < -lim or y > lim or y < -lim:
        return False
    sep2 = (2 * arena.robot_radius) ** 2
    for j, other in enumerate(world.robots):
        if j != i:
            ox = x - other.x
            oy = y - other.y
            if ox * ox + oy * oy < sep2:
                return False
    return True


def apply_action(world: WorldState, robot_index: int, action: Action) -> WorldState:
    """Rotate robot ``robot_index`` then drive it as far as it can go.

    Mutates and returns ``world``.
    """
    _check_index(world, robot_index)
    arena = world.arena
    me = world.robots[robot_index]
    rotation = clamp(float(action[0]), -MAX_ROTATION, MAX_ROTATION)
    velocity = clamp(float(action[1]), 0.0, MAX_VELOCITY)

    me.heading = wrap_angle(me.heading + rotation)
    c = math.cos(me.heading)
    s = math.sin(me.heading)
    want = velocity * arena.dt

    t = ray_box(me.x, me.y, c, s, arena.limit)
    hit = 2 * arena.robot_radius
    for j, other in enumerate(world.robots):
        if j != robot_index:
            t = min(t, ray_circle(me.x, me.y, c, s, other.x, other.y, hit))
    room = t - CONTACT_EPS
    if want <= room:
        travel = want
    elif room > 0.0:
        travel = room
    else:
        travel = 0.0

    dx = travel * c
    dy = travel * s
    nx = me.x + dx
    ny = me.y + dy
    if travel > 0.0 and not _position_ok(world, robot_index, nx, ny):
        # rounding pushed the clipped point onto an obstacle; stay put
        dx = dy = 0.0
        nx, ny = me.x, me.y
    me.x, me.y, me.dx, me.dy = nx, ny, dx, dy
    return world


def step_world(world: WorldState, actions: Sequence[Action]) -> WorldState:
    """Apply one action per robot in index order and advance the clock."""
    if len(actions) != len(world.robots):
        raise UsageError(f"got {len(actions)} actions for {len(world.robots)} robots")
    for i, a in enumerate(actions):
        apply_action(world, i, a)
    world.time += world.arena.dt
    return world


def check_invariants(world: WorldState) -> None:
    """Raise ``AssertionError`` if any body leaves the arena or overlaps another."""
    arena = world.arena
    lim = arena.limit
    sep2 = (2 * arena.robot_radius) ** 2
    for i, r in enumerate(world.robots):
        assert -lim <= r.x <= lim and -lim <= r.y <= lim, f"robot {i} outside arena: {r}"
        for j in range(i + 1, len(world.robots)):
            o = world.robots[j]
            d2 = (r.x - o.x) ** 2 + (r.y - o.y) ** 2
            assert d2 >= sep2, f"robots {i} and {j} overlap (gap^2={d2})"
