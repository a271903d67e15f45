"""Time the pure-Python and compiled rollout kernels on the same episodes.

    python3 benchmarks/bench_rollout.py [--robots 3] [--steps 30] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from moswarm import kernels
from moswarm.episode import episode_world
from moswarm.sim import ArenaSpec


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--robots", type=int, default=3)
    p.add_argument("--steps", type=int, default=30)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()

    arena = ArenaSpec()
    genome = np.random.default_rng(0).normal(size=47)
    world = episode_world(arena, args.robots, seed=0)
    poses = [(r.x, r.y, r.heading) for r in world.robots]
    call = (genome, (6, 5, 2), poses, 0.5, 0.5, arena.side_length, arena.robot_radius,
            arena.sensor_max_range, arena.dt, args.steps, False)

    backends = [("python", kernels.python_rollout)]
    if kernels.compiled_rollout is not None:
        backends.append(("cython", kernels.compiled_rollout))
    else:
        print("compiled extension not built; timing the Python kernel only")

    times = {}
    for name, fn in backends:
        n = max(1, args.repeat)
        best = min(timeit.repeat(lambda: fn(*call), number=n, repeat=5)) / n
        times[name] = best
        print(f"{name:>7}: {best * 1e6:10.1f} us per episode "
              f"({args.robots} robots, {args.steps} steps)")
    if len(times) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(kernels.python_rollout(*call),
                                                       kernels.compiled_rollout(*call)))
        print(f"speedup: {times['python'] / times['cython']:.1f}x, identical results: {same}")


if __name__ == "__main__":
    main()
