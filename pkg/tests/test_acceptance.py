"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from moswarm.cli import main, sweep_rows
from moswarm.controller import NetworkSpec
from moswarm.episode import run_episode
from moswarm.expm import matrix_exponential
from moswarm.kernels import rollout
from moswarm.objectives import (ObjectiveWeights, current_fit, network_fit, obj1_distance,
                                obj2_velocity)
from moswarm.rng import make_rng
from moswarm.sim import ArenaSpec, RobotState, WorldState, check_invariants, reset_world, world_from_poses
from moswarm.stats import wilcoxon_signed_rank
from moswarm.trainer import train
from moswarm.xnes import XNES, StrategyConfig
from oracles import expm_eig

EVAL_SEEDS = range(5)
ALPHA = 0.01


def record(name, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def test_1_optimizer_convergence():
    t0 = time.perf_counter()
    es = XNES.create(np.full(10, 5.0), 1.0, StrategyConfig())
    _, best, evals = es.optimize(lambda x: -float(x @ x), 10_000)
    wall = time.perf_counter() - t0
    record("1 sphere d=10", best > -1e-6 and evals <= 10_000 + 14 and wall < 5.0,
           f"best {best:.3e} after {evals} evaluations in {wall:.2f} s")


@pytest.mark.parametrize("dim", [5, 47])
def test_2_determinant_and_trace(dim):
    rng = np.random.default_rng(dim)
    a = rng.normal(size=(dim, dim))
    es = XNES.create(rng.normal(size=dim), 1.0, StrategyConfig(seed=dim))
    worst_det, worst_tr = 0.0, 0.0
    for _ in range(1000):
        cands = es.ask()
        es.tell([-float(np.sum((a @ c.x) ** 2)) + float(np.sin(c.x).sum()) for c in cands])
        worst_det = max(worst_det, abs(abs(np.linalg.det(es.dist.b_matrix)) - 1))
        worst_tr = max(worst_tr, abs(float(np.trace(es.last_gradients.b))))
    record(f"2 invariants d={dim}", worst_det <= 1e-6 and worst_tr < 1e-10,
           f"max ||det B| - 1| {worst_det:.2e}, max |tr G_B| {worst_tr:.2e} over 1000 generations")


def test_3_matrix_exponential():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        s = rng.normal(size=(5, 5))
        s = s + s.T
        s *= rng.uniform(0.0, 2.0) / np.linalg.norm(s, 2)
        ref = expm_eig(s)
        worst = max(worst, np.linalg.norm(matrix_exponential(s) - ref) / np.linalg.norm(ref))
    record("3 expm vs eigendecomposition", worst < 1e-9, f"max relative Frobenius error {worst:.2e}")


def test_4_fitness_arithmetic():
    arena = ArenaSpec()
    at = lambda *xy: world_from_poses(arena, [(x, y, 0.0) for x, y in xy])  # noqa: E731
    moved = WorldState(arena, [RobotState(0, 0, 0, 1.0, 0.0), RobotState(0, 0, 0, 0.0, -2.0)])
    checks = [
        obj1_distance(at((0, 0), (1, -1), (0.5, 0.5))) == 3.0,
        obj1_distance(at((0, 0), (0, 0), (0, 0))) == 0.0,
        obj1_distance(at((-1.7, 1.7))) == 3.4,
        obj2_velocity(moved) == 3.0,
        obj2_velocity(at((1, 1), (0, 0))) == 0.0,
        current_fit(ObjectiveWeights(1, 0), 3, 99.0) == -3.0,
        current_fit(ObjectiveWeights(0, 1), 5.0, 3) == 3.0,
        current_fit(ObjectiveWeights(0.5, 0.5), 2, 1) == -0.5,
        network_fit([1.5] * 90) == 135.0,
        network_fit([0.0] * 90) == 0.0,
    ]
    rng = np.random.default_rng(4)
    for _ in range(200):
        vals = rng.normal(scale=50, size=int(rng.integers(1, 300))).tolist()
        acc = 0.0
        for v in vals:
            acc += v
        checks.append(network_fit(vals) == acc)
    record("4 fitness arithmetic", all(checks), f"{sum(checks)}/{len(checks)} exact checks hold")


def test_5_simulator_safety():
    arena = ArenaSpec()
    lim, sep = arena.limit, 2 * arena.robot_radius
    rng = np.random.default_rng(5)
    steps = violations = 0
    while steps < 10_000:
        n = int(rng.integers(1, 16))
        genome = rng.normal(scale=float(rng.uniform(0.1, 5)), size=47)
        w1 = float(rng.uniform())
        world = reset_world(arena, n, make_rng(5, steps))
        poses = [(r.x, r.y, r.heading) for r in world.robots]
        _, _, trace = rollout(genome, (6, 5, 2), poses, w1, 1 - w1, arena.side_length,
                              arena.robot_radius, arena.sensor_max_range, arena.dt, 100, True)
        for t in range(trace.shape[0]):
            xy = trace[t, :, :2]
            if np.any(np.abs(xy) > lim):
                violations += 1
            d = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(-1))
            if np.any(d[np.triu_indices(n, 1)] < sep):
                violations += 1
            try:
                check_invariants(world_from_poses(arena, trace[t, :, :3]))
            except AssertionError:
                violations += 1
        steps += trace.shape[0]
    record("5 simulator safety", violations == 0, f"{violations} violations in {steps} fuzzed steps")


# -- behaviour of the default-trained genome ----------------------------------

def behaviour(genome, num_robots, duration=60):
    """Seed-averaged per-second metrics under the two extreme weight pairs."""
    net, arena = NetworkSpec(), ArenaSpec()
    series = {}
    for w1 in (1.0, 0.0):
        dist, speed, init = [], [], []
        for s in EVAL_SEEDS:
            res = run_episode(genome, net, arena, ObjectiveWeights.from_w1(w1), num_robots,
                              duration, s)
            dist.append(res.obj1 / num_robots)
            speed.append(res.obj2 / num_robots)
            init.append(res.initial_mean_distance())
        series[w1] = (np.mean(dist, axis=0), np.mean(speed, axis=0), float(np.mean(init)))
    return series


def differentiation(genome, num_robots):
    s = behaviour(genome, num_robots)
    d_gather, v_gather, init = s[1.0]
    d_spread, v_spread, _ = s[0.0]
    speed = wilcoxon_signed_rank(v_spread, v_gather, ALPHA)
    dist = wilcoxon_signed_rank(d_gather, d_spread, ALPHA)
    final = float(d_gather[-10:].mean())
    return {
        "a": (speed.significant and speed.w_plus > speed.w_minus,
              f"speed {v_spread.mean():.3f} vs {v_gather.mean():.3f} m/s, p={speed.p_value:.2e}"),
        "b": (dist.significant and dist.w_minus > dist.w_plus,
              f"distance {d_gather.mean():.3f} vs {d_spread.mean():.3f} m, p={dist.p_value:.2e}"),
        "c": (final < 0.5 * init,
              f"final-10 s distance {final:.3f} m vs initial {init:.3f} m "
              f"(ratio {final / init:.3f}, need < 0.5)"),
    }


@pytest.fixture(scope="module")
def genome(trained):
    return trained[1].best_genome


@pytest.mark.slow
@pytest.mark.parametrize("part", ["a", "b", "c"])
def test_6_behaviour_differentiation(genome, part):
    ok, detail = differentiation(genome, 10)[part]
    record(f"6({part}) 10 robots", ok, detail)


@pytest.mark.slow
@pytest.mark.parametrize("part", ["a", "b", "c"])
@pytest.mark.parametrize("robots", [5, 10])
def test_7_scaling(genome, robots, part):
    ok, detail = differentiation(genome, robots)[part]
    record(f"7 {robots} robots ({part})", ok, detail)


@pytest.mark.slow
def test_8_sweep_endpoints(genome):
    rows = sweep_rows(genome, NetworkSpec(), ArenaSpec(), 0.1, 3, 30, 0)
    obj1 = [r[2] for r in rows]
    obj2 = [r[3] for r in rows]
    ok = obj1[0] == min(obj1) and obj2[-1] == max(obj2)
    record("8 sweep endpoints", ok,
           f"w1=1 obj1 {obj1[0]:.3f} (sweep min {min(obj1):.3f}), "
           f"w2=1 obj2 {obj2[-1]:.3f} (sweep max {max(obj2):.3f})")


def _snapshot(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def _all_commands(out):
    train_dir = out / "train"
    g = train_dir / "genome.json"
    codes = [
        main(["train", "--evals", "1500", "--seed", "9", "--out-dir", str(train_dir)]),
        main(["eval", "--genome", str(g), "--w1", "1", "--out-dir", str(out / "eval_d")]),
        main(["eval", "--genome", str(g), "--w1", "0", "--out-dir", str(out / "eval_v")]),
        main(["sweep", "--genome", str(g), "--out-dir", str(out / "sweep")]),
        main(["stats", str(out / "eval_d" / "metrics.csv"), str(out / "eval_v" / "metrics.csv"),
              "--out-dir", str(out / "stats")]),
        main(["heatmap", str(out / "eval_d" / "trace.csv"), "--out-dir", str(out / "heatmap")]),
    ]
    return codes


@pytest.mark.slow
def test_9_reproducibility(tmp_path, capsys):
    codes_a = _all_commands(tmp_path / "a")
    codes_b = _all_commands(tmp_path / "b")
    a, b = _snapshot(tmp_path / "a"), _snapshot(tmp_path / "b")
    identical = codes_a == codes_b == [0] * 6 and a == b

    r = tmp_path / "resumed"
    main(["train", "--evals", "750", "--seed", "9", "--out-dir", str(r)])
    main(["train", "--resume", str(r / "checkpoint.json"), "--evals", "1500", "--out-dir", str(r)])
    resumed = all((r / f).read_bytes() == (tmp_path / "a" / "train" / f).read_bytes()
                  for f in ("checkpoint.json", "train_log.csv", "genome.json"))
    capsys.readouterr()
    record("9 reproducibility", identical and resumed,
           f"{len(a)} output files byte-identical: {a == b}; resume equals straight run: {resumed}")
