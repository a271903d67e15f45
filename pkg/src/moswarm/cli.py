"""Command-line interface.

Subcommands::

    moswarm train    evolve a controller; writes checkpoint, log, genome
    moswarm eval     one episode at fixed weights; trace + per-second metrics
    moswarm sweep    episodes across a weight schedule; pareto.csv
    moswarm stats    paired Wilcoxon signed-rank test on two metrics files
    moswarm heatmap  bin trace positions into a grid

Exit codes: 0 success, 2 usage or configuration error, 3 data-integrity
error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, kernels
from .config import apply_overrides, config_to_dict, load_config, parse_value
from .errors import ConfigurationError, MoswarmError, UsageError
from .episode import run_episode
from .metrics import (METRICS_HEADER, TRACE_HEADER, central_share, heatmap, heatmap_csv,
                      metrics_csv, pareto_csv, read_csv, trace_csv)
from .objectives import ObjectiveWeights, weight_schedule
from .stats import format_report, wilcoxon_signed_rank
from .trainer import (TrainState, atomic_write_text, load_checkpoint, load_genome, save_genome,
                      train)

log = logging.getLogger("moswarm")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, args: dict, inputs=(), **extra) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "backend": kernels.BACKEND,
        "arguments": args,
        # by name and digest, so the manifest does not depend on where files live
        "inputs": [{"file": os.path.basename(p), "sha256": _sha256(p)} for p in inputs],
        **extra,
    }
    atomic_write_text(out_dir / f"{command}_manifest.json",
                      json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _out_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _existing(path) -> str:
    if not os.path.isfile(path):
        raise UsageError(f"no such file: {path}")
    return path


def _overrides(args) -> dict:
    ov = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
        ov[key.strip()] = parse_value(value.strip())
    named = {"seed": "seed", "evals": "max_evaluations", "robots": "num_robots",
             "duration": "t_max", "dw": "dw_increment", "workers": "workers"}
    for attr, key in named.items():
        v = getattr(args, attr, None)
        if v is not None:
            ov[key] = v
    return ov


# -- subcommands ------------------------------------------------------------

def cmd_train(args) -> int:
    out = _out_dir(args.out_dir)
    inputs = [] if args.config == "default" else [args.config]
    if args.resume:
        # the checkpoint's own config is the base; flags may still raise the budget
        state = load_checkpoint(_existing(args.resume))
        cfg = apply_overrides(state.config, _overrides(args))
        inputs.append(args.resume)
    else:
        cfg = apply_overrides(load_config(args.config), _overrides(args))
        state = TrainState.fresh(cfg)
    log_tmp = out / "train_log.csv.partial"
    result = train(cfg, state=state, checkpoint_path=out / "checkpoint.json",
                   checkpoint_every=args.checkpoint_every, log_path=log_tmp)
    os.replace(log_tmp, out / "train_log.csv")
    save_genome(out / "genome.json", result.best_genome, cfg.network, result.best_fitness)
    _write_manifest(out, "train", {"config": args.config, "resume": args.resume}, inputs,
                    config=config_to_dict(cfg))
    print(f"best fitness {result.best_fitness!r} after {result.log[-1].evaluations} evaluations")
    return 0


def _eval_setup(args):
    genome, network = load_genome(_existing(args.genome))
    cfg = load_config(args.config)
    if args.robots < 1:
        raise ConfigurationError(f"--robots must be positive, got {args.robots}")
    if args.duration < 0:
        raise ConfigurationError(f"--duration must be non-negative, got {args.duration}")
    return genome, network, cfg.arena


def cmd_eval(args) -> int:
    genome, network, arena = _eval_setup(args)
    weights = ObjectiveWeights.from_w1(args.w1)
    res = run_episode(genome, network, arena, weights, args.robots, args.duration, args.seed,
                      record=True)
    out = _out_dir(args.out_dir)
    atomic_write_text(out / "trace.csv", trace_csv(res))
    atomic_write_text(out / "metrics.csv", metrics_csv(res))
    _write_manifest(out, "eval", {"w1": args.w1, "w2": weights.w2, "robots": args.robots,
                                  "duration": args.duration, "seed": args.seed},
                    [args.genome], initial_mean_l1_distance_m=res.initial_mean_distance())
    return 0


def sweep_rows(genome, network, arena, dw, robots, duration, seed):
    """One ``(w1, w2, mean obj1, mean obj2)`` row per schedule entry.

    Every row starts from the same initial layout, so rows differ only in
    the weights fed to the controller.
    """
    rows = []
    for weights in weight_schedule(dw):
        res = run_episode(genome, network, arena, weights, robots, duration, seed)
        o1 = float(res.obj1.mean()) if duration else 0.0
        o2 = float(res.obj2.mean()) if duration else 0.0
        rows.append((weights.w1, weights.w2, o1, o2))
    return rows


def cmd_sweep(args) -> int:
    genome, network, arena = _eval_setup(args)
    rows = sweep_rows(genome, network, arena, args.dw, args.robots, args.duration, args.seed)
    out = _out_dir(args.out_dir)
    atomic_write_text(out / "pareto.csv", pareto_csv(rows))
    _write_manifest(out, "sweep", {"dw": args.dw, "robots": args.robots,
                                   "duration": args.duration, "seed": args.seed}, [args.genome])
    return 0


def cmd_stats(args) -> int:
    if args.column not in METRICS_HEADER[1:]:
        raise UsageError(f"--column must be one of {list(METRICS_HEADER[1:])}")
    a = read_csv(_existing(args.metrics_a), METRICS_HEADER)
    b = read_csv(_existing(args.metrics_b), METRICS_HEADER)
    if len(a["time_s"]) != len(b["time_s"]):
        raise UsageError(f"metrics files have {len(a['time_s'])} and {len(b['time_s'])} rows")
    if len(a["time_s"]) == 0:
        raise UsageError("metrics files have no rows to compare")
    if not (a["time_s"] == b["time_s"]).all():
        raise UsageError("metrics files are not aligned on time_s")
    res = wilcoxon_signed_rank(a[args.column], b[args.column], alpha=args.alpha)
    report = format_report(res, args.column)
    sys.stdout.write(report)
    if args.out_dir:
        out = _out_dir(args.out_dir)
        atomic_write_text(out / "stats_report.txt", report)
        _write_manifest(out, "stats", {"column": args.column, "alpha": args.alpha},
                        [args.metrics_a, args.metrics_b])
    return 0


def cmd_heatmap(args) -> int:
    cols = read_csv(_existing(args.trace), TRACE_HEADER)
    arena = load_config(args.config).arena
    grid = heatmap(cols["x_m"], cols["y_m"], arena, args.resolution)
    out = _out_dir(args.out_dir)
    atomic_write_text(out / "heatmap.csv", heatmap_csv(grid))
    share = central_share(grid) if args.resolution >= 3 else None
    _write_manifest(out, "heatmap", {"resolution": args.resolution}, [args.trace],
                    central_share=share)
    return 0


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moswarm", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="evolve a controller")
    t.add_argument("--config", default="default", help="TOML config file or 'default'")
    t.add_argument("--seed", type=int)
    t.add_argument("--evals", type=int, help="evaluation budget")
    t.add_argument("--robots", type=int)
    t.add_argument("--duration", type=int, help="episode length in steps (t_max)")
    t.add_argument("--dw", type=float, help="weight-schedule increment")
    t.add_argument("--workers", type=int)
    t.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any config field, e.g. strategy.eta_mu=0.5")
    t.add_argument("--resume", metavar="CHECKPOINT")
    t.add_argument("--checkpoint-every", type=int, default=0, metavar="GENS")
    t.add_argument("--out-dir", default="runs/train")
    t.set_defaults(func=cmd_train)

    for name, func, help_, robots, duration in (
            ("eval", cmd_eval, "run one episode at fixed weights", 10, 60),
            ("sweep", cmd_sweep, "run episodes across a weight schedule", 3, 30)):
        e = sub.add_parser(name, help=help_)
        e.add_argument("--genome", required=True, help="genome.json or checkpoint.json")
        e.add_argument("--config", default="default", help="config supplying the arena")
        e.add_argument("--robots", type=int, default=robots)
        e.add_argument("--duration", type=int, default=duration, help="episode length in steps")
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--out-dir", default=f"runs/{name}")
        if name == "eval":
            e.add_argument("--w1", type=float, default=1.0, help="distance weight; w2 = 1 - w1")
        else:
            e.add_argument("--dw", type=float, default=0.1)
        e.set_defaults(func=func)

    s = sub.add_parser("stats", help="paired Wilcoxon signed-rank test")
    s.add_argument("metrics_a")
    s.add_argument("metrics_b")
    s.add_argument("--column", default="mean_speed_mps")
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_stats)

    h = sub.add_parser("heatmap", help="grid of robot-position visits")
    h.add_argument("trace")
    h.add_argument("--resolution", type=int, default=10)
    h.add_argument("--config", default="default", help="config supplying the arena")
    h.add_argument("--out-dir", default="runs/heatmap")
    h.set_defaults(func=cmd_heatmap)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MoswarmError as exc:
        print(f"moswarm {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
