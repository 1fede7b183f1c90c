"""Command-line entry point: ``orderlab {train,sweep,measure,render}``.

Exit codes: 0 success, 1 runtime failure (including diverged training),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checkpoint, experiments
from .orderedness import (
    OrderednessProblem,
    orderedness,
    orderedness_dp,
    orderedness_exhaustive,
    orderedness_local_search,
)
from .numerics import ROLE_SEARCH, sub_rng
from .pruning import PruneConfigError, PruneSpec
from .render import weights_svg
from .training import ConfigError, TrainConfig, train_clp


class UsageError(Exception):
    pass


def _prune_arg(text: str) -> str:
    try:
        return str(PruneSpec.parse(text))
    except PruneConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orderlab", description="Complete perceptron layers, pruning and orderedness.")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train one seeded run and write a checkpoint and record")
    t.add_argument("--task", choices=["xor", "sine", "untrained"], default="xor")
    t.add_argument("--hidden", type=int)
    t.add_argument("--iters", type=int)
    t.add_argument("--steps", type=int)
    t.add_argument("--batch", type=int)
    t.add_argument("--prune", type=_prune_arg, default="none")
    t.add_argument("--init-w", choices=["normal", "uniform"], default="normal")
    t.add_argument("--init-v", choices=["normal", "uniform", "zeros"], default="normal")
    t.add_argument("--bias", action="store_true")
    t.add_argument("--freeze-v", action="store_true")
    t.add_argument("--lr", type=float, default=0.01)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--include-inputs", action="store_true", help="count input columns in the total mass S")
    t.add_argument("--out", default="out")

    s = sub.add_parser("sweep", help="run a seeded sweep and write raw.jsonl, aggregate.csv, plot.svg")
    s.add_argument("kind", nargs="?", choices=["table1a", "table1b", "higrid", "sparsity"])
    s.add_argument("--config", help="key = value sweep config file")
    s.add_argument("--task", choices=["xor", "sine"], default=None)
    s.add_argument("--seeds", default=None, help="A..B inclusive or comma list (default 0..9)")
    s.add_argument("--hidden", default=None, help="hidden-unit range for higrid, e.g. 2..10")
    s.add_argument("--iters", default=None, help="iteration range for higrid, e.g. 1..8")
    s.add_argument("--prune", type=_prune_arg, default=None)
    s.add_argument("--out", default="sweep")

    m = sub.add_parser("measure", help="print the orderedness of a checkpoint as a JSON line")
    m.add_argument("checkpoint")
    m.add_argument("--solver", choices=["auto", "exhaustive", "dp", "local"], default="auto")
    m.add_argument("--restarts", type=int, default=20)
    m.add_argument("--include-inputs", action="store_true")

    r = sub.add_parser("render", help="write an SVG heatmap of a checkpoint's weights")
    r.add_argument("checkpoint")
    r.add_argument("out")
    return p


def cmd_train(args) -> int:
    cfg = TrainConfig(
        task=args.task,
        hidden=args.hidden,
        iters=args.iters,
        steps=args.steps,
        batch=args.batch,
        prune=args.prune,
        init_w=args.init_w,
        init_v=args.init_v,
        bias=args.bias,
        lr=args.lr,
        seed=args.seed,
        freeze_v=args.freeze_v,
        measure_inputs=args.include_inputs,
    )
    try:
        cfg = cfg.resolved()
    except (ConfigError, PruneConfigError) as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rec = train_clp(cfg)
    (out / "record.jsonl").write_text(rec.to_json() + "\n")
    if not rec.diverged:
        checkpoint.save(out / "checkpoint.txt", cfg.shape, rec.params)
    print(
        f"final_loss={rec.final_loss:.6g} O_pre={rec.O_pre:.4f} "
        f"O_post={rec.O_post:.4f} dO={rec.delta_O:+.4f} wall={rec.wall_time:.2f}s"
    )
    if rec.diverged:
        print("training diverged (non-finite loss); record flagged", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    cfg: dict[str, str] = {}
    if args.config:
        try:
            cfg = experiments.parse_sweep_config(Path(args.config).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read --config: {exc}") from None
        except ValueError as exc:
            raise UsageError(f"--config: {exc}") from None
    if args.kind:
        cfg["kind"] = args.kind
    if "kind" not in cfg:
        raise UsageError("sweep needs a kind (table1a, table1b, higrid, sparsity) or --config")
    for key in ("task", "seeds", "hidden", "iters", "prune"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    try:
        for key in ("seeds", "hidden", "iters"):
            if key in cfg:
                experiments.parse_range(cfg[key])
    except ValueError as exc:
        raise UsageError(f"--{key}: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = experiments.run_from_config(cfg, raw_path=out / "raw.jsonl")
    experiments.write_outputs(res, out)
    sys.stdout.write(experiments.aggregate_csv(res.rows))
    return 0


def cmd_measure(args) -> int:
    shape, params = checkpoint.load(args.checkpoint)
    W = params.effective_W()
    if args.solver == "auto":
        res = orderedness(W, shape, include_inputs=args.include_inputs)
    else:
        prob = OrderednessProblem.from_weights(W, shape.o, shape.h, args.include_inputs)
        if args.solver == "exhaustive":
            res = orderedness_exhaustive(prob)
        elif args.solver == "dp":
            res = orderedness_dp(prob)
        else:
            res = orderedness_local_search(prob, sub_rng(0, ROLE_SEARCH), args.restarts)
    print(json.dumps({"checkpoint": str(args.checkpoint), **res.to_dict()}, sort_keys=True))
    return 0


def cmd_render(args) -> int:
    shape, params = checkpoint.load(args.checkpoint)
    svg = weights_svg(params.effective_W(), shape, title=Path(args.checkpoint).name)
    Path(args.out).write_text(svg)
    return 0


COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "measure": cmd_measure, "render": cmd_render}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (checkpoint.CheckpointError, ValueError, OSError) as exc:
        print(f"orderlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
