"""Seeded sweeps over training configurations and their aggregation.

A sweep is an ordered list of cells; each cell is a base :class:`TrainConfig`
(without seed) run once per seed. Runs are independent and may be farmed out
to a process pool whose size is capped by ``ORDERLAB_THREADS``; results are
always reduced in cell order, then seed order, so outputs are reproducible.

Sweep config files are plain text, one ``key = value`` per line, ``#`` for
comments. Recognised keys:

    kind          table1a | table1b | higrid | sparsity     (required)
    seeds         A..B or a comma list                      (default 0..9)
    task          xor | sine                                (higrid, sparsity)
    hidden        A..B or comma list                        (higrid)
    iters         A..B or comma list                        (higrid)
    prune         pruning spec                              (higrid; default dyntopk:0.5)
    random, topk, dyntopk, trildamp, dyntrildamp
                  comma list of coefficients                (sparsity)
    include_untrained   true | false                        (sparsity; default true)
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from .render import curves_svg, grid_svg
from .training import RunRecord, TrainConfig, train_clp


@dataclass(frozen=True)
class Cell:
    key: str
    config: TrainConfig


@dataclass
class AggregateRow:
    cell: str
    mean_dO: float
    std_dO: float
    mean_O_pre: float
    std_O_pre: float
    mean_O_post: float
    std_O_post: float
    mean_final_loss: float
    n_seeds: int
    n_diverged: int

    FIELDS = (
        "cell",
        "mean_dO",
        "std_dO",
        "mean_O_pre",
        "std_O_pre",
        "mean_O_post",
        "std_O_post",
        "mean_final_loss",
        "n_seeds",
        "n_diverged",
    )


@dataclass
class SweepResult:
    kind: str
    cells: list[Cell]
    seeds: list[int]
    records: list[list[RunRecord]]
    rows: list[AggregateRow]
    extra: dict = field(default_factory=dict)

    def row(self, key: str) -> AggregateRow:
        for r in self.rows:
            if r.cell == key:
                return r
        raise KeyError(key)


def parse_range(text: str) -> list[int]:
    """``"0..9"`` (inclusive) or ``"1,3,5"``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    vals = [int(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ValueError(f"empty list {text!r}")
    return vals


def worker_count() -> int:
    env = os.environ.get("ORDERLAB_THREADS")
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def _run_one(cfg: TrainConfig) -> RunRecord:
    rec = train_clp(cfg)
    rec.params = None
    return rec


def _sample_std(x) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def aggregate(key: str, records: list[RunRecord]) -> AggregateRow:
    """Mean and sample std over non-diverged runs."""
    ok = [r for r in records if not r.diverged]
    dO = [r.delta_O for r in ok]
    pre = [r.O_pre for r in ok]
    post = [r.O_post for r in ok]
    nan = float("nan")
    return AggregateRow(
        cell=key,
        mean_dO=float(np.mean(dO)) if ok else nan,
        std_dO=_sample_std(dO),
        mean_O_pre=float(np.mean(pre)) if ok else nan,
        std_O_pre=_sample_std(pre),
        mean_O_post=float(np.mean(post)) if ok else nan,
        std_O_post=_sample_std(post),
        mean_final_loss=float(np.mean([r.final_loss for r in ok])) if ok else nan,
        n_seeds=len(ok),
        n_diverged=len(records) - len(ok),
    )


def run_cells(
    kind: str,
    cells: list[Cell],
    seeds: list[int],
    workers: int | None = None,
    raw_path: Path | None = None,
) -> SweepResult:
    """Run every cell for every seed; optionally stream records to ``raw_path``.

    Lines are appended one whole record at a time in (cell, seed) order, so an
    interrupted sweep leaves a valid, truncated JSON-lines file.
    """
    if not cells:
        raise ValueError("sweep has no cells")
    if len(set(seeds)) != len(seeds) or not seeds:
        raise ValueError("seeds must be a nonempty list of distinct integers")
    jobs = [(c, replace(c.config, seed=s)) for c in cells for s in seeds]
    workers = workers or worker_count()
    out = open(raw_path, "w") if raw_path is not None else None
    flat: list[RunRecord] = []
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
            it = pool.map(_run_one, [cfg for _, cfg in jobs], chunksize=4)
        else:
            pool = None
            it = map(_run_one, [cfg for _, cfg in jobs])
        for (cell, _), rec in zip(jobs, it):
            flat.append(rec)
            if out is not None:
                line = json.dumps({"cell": cell.key, **rec.to_dict()}, sort_keys=True)
                out.write(line + "\n")
                out.flush()
        if pool is not None:
            pool.shutdown()
    finally:
        if out is not None:
            out.close()
    k = len(seeds)
    grouped = [flat[j * k : (j + 1) * k] for j in range(len(cells))]
    rows = [aggregate(c.key, recs) for c, recs in zip(cells, grouped)]
    return SweepResult(kind, cells, list(seeds), grouped, rows)


def read_raw(path) -> list[tuple[str, RunRecord]]:
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                d = json.loads(line)
                key = d.pop("cell")
                out.append((key, RunRecord.from_dict(d)))
    return out


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def aggregate_csv(rows: list[AggregateRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AggregateRow.FIELDS)
    for r in rows:
        w.writerow([_fmt(getattr(r, f)) for f in AggregateRow.FIELDS])
    return buf.getvalue()


# ---------------------------------------------------------------- initialisation and pruning studies

INIT_ROWS = {
    "default": dict(init_w="normal", init_v="normal"),
    "uniform_w": dict(init_w="uniform", init_v="normal"),
    "zeros_v": dict(init_w="normal", init_v="zeros"),
}
PRUNE_ROWS = ("none", "random:0.5", "topk:0.5", "dyntopk:0.5", "trildamp:0.8", "dyntrildamp:0.8")
TABLE_TASKS = ("untrained", "xor", "sine")


def table1a_cells() -> list[Cell]:
    return [
        Cell(f"{name}/{task}", TrainConfig(task=task, **kw))
        for name, kw in INIT_ROWS.items()
        for task in TABLE_TASKS
    ]


def table1b_cells() -> list[Cell]:
    return [Cell(f"{p}/{task}", TrainConfig(task=task, prune=p)) for p in PRUNE_ROWS for task in TABLE_TASKS]


def run_table1a(seeds=range(10), workers=None, raw_path=None) -> SweepResult:
    """Initialisation study: untrained ``O`` plus ``dO`` on XOR and Sine."""
    return run_cells("table1a", table1a_cells(), list(seeds), workers, raw_path)


def run_table1b(seeds=range(10), workers=None, raw_path=None) -> SweepResult:
    """Pruning study: ``dO`` for each pruning row, untrained / XOR / Sine."""
    return run_cells("table1b", table1b_cells(), list(seeds), workers, raw_path)


def table_grid(result: SweepResult) -> tuple[np.ndarray, list[str], list[str]]:
    """Table-shaped view: rows are methods, columns untrained / xor / sine.

    For table1a the untrained column holds ``O`` itself rather than ``dO``.
    """
    names = list(dict.fromkeys(c.key.split("/")[0] for c in result.cells))
    vals = np.full((len(names), len(TABLE_TASKS)), np.nan)
    for r in result.rows:
        name, task = r.cell.split("/")
        v = r.mean_O_pre if (result.kind == "table1a" and task == "untrained") else r.mean_dO
        vals[names.index(name), TABLE_TASKS.index(task)] = v
    cols = ["O untrained" if result.kind == "table1a" else "dO untrained", "dO xor", "dO sine"]
    return vals, names, cols


# ---------------------------------------------------------------- hidden x iterations grid

def run_hi_grid(
    task: str = "xor",
    h_range=range(2, 11),
    T_range=range(1, 9),
    seeds=range(10),
    prune: str = "dyntopk:0.5",
    workers=None,
    raw_path=None,
) -> SweepResult:
    """Mean ``dO`` as a function of hidden units and iterations."""
    h_range, T_range = list(h_range), list(T_range)
    if not h_range or not T_range:
        raise ValueError("hidden and iteration ranges must be nonempty")
    cells = [
        Cell(f"h={h}/T={T}", TrainConfig(task=task, hidden=h, iters=T, prune=prune))
        for h in h_range
        for T in T_range
    ]
    res = run_cells("higrid", cells, list(seeds), workers, raw_path)
    grid = np.array([r.mean_dO for r in res.rows]).reshape(len(h_range), len(T_range))
    res.extra = {"task": task, "h": h_range, "T": T_range, "grid": grid}
    return res


def spike_rows(res: SweepResult, at: int = 2, against: int = 3) -> list[bool]:
    """Per hidden size: is mean ``dO`` at ``T=at`` above that at ``T=against``?"""
    T = res.extra["T"]
    grid = res.extra["grid"]
    return [bool(row[T.index(at)] > row[T.index(against)]) for row in grid]


# ---------------------------------------------------------------- sparsity sweeps

SPARSITY_GRIDS = {
    "topk": [0.9, 0.7, 0.5, 0.3, 0.1],
    "dyntopk": [0.9, 0.7, 0.5, 0.3, 0.1],
    "trildamp": [0.2, 0.4, 0.6, 0.8, 1.0],
    "dyntrildamp": [0.2, 0.4, 0.6, 0.8, 1.0],
    "random": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
}


def sparsity_of(kind: str, coefficient: float) -> float:
    """Pruning strength on a common axis: kept fraction k maps to 1 - k."""
    return 1.0 - coefficient if kind in ("topk", "dyntopk") else coefficient


def run_sparsity_sweep(
    task: str = "xor",
    grids: dict[str, list[float]] | None = None,
    seeds=range(10),
    include_untrained: bool = True,
    workers=None,
    raw_path=None,
) -> SweepResult:
    """Mean post-training ``O`` against pruning strength for each operator.

    With ``include_untrained`` the same grid is also run as the untrained
    control (pruning logic only) and stored under ``untrained/`` keys.
    """
    grids = grids or SPARSITY_GRIDS
    for kind, coefs in grids.items():
        if any(not 0.0 <= c <= 1.0 for c in coefs):
            raise ValueError(f"coefficients for {kind} must lie in [0, 1]")
    tasks = [task] + (["untrained"] if include_untrained and task != "untrained" else [])
    cells = [
        Cell(f"{t}/{kind}:{c:g}", TrainConfig(task=t, prune=f"{kind}:{c:g}"))
        for t in tasks
        for kind, coefs in grids.items()
        for c in coefs
    ]
    res = run_cells("sparsity", cells, list(seeds), workers, raw_path)
    curves: dict[str, list[tuple[float, float]]] = {}
    for row in res.rows:
        t, spec = row.cell.split("/")
        kind, c = spec.split(":")
        label = kind if t == task else f"{kind} (untrained)"
        curves.setdefault(label, []).append((sparsity_of(kind, float(c)), row.mean_O_post))
    for pts in curves.values():
        pts.sort()
    res.extra = {"task": task, "curves": curves}
    return res


def spearman(points: list[tuple[float, float]]) -> float:
    xs, ys = zip(*points)
    return float(stats.spearmanr(xs, ys).statistic)


# ---------------------------------------------------------------- config files and output

def parse_sweep_config(text: str) -> dict:
    cfg: dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {n}: expected key = value, got {raw!r}")
        k, v = line.split("=", 1)
        cfg[k.strip().lower()] = v.strip()
    if cfg.get("kind") not in ("table1a", "table1b", "higrid", "sparsity"):
        raise ValueError("sweep config needs kind = table1a | table1b | higrid | sparsity")
    return cfg


def run_from_config(cfg: dict, workers=None, raw_path=None) -> SweepResult:
    kind = cfg["kind"]
    seeds = parse_range(cfg.get("seeds", "0..9"))
    if kind == "table1a":
        return run_table1a(seeds, workers, raw_path)
    if kind == "table1b":
        return run_table1b(seeds, workers, raw_path)
    task = cfg.get("task", "xor")
    if kind == "higrid":
        return run_hi_grid(
            task,
            parse_range(cfg.get("hidden", "2..10")),
            parse_range(cfg.get("iters", "1..8")),
            seeds,
            cfg.get("prune", "dyntopk:0.5"),
            workers,
            raw_path,
        )
    grids = {k: [float(c) for c in cfg[k].split(",")] for k in SPARSITY_GRIDS if k in cfg}
    include = cfg.get("include_untrained", "true").lower() in ("1", "true", "yes")
    return run_sparsity_sweep(task, grids or None, seeds, include, workers, raw_path)


def sweep_svg(res: SweepResult) -> str:
    if res.kind in ("table1a", "table1b"):
        vals, names, cols = table_grid(res)
        return grid_svg(vals, names, cols, f"{res.kind}: mean over {len(res.seeds)} seeds")
    if res.kind == "higrid":
        return grid_svg(
            res.extra["grid"],
            [f"h={h}" for h in res.extra["h"]],
            [str(t) for t in res.extra["T"]],
            f"mean dO ({res.extra['task']})",
            row_name="hidden units",
            col_name="iterations T",
        )
    return curves_svg(
        res.extra["curves"], f"sparsity vs orderedness ({res.extra['task']})", "pruning strength", "mean O after"
    )


def write_outputs(res: SweepResult, out_dir) -> None:
    """``aggregate.csv`` and ``plot.svg`` (``raw.jsonl`` is streamed by the run)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "aggregate.csv").write_text(aggregate_csv(res.rows))
    (out / "plot.svg").write_text(sweep_svg(res))
