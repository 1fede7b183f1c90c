"""Tasks, loss, optimiser and training loops.

Two synthetic tasks are provided: XOR (full truth table every step) and Sine
(``(sin a + sin b) / 2`` for fresh ``a, b ~ U[0, 3]`` every step). A third
task name, ``untrained``, runs only the pruning logic on the XOR-shaped layer
for a few steps with no gradient updates.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import numerics as nx
from .layer import LayerParams, LayerShape, backward, forward
from .orderedness import orderedness
from .pruning import PruneSpec, apply_pruning

TASKS = ("xor", "sine", "untrained")
INITS_W = ("normal", "uniform")
INITS_V = ("normal", "uniform", "zeros")

# per-task defaults: hidden units, iterations, batch size, steps
TASK_DEFAULTS = {
    "xor": dict(hidden=5, iters=3, batch=4, steps=1000),
    "sine": dict(hidden=10, iters=3, batch=10, steps=600),
    "untrained": dict(hidden=5, iters=3, batch=4, steps=10),
}
SINE_EVAL_SIZE = 1000
SINE_EVAL_SEED = 20240


class ConfigError(ValueError):
    pass


@dataclass
class TaskBatch:
    x: np.ndarray
    y: np.ndarray


def xor_batch() -> TaskBatch:
    x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([[0.0], [1.0], [1.0], [0.0]])
    return TaskBatch(x, y)


def sine_targets(x: np.ndarray) -> np.ndarray:
    return ((np.sin(x[:, 0]) + np.sin(x[:, 1])) / 2.0).reshape(-1, 1)


def sine_batch(rng: np.random.Generator, B: int) -> TaskBatch:
    if B < 1:
        raise nx.DimensionError("batch size must be >= 1")
    x = 3.0 * nx.randu(rng, B, 2)
    return TaskBatch(x, sine_targets(x))


def mse(pred: np.ndarray, target: np.ndarray):
    """Mean squared error over all entries and its gradient w.r.t. ``pred``."""
    pred = np.asarray(pred, dtype=nx.DTYPE)
    target = np.asarray(target, dtype=nx.DTYPE)
    if pred.shape != target.shape:
        raise nx.DimensionError(f"prediction {pred.shape} vs target {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


class Adam:
    """Bias-corrected Adam over a dict of named arrays."""

    def __init__(self, lr: float = 0.01, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            if k not in self.m:
                self.m[k] = np.zeros_like(g)
                self.v[k] = np.zeros_like(g)
            if self.m[k].shape != g.shape or params[k].shape != g.shape:
                raise nx.DimensionError(f"gradient for {k!r} has shape {g.shape}")
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            params[k] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass(frozen=True)
class TrainConfig:
    task: str = "xor"
    hidden: int | None = None
    iters: int | None = None
    steps: int | None = None
    batch: int | None = None
    prune: str = "none"
    init_w: str = "normal"
    init_v: str = "normal"
    bias: bool = False
    lr: float = 0.01
    seed: int = 0
    freeze_v: bool = False
    outputs: int = 1
    inputs: int = 2
    measure_inputs: bool = False

    def resolved(self) -> "TrainConfig":
        """Copy with task defaults filled in and every field validated."""
        if self.task not in TASKS:
            raise ConfigError(f"--task must be one of {TASKS}, got {self.task!r}")
        d = asdict(self)
        for k, v in TASK_DEFAULTS[self.task].items():
            if d[k] is None:
                d[k] = v
        cfg = TrainConfig(**d)
        if cfg.init_w not in INITS_W:
            raise ConfigError(f"--init-w must be one of {INITS_W}, got {cfg.init_w!r}")
        if cfg.init_v not in INITS_V:
            raise ConfigError(f"--init-v must be one of {INITS_V}, got {cfg.init_v!r}")
        if cfg.steps < 1:
            raise ConfigError("--steps must be >= 1")
        if cfg.batch < 1:
            raise ConfigError("--batch must be >= 1")
        if cfg.task == "xor" and cfg.batch != 4:
            raise ConfigError("--batch for xor is the 4-row truth table")
        if not (cfg.lr > 0 and math.isfinite(cfg.lr)):
            raise ConfigError("--lr must be a positive number")
        if cfg.hidden < 0 or cfg.iters < 1:
            raise ConfigError("--hidden must be >= 0 and --iters >= 1")
        PruneSpec.parse(cfg.prune)
        return cfg

    @property
    def shape(self) -> LayerShape:
        cfg = self.resolved()
        return LayerShape(cfg.outputs, cfg.hidden, cfg.inputs, cfg.iters)

    @property
    def prune_spec(self) -> PruneSpec:
        return PruneSpec.parse(self.prune)


@dataclass
class RunRecord:
    config: dict
    losses: list[float]
    final_loss: float
    O_pre: float
    O_post: float
    delta_O: float
    perm_pre: list[int]
    perm_post: list[int]
    solver: str
    diverged: bool = False
    steps_run: int = 0
    # not serialised: timing breaks byte-identical replays, params go to checkpoints
    wall_time: float = field(default=0.0, compare=False)
    params: LayerParams | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("wall_time")
        d.pop("params")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        return cls.from_dict(json.loads(line))


def _init_matrix(kind: str, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    if kind == "normal":
        return nx.randn(rng, rows, cols)
    if kind == "uniform":
        return nx.randu(rng, rows, cols)
    return np.zeros((rows, cols))


def init_params(cfg: TrainConfig) -> LayerParams:
    cfg = cfg.resolved()
    shape = cfg.shape
    n, cols = shape.w_shape
    W = _init_matrix(cfg.init_w, nx.sub_rng(cfg.seed, nx.ROLE_WEIGHTS), n, cols)
    v = _init_matrix(cfg.init_v, nx.sub_rng(cfg.seed, nx.ROLE_VALUES), 1, n).reshape(-1)
    b = np.zeros(n) if cfg.bias else None
    return LayerParams(W, v, b)


def measure(W: np.ndarray, shape: LayerShape, include_inputs: bool = False):
    return orderedness(W, shape, include_inputs=include_inputs)


def evaluation_batch(task: str) -> TaskBatch:
    if task == "sine":
        return sine_batch(nx.make_rng(SINE_EVAL_SEED), SINE_EVAL_SIZE)
    return xor_batch()


def progress(step: int, steps: int) -> float:
    """Training progress: 0 at the first step, 1 at the last."""
    return 1.0 if steps == 1 else step / (steps - 1)


def train_clp(cfg: TrainConfig) -> RunRecord:
    """Train (or, for ``untrained``, only prune) a complete perceptron layer."""
    cfg = cfg.resolved()
    shape = cfg.shape
    spec = cfg.prune_spec
    params = init_params(cfg)
    prune_rng = nx.sub_rng(cfg.seed, nx.ROLE_PRUNE)
    data_rng = nx.sub_rng(cfg.seed, nx.ROLE_DATA)
    opt = Adam(lr=cfg.lr)
    t0 = time.perf_counter()

    pre = measure(params.effective_W(), shape, cfg.measure_inputs)
    losses: list[float] = []
    diverged = False
    steps_run = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(cfg.steps):
            batch = sine_batch(data_rng, cfg.batch) if cfg.task == "sine" else xor_batch()
            y, trace = forward(shape, params, batch.x, trace=cfg.task != "untrained")
            loss, grad = mse(y, batch.y)
            losses.append(loss)
            if not math.isfinite(loss):
                diverged = True
                break
            if cfg.task != "untrained":
                dW, dv, db = backward(shape, params, trace, grad)
                named = {"W": params.W}
                grads = {"W": dW}
                if not cfg.freeze_v:
                    named["v"], grads["v"] = params.v, dv
                if params.b is not None:
                    named["b"], grads["b"] = params.b, db
                opt.step(named, grads)
                params.W *= params.mask
            apply_pruning(spec, params, progress(step, cfg.steps), prune_rng, first=step == 0)
            steps_run += 1
            if not (np.all(np.isfinite(params.W)) and np.all(np.isfinite(params.v))):
                diverged = True
                break

    if diverged:
        post, final_loss = pre, float("nan")
    else:
        post = measure(params.effective_W(), shape, cfg.measure_inputs)
        ev = evaluation_batch(cfg.task)
        final_loss = mse(forward(shape, params, ev.x)[0], ev.y)[0]

    return RunRecord(
        config=asdict(cfg),
        losses=losses,
        final_loss=final_loss,
        O_pre=pre.O,
        O_post=post.O,
        delta_O=post.O - pre.O,
        perm_pre=list(pre.permutation),
        perm_post=list(post.permutation),
        solver=post.solver,
        diverged=diverged,
        steps_run=steps_run,
        wall_time=time.perf_counter() - t0,
        params=params,
    )


@dataclass
class MLPRecord:
    task: str
    seed: int
    hidden: int
    losses: list[float]
    final_loss: float
    stopped_early: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


MLP_HIDDEN = {"xor": 2, "sine": 10}
MLP_MAX_STEPS = 5000


def train_mlp_baseline(
    task: str,
    seed: int,
    max_steps: int | None = None,
    lr: float = 0.01,
    stop_below: float = 1e-3,
) -> MLPRecord:
    """One-hidden-layer sigmoid MLP with bias, trained until loss < ``stop_below``.

    Batch size and optimiser match the layer defaults for the task. Training
    stops early below ``stop_below`` or after ``max_steps`` (default 5000).
    """
    if task not in MLP_HIDDEN:
        raise ConfigError(f"MLP baseline task must be xor or sine, got {task!r}")
    hidden = MLP_HIDDEN[task]
    defaults = TASK_DEFAULTS[task]
    steps = max_steps or MLP_MAX_STEPS
    wrng = nx.sub_rng(seed, nx.ROLE_WEIGHTS)
    data_rng = nx.sub_rng(seed, nx.ROLE_DATA)
    p = {
        "W1": nx.randn(wrng, 2, hidden),
        "b1": np.zeros(hidden),
        "W2": nx.randn(wrng, hidden, 1),
        "b2": np.zeros(1),
    }
    opt = Adam(lr=lr)
    losses: list[float] = []
    stopped = False
    for _ in range(steps):
        batch = sine_batch(data_rng, defaults["batch"]) if task == "sine" else xor_batch()
        a1 = nx.sigmoid(batch.x @ p["W1"] + p["b1"])
        out = nx.sigmoid(a1 @ p["W2"] + p["b2"])
        loss, g = mse(out, batch.y)
        losses.append(loss)
        if loss < stop_below:
            stopped = True
            break
        g2 = g * out * (1.0 - out)
        g1 = (g2 @ p["W2"].T) * a1 * (1.0 - a1)
        grads = {
            "W2": a1.T @ g2,
            "b2": g2.sum(axis=0),
            "W1": batch.x.T @ g1,
            "b1": g1.sum(axis=0),
        }
        opt.step(p, grads)
    return MLPRecord(task, seed, hidden, losses, losses[-1], stopped)
