"""The complete perceptron layer.

Neurons are indexed outputs first, then hidden units, then inputs. The layer
holds ``W`` of shape ``(o+h, o+h+i)``, a values vector ``v`` that seeds the
state, and an optional bias ``b``. Each of ``T`` iterations computes::

    s <- sigma([s x] @ W.T + b)

with the inputs ``x`` clamped, and the first ``o`` state columns are read out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import DTYPE, DimensionError, concat_cols, sigmoid, slice_cols


class ContractError(ValueError):
    """Raised when a trace or parameter set does not belong to a shape."""


@dataclass(frozen=True)
class LayerShape:
    o: int
    h: int
    i: int
    T: int

    def __post_init__(self):
        if self.o < 1 or self.i < 1 or self.h < 0 or self.T < 1:
            raise ValueError(f"invalid layer shape {self}")

    @property
    def n(self) -> int:
        """Number of state neurons (outputs + hidden)."""
        return self.o + self.h

    @property
    def w_shape(self) -> tuple[int, int]:
        return (self.o + self.h, self.o + self.h + self.i)


@dataclass
class LayerParams:
    W: np.ndarray
    v: np.ndarray
    b: np.ndarray | None = None
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=DTYPE)
        self.v = np.asarray(self.v, dtype=DTYPE).reshape(-1)
        if self.b is not None:
            self.b = np.asarray(self.b, dtype=DTYPE).reshape(-1)
        if self.mask is None:
            self.mask = np.ones_like(self.W)
        else:
            self.mask = np.asarray(self.mask, dtype=DTYPE)

    def effective_W(self) -> np.ndarray:
        return self.W * self.mask

    def copy(self) -> "LayerParams":
        return LayerParams(
            self.W.copy(),
            self.v.copy(),
            None if self.b is None else self.b.copy(),
            self.mask.copy(),
        )

    def check(self, shape: LayerShape) -> None:
        n = shape.n
        if self.W.shape != shape.w_shape:
            raise DimensionError(f"W has shape {self.W.shape}, expected {shape.w_shape}")
        if self.mask.shape != self.W.shape:
            raise DimensionError(f"mask has shape {self.mask.shape}, expected {self.W.shape}")
        if self.v.shape != (n,):
            raise DimensionError(f"v has length {self.v.shape[0]}, expected {n}")
        if self.b is not None and self.b.shape != (n,):
            raise DimensionError(f"b has length {self.b.shape[0]}, expected {n}")


@dataclass
class StateTrace:
    """States ``s^(0..T)`` (each ``B x (o+h)``) and the single clamped input."""

    states: list[np.ndarray]
    x: np.ndarray
    activation: str = "sigmoid"


_ACTIVATIONS = {
    "sigmoid": sigmoid,
    "identity": lambda z: z,
}


def _activation_grad(name: str, s_next: np.ndarray) -> np.ndarray:
    # derivative expressed through the activation output
    if name == "sigmoid":
        return s_next * (1.0 - s_next)
    return np.ones_like(s_next)


def _check_input(shape: LayerShape, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=DTYPE)
    if x.ndim != 2 or x.shape[1] != shape.i or x.shape[0] < 1:
        raise DimensionError(f"input has shape {x.shape}, expected (B>=1, {shape.i})")
    return x


def forward(
    shape: LayerShape,
    params: LayerParams,
    x: np.ndarray,
    trace: bool = False,
    activation: str = "sigmoid",
):
    """Evolve the layer for ``shape.T`` iterations and return the outputs.

    Returns ``(y, trace)`` where ``y`` is ``B x o`` and ``trace`` is a
    :class:`StateTrace` when requested, else ``None``.
    """
    params.check(shape)
    x = _check_input(shape, x)
    act = _ACTIVATIONS[activation]
    Wt = params.effective_W().T
    s = np.repeat(params.v[None, :], x.shape[0], axis=0)
    states = [s]
    for _ in range(shape.T):
        z = concat_cols(s, x) @ Wt
        if params.b is not None:
            z = z + params.b
        s = act(z)
        states.append(s)
    y = slice_cols(s, 0, shape.o)
    return y, (StateTrace(states, x, activation) if trace else None)


def forward_rnn_form(
    shape: LayerShape,
    params: LayerParams,
    x: np.ndarray,
    activation: str = "sigmoid",
) -> np.ndarray:
    """Same computation written as a weight-tied RNN with constant input.

    ``W = [W_s | W_x]``; each step is ``sigma(s @ W_s.T + x @ W_x.T + b)``.
    """
    params.check(shape)
    x = _check_input(shape, x)
    act = _ACTIVATIONS[activation]
    W = params.effective_W()
    W_s = W[:, : shape.n]
    W_x = W[:, shape.n :]
    drive = x @ W_x.T
    if params.b is not None:
        drive = drive + params.b
    s = np.repeat(params.v[None, :], x.shape[0], axis=0)
    for _ in range(shape.T):
        s = act(s @ W_s.T + drive)
    return s[:, : shape.o].copy()


def backward(
    shape: LayerShape,
    params: LayerParams,
    trace: StateTrace,
    grad_output: np.ndarray,
):
    """Backpropagate ``grad_output`` (dLoss/dy) through all ``T`` steps.

    Returns ``(dW, dv, db)``; ``db`` is ``None`` when the layer has no bias.
    ``dW`` is zero wherever the mask is zero.
    """
    params.check(shape)
    if trace is None or len(trace.states) != shape.T + 1:
        raise ContractError("trace does not match the layer's iteration count")
    B = trace.x.shape[0]
    grad_output = np.asarray(grad_output, dtype=DTYPE)
    if grad_output.shape != (B, shape.o):
        raise ContractError(f"grad_output has shape {grad_output.shape}, expected {(B, shape.o)}")
    if any(s.shape != (B, shape.n) for s in trace.states):
        raise ContractError("trace states do not match the layer shape")

    W = params.effective_W()
    n = shape.n
    dW = np.zeros_like(W)
    db = np.zeros(n, dtype=DTYPE)
    g_s = np.zeros((B, n), dtype=DTYPE)
    g_s[:, : shape.o] = grad_output
    for t in range(shape.T - 1, -1, -1):
        s_next = trace.states[t + 1]
        g_z = g_s * _activation_grad(trace.activation, s_next)
        dW += g_z.T @ concat_cols(trace.states[t], trace.x)
        db += g_z.sum(axis=0)
        g_s = g_z @ W[:, :n]
    dv = g_s.sum(axis=0)
    dW *= params.mask
    return dW, dv, (db if params.b is not None else None)
