"""Pruning operators that act on the weight matrix during training.

Five operators are supported: one-shot random masking, magnitude top-k
(static or on a sin^4 schedule) and damping of the strict lower triangle of
the square state block (static or on a sin^4 schedule).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .layer import LayerParams

KINDS = ("none", "random", "topk", "dyntopk", "trildamp", "dyntrildamp")


class PruneConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PruneSpec:
    kind: str = "none"
    coefficient: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PruneConfigError(f"unknown pruning kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.coefficient <= 1.0 or math.isnan(self.coefficient):
            raise PruneConfigError(
                f"pruning coefficient must lie in [0, 1], got {self.coefficient}"
            )

    @classmethod
    def parse(cls, text: str) -> "PruneSpec":
        """Parse ``none`` or ``kind:coefficient`` (e.g. ``dyntopk:0.5``)."""
        text = text.strip().lower()
        if text == "none":
            return cls()
        kind, sep, coef = text.partition(":")
        if not sep:
            raise PruneConfigError(f"pruning spec {text!r} needs the form kind:coefficient")
        try:
            value = float(coef)
        except ValueError:
            raise PruneConfigError(f"bad pruning coefficient {coef!r}") from None
        return cls(kind, value)

    def __str__(self) -> str:
        return "none" if self.kind == "none" else f"{self.kind}:{self.coefficient:g}"


def _check_unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise PruneConfigError(f"{name} must lie in [0, 1], got {value}")


def _sin4(x: float) -> float:
    # sin^4(pi x / 2) == ((1 - cos(pi x)) / 2)^2, with cos(pi x) taken as
    # sin(pi (1/2 - x)) so that x = 0, 1/2, 1 evaluate exactly
    half = (1.0 - math.sin(math.pi * (0.5 - x))) / 2.0
    return half * half


def dyn_topk_fraction(k: float, x: float) -> float:
    """Kept fraction at progress ``x``: 1 at the start, ``k`` at the end."""
    _check_unit("k", k)
    _check_unit("progress", x)
    if x == 1.0:
        return k
    return 1.0 - (1.0 - k) * _sin4(x)


def dyn_tril_fraction(f: float, x: float) -> float:
    """Damping factor at progress ``x``: 0 at the start, ``f`` at the end."""
    _check_unit("f", f)
    _check_unit("progress", x)
    if x == 1.0:
        return f
    return f * _sin4(x)


def random_prune(W, mask: np.ndarray, p: float, rng: np.random.Generator) -> np.ndarray:
    """Mask each entry independently with probability ``p``."""
    _check_unit("p", p)
    keep = rng.random(mask.shape) >= p
    return mask * keep


def topk_mask(W: np.ndarray, k_eff: float) -> np.ndarray:
    """Binary mask keeping the ``ceil(k_eff * numel)`` largest ``|W|`` entries.

    Ties go to the lower flat (row-major) index.
    """
    _check_unit("k", k_eff)
    flat = np.abs(W).ravel()
    # guard against 0.5 * 12 = 6.000000000000001 style round-up
    keep = min(flat.size, math.ceil(round(k_eff * flat.size, 9)))
    mask = np.zeros(flat.size, dtype=W.dtype)
    if keep:
        order = np.lexsort((np.arange(flat.size), -flat))
        mask[order[:keep]] = 1.0
    return mask.reshape(W.shape)


def tril_damp(W: np.ndarray, f_eff: float) -> np.ndarray:
    """Scale the strict lower triangle of the leading square block by ``1 - f_eff``."""
    _check_unit("f", f_eff)
    n = W.shape[0]
    out = W.copy()
    rows, cols = np.tril_indices(n, -1)
    out[rows, cols] -= f_eff * W[rows, cols]
    return out


def apply_pruning(
    spec: PruneSpec,
    params: LayerParams,
    x: float,
    rng: np.random.Generator,
    first: bool = False,
) -> LayerParams:
    """Apply one step of ``spec`` at training progress ``x`` (in place).

    ``first`` marks the first call of a run; one-shot random masking only
    fires then.
    """
    kind, c = spec.kind, spec.coefficient
    if kind == "none":
        return params
    if kind == "random":
        if first:
            params.mask = random_prune(params.W, params.mask, c, rng)
            params.W *= params.mask
    elif kind in ("topk", "dyntopk"):
        k_eff = c if kind == "topk" else dyn_topk_fraction(c, x)
        params.mask = topk_mask(params.W * params.mask, k_eff)
        params.W *= params.mask
    else:
        f_eff = c if kind == "trildamp" else dyn_tril_fraction(c, x)
        params.W = tril_damp(params.W, f_eff)
    return params
