"""Seeded random generation, dense float64 helpers and CSV matrix I/O.

Matrices are plain ``numpy.ndarray`` objects of dtype float64 in C (row-major)
order. Row index is the destination neuron, column index the source neuron.

Random streams come from numpy's ``PCG64`` bit generator. Normal variates use
numpy's ziggurat sampler (``Generator.standard_normal``); uniform variates use
``Generator.random`` on [0, 1). Both are pinned by the bit generator and seed.
"""

from __future__ import annotations

import io

import numpy as np

DTYPE = np.float64

# Role constants for deriving independent sub-streams from one user seed.
ROLE_WEIGHTS = 0x5EED_0001
ROLE_VALUES = 0x5EED_0002
ROLE_BIAS = 0x5EED_0003
ROLE_PRUNE = 0x5EED_0004
ROLE_DATA = 0x5EED_0005
ROLE_SEARCH = 0x5EED_0006


class DimensionError(ValueError):
    """Raised when matrix shapes do not conform."""


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def sub_rng(seed: int, role: int) -> np.random.Generator:
    """Stream for one role of a run: ``seed XOR role``."""
    return make_rng((int(seed) ^ role) & 0xFFFF_FFFF_FFFF_FFFF)


def _check_dims(rows: int, cols: int) -> None:
    if rows < 1 or cols < 1:
        raise DimensionError(f"matrix dimensions must be >= 1, got {rows}x{cols}")


def randn(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    _check_dims(rows, cols)
    return rng.standard_normal((rows, cols), dtype=DTYPE)


def randu(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    _check_dims(rows, cols)
    return rng.random((rows, cols), dtype=DTYPE)


def sigmoid(x: np.ndarray) -> np.ndarray:
    # Two-branch form keeps exp() from overflowing for large |x|.
    x = np.asarray(x, dtype=DTYPE)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def as_matrix(a) -> np.ndarray:
    m = np.array(a, dtype=DTYPE, order="C")
    if m.ndim == 1:
        m = m.reshape(1, -1)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got {m.ndim} dimensions")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Element-wise sum; a 1-d ``b`` is broadcast across rows of ``a``."""
    if b.ndim == 1:
        if b.shape[0] != a.shape[1]:
            raise DimensionError(f"cannot broadcast {b.shape} over {a.shape}")
    elif a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    return a + b


def transpose(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.T)


def concat_cols(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Join along the feature axis: (B, p) and (B, q) -> (B, p + q)."""
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    return np.concatenate([a, b], axis=1)


def slice_cols(a: np.ndarray, start: int, stop: int) -> np.ndarray:
    if not 0 <= start <= stop <= a.shape[1]:
        raise DimensionError(f"column range [{start}, {stop}) outside 0..{a.shape[1]}")
    return np.ascontiguousarray(a[:, start:stop])


def matrix_to_csv(m: np.ndarray) -> str:
    m = as_matrix(m)
    buf = io.StringIO()
    for row in m:
        buf.write(",".join(repr(float(v)) for v in row))
        buf.write("\n")
    return buf.getvalue()


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [line for line in text.splitlines() if line.strip()]
    if not rows:
        raise DimensionError("empty CSV matrix")
    data = [[float(v) for v in line.split(",")] for line in rows]
    width = len(data[0])
    if any(len(r) != width for r in data):
        raise DimensionError("ragged CSV matrix")
    return np.array(data, dtype=DTYPE)
