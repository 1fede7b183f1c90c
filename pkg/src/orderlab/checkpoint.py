"""Plain-text checkpoint files for a layer.

Layout::

    # orderlab-checkpoint v1
    o=1 h=5 i=2 T=3 bias=0
    [W]
    <CSV rows>
    [v]
    <one CSV row>
    [b]            (only when bias=1)
    <one CSV row>
    [mask]
    <CSV rows>

Values are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .layer import LayerParams, LayerShape
from .numerics import matrix_from_csv, matrix_to_csv

HEADER = "# orderlab-checkpoint v1"


class CheckpointError(ValueError):
    pass


def dumps(shape: LayerShape, params: LayerParams) -> str:
    params.check(shape)
    bias = params.b is not None
    parts = [
        HEADER,
        f"o={shape.o} h={shape.h} i={shape.i} T={shape.T} bias={int(bias)}",
        "[W]",
        matrix_to_csv(params.W).rstrip("\n"),
        "[v]",
        matrix_to_csv(params.v).rstrip("\n"),
    ]
    if bias:
        parts += ["[b]", matrix_to_csv(params.b).rstrip("\n")]
    parts += ["[mask]", matrix_to_csv(params.mask).rstrip("\n")]
    return "\n".join(parts) + "\n"


def loads(text: str) -> tuple[LayerShape, LayerParams]:
    lines = text.splitlines()
    if len(lines) < 2 or lines[0].strip() != HEADER:
        raise CheckpointError("missing or unsupported checkpoint header")
    try:
        meta = dict(tok.split("=", 1) for tok in lines[1].split())
        shape = LayerShape(int(meta["o"]), int(meta["h"]), int(meta["i"]), int(meta["T"]))
        bias = meta.get("bias", "0") == "1"
    except (KeyError, ValueError) as exc:
        raise CheckpointError(f"bad shape line {lines[1]!r}") from exc

    blocks: dict[str, list[str]] = {}
    current = None
    for line in lines[2:]:
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1]
            blocks[current] = []
        elif s:
            if current is None:
                raise CheckpointError("data before the first block")
            blocks[current].append(s)

    need = ["W", "v", "mask"] + (["b"] if bias else [])
    missing = [k for k in need if k not in blocks]
    if missing:
        raise CheckpointError(f"checkpoint lacks blocks {missing}")
    try:
        W = matrix_from_csv("\n".join(blocks["W"]))
        v = matrix_from_csv("\n".join(blocks["v"])).reshape(-1)
        b = matrix_from_csv("\n".join(blocks["b"])).reshape(-1) if bias else None
        mask = matrix_from_csv("\n".join(blocks["mask"]))
        params = LayerParams(W, v, b, mask)
        params.check(shape)
    except ValueError as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from exc
    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(v))):
        raise CheckpointError("checkpoint holds non-finite values")
    return shape, params


def save(path, shape: LayerShape, params: LayerParams) -> None:
    Path(path).write_text(dumps(shape, params))


def load(path) -> tuple[LayerShape, LayerParams]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CheckpointError(f"cannot read {path}: {exc}") from exc
    return loads(text)
