import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from orderlab import checkpoint
from orderlab.layer import LayerParams, LayerShape
from orderlab.render import NEUTRAL, curves_svg, diverging_color, grid_svg, weights_svg


def _params(bias):
    rng = np.random.default_rng(0)
    shape = LayerShape(1, 3, 2, 3)
    mask = (rng.random(shape.w_shape) > 0.3).astype(float)
    W = rng.standard_normal(shape.w_shape) * mask
    b = rng.standard_normal(shape.n) if bias else None
    return shape, LayerParams(W, rng.standard_normal(shape.n), b, mask)


@pytest.mark.parametrize("bias", [False, True])
def test_checkpoint_round_trip(tmp_path, bias):
    shape, params = _params(bias)
    path = tmp_path / "ck.txt"
    checkpoint.save(path, shape, params)
    text = path.read_text()
    assert text.startswith(checkpoint.HEADER)
    shape2, params2 = checkpoint.load(path)
    assert shape2 == shape
    assert np.array_equal(params2.W, params.W)
    assert np.array_equal(params2.v, params.v)
    assert np.array_equal(params2.mask, params.mask)
    assert (params2.b is None) == (not bias)
    if bias:
        assert np.array_equal(params2.b, params.b)
    assert checkpoint.dumps(shape2, params2) == text


@pytest.mark.parametrize(
    "mangle",
    [
        lambda t: t.replace("# orderlab-checkpoint v1", "# something else"),
        lambda t: t.replace("[mask]", "[nope]"),
        lambda t: t.replace("h=3", "h=4"),
        lambda t: t.replace("o=1 ", ""),
        lambda t: "",
    ],
)
def test_corrupt_checkpoints(tmp_path, mangle):
    shape, params = _params(False)
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.loads(mangle(checkpoint.dumps(shape, params)))


def test_missing_checkpoint_file(tmp_path):
    with pytest.raises(checkpoint.CheckpointError):
        checkpoint.load(tmp_path / "absent.txt")


def test_diverging_colors():
    assert diverging_color(0.0, 1.0) == NEUTRAL
    assert diverging_color(1.0, 1.0) == "#b2182b"
    assert diverging_color(-1.0, 1.0) == "#2166ac"
    assert diverging_color(0.5, 0.0) == NEUTRAL


def _rect_fills(svg):
    return re.findall(r'<rect x="[^"]+" y="[^"]+" width="[^"]+" height="[^"]+" fill="(#[0-9a-f]{6})"', svg)


def _cells(svg, n_cols, n_rows):
    fills = _rect_fills(svg)
    # first panel: one rect per cell, row-major
    return np.array(fills[: n_cols * n_rows]).reshape(n_rows, n_cols)


def test_upper_triangular_render_has_neutral_lower_triangle():
    shape = LayerShape(1, 4, 2, 3)
    W = np.triu(np.random.default_rng(1).random(shape.w_shape) + 0.2)
    svg = weights_svg(W, shape)
    ET.fromstring(svg)
    cells = _cells(svg, 7, 5)
    for r in range(5):
        for c in range(r):
            assert cells[r, c] == NEUTRAL
    assert "O = 1.0000" in svg


def test_mlp_block_render_shows_blocks():
    # outputs <- layer 2 <- layer 1 <- inputs, written as blocks above the diagonal
    shape = LayerShape(1, 4, 2, 3)
    W = np.zeros(shape.w_shape)
    W[0, 1:3] = 1.0  # output reads hidden units 1-2
    W[1:3, 3:5] = -1.0  # hidden 1-2 read hidden 3-4
    W[3:5, 5:7] = 1.0  # hidden 3-4 read the inputs
    cells = _cells(weights_svg(W, shape), 7, 5)
    assert (cells[1:3, 3:5] == "#2166ac").all()
    assert (cells[0, 1:3] == "#b2182b").all()
    assert (cells[3:5, :5] == NEUTRAL).all()


def test_zero_matrix_render():
    shape = LayerShape(1, 2, 1, 1)
    svg = weights_svg(np.zeros(shape.w_shape), shape)
    assert set(_cells(svg, 4, 3).ravel()) == {NEUTRAL}
    assert "O = 1.0000" in svg


def test_grid_and_curves_are_valid_svg():
    ET.fromstring(grid_svg(np.array([[0.1, np.nan], [-0.2, 0.3]]), ["a", "b"], ["x", "y"], "t"))
    ET.fromstring(curves_svg({"topk": [(0.1, 0.7), (0.5, 0.8)], "empty": []}, "t", "x", "y"))
