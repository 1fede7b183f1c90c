import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orderlab.layer import LayerShape
from orderlab.orderedness import (
    CapacityError,
    OrderednessProblem,
    PermutationError,
    apply_hidden_permutation,
    inverse_permutation,
    lower_sum,
    orderedness,
    orderedness_dp,
    orderedness_exhaustive,
    orderedness_local_search,
    total_sum,
)
from orderlab.pruning import tril_damp


def brute_force_min_lower(Wabs, o, h):
    """Explicit loops over every hidden ordering; independent of the solvers."""
    n = o + h
    best = np.inf
    for perm in itertools.permutations(range(h)):
        idx = list(range(o)) + [o + p for p in perm]
        L = 0.0
        for r in range(n):
            for c in range(r):
                L += Wabs[idx[r], idx[c]]
        best = min(best, L)
    return best


def random_problem(rng, o=None, h=None, i=None, include_inputs=False):
    o = o if o is not None else int(rng.integers(1, 3))
    h = h if h is not None else int(rng.integers(0, 8))
    i = i if i is not None else int(rng.integers(1, 3))
    W = rng.standard_normal((o + h, o + h + i))
    return OrderednessProblem.from_weights(W, o, h, include_inputs)


def test_lower_and_total_sums():
    W = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert lower_sum(W) == 3.0 and total_sum(W) == 10.0
    assert lower_sum(np.triu(np.ones((5, 5)))) == 0.0
    n = 6
    assert lower_sum(np.ones((n, n))) == n * (n - 1) / 2
    assert total_sum(np.ones((n, n))) == n * n
    # input columns never enter the lower triangle
    assert lower_sum(np.hstack([np.triu(np.ones((3, 3))), np.ones((3, 2))])) == 0.0


def test_hidden_swap_by_hand():
    W = np.arange(12, dtype=float).reshape(3, 4)  # o=1, h=2, i=1
    out = apply_hidden_permutation(W, [1, 0], o=1, h=2)
    expected = np.array(
        [
            [0.0, 2.0, 1.0, 3.0],
            [8.0, 10.0, 9.0, 11.0],
            [4.0, 6.0, 5.0, 7.0],
        ]
    )
    assert np.array_equal(out, expected)


def test_permutation_identity_and_inverse():
    W = np.random.default_rng(0).standard_normal((6, 8))
    assert np.array_equal(apply_hidden_permutation(W, range(4), 2, 4), W)
    perm = np.array([2, 0, 3, 1])
    P = apply_hidden_permutation(W, perm, 2, 4)
    assert np.array_equal(apply_hidden_permutation(P, inverse_permutation(perm), 2, 4), W)


@pytest.mark.parametrize("perm", [[0, 0, 1], [0, 1], [0, 1, 3], [1, 2, 3]])
def test_non_bijective_permutation_rejected(perm):
    with pytest.raises(PermutationError):
        apply_hidden_permutation(np.zeros((4, 5)), perm, 1, 3)


def test_dp_transition_orientation():
    """Each DP step cost must equal the growth of lower_sum on the permuted matrix."""
    rng = np.random.default_rng(42)
    for _ in range(50):
        prob = random_problem(rng, h=4)
        H = prob.hidden_block
        order = list(rng.permutation(4))
        base = lower_sum(apply_hidden_permutation(prob.Wabs, order, prob.o, 4))
        # the DP builds costs as: unit u appended after placed set P adds sum H[u, P]
        incremental = sum(H[order[k], order[:k]].sum() for k in range(4))
        fixed = lower_sum(prob.Wabs) - sum(H[r, c] for r in range(4) for c in range(r))
        assert base == pytest.approx(fixed + incremental, abs=1e-12)
        dp = orderedness_dp(prob)
        assert dp.lower_mass <= base + 1e-12


def test_exhaustive_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(60):
        prob = random_problem(rng)
        res = orderedness_exhaustive(prob)
        assert res.lower_mass == pytest.approx(brute_force_min_lower(prob.Wabs, prob.o, prob.h), abs=1e-12)
        assert sorted(res.permutation) == list(range(prob.h))


def test_upper_triangular_is_perfectly_ordered():
    W = np.triu(np.random.default_rng(2).random((6, 6)) + 0.1)
    W = np.hstack([W, np.ones((6, 2))])
    prob = OrderednessProblem.from_weights(W, 1, 5)
    for solver in (orderedness_exhaustive, orderedness_dp, orderedness_local_search):
        res = solver(prob)
        assert res.O == 1.0
        assert res.permutation == (0, 1, 2, 3, 4)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_all_equal_square(n):
    prob = OrderednessProblem.from_weights(np.ones((n, n)), 1, n - 1)
    assert orderedness_exhaustive(prob).O == pytest.approx(1 - (n - 1) / (2 * n), abs=1e-15)
    assert orderedness_dp(prob).O == orderedness_exhaustive(prob).O
    # ties are broken towards the lexicographically smallest ordering
    assert orderedness_exhaustive(prob).permutation == tuple(range(n - 1))


def test_chain_is_placed_in_topological_order():
    # hidden chain: unit 3 reads 2, 2 reads 1, 1 reads 0 (row = destination)
    o, h = 1, 4
    W = np.zeros((o + h, o + h + 1))
    for a, b in [(3, 2), (2, 1), (1, 0)]:
        W[o + a, o + b] = 1.0 + a
    # relabel so the natural order is not already topological
    scramble = [2, 0, 3, 1]
    W = apply_hidden_permutation(W, scramble, o, h)
    res = orderedness_dp(OrderednessProblem.from_weights(W, o, h))
    P = apply_hidden_permutation(W, res.permutation, o, h)
    assert np.tril(P[o:, o : o + h], -1).sum() == 0.0
    assert res.O == 1.0


def test_no_hidden_units():
    W = np.array([[0.5, 2.0, -1.0], [3.0, 0.2, 1.0]])
    for solver in (orderedness_exhaustive, orderedness_dp, orderedness_local_search):
        res = solver(OrderednessProblem.from_weights(W, 2, 0))
        assert res.permutation == ()
        assert res.lower_mass == 3.0
        assert res.O == pytest.approx(1 - 3.0 / 5.7)
    assert orderedness(W, LayerShape(2, 0, 1, 1), include_inputs=True).O == pytest.approx(1 - 3.0 / 7.7)


def test_zero_matrix_is_ordered():
    res = orderedness(np.zeros((6, 8)), LayerShape(1, 5, 2, 3))
    assert res.O == 1.0 and res.total_mass == 0.0


def test_total_mass_conventions():
    W = np.random.default_rng(5).standard_normal((6, 8))
    shape = LayerShape(1, 5, 2, 3)
    square = orderedness(W, shape)
    full = orderedness(W, shape, include_inputs=True)
    assert square.total_mass == pytest.approx(np.abs(W[:, :6]).sum())
    assert full.total_mass == pytest.approx(np.abs(W).sum())
    assert square.lower_mass == full.lower_mass
    assert full.O > square.O


def test_capacity_errors():
    with pytest.raises(CapacityError):
        orderedness_exhaustive(OrderednessProblem.from_weights(np.ones((11, 12)), 1, 10))
    with pytest.raises(CapacityError):
        orderedness_dp(OrderednessProblem.from_weights(np.ones((26, 27)), 1, 25))


def test_dispatch_by_hidden_count():
    rng = np.random.default_rng(0)
    assert orderedness(rng.random((6, 8)), LayerShape(1, 5, 2, 1)).solver == "Exhaustive"
    assert orderedness(rng.random((11, 13)), LayerShape(1, 10, 2, 1)).solver == "SubsetDP"
    assert orderedness(rng.random((27, 29)), LayerShape(1, 26, 2, 1)).solver == "LocalSearch"


def test_dp_beats_or_matches_local_search_beyond_enumeration():
    rng = np.random.default_rng(3)
    for _ in range(5):
        prob = random_problem(rng, h=13)
        dp = orderedness_dp(prob)
        ls = orderedness_local_search(prob, np.random.default_rng(0), restarts=10)
        assert ls.O <= dp.O + 1e-12


def test_local_search_single_hidden_unit():
    prob = random_problem(np.random.default_rng(0), h=1)
    res = orderedness_local_search(prob)
    assert res.permutation == (0,)
    assert res.O == orderedness_exhaustive(prob).O


def test_local_search_is_deterministic_per_seed():
    prob = random_problem(np.random.default_rng(9), h=12)
    a = orderedness_local_search(prob, np.random.default_rng(4))
    b = orderedness_local_search(prob, np.random.default_rng(4))
    assert a == b


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.integers(0, 6))
def test_reported_minimum_is_below_sampled_permutations(seed, h):
    rng = np.random.default_rng(seed)
    prob = random_problem(rng, h=h)
    res = orderedness_dp(prob)
    S = prob.total_mass()
    for _ in range(10):
        perm = rng.permutation(h)
        P = apply_hidden_permutation(prob.Wabs, perm, prob.o, h)
        assert total_sum(P) == pytest.approx(total_sum(prob.Wabs))
        assert lower_sum(P) / S >= 1 - res.O - 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 1e3), st.booleans())
def test_scale_invariance(seed, scale, negate):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((5, 7))
    shape = LayerShape(1, 4, 2, 1)
    c = -scale if negate else scale
    assert orderedness(c * W, shape).O == pytest.approx(orderedness(W, shape).O, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_relabelling_invariance(seed):
    rng = np.random.default_rng(seed)
    o, h = 2, 5
    W = rng.standard_normal((o + h, o + h + 2))
    shape = LayerShape(o, h, 2, 1)
    relabelled = apply_hidden_permutation(W, rng.permutation(h), o, h)
    assert orderedness(relabelled, shape).O == pytest.approx(orderedness(W, shape).O, abs=1e-12)


def test_full_tril_damp_orders_matrix_without_fixed_lower_mass():
    rng = np.random.default_rng(7)
    W = rng.standard_normal((6, 8))
    W[1:, 0] = 0.0  # hidden rows reading the output column are always lower
    damped = tril_damp(W, 1.0)
    assert orderedness(damped, LayerShape(1, 5, 2, 1)).O == 1.0
