"""Orderedness of a weight matrix.

``O(W) = 1 - min_pi L(pi(|W|)) / S(|W|)`` where ``pi`` reorders the hidden
units only, ``L`` sums the strict lower triangle of the leading square block
and ``S`` sums every entry. Outputs stay in front and inputs stay at the end,
so the only part of ``L`` that depends on ``pi`` is the hidden-hidden block;
the rest is a constant offset. Minimising the hidden-block lower mass is a
weighted minimum feedback arc set (linear ordering) problem.

Three solvers are provided: exhaustive enumeration (small ``h``), subset
dynamic programming (exact up to ``h = 24``) and multi-start insertion local
search (any ``h``, upper bound on the minimum).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .numerics import ROLE_SEARCH, sub_rng

MAX_EXHAUSTIVE_H = 9
MAX_DP_H = 24
# hidden-unit counts up to this are dispatched to enumeration by orderedness()
AUTO_EXHAUSTIVE_H = 7
_REL_TOL = 1e-12


class CapacityError(ValueError):
    pass


class PermutationError(ValueError):
    pass


@dataclass(frozen=True)
class OrderednessProblem:
    Wabs: np.ndarray
    o: int
    h: int
    i: int
    include_inputs: bool = False

    @classmethod
    def from_weights(
        cls, W: np.ndarray, o: int, h: int, include_inputs: bool = False
    ) -> "OrderednessProblem":
        W = np.asarray(W, dtype=np.float64)
        n = o + h
        if W.ndim != 2 or W.shape[0] != n or W.shape[1] < n:
            raise ValueError(f"weights of shape {W.shape} do not fit o={o}, h={h}")
        return cls(np.abs(W), o, h, W.shape[1] - n, include_inputs)

    def total_mass(self) -> float:
        if self.include_inputs:
            return total_sum(self.Wabs)
        n = self.o + self.h
        return total_sum(self.Wabs[:, :n])

    @property
    def hidden_block(self) -> np.ndarray:
        n = self.o + self.h
        return self.Wabs[self.o : n, self.o : n]

    def fixed_lower(self) -> float:
        """Lower-triangle mass that no hidden reordering can move."""
        return lower_sum(self.Wabs) - _block_cost(self.hidden_block, np.arange(self.h))


@dataclass(frozen=True)
class OrderednessResult:
    O: float
    permutation: tuple[int, ...]
    lower_mass: float
    total_mass: float
    solver: str

    def to_dict(self) -> dict:
        return {
            "O": self.O,
            "L": self.lower_mass,
            "S": self.total_mass,
            "solver": self.solver,
            "permutation": list(self.permutation),
        }


def lower_sum(W: np.ndarray) -> float:
    """Sum of the strict lower triangle of the leading square block."""
    n = min(W.shape)
    return float(np.tril(W[:n, :n], -1).sum())


def total_sum(W: np.ndarray) -> float:
    return float(np.sum(W))


def _check_perm(perm, h: int) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64).reshape(-1)
    if perm.shape[0] != h or not np.array_equal(np.sort(perm), np.arange(h)):
        raise PermutationError(f"{perm.tolist()} is not a permutation of 0..{h - 1}")
    return perm


def apply_hidden_permutation(W: np.ndarray, perm, o: int, h: int) -> np.ndarray:
    """Reorder hidden rows and columns together.

    ``perm[k]`` is the (0-based) hidden unit placed at hidden position ``k``.
    Output rows/columns and input columns keep their positions.
    """
    perm = _check_perm(perm, h)
    n = o + h
    idx = np.concatenate([np.arange(o), o + perm])
    cols = np.concatenate([idx, np.arange(n, W.shape[1])])
    return W[np.ix_(idx, cols)]


def inverse_permutation(perm) -> np.ndarray:
    perm = np.asarray(perm, dtype=np.int64)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.shape[0])
    return inv


def _block_cost(H: np.ndarray, order) -> float:
    """Lower mass of the hidden block when units are laid out in ``order``."""
    order = np.asarray(order, dtype=np.int64)
    return float(np.tril(H[np.ix_(order, order)], -1).sum())


def _result(prob: OrderednessProblem, perm, solver: str) -> OrderednessResult:
    permuted = apply_hidden_permutation(prob.Wabs, perm, prob.o, prob.h)
    L = lower_sum(permuted)
    S = prob.total_mass()
    O = 1.0 if S == 0.0 else 1.0 - L / S
    return OrderednessResult(O, tuple(int(p) for p in perm), L, S, solver)


def _tol(H: np.ndarray) -> float:
    return _REL_TOL * max(1.0, float(H.sum()))


@lru_cache(maxsize=None)
def _all_permutations(h: int) -> np.ndarray:
    perms = np.array(list(itertools.permutations(range(h))), dtype=np.int64)
    perms.setflags(write=False)
    return perms


def orderedness_exhaustive(prob: OrderednessProblem) -> OrderednessResult:
    """Enumerate all ``h!`` hidden orderings."""
    h = prob.h
    if h > MAX_EXHAUSTIVE_H:
        raise CapacityError(
            f"exhaustive search is limited to h <= {MAX_EXHAUSTIVE_H} (got {h}); use orderedness_dp"
        )
    if h == 0:
        return _result(prob, [], "Exhaustive")
    H = prob.hidden_block
    perms = _all_permutations(h)
    costs = np.zeros(perms.shape[0])
    for later in range(h):
        for earlier in range(later):
            costs += H[perms[:, later], perms[:, earlier]]
    # itertools yields lexicographic order, so the first near-minimal one is the lex-smallest
    best = int(np.flatnonzero(costs <= costs.min() + _tol(H))[0])
    return _result(prob, perms[best], "Exhaustive")


@numba.njit(cache=True)
def _dp_table(H):
    h = H.shape[0]
    full = (1 << h) - 1
    best = np.empty(full + 1)
    best[full] = 0.0
    row = np.empty(h)
    for S in range(full - 1, -1, -1):
        # row[u] = mass from already placed units S into u
        for u in range(h):
            acc = 0.0
            for p in range(h):
                if S & (1 << p):
                    acc += H[u, p]
            row[u] = acc
        m = np.inf
        for u in range(h):
            if not S & (1 << u):
                c = row[u] + best[S | (1 << u)]
                if c < m:
                    m = c
        best[S] = m
    return best


def orderedness_dp(prob: OrderednessProblem) -> OrderednessResult:
    """Exact optimum by dynamic programming over subsets of placed hidden units.

    ``best[S]`` is the least lower mass still to be paid when the units in ``S``
    occupy the first ``|S|`` hidden positions. Appending unit ``u`` after ``S``
    adds ``sum(H[u, p] for p in S)``: ``u`` is the destination row and every
    placed ``p`` is an earlier column.
    """
    h = prob.h
    if h > MAX_DP_H:
        raise CapacityError(
            f"subset DP is limited to h <= {MAX_DP_H} (got {h}); use orderedness_local_search"
        )
    if h == 0:
        return _result(prob, [], "SubsetDP")
    H = np.ascontiguousarray(prob.hidden_block)
    best = _dp_table(H)
    tol = _tol(H)
    S, order = 0, []
    for _ in range(h):
        placed = [p for p in range(h) if S >> p & 1]
        for u in range(h):
            if S >> u & 1:
                continue
            c = float(H[u, placed].sum()) + best[S | 1 << u]
            if c <= best[S] + tol:
                order.append(u)
                S |= 1 << u
                break
    return _result(prob, order, "SubsetDP")


def _insertion_descent(H: np.ndarray, order: np.ndarray, tol: float) -> np.ndarray:
    """Best-improvement relocation of single units until no move helps."""
    D = H - H.T
    h = order.shape[0]
    while True:
        best_delta, best_move = -tol, None
        for i in range(h):
            u = order[i]
            gains = D[u, order]
            # moving u right to j passes order[i+1..j]; left to j passes order[j..i-1]
            right = np.cumsum(gains[i + 1 :])
            left = -np.cumsum(gains[:i][::-1])
            if right.size:
                j = int(np.argmin(right))
                if right[j] < best_delta:
                    best_delta, best_move = right[j], (i, i + 1 + j)
            if left.size:
                j = int(np.argmin(left))
                if left[j] < best_delta:
                    best_delta, best_move = left[j], (i, i - 1 - j)
        if best_move is None:
            return order
        i, j = best_move
        u = order[i]
        order = np.insert(np.delete(order, i), j, u)


def orderedness_local_search(
    prob: OrderednessProblem,
    rng: np.random.Generator | None = None,
    restarts: int = 20,
) -> OrderednessResult:
    """Multi-start insertion local search.

    The first start is the current labelling, the rest are uniform random
    orderings. The reported orderedness never exceeds the exact optimum.
    """
    h = prob.h
    if h == 0:
        return _result(prob, (), "LocalSearch")
    if rng is None:
        rng = sub_rng(0, ROLE_SEARCH)
    H = prob.hidden_block
    tol = _tol(H)
    best_cost, best_order = np.inf, None
    for r in range(max(1, restarts)):
        start = np.arange(h) if r == 0 else rng.permutation(h)
        order = _insertion_descent(H, start, tol)
        cost = _block_cost(H, order)
        if cost < best_cost - tol or (
            cost <= best_cost + tol and tuple(order) < tuple(best_order)
        ):
            best_cost, best_order = min(cost, best_cost), order
    return _result(prob, best_order, "LocalSearch")


def orderedness(
    W: np.ndarray,
    shape,
    rng: np.random.Generator | None = None,
    include_inputs: bool = False,
) -> OrderednessResult:
    """Orderedness of ``W`` for a layer ``shape``, picking a solver by ``h``."""
    prob = OrderednessProblem.from_weights(W, shape.o, shape.h, include_inputs)
    if prob.h <= AUTO_EXHAUSTIVE_H:
        return orderedness_exhaustive(prob)
    if prob.h <= MAX_DP_H:
        return orderedness_dp(prob)
    return orderedness_local_search(prob, rng)
