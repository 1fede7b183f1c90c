"""How feedforward is a weight matrix?

Orderedness looks for the ordering of hidden units that pushes as much
absolute weight as possible above the diagonal, then reports the fraction
that stays. An upper-triangular matrix scores 1. A random Gaussian matrix
lands well below that, and shuffling the hidden units never changes the score.
"""

import numpy as np

from orderlab import LayerShape, orderedness
from orderlab.orderedness import (
    OrderednessProblem,
    apply_hidden_permutation,
    orderedness_dp,
    orderedness_exhaustive,
    orderedness_local_search,
)

shape = LayerShape(o=1, h=5, i=2, T=3)
rng = np.random.default_rng(1)

upper = np.triu(rng.random(shape.w_shape))
scrambled = apply_hidden_permutation(upper, [3, 0, 4, 1, 2], shape.o, shape.h)
res = orderedness(scrambled, shape)
print(f"scrambled upper-triangular: O = {res.O:.4f}, recovered order {res.permutation}")

W = rng.standard_normal(shape.w_shape)
res = orderedness(W, shape)
print(f"random normal: O = {res.O:.4f} (L = {res.lower_mass:.3f}, S = {res.total_mass:.3f})")
print(f"  same matrix, input columns counted in S: O = {orderedness(W, shape, include_inputs=True).O:.4f}")

print("\nthe three solvers on a 9-hidden-unit instance:")
prob = OrderednessProblem.from_weights(rng.standard_normal((10, 12)), 1, 9)
for solver in (orderedness_exhaustive, orderedness_dp, orderedness_local_search):
    r = solver(prob)
    print(f"  {r.solver:<11} O = {r.O:.6f} order {r.permutation}")
