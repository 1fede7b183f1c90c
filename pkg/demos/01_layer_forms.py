"""Two views of the same layer.

A complete perceptron layer keeps every neuron connected to every other one
and iterates the update T times with the inputs clamped. Splitting W into a
state block and an input block turns the same computation into a weight-tied
recurrent network fed a constant input. This script checks that both
evaluations agree and that hand-written backpropagation matches finite
differences.
"""

import numpy as np

from orderlab import LayerParams, LayerShape, backward, forward, forward_rnn_form

shape = LayerShape(o=1, h=4, i=2, T=3)
rng = np.random.default_rng(0)
params = LayerParams(rng.standard_normal(shape.w_shape), rng.standard_normal(shape.n))
x = rng.random((4, 2))

y, trace = forward(shape, params, x, trace=True)
y_rnn = forward_rnn_form(shape, params, x)
print(f"W is {shape.w_shape[0]}x{shape.w_shape[1]} (rows = destination neuron)")
print("outputs, layer form:", np.round(y[:, 0], 6))
print("outputs, RNN form:  ", np.round(y_rnn[:, 0], 6))
print(f"largest disagreement: {np.max(np.abs(y - y_rnn)):.1e}")

# Gradient of sum(y) with respect to one weight, two ways.
g = np.ones_like(y)
dW, dv, _ = backward(shape, params, trace, g)
r, c, eps = 2, 5, 1e-6
bumped = params.copy()
bumped.W[r, c] += eps
fd = (forward(shape, bumped, x)[0].sum() - y.sum()) / eps
print(f"dW[{r},{c}]: backprop {dW[r, c]:.8f}, forward difference {fd:.8f}")
