"""Pruning operators and their dynamic schedules.

The dynamic variants start as a no-op and ease towards the target coefficient
along sin^4 of training progress, so most of the pruning happens late.
"""

import numpy as np

from orderlab.pruning import dyn_topk_fraction, dyn_tril_fraction, topk_mask, tril_damp

print(" x     kept fraction (k=0.5)   damping (f=0.8)")
for x in np.linspace(0, 1, 11):
    print(f"{x:4.1f}   {dyn_topk_fraction(0.5, x):.4f}                  {dyn_tril_fraction(0.8, x):.4f}")

W = np.random.default_rng(2).standard_normal((4, 6))
print("\nTopK(0.5) keeps these entries:")
print(topk_mask(W, 0.5).astype(int))

damped = W.copy()
for _ in range(5):
    damped = tril_damp(damped, 0.8)
print("\nfive TrilDamp(0.8) applications shrink the strict lower triangle by 0.2^5:")
print(np.round(damped[:, :4] / np.where(W[:, :4] == 0, 1, W[:, :4]), 5))
