"""Orderedness after training against pruning strength, per operator.

Also runs the untrained control so the mechanical effect of each operator can
be told apart from what training adds. Writes an SVG with one curve per
operator and prints the rank correlation of each curve.
"""

from pathlib import Path

from orderlab import experiments as ex

res = ex.run_sparsity_sweep("xor", seeds=range(10))
for label, pts in res.extra["curves"].items():
    rho = ex.spearman(pts)
    print(f"{label:<26} spearman {rho:+.2f}   " + "  ".join(f"{x:.1f}:{y:.3f}" for x, y in pts))
ex.write_outputs(res, Path(__file__).parent / "out" / "sparsity")
