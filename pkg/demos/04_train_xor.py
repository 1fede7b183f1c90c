"""Train one layer on XOR with dynamic TopK pruning and look at its weights.

Writes demos/out/xor_weights.svg: the learned matrix on the left and the same
matrix with hidden units placed in the best ordering on the right.
"""

from pathlib import Path

from orderlab import TrainConfig, train_clp
from orderlab.render import weights_svg

cfg = TrainConfig(task="xor", prune="dyntopk:0.5", seed=0)
rec = train_clp(cfg)
for step in (0, 99, 249, 499, 749, 999):
    print(f"step {step + 1:4d}  mse {rec.losses[step]:.5f}")
print(f"orderedness {rec.O_pre:.3f} -> {rec.O_post:.3f} (dO {rec.delta_O:+.3f})")
print(f"best hidden ordering after training: {rec.perm_post}")

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
(out / "xor_weights.svg").write_text(weights_svg(rec.params.effective_W(), cfg.resolved().shape, "XOR, DynTopK(0.5)"))
print(f"wrote {out / 'xor_weights.svg'}")
