"""Mean dO on XOR across hidden-unit counts and iteration counts.

Look at the T=2 and T=3 columns: two iterations tend to stand out. The full
grid is 72 cells x 10 seeds and takes a few minutes.
"""

from pathlib import Path

from orderlab import experiments as ex

res = ex.run_hi_grid("xor", range(2, 11), range(1, 9), range(10))
grid = res.extra["grid"]
print("h \\ T " + "".join(f"{t:>8}" for t in res.extra["T"]))
for h, row in zip(res.extra["h"], grid):
    print(f"{h:5} " + "".join(f"{v:8.3f}" for v in row))
spikes = ex.spike_rows(res)
print(f"T=2 above T=3 for {sum(spikes)} of {len(spikes)} hidden sizes")
ex.write_outputs(res, Path(__file__).parent / "out" / "higrid")
