"""Initialisation and pruning studies, ten seeds per cell.

Prints mean dO for each (method, task) cell. In the initialisation study the
untrained column shows O itself. Takes a few minutes on one core; pass a
smaller seed count (e.g. ``python 05_tables.py 3``) for a quick look.
"""

import sys
from pathlib import Path

from orderlab import experiments as ex

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
out = Path(__file__).parent / "out"
for name, run in (("initialisation", ex.run_table1a), ("pruning", ex.run_table1b)):
    res = run(range(n))
    vals, rows, cols = ex.table_grid(res)
    print(f"\n{name} study, {n} seeds")
    print(f"{'':18}" + "".join(f"{c:>15}" for c in cols))
    for r, row in zip(rows, vals):
        print(f"{r:18}" + "".join(f"{v:15.3f}" for v in row))
    ex.write_outputs(res, out / res.kind)
