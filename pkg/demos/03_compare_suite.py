# %% [markdown]
# SWAP-only versus SWAP plus teleportation over the bundled benchmarks,
# best of several random initial placements for each.
#
# Run with `python demos/03_compare_suite.py [trials]`.

# %%
import re
import sys
from importlib import resources

import numpy as np

from telemap import EQUAL, IBM, parse, route_circuit, tokyo_map

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 10
tokyo = tokyo_map()
bench = resources.files("telemap") / "benchmarks"

# %%
names, table = [], []
for path in sorted(bench.iterdir(), key=lambda p: p.name):
    if not path.name.endswith(".qasm"):
        continue
    text = path.read_text()
    hint = re.search(r"initial placement[^:]*:\s*([\d,]+)", text)
    initial = tuple(map(int, hint.group(1).split(","))) if hint else None
    circuit = parse(text)
    row = []
    for model in (IBM, EQUAL):
        for strategy in ("swap", "swap+teleport"):
            row.append(route_circuit(circuit, tokyo, model, strategy, trials=trials, initial=initial).best.cost)
    names.append(path.name[:-5])
    table.append(row)

# %% Relative cost is (teleport - swap) / swap, per cost model.
costs = np.array(table, dtype=float)
with np.errstate(divide="ignore", invalid="ignore"):
    rel = np.where(costs[:, [0, 2]] > 0, (costs[:, [1, 3]] - costs[:, [0, 2]]) / costs[:, [0, 2]], 0.0)
print(f"{'benchmark':22s}{'ibm swap':>10s}{'ibm tel':>9s}{'rel':>8s}{'eq swap':>9s}{'eq tel':>8s}{'rel':>8s}")
for name, row, r in zip(names, costs, rel):
    print(f"{name:22s}{row[0]:10g}{row[1]:9g}{r[0]:+8.1%}{row[2]:9g}{row[3]:8g}{r[1]:+8.1%}")
print("mean relative cost (ibm, equal):", np.round(rel.mean(axis=0), 3))
