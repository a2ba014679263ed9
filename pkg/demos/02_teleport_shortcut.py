# %% [markdown]
# A Bell pair parked on two spare qubits can move a data qubit further
# than one SWAP can, and more cheaply than two.
#
# Run with `python demos/02_teleport_shortcut.py`.

# %%
import numpy as np

from telemap import IBM, Channel, MappingState, route_layer, tokyo_map, virtual_edges
from telemap.ir import Circuit
from telemap.lowering import lower_teleport
from telemap.verify import simulate_branching

tokyo = tokyo_map()

# %% Eighteen data qubits fill the device except Q2 and Q17, which hold a Bell pair.
# Logical 0 sits on Q3 and logical 1 on Q16; they need a CNOT.
others = [q for q in range(20) if q not in (3, 16, 2, 17)]
state = MappingState(20, (3, 16, *others), (Channel((2, 17), 0),))
print("hop distance Q3-Q16:", tokyo.distance(3, 16))
print("teleport options:", [(v.source, v.dest) for v in virtual_edges(tokyo, state.channels)])

# %% Cheapest routing with and without the teleport option.
for allowed in (False, True):
    moves, after = route_layer(state, [(0, 1)], None, tokyo, IBM, teleport=allowed)
    print(f"teleport={allowed}: {[(m.kind, m.qubits) for m in moves]} cost={sum(m.cost for m in moves):g}")
print("new channel:", [c.ends for c in after.channels])

# %% The gadget itself on three qubits: source Q0, channel (Q1, Q2).
gadget = lower_teleport(0, 1, 2, ("c0", 0), ("c1", 1))
for g in gadget:
    print(g.name, g.qubits, g.condition or "")

# %% Simulate it on a random source state: every outcome lands the state on Q2.
rng = np.random.default_rng(1)
psi = rng.normal(size=2) + 1j * rng.normal(size=2)
psi /= np.linalg.norm(psi)
bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
branches = simulate_branching(Circuit(3, tuple(gadget), (("c0", 1), ("c1", 1))), np.kron(psi, bell))
for b in branches:
    far = b.state.reshape(4, 2)
    fidelity = np.real(psi.conj() @ (far.T @ far.conj()) @ psi)
    print("outcome", b.clbits, "p =", round(b.probability, 3), "fidelity =", round(fidelity, 12))
