# %% [markdown]
# Routing a three-qubit circuit onto the 20-qubit Tokyo device.
#
# Run with `python demos/01_route_example.py`.

# %%
from telemap import IBM, check_coupling, check_equivalence, emit, parse, route_circuit, tokyo_map
from telemap.ir import partition_layers

source = """
OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
h q[1]; x q[0];
cx q[1],q[2]; cx q[0],q[2]; cx q[1],q[0];
t q[0];
"""
circuit = parse(source)
tokyo = tokyo_map()

# %% Layers of gates on disjoint qubits drive the router.
for k, layer in enumerate(partition_layers(circuit)):
    print(k, [(g.name, g.qubits) for g in layer.gates])

# %% Put q0, q1, q2 on Q0, Q1, Q2. Q0 and Q2 are not coupled, so one SWAP is needed.
print("d(Q0, Q2) =", tokyo.distance(0, 2))
trial = route_circuit(circuit, tokyo, IBM, "swap", initial=(0, 1, 2)).best
print("moves:", trial.program.moves, "cost:", trial.cost)
print(emit(trial.program.circuit))

# %% Bridging keeps the placement fixed and pays with extra CNOTs instead.
bridged = route_circuit(circuit, tokyo, IBM, "bridge", initial=(0, 1, 2)).best
print("bridge moves:", bridged.program.moves, "cost:", bridged.cost)

# %% Both programs respect the coupling map and reproduce the source circuit.
for t in (trial, bridged):
    print(check_coupling(t.program, tokyo).message, "|", check_equivalence(circuit, t.program).message)
