from dataclasses import replace

import numpy as np
import pytest

from telemap.arch import line_map, tokyo_map
from telemap.ir import Circuit, Gate
from telemap.lowering import (ProgramBuilder, bridge_gates, eliminate_dead_channels,
                              establish_channel, lower_swap, lower_teleport)
from telemap.qasm import parse
from telemap.router import IBM, route_circuit
from telemap.verify import simulate_branching

from oracles import cnot_matrix, unitary

BELL = np.array([1, 0, 0, 1]) / np.sqrt(2)
REGS = (("c0", 1), ("c1", 1))


def _teleport_circuit():
    return Circuit(3, tuple(lower_teleport(0, 1, 2, ("c0", 0), ("c1", 1))), REGS)


def test_establish_gates():
    assert establish_channel(12, 17) == [Gate("h", (12,)), Gate("cx", (12, 17))]
    assert establish_channel(17, 12) == establish_channel(12, 17)
    with pytest.raises(ValueError):
        establish_channel(2, 17, tokyo_map())


def test_establish_makes_bell_state():
    (branch,) = simulate_branching(Circuit(2, tuple(establish_channel(0, 1))))
    assert np.allclose(branch.state, BELL, atol=1e-12)


def test_bell_measurements_are_correlated():
    gates = establish_channel(0, 1) + [Gate("measure", (0,), clbit=0), Gate("measure", (1,), clbit=1)]
    branches = simulate_branching(Circuit(2, tuple(gates), (("c", 2),)))
    assert sorted(b.clbits for b in branches) == [(0, 0), (1, 1)]
    assert all(abs(b.probability - 0.5) < 1e-12 for b in branches)


def test_swap_lowering():
    gates = lower_swap(3, 4)
    assert [g.name for g in gates] == ["cx"] * 3
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(unitary(2, lower_swap(0, 1)), swap)
    (branch,) = simulate_branching(Circuit(2, tuple(lower_swap(0, 1))), np.eye(4)[2])
    assert np.allclose(branch.state, np.eye(4)[1])


def test_teleport_gate_census():
    gates = lower_teleport(0, 1, 2, ("c0", 0), ("c1", 1))
    names = [g.name for g in gates]
    assert names.count("cx") == 2 and names.count("h") == 2 and names.count("measure") == 2
    corrections = [g for g in gates if g.condition is not None and g.qubits == (2,)]
    resets = [g for g in gates if g.condition is not None and g.qubits != (2,)]
    assert [g.name for g in corrections] == ["x", "z"]
    assert len(resets) == 2 and all(g.name == "x" for g in resets)


def test_teleport_argument_checks():
    with pytest.raises(ValueError):
        lower_teleport(0, 0, 2, ("a", 0), ("b", 1))
    with pytest.raises(ValueError):
        lower_teleport(0, 2, 3, ("a", 0), ("b", 1), line_map(4))


def _run_teleport(source):
    initial = np.kron(source, BELL)
    return simulate_branching(_teleport_circuit(), initial)


def test_teleport_basis_one():
    branches = _run_teleport(np.array([0, 1]))
    assert len(branches) == 4
    for b in branches:
        psi = b.state.reshape(2, 2, 2)
        assert np.isclose(np.sum(np.abs(psi[:, :, 1]) ** 2), 1)
        assert abs(b.probability - 0.25) < 1e-12


def test_teleport_plus_state_and_bell_pair():
    plus = np.array([1, 1]) / np.sqrt(2)
    expected = np.kron(BELL, plus)
    for b in _run_teleport(plus):
        overlap = abs(np.vdot(expected, b.state))
        assert overlap > 1 - 1e-12


def test_bridge_patterns():
    assert bridge_gates([0, 1]) == [Gate("cx", (0, 1))]
    assert bridge_gates([0, 1, 2]) == [Gate("cx", (0, 1)), Gate("cx", (1, 2))] * 2
    for path in ([0, 1], [0, 1, 2], [0, 1, 2, 3]):
        gates = bridge_gates(path)
        assert len(gates) == 3 * 2 ** (len(path) - 2) - 2
        assert np.allclose(unitary(4, gates), cnot_matrix(4, path[0], path[-1]), atol=1e-12)
    with pytest.raises(ValueError):
        bridge_gates([0])


def _tags(program, kind):
    return [k for k, t in enumerate(program.tags) if t[0] == kind]


def test_zero_teleports_drop_every_establishment():
    c = parse("qreg q[3]; cx q[0],q[2]; cx q[1],q[2];")
    placement = (0, 2, 4)
    raw = route_circuit(c, line_map(7), IBM, "swap", initial=placement, eliminate=False).best.program
    assert _tags(raw, "establish")
    clean = eliminate_dead_channels(raw)
    assert not _tags(clean, "establish")
    expected = [g for g, t in zip(raw.gates, raw.tags) if t[0] != "establish"]
    assert list(clean.gates) == expected
    swaps = len(raw.moves)
    assert clean.circuit.count("cx") == 3 * swaps + c.count("cx")


def test_used_channels_are_kept():
    c = parse(FIXTURE)
    placement = tuple(q for q in range(20) if q not in (8, 12))
    raw = route_circuit(c, tokyo_map(), IBM, "swap+teleport", initial=placement, eliminate=False).best.program
    assert raw.consumed == {0}
    idents = {t[1] for t in raw.tags if t[0] == "establish"}
    every_used = replace(raw, consumed=frozenset(idents))
    assert eliminate_dead_channels(every_used) == every_used
    clean = eliminate_dead_channels(raw)
    assert eliminate_dead_channels(clean) == clean
    # only the re-entangling pair of the teleport (never used again) goes
    assert len(raw.gates) - len(clean.gates) == 2


def test_one_of_two_channels_removed():
    # Line 0-1-...-5 with data on Q0 and Q3: channels (1,2) and (4,5); only (1,2) is teleported through.
    c = parse("qreg q[2]; cx q[0],q[1];")
    trial = route_circuit(c, line_map(6), IBM, "swap+teleport", initial=(0, 3), eliminate=False).best
    program = trial.program
    assert trial.teleports == 1 and program.consumed == {0}
    clean = eliminate_dead_channels(program)
    initial_pairs = {0, 1}
    kept = {t[1] for t in clean.tags if t[0] == "establish"} & initial_pairs
    assert kept == {0}
    removed = [g for g, t in zip(program.gates, program.tags) if t == ("establish", 1)]
    assert removed == establish_channel(4, 5)


def test_cnot_census_from_move_log():
    c = parse(FIXTURE)
    placement = tuple(q for q in range(20) if q not in (8, 12))
    trial = route_circuit(c, tokyo_map(), IBM, "swap+teleport", initial=placement).best
    program = trial.program
    establishments = len(_tags(program, "establish")) // 2
    # each teleport's re-entangling pair is tagged as an establishment
    assert program.circuit.count("cx") == (3 * trial.swaps + trial.teleports + establishments
                                           + c.count("cx"))


def test_fresh_bits_skip_taken_names():
    b = ProgramBuilder(3, [("c0", 2), ("m", 1)])
    assert b.fresh_bit() == ("c1", 3)
    assert b.fresh_bit() == ("c2", 4)
    assert b.circuit().cregs == (("c0", 2), ("m", 1), ("c1", 1), ("c2", 1))


FIXTURE = "qreg q[18]; h q[3]; cx q[3],q[14]; t q[14];"
