import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from telemap.ir import SINGLE_QUBIT_GATES, Circuit, Gate
from telemap.lowering import lower_teleport
from telemap.qasm import HEADER, QasmError, emit, parse

EXAMPLE = HEADER + "qreg q[3]; h q[1]; x q[0]; cx q[1],q[2]; cx q[0],q[2]; cx q[1],q[0]; t q[0];"


def test_empty_program():
    assert parse("qreg q[1];") == Circuit(1)


def test_example_circuit_has_six_gates():
    c = parse(EXAMPLE)
    assert c.num_qubits == 3
    assert [g.name for g in c.gates] == ["h", "x", "cx", "cx", "cx", "t"]
    assert c.gates[2].qubits == (1, 2)
    assert c.gates[4].qubits == (1, 0)


def test_measure_then_conditioned_x():
    c = parse("qreg q[2]; creg c[1]; measure q[0] -> c[0]; if (c==1) x q[1];")
    assert c.gates == (Gate("measure", (0,), clbit=0), Gate("x", (1,), condition=("c", 1)))


def test_emit_empty():
    assert emit(Circuit(1)) == HEADER + "qreg q[1];\n"


def test_round_trip_example():
    c = parse(EXAMPLE)
    assert parse(emit(c)) == c


def test_teleport_gadget_text():
    body = lower_teleport(0, 1, 2, ("c0", 0), ("c1", 1))
    text = emit(Circuit(3, body, (("c0", 1), ("c1", 1))))
    lines = text.splitlines()
    assert sum(line.startswith("measure") for line in lines) == 2
    assert sum(line.startswith("if (") for line in lines) == 4
    corrections = [line for line in lines if line.startswith("if (") and "q[2]" in line]
    assert len(corrections) == 2


def test_parameter_expressions():
    c = parse("qreg q[1]; rz(pi/2) q[0]; u(-pi, 2*pi/4, 1.5e-1) q[0]; rx(-(1+2)^2) q[0]; ry(cos(0)) q[0];")
    assert c.gates[0].params == (math.pi / 2,)
    assert c.gates[1].params == (-math.pi, math.pi / 2, 0.15)
    assert c.gates[2].params == (-9.0,)
    assert c.gates[3].params == (1.0,)


def test_register_broadcast():
    c = parse("qreg q[3]; creg c[3]; h q; measure q -> c;")
    assert [g.name for g in c.gates] == ["h"] * 3 + ["measure"] * 3
    assert [g.clbit for g in c.gates[3:]] == [0, 1, 2]


def test_cx_broadcast_onto_itself_is_rejected():
    with pytest.raises(QasmError, match="distinct"):
        parse("qreg q[3]; cx q[0],q;")


def test_flat_clbit_offsets():
    c = parse("qreg q[1]; creg a[2]; creg b[3]; measure q[0] -> b[1];")
    assert c.gates[0].clbit == 3


def test_comments_and_whitespace():
    c = parse("// leading comment\nOPENQASM 2.0;\n  qreg q[2];  // trailing\n\ncx q[0] , q[1] ;\n")
    assert c.gates == (Gate("cx", (0, 1)),)


@pytest.mark.parametrize("text, line, col", [
    ("qreg q[2];\ncx q[0],q[2];", 2, 11),
    ("qreg q[1];\ngate foo a { x a; }", 2, 1),
    ('include "other.inc";', 1, 9),
    ("qreg q[2]; qreg r[2];", 1, 12),
    ("qreg q[1]; creg c[1]; if (c==1) measure q[0] -> c[0];", 1, 33),
    ("qreg q[1]; ccx q[0];", 1, 12),
    ("qreg q[2]; cx q[0],q[0];", 1, 12),
    ("qreg q[1]; rz q[0];", 1, 12),
    ("qreg q[1]; h q[0]", 1, 18),
    ("qreg q[1]; h q[0]; $", 1, 20),
    ("qreg q[1]; opaque foo q;", 1, 12),
    ("h q[0];", 1, 3),
    ("qreg q[1]; creg c[1]; measure q[0] -> d[0];", 1, 39),
])
def test_rejections_carry_position(text, line, col):
    with pytest.raises(QasmError) as info:
        parse(text)
    assert (info.value.line, info.value.col) == (line, col)


def test_missing_qreg():
    with pytest.raises(QasmError):
        parse("OPENQASM 2.0;")


_names = sorted(SINGLE_QUBIT_GATES)
_angles = st.floats(min_value=-10, max_value=10, allow_nan=False)


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 5))
    cregs = draw(st.lists(st.integers(1, 3), max_size=3))
    regs = tuple((f"c{i}", s) for i, s in enumerate(cregs))
    nbits = sum(cregs)
    gates = []
    for _ in range(draw(st.integers(0, 25))):
        kind = draw(st.sampled_from(["1q", "cx", "measure", "reset", "barrier"]))
        cond = None
        if regs and kind in ("1q", "cx", "reset") and draw(st.booleans()):
            name, size = draw(st.sampled_from(regs))
            cond = (name, draw(st.integers(0, 2 ** size - 1)))
        if kind == "1q":
            name = draw(st.sampled_from(_names))
            params = tuple(draw(_angles) for _ in range(SINGLE_QUBIT_GATES[name]))
            gates.append(Gate(name, (draw(st.integers(0, n - 1)),), params, condition=cond))
        elif kind == "cx" and n > 1:
            a, b = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            gates.append(Gate("cx", (a, b), condition=cond))
        elif kind == "measure" and nbits:
            gates.append(Gate("measure", (draw(st.integers(0, n - 1)),), clbit=draw(st.integers(0, nbits - 1))))
        elif kind == "reset":
            gates.append(Gate("reset", (draw(st.integers(0, n - 1)),), condition=cond))
        elif kind == "barrier":
            qs = draw(st.lists(st.integers(0, n - 1), min_size=1, unique=True))
            gates.append(Gate("barrier", tuple(qs)))
    return Circuit(n, tuple(gates), regs)


@settings(max_examples=150, deadline=None)
@given(circuits())
def test_round_trip_property(c):
    assert parse(emit(c)) == c
    assert emit(parse(emit(c))) == emit(c)
