"""Circuit intermediate representation and ASAP layering."""

from __future__ import annotations

from dataclasses import dataclass, field

SINGLE_QUBIT_GATES = {
    "h": 0, "x": 0, "z": 0, "t": 0, "tdg": 0, "s": 0, "sdg": 0,
    "rz": 1, "rx": 1, "ry": 1, "u": 3,
}
"""Supported one-qubit gate names mapped to their parameter count."""


@dataclass(frozen=True)
class Gate:
    """One instruction of a circuit.

    ``qubits`` holds qubit indices (logical or physical, depending on the
    circuit). ``clbit`` is the flat classical-bit index written by a
    ``measure``. ``condition`` is ``(register_name, value)`` for gates
    guarded by ``if (reg==value)``.
    """

    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None
    condition: tuple[str, int] | None = None

    def __post_init__(self):
        if self.name == "cx":
            if len(self.qubits) != 2 or self.qubits[0] == self.qubits[1]:
                raise ValueError(f"cx needs two distinct qubits, got {self.qubits}")
        elif self.name in SINGLE_QUBIT_GATES or self.name in ("measure", "reset"):
            if len(self.qubits) != 1:
                raise ValueError(f"{self.name} acts on exactly one qubit")
            if self.name in SINGLE_QUBIT_GATES and len(self.params) != SINGLE_QUBIT_GATES[self.name]:
                raise ValueError(f"{self.name} takes {SINGLE_QUBIT_GATES[self.name]} parameters")
        elif self.name == "barrier":
            if not self.qubits:
                raise ValueError("barrier needs at least one qubit")
        else:
            raise ValueError(f"unsupported gate {self.name!r}")
        if self.name == "measure" and self.clbit is None:
            raise ValueError("measure needs a classical bit")
        if self.condition is not None and self.name in ("measure", "barrier"):
            raise ValueError(f"{self.name} cannot be classically conditioned")

    @property
    def is_cnot(self) -> bool:
        return self.name == "cx"

    def remap(self, mapping) -> Gate:
        """Return a copy with every qubit index ``q`` replaced by ``mapping[q]``."""
        return Gate(self.name, tuple(mapping[q] for q in self.qubits), self.params,
                    self.clbit, self.condition)


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list over ``num_qubits`` qubits and named classical registers."""

    num_qubits: int
    gates: tuple[Gate, ...] = ()
    cregs: tuple[tuple[str, int], ...] = ()
    qreg_name: str = "q"

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "cregs", tuple((str(n), int(s)) for n, s in self.cregs))
        names = [n for n, _ in self.cregs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate classical register name")
        nbits = self.num_clbits
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.num_qubits:
                    raise ValueError(f"qubit {q} out of range in {g}")
            if g.clbit is not None and not 0 <= g.clbit < nbits:
                raise ValueError(f"classical bit {g.clbit} out of range in {g}")
            if g.condition is not None and g.condition[0] not in names:
                raise ValueError(f"unknown classical register {g.condition[0]!r}")

    @property
    def num_clbits(self) -> int:
        return sum(size for _, size in self.cregs)

    def creg_offset(self, name: str) -> int:
        offset = 0
        for reg, size in self.cregs:
            if reg == name:
                return offset
            offset += size
        raise KeyError(name)

    def creg_size(self, name: str) -> int:
        return dict(self.cregs)[name]

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def __len__(self) -> int:
        return len(self.gates)


@dataclass(frozen=True)
class Layer:
    """Gates acting on pairwise disjoint qubits, with their positions in the source circuit."""

    gates: tuple[Gate, ...]
    indices: tuple[int, ...]
    qubits: frozenset[int] = field(default=frozenset())

    @property
    def cnots(self) -> list[Gate]:
        return [g for g in self.gates if g.is_cnot]


def _clbits_read(circuit: Circuit, gate: Gate) -> range:
    if gate.condition is None:
        return range(0)
    off = circuit.creg_offset(gate.condition[0])
    return range(off, off + circuit.creg_size(gate.condition[0]))


def partition_layers(circuit: Circuit) -> list[Layer]:
    """Greedy as-soon-as-possible layering.

    Each gate goes to the first layer after the last layer touching any of its
    qubits. Classical bits are tracked the same way, so a conditioned gate never
    lands before the measurement that writes its register. A barrier gets a
    layer of its own after everything placed so far, and nothing later may move
    in front of it.
    """
    qfront = [0] * circuit.num_qubits
    cfront = [0] * circuit.num_clbits
    floor = 0
    slots: list[list[int]] = []
    for idx, g in enumerate(circuit.gates):
        if g.name == "barrier":
            level = len(slots)
            slots.append([idx])
            floor = level + 1
            continue
        bits = list(_clbits_read(circuit, g))
        if g.clbit is not None:
            bits.append(g.clbit)
        level = max([floor] + [qfront[q] for q in g.qubits] + [cfront[b] for b in bits])
        while len(slots) <= level:
            slots.append([])
        slots[level].append(idx)
        for q in g.qubits:
            qfront[q] = level + 1
        for b in bits:
            cfront[b] = level + 1
    layers = []
    for slot in slots:
        gates = tuple(circuit.gates[i] for i in slot)
        layers.append(Layer(gates, tuple(slot), frozenset(q for g in gates for q in g.qubits)))
    return layers
