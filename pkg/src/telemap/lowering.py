"""Expansion of routing moves into native gates.

Every gate of a routed program carries a provenance tag so that channel
establishments can be traced to the teleport that consumes them (or removed
when nothing ever does).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .ir import Circuit, Gate


def establish_channel(a: int, b: int, cmap=None) -> list[Gate]:
    """Bell pair on ``(a, b)``: Hadamard on the lower index, then a CNOT onto the other."""
    if a == b:
        raise ValueError("channel endpoints must differ")
    if cmap is not None and not cmap.adjacent(a, b):
        raise ValueError(f"cannot establish a channel on non-adjacent qubits ({a},{b})")
    lo, hi = min(a, b), max(a, b)
    return [Gate("h", (lo,)), Gate("cx", (lo, hi))]


def lower_swap(a: int, b: int) -> list[Gate]:
    return [Gate("cx", (a, b)), Gate("cx", (b, a)), Gate("cx", (a, b))]


def lower_teleport(source: int, near: int, far: int,
                   c0: tuple[str, int], c1: tuple[str, int], cmap=None) -> list[Gate]:
    """Teleport the state on ``source`` to ``far`` through the Bell pair ``(near, far)``.

    ``c0`` and ``c1`` are ``(register_name, flat_bit_index)`` for two fresh
    one-bit registers receiving the source and ``near`` outcomes. After the
    Pauli corrections on ``far`` the two measured qubits are flipped back to
    ``|0>`` and re-entangled, leaving a new channel on ``(source, near)``.
    """
    if len({source, near, far}) != 3:
        raise ValueError("teleport needs three distinct qubits")
    if cmap is not None and not cmap.adjacent(source, near):
        raise ValueError(f"source {source} is not adjacent to channel end {near}")
    (r0, b0), (r1, b1) = c0, c1
    return [
        Gate("cx", (source, near)),
        Gate("h", (source,)),
        Gate("measure", (source,), clbit=b0),
        Gate("measure", (near,), clbit=b1),
        Gate("x", (far,), condition=(r1, 1)),
        Gate("z", (far,), condition=(r0, 1)),
        Gate("x", (near,), condition=(r1, 1)),
        Gate("x", (source,), condition=(r0, 1)),
        *establish_channel(source, near),
    ]


def bridge_gates(path) -> list[Gate]:
    """CNOT from ``path[0]`` onto ``path[-1]`` using only consecutive path edges.

    A path with ``k`` intermediate qubits yields ``3 * 2**k - 2`` CNOTs and
    leaves the intermediates unchanged.
    """
    path = list(path)
    if len(path) < 2:
        raise ValueError("bridge path needs at least two qubits")
    if len(path) == 2:
        return [Gate("cx", (path[0], path[1]))]
    inner = bridge_gates(path[:-1])
    last = Gate("cx", (path[-2], path[-1]))
    return inner + [last] + inner + [last]


@dataclass(frozen=True)
class RoutedProgram:
    """A mapped circuit over physical qubits plus the bookkeeping needed to interpret it.

    ``initial[i]`` / ``final[i]`` give the physical home of logical qubit ``i``
    before the first and after the last gate. ``tags[k]`` records why gate
    ``k`` exists: ``("gate", i)`` for source gate ``i``, ``("swap", j)``,
    ``("teleport", j)`` or ``("bridge", j)`` for move ``j`` of ``moves``, and
    ``("establish", ident)`` for the H+CX pair creating channel ``ident``.
    ``live_channels`` lists ``(a, b, ident)`` for channels still unconsumed at the end.
    """

    circuit: Circuit
    initial: tuple[int, ...]
    final: tuple[int, ...]
    moves: tuple = ()
    tags: tuple = ()
    consumed: frozenset[int] = frozenset()
    live_channels: tuple[tuple[int, int, int], ...] = ()
    num_source_clbits: int = 0

    @property
    def gates(self) -> tuple[Gate, ...]:
        return self.circuit.gates

    @property
    def num_physical(self) -> int:
        return self.circuit.num_qubits

    @property
    def bell_pairs(self) -> list[tuple[int, int]]:
        """Qubit pairs left holding an entangled channel at the end of the program."""
        present = {t[1] for t in self.tags if t[0] == "establish"}
        return [(a, b) for a, b, ident in self.live_channels if ident in present]

    def count_tag(self, kind: str) -> int:
        """Number of distinct move/channel instances of ``kind`` with gates in the program."""
        return len({t[1] for t in self.tags if t[0] == kind})


def eliminate_dead_channels(program: RoutedProgram) -> RoutedProgram:
    """Drop establishment gates of channels that no teleport ever consumes."""
    keep = [k for k, t in enumerate(program.tags)
            if not (t[0] == "establish" and t[1] not in program.consumed)]
    if len(keep) == len(program.tags):
        return program
    circ = program.circuit
    gates = tuple(circ.gates[k] for k in keep)
    tags = tuple(program.tags[k] for k in keep)
    return replace(program, circuit=Circuit(circ.num_qubits, gates, circ.cregs, circ.qreg_name),
                   tags=tags)


@dataclass
class ProgramBuilder:
    """Accumulates physical gates with tags and allocates teleport registers."""

    num_physical: int
    cregs: list[tuple[str, int]] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    tags: list[tuple] = field(default_factory=list)
    _teleport_bits: int = 0

    def add(self, gates, tag):
        for g in gates:
            self.gates.append(g)
            self.tags.append(tag)

    def fresh_bit(self) -> tuple[str, int]:
        names = {n for n, _ in self.cregs}
        while True:
            name = f"c{self._teleport_bits}"
            self._teleport_bits += 1
            if name not in names:
                break
        flat = sum(s for _, s in self.cregs)
        self.cregs.append((name, 1))
        return name, flat

    def circuit(self) -> Circuit:
        return Circuit(self.num_physical, tuple(self.gates), tuple(self.cregs))
