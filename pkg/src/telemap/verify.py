"""Branching state-vector simulation and checks on routed programs.

Qubit 0 is the most significant bit of a flattened state vector. States are
simulated in batches: every array carries a trailing column axis so several
input states share one pass over the gate list.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .ir import Circuit, Gate
from .lowering import RoutedProgram

MAX_QUBITS = 20
_PROB_EPS = 1e-12


class SimulationError(RuntimeError):
    pass


class SimulationLimitError(SimulationError):
    pass


_S2 = 1 / np.sqrt(2)
_FIXED = {
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
}
_DIAG = {
    "z": -1,
    "s": 1j,
    "sdg": -1j,
    "t": np.exp(1j * np.pi / 4),
    "tdg": np.exp(-1j * np.pi / 4),
}


def gate_matrix(g: Gate) -> np.ndarray:
    """2x2 unitary of a one-qubit gate."""
    if g.name in _FIXED:
        return _FIXED[g.name]
    if g.name in _DIAG:
        return np.diag([1, _DIAG[g.name]]).astype(complex)
    if g.name == "rz":
        (th,) = g.params
        return np.diag([np.exp(-0.5j * th), np.exp(0.5j * th)])
    if g.name == "rx":
        (th,) = g.params
        c, s = np.cos(th / 2), np.sin(th / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if g.name == "ry":
        (th,) = g.params
        c, s = np.cos(th / 2), np.sin(th / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if g.name == "u":
        th, ph, lam = g.params
        c, s = np.cos(th / 2), np.sin(th / 2)
        return np.array([[c, -np.exp(1j * lam) * s],
                         [np.exp(1j * ph) * s, np.exp(1j * (ph + lam)) * c]])
    raise ValueError(f"{g.name} is not a one-qubit unitary")


def _at(ndim: int, axis: int, value) -> tuple:
    idx = [slice(None)] * ndim
    idx[axis] = value
    return tuple(idx)


def _apply_matrix(psi: np.ndarray, u: np.ndarray, axis: int) -> np.ndarray:
    """Apply the 2x2 matrix ``u`` along ``axis`` as one batched matmul."""
    shape = psi.shape
    view = psi.reshape(2 ** axis, 2, -1)
    return np.matmul(u, view).reshape(shape)


def _apply_1q(psi: np.ndarray, g: Gate, axis: int | None = None, u: np.ndarray | None = None) -> np.ndarray:
    q = g.qubits[0] if axis is None else axis
    nd = psi.ndim
    if u is None and g.name == "x":
        a, b = psi[_at(nd, q, 0)], psi[_at(nd, q, 1)]
        tmp = a.copy()
        a[...] = b
        b[...] = tmp
        return psi
    if u is None:
        u = gate_matrix(g)
    if u[0, 1] == 0 and u[1, 0] == 0:
        if u[0, 0] != 1:
            psi[_at(nd, q, 0)] *= u[0, 0]
        if u[1, 1] != 1:
            psi[_at(nd, q, 1)] *= u[1, 1]
        return psi
    return _apply_matrix(psi, u, q)


def _apply_cx(psi: np.ndarray, c: int, t: int) -> np.ndarray:
    sub = psi[_at(psi.ndim, c, 1)]
    tt = t if t < c else t - 1
    a, b = sub[_at(sub.ndim, tt, 0)], sub[_at(sub.ndim, tt, 1)]
    tmp = a.copy()
    a[...] = b
    b[...] = tmp
    return psi


def _plan(gates) -> list[tuple]:
    """Compile a gate list into simulator steps.

    Runs of unconditioned one-qubit gates on the same qubit become a single
    matrix, and the CNOT triple of a SWAP becomes an axis relabelling.
    """
    steps: list[tuple] = []
    i = 0
    n = len(gates)
    while i < n:
        g = gates[i]
        if (g.name == "cx" and g.condition is None and i + 2 < n
                and gates[i + 1] == Gate("cx", g.qubits[::-1]) and gates[i + 2] == g):
            steps.append(("swap", g, i + 2))
            i += 3
            continue
        if g.name in ("cx", "measure", "reset", "barrier") or g.condition is not None:
            steps.append(("gate", g, i))
            i += 1
            continue
        u = gate_matrix(g)
        j = i + 1
        while (j < n and gates[j].condition is None and gates[j].qubits == g.qubits
               and gates[j].name not in ("cx", "measure", "reset", "barrier")):
            u = gate_matrix(gates[j]) @ u
            j += 1
        steps.append(("unitary", Gate(g.name, g.qubits, g.params), j - 1, u))
        i = j
    return steps


@dataclass
class BranchState:
    """One measurement branch.

    ``state`` has shape ``(2**k,)`` (or ``(2**k, B)`` for batched input).
    ``probability`` is the branch weight (per column when batched).
    ``resets`` records the outcomes of ``reset`` instructions in program order.
    """

    state: np.ndarray
    clbits: tuple[int, ...]
    probability: float | np.ndarray
    resets: tuple[int, ...] = ()


@dataclass
class _Branch:
    psi: np.ndarray          # (2,)*k + (B,)
    bits: list[int]
    prob: np.ndarray         # (B,)
    resets: tuple[int, ...] = ()


def _project(br: _Branch, q: int, outcome: int) -> _Branch | None:
    psi = br.psi
    nd = psi.ndim
    kept = psi[_at(nd, q, outcome)]
    p = np.sum(np.abs(kept) ** 2, axis=tuple(range(nd - 2)))
    if not np.any(p * br.prob > _PROB_EPS):
        return None
    new = np.zeros_like(psi)
    scale = np.where(p > _PROB_EPS, 1 / np.sqrt(np.where(p > _PROB_EPS, p, 1)), 0)
    new[_at(nd, q, outcome)] = kept * scale
    prob = np.where(p > _PROB_EPS, br.prob * p, 0.0)
    return _Branch(new, list(br.bits), prob, br.resets)


def _register_values(circuit: Circuit):
    spans = {}
    off = 0
    for name, size in circuit.cregs:
        spans[name] = (off, size)
        off += size
    return spans


def _last_uses(circuit: Circuit) -> dict[int, list[str]]:
    """Gate index after which each register is never read or written again."""
    spans = _register_values(circuit)
    last: dict[str, int] = {}
    for i, g in enumerate(circuit.gates):
        if g.condition is not None:
            last[g.condition[0]] = i
        if g.clbit is not None:
            for name, (off, size) in spans.items():
                if off <= g.clbit < off + size:
                    last[name] = i
    out: dict[int, list[str]] = {}
    for name, i in last.items():
        out.setdefault(i, []).append(name)
    return out


def _merge(branches: list[_Branch]) -> list[_Branch]:
    out: list[_Branch] = []
    for br in branches:
        for other in out:
            if (other.bits == br.bits and other.resets == br.resets
                    and np.allclose(other.psi, br.psi, rtol=0, atol=1e-12)):
                other.prob = other.prob + br.prob
                break
        else:
            out.append(br)
    return out


def _initial_tensor(k: int, initial_state) -> tuple[np.ndarray, bool]:
    if initial_state is None:
        psi = np.zeros((2 ** k, 1), dtype=complex)
        psi[0, 0] = 1
        squeeze = True
    else:
        psi = np.asarray(initial_state, dtype=complex)
        squeeze = psi.ndim == 1
        if squeeze:
            psi = psi[:, None]
        if psi.shape[0] != 2 ** k:
            raise ValueError(f"initial state has {psi.shape[0]} amplitudes, expected {2 ** k}")
        psi = psi.copy()
    return psi.reshape((2,) * k + (psi.shape[1],)), squeeze


def simulate_branching(circuit: Circuit, initial_state=None, *, max_qubits: int = MAX_QUBITS,
                       merge: bool = False, keep_registers=None) -> list[BranchState]:
    """Run ``circuit`` forking on every measurement and ``reset``.

    Zero-probability branches are pruned. With ``merge`` set, once a
    register not listed in ``keep_registers`` is dead its bits are cleared,
    and branches that then agree on bits and amplitudes are joined.
    """
    k = circuit.num_qubits
    if k > max_qubits:
        raise SimulationLimitError(f"{k} qubits exceed the simulator limit of {max_qubits}")
    psi, squeeze = _initial_tensor(k, initial_state)
    batch = psi.shape[-1]
    norms = np.sum(np.abs(psi.reshape(-1, batch)) ** 2, axis=0)
    if not np.allclose(norms, 1, atol=1e-9):
        raise ValueError("initial state is not normalized")
    spans = _register_values(circuit)
    keep = set(spans) if keep_registers is None else set(keep_registers)
    dead_after = _last_uses(circuit) if merge else {}
    branches = [_Branch(psi, [0] * circuit.num_clbits, np.ones(batch))]

    axis = list(range(k))
    for step in _plan(circuit.gates):
        kind, g, i = step[0], step[1], step[2]
        if kind == "swap":
            a, b = g.qubits
            axis[a], axis[b] = axis[b], axis[a]
            continue
        nxt: list[_Branch] = []
        for br in branches:
            if g.condition is not None:
                off, size = spans[g.condition[0]]
                value = sum(bit << j for j, bit in enumerate(br.bits[off:off + size]))
                if value != g.condition[1]:
                    nxt.append(br)
                    continue
            if g.name == "barrier":
                nxt.append(br)
            elif kind == "unitary":
                br.psi = _apply_1q(br.psi, g, axis[g.qubits[0]], step[3])
                nxt.append(br)
            elif g.name == "cx":
                br.psi = _apply_cx(br.psi, axis[g.qubits[0]], axis[g.qubits[1]])
                nxt.append(br)
            elif g.name in ("measure", "reset"):
                q = axis[g.qubits[0]]
                for outcome in (0, 1):
                    child = _project(br, q, outcome)
                    if child is None:
                        continue
                    if g.name == "measure":
                        child.bits[g.clbit] = outcome
                    else:
                        child.resets = br.resets + (outcome,)
                        if outcome:
                            child.psi = _apply_1q(child.psi, Gate("x", (q,)))
                    nxt.append(child)
            else:
                br.psi = _apply_1q(br.psi, g, axis[g.qubits[0]])
                nxt.append(br)
        branches = nxt
        dead = [r for r in dead_after.get(i, ()) if r not in keep]
        if dead:
            for br in branches:
                for r in dead:
                    off, size = spans[r]
                    br.bits[off:off + size] = [0] * size
            branches = _merge(branches)

    if axis != list(range(k)):
        order = [axis[q] for q in range(k)] + [k]
        for br in branches:
            br.psi = np.ascontiguousarray(np.transpose(br.psi, order))

    out = []
    total = np.zeros(batch)
    for br in branches:
        flat = br.psi.reshape(-1, batch)
        live = br.prob > 0
        norms = np.sum(np.abs(flat) ** 2, axis=0)
        if not np.allclose(norms[live], 1, atol=1e-9):
            raise SimulationError("branch state lost normalization")
        total += br.prob
        if squeeze:
            out.append(BranchState(flat[:, 0], tuple(br.bits), float(br.prob[0]), br.resets))
        else:
            out.append(BranchState(flat, tuple(br.bits), br.prob.copy(), br.resets))
    if not np.allclose(total, 1, atol=1e-9):
        raise SimulationError("branch probabilities do not sum to one")
    return out


# --- verdicts -----------------------------------------------------------------

@dataclass
class Verdict:
    passed: bool
    message: str = ""
    max_deviation: float = 0.0

    def __bool__(self) -> bool:
        return self.passed


def check_coupling(program, cmap) -> Verdict:
    """PASS iff every two-qubit gate sits on a coupling-map edge."""
    circuit = program.circuit if isinstance(program, RoutedProgram) else program
    for i, g in enumerate(circuit.gates):
        if g.name == "cx" and not cmap.adjacent(*g.qubits):
            return Verdict(False, f"gate {i} (cx {g.qubits[0]},{g.qubits[1]}) is not on a coupling edge")
    return Verdict(True, "all two-qubit gates on coupling edges")


def random_product_states(n: int, count: int, seed: int = 0) -> np.ndarray:
    """``count`` Haar-random product states on ``n`` qubits as columns of a ``(2**n, count)`` array."""
    rng = np.random.default_rng(seed)
    cols = []
    for _ in range(count):
        vec = np.ones(1, dtype=complex)
        for _ in range(n):
            amp = rng.normal(size=2) + 1j * rng.normal(size=2)
            vec = np.kron(vec, amp / np.linalg.norm(amp))
        cols.append(vec)
    return np.stack(cols, axis=1) if cols else np.zeros((2 ** n, 0), dtype=complex)


def _embed(data: np.ndarray, n: int, positions, k: int, bell_pairs=()) -> np.ndarray:
    """Place an ``n``-qubit batch on ``positions`` of ``k`` qubits; Bell pairs and ``|0>`` elsewhere."""
    batch = data.shape[-1]
    order = np.argsort(positions)
    block = np.transpose(data.reshape((2,) * n + (batch,)), list(order) + [n])
    full = np.zeros((2,) * k + (batch,), dtype=complex)
    bell_pairs = list(bell_pairs)
    scale = _S2 ** len(bell_pairs)
    for bits in itertools.product((0, 1), repeat=len(bell_pairs)):
        idx: list = [0] * k + [slice(None)]
        for q in positions:
            idx[q] = slice(None)
        for (a, b), bit in zip(bell_pairs, bits):
            idx[a] = idx[b] = bit
        full[tuple(idx)] = block * scale
    return full.reshape(2 ** k, batch)


def _compact(program: RoutedProgram, initial, final):
    active = set(initial) | set(final)
    for g in program.circuit.gates:
        active.update(g.qubits)
    for a, b in program.bell_pairs:
        active |= {a, b}
    order = sorted(active)
    index = {q: i for i, q in enumerate(order)}
    circ = program.circuit
    compact = Circuit(len(order), tuple(g.remap(index) for g in circ.gates), circ.cregs)
    return compact, index


def check_equivalence(original: Circuit, mapped: RoutedProgram, initial=None, final=None, *,
                      atol: float = 1e-9, random_states: int = 20, basis_limit: int = 10,
                      seed: int = 0, max_qubits: int = MAX_QUBITS,
                      max_chunk_amplitudes: int = 2 ** 22) -> Verdict:
    """Simulate both circuits on a fixed input set and compare every branch.

    Inputs are all computational basis states when the circuit has at most
    ``basis_limit`` qubits, plus ``random_states`` seeded random product
    states. The mapped program starts with data on ``initial`` and ancillas
    in ``|0>``; each branch must end with the original output on ``final``
    (up to global phase), surviving channels in Bell states and every other
    qubit in ``|0>``.
    """
    initial = tuple(mapped.initial if initial is None else initial)
    final = tuple(mapped.final if final is None else final)
    n = original.num_qubits
    if len(initial) != n or len(final) != n:
        raise ValueError("placement length differs from the logical qubit count")
    compact, index = _compact(mapped, initial, final)
    k = compact.num_qubits
    if k > max_qubits or n > max_qubits:
        raise SimulationLimitError(f"{max(k, n)} qubits exceed the simulator limit of {max_qubits}")
    inputs = []
    if n <= basis_limit:
        inputs.append(np.eye(2 ** n, dtype=complex))
    if random_states:
        inputs.append(random_product_states(n, random_states, seed))
    data = np.concatenate(inputs, axis=1) if inputs else np.zeros((2 ** n, 0), dtype=complex)
    init_pos = [index[p] for p in initial]
    final_pos = [index[p] for p in final]
    bells = [(index[a], index[b]) for a, b in mapped.bell_pairs]
    source_bits = mapped.num_source_clbits or original.num_clbits
    chunk = max(1, max_chunk_amplitudes // 2 ** k)
    worst = 0.0
    for start in range(0, data.shape[1], chunk):
        cols = data[:, start:start + chunk]
        ref = simulate_branching(original, cols, max_qubits=max_qubits)
        got = simulate_branching(compact, _embed(cols, n, init_pos, k), max_qubits=max_qubits,
                                 merge=True, keep_registers=[r for r, _ in original.cregs])
        ref_by_key: dict[tuple, list[BranchState]] = {}
        for br in ref:
            ref_by_key.setdefault((br.clbits, br.resets), []).append(br)
        got_by_key: dict[tuple, list[BranchState]] = {}
        for br in got:
            got_by_key.setdefault((br.clbits[:source_bits], br.resets), []).append(br)
        for key in set(ref_by_key) | set(got_by_key):
            r_list = ref_by_key.get(key, [])
            g_list = got_by_key.get(key, [])
            p_ref = sum((b.probability for b in r_list), np.zeros(cols.shape[1]))
            p_got = sum((b.probability for b in g_list), np.zeros(cols.shape[1]))
            if not np.allclose(p_ref, p_got, rtol=0, atol=atol):
                return Verdict(False, f"branch {key}: outcome probabilities differ", worst)
            expected = [_embed(b.state, n, final_pos, k, bells) for b in r_list]
            for b in g_list:
                live = b.probability > _PROB_EPS
                best = np.full(cols.shape[1], np.inf)
                for exp in expected:
                    ov = np.einsum("ij,ij->j", exp.conj(), b.state)
                    mag = np.abs(ov)
                    phase = np.where(mag > 1e-12, ov / np.where(mag > 1e-12, mag, 1), 1)
                    dev = np.max(np.abs(b.state - phase * exp), axis=0)
                    best = np.where(mag >= 1 - atol, np.minimum(best, dev), best)
                bad = live & (best > atol)
                if bad.any():
                    col = int(np.nonzero(bad)[0][0])
                    return Verdict(False, f"branch {key}, input {start + col}: state mismatch",
                                   float(best[col]))
                if live.any():
                    worst = max(worst, float(best[live].max()))
    return Verdict(True, f"equivalent on {data.shape[1]} inputs", worst)
