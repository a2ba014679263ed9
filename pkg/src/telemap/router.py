"""Layer-by-layer A* routing with SWAPs and teleportations, plus static bridging."""

from __future__ import annotations

import functools
import heapq
import random
import time
from dataclasses import dataclass, field

import numpy as np

from .arch import CouplingMap, virtual_edges
from .ir import Circuit, Gate, Layer, partition_layers
from .lowering import (ProgramBuilder, RoutedProgram, bridge_gates, eliminate_dead_channels,
                       establish_channel, lower_swap, lower_teleport)

STRATEGIES = ("swap", "swap+teleport", "bridge")


class RoutingError(RuntimeError):
    pass


class MappingError(RoutingError):
    """No initial placement satisfying the first layer was found."""


class SearchBudgetExceeded(RoutingError):
    pass


class RoutingTimeout(RoutingError):
    pass


@dataclass(frozen=True)
class CostModel:
    """Prices of native operations and the derived move prices.

    With ``equal`` set, a SWAP and a teleportation both cost one unit.
    """

    name: str = "ibm"
    cnot: float = 10
    single: float = 1
    measure: float = 10
    equal: bool = False

    def __post_init__(self):
        if min(self.cnot, self.single, self.measure) < 0:
            raise ValueError("prices must be non-negative")

    @property
    def swap_cost(self) -> float:
        return 1 if self.equal else 3 * self.cnot

    @property
    def teleport_cost(self) -> float:
        if self.equal:
            return 1
        # Bell-measurement CX + re-entangling CX, two H, two measurements,
        # two worst-case Pauli corrections; the reset X gates are not priced.
        return 2 * self.cnot + 2 * self.single + 2 * self.measure + 2 * self.single

    def bridge_cost(self, intermediates: int) -> float:
        """Extra CNOTs of a bridge over ``intermediates`` qubits, in SWAP units when ``equal``."""
        extra = 3 * 2 ** intermediates - 3
        return extra // 3 if self.equal else extra * self.cnot


IBM = CostModel("ibm")
EQUAL = CostModel("equal", equal=True)


def cost_model(name: str) -> CostModel:
    try:
        return {"ibm": IBM, "equal": EQUAL}[name]
    except KeyError:
        raise ValueError(f"unknown cost model {name!r}") from None


@dataclass(frozen=True)
class Move:
    """``swap``: ``qubits=(a, b)`` with ``a < b``. ``teleport``: ``(source, near, far)``.
    ``bridge``: the physical path of the bridged CNOT, control first."""

    kind: str
    qubits: tuple[int, ...]
    cost: float = 0

    @property
    def sort_key(self) -> tuple:
        if self.kind == "teleport":
            s, near, far = self.qubits
            return (self.kind, far, s, near)
        return (self.kind, *self.qubits)


def move_cost(cost: CostModel, move: Move) -> float:
    if move.kind == "swap":
        return cost.swap_cost
    if move.kind == "teleport":
        return cost.teleport_cost
    if move.kind == "bridge":
        return cost.bridge_cost(len(move.qubits) - 2)
    raise ValueError(f"unknown move kind {move.kind!r}")


@dataclass(frozen=True)
class Channel:
    ends: tuple[int, int]
    ident: int
    status: str = "established"

    def __post_init__(self):
        a, b = self.ends
        if a == b:
            raise ValueError("channel endpoints must differ")
        object.__setattr__(self, "ends", (min(a, b), max(a, b)))

    @property
    def established(self) -> bool:
        return self.status == "established"

    def other(self, q: int) -> int:
        return self.ends[1] if q == self.ends[0] else self.ends[0]


@dataclass(frozen=True)
class MappingState:
    """Placement of logical qubits plus live ancilla channels on ``num_physical`` qubits."""

    num_physical: int
    placement: tuple[int, ...]
    channels: tuple[Channel, ...] = ()
    next_ident: int = 0

    def __post_init__(self):
        object.__setattr__(self, "placement", tuple(self.placement))
        object.__setattr__(self, "channels", tuple(sorted(self.channels, key=lambda c: c.ends)))
        used = list(self.placement) + [q for c in self.channels for q in c.ends]
        if len(set(used)) != len(used):
            raise ValueError("data and channel qubits must be pairwise distinct")
        if any(not 0 <= q < self.num_physical for q in used):
            raise ValueError("physical qubit out of range")
        if len(self.channels) > (self.num_physical - len(self.placement)) // 2:
            raise ValueError("too many channels")
        if self.channels and self.next_ident <= max(c.ident for c in self.channels):
            object.__setattr__(self, "next_ident", max(c.ident for c in self.channels) + 1)

    @property
    def free(self) -> frozenset[int]:
        used = set(self.placement) | {q for c in self.channels for q in c.ends}
        return frozenset(range(self.num_physical)) - used

    def occupant(self, q: int):
        """``("data", logical)``, ``("channel", Channel)`` or ``("free", None)``."""
        for i, p in enumerate(self.placement):
            if p == q:
                return ("data", i)
        for c in self.channels:
            if q in c.ends:
                return ("channel", c)
        return ("free", None)

    def channel_at(self, q: int) -> Channel | None:
        return next((c for c in self.channels if q in c.ends), None)


def apply_swap(state: MappingState, edge, cmap: CouplingMap) -> MappingState:
    a, b = edge
    if not cmap.adjacent(a, b):
        raise ValueError(f"({a},{b}) is not a coupling-map edge")
    swap = {a: b, b: a}
    placement = tuple(swap.get(p, p) for p in state.placement)
    channels = tuple(Channel((swap.get(c.ends[0], c.ends[0]), swap.get(c.ends[1], c.ends[1])),
                             c.ident, c.status) for c in state.channels)
    return MappingState(state.num_physical, placement, channels, state.next_ident)


def apply_teleport(state: MappingState, source: int, channel_ends, cmap: CouplingMap) -> MappingState:
    """Move the data on ``source`` to the far end of the channel; ``(source, near)`` becomes a new channel."""
    near, far = channel_ends
    ch = state.channel_at(near)
    if ch is None or far not in ch.ends or near == far:
        raise ValueError(f"no channel on ({near},{far})")
    if not ch.established:
        raise ValueError("channel already consumed")
    if not cmap.adjacent(source, near):
        raise ValueError(f"{source} is not adjacent to channel end {near}")
    if source not in state.placement:
        raise ValueError(f"physical qubit {source} holds no data")
    placement = tuple(far if p == source else p for p in state.placement)
    fresh = Channel((source, near), state.next_ident)
    channels = tuple(c for c in state.channels if c is not ch) + (fresh,)
    return MappingState(state.num_physical, placement, channels, state.next_ident + 1)


def initial_mapping(layers, cmap: CouplingMap, seed: int, num_logical: int, *,
                    with_channels: bool = True, max_attempts: int = 10_000) -> MappingState:
    """Random placement satisfying the CNOTs of the first layer that has any.

    Ancilla channels are then matched greedily on the lexicographically
    smallest edges whose ends are both unused.
    """
    m = cmap.num_qubits
    if num_logical > m:
        raise MappingError(f"{num_logical} logical qubits do not fit on {m} physical qubits")
    rng = random.Random(seed)
    first = next((layer.cnots for layer in layers if layer.cnots), [])
    pairs = [g.qubits for g in first]
    for _ in range(max_attempts):
        free = set(range(m))
        pos: dict[int, int] = {}
        order = pairs[:]
        rng.shuffle(order)
        for a, b in order:
            options = [e for e in cmap.edges if e[0] in free and e[1] in free]
            if not options:
                break
            u, v = rng.choice(options)
            if rng.random() < 0.5:
                u, v = v, u
            pos[a], pos[b] = u, v
            free -= {u, v}
        else:
            rest = [i for i in range(num_logical) if i not in pos]
            for i, p in zip(rest, rng.sample(sorted(free), len(rest))):
                pos[i] = p
            placement = tuple(pos[i] for i in range(num_logical))
            return _with_channels(cmap, placement, with_channels)
    raise MappingError(f"no placement satisfying the first layer in {max_attempts} attempts")


def _with_channels(cmap: CouplingMap, placement, with_channels: bool = True) -> MappingState:
    m = cmap.num_qubits
    channels = []
    if with_channels:
        free = set(range(m)) - set(placement)
        limit = (m - len(placement)) // 2
        for a, b in cmap.edges:
            if len(channels) == limit:
                break
            if a in free and b in free:
                channels.append(Channel((a, b), len(channels)))
                free -= {a, b}
    return MappingState(m, tuple(placement), tuple(channels), len(channels))


def place_channels(cmap: CouplingMap, placement) -> MappingState:
    """State with the given data placement and greedily matched channels."""
    return _with_channels(cmap, placement, True)


# --- A* search -------------------------------------------------------------

FREE, CHAN = -1, -2


class _Metric:
    """Lower-bound distances under a cost model, cached per channel layout."""

    def __init__(self, cmap: CouplingMap, cost: CostModel, teleport: bool):
        self.cmap = cmap
        self.S = cost.swap_cost
        self.T = cost.teleport_cost
        self.teleport = teleport
        self.base = (self.S * cmap.dist.astype(float))
        self.base_list = self.base.tolist()
        self.cache: dict[frozenset, list[list[float]]] = {}

    def table(self, chans: frozenset) -> list[list[float]]:
        if not self.teleport or not chans:
            return self.base_list
        hit = self.cache.get(chans)
        if hit is not None:
            return hit
        w = self.base.copy()
        nodes = set()
        for ve in virtual_edges(self.cmap, list(chans)):
            s, f = ve.source, ve.dest
            if self.T < w[s, f]:
                w[s, f] = w[f, s] = self.T
            nodes.update((s, f))
        for k in sorted(nodes):
            np.minimum(w, w[:, k:k + 1] + w[k:k + 1, :], out=w)
        table = w.tolist()
        if len(self.cache) > 50_000:
            self.cache.clear()
        self.cache[chans] = table
        return table


@functools.lru_cache(maxsize=16)
def _metric(cmap: CouplingMap, cost: CostModel, teleport: bool) -> _Metric:
    return _Metric(cmap, cost, teleport)


def _heuristic(table, pos, pairs, next_pairs, S, weight) -> float:
    h = 0.0
    for a, b in pairs:
        d = table[pos[a]][pos[b]] - S
        if d > 0:
            h += d
    if next_pairs:
        extra = 0.0
        for a, b in next_pairs:
            d = table[pos[a]][pos[b]] - S
            if d > 0:
                extra += d
        h += weight * extra
    return h


def _admissible(table, hops, pos, pairs, S, T, teleport) -> float:
    """Lower bound valid for any number of CNOTs in the layer.

    The largest single-CNOT bound, or a token count: a SWAP moves at most two
    data qubits one hop, a teleport moves one data qubit.
    """
    single = 0.0
    gaps = []
    for a, b in pairs:
        pa, pb = pos[a], pos[b]
        single = max(single, table[pa][pb] - S)
        if hops[pa][pb] > 1:
            gaps.append(hops[pa][pb] - 1)
    gaps.sort(reverse=True)
    total = sum(gaps)
    tokens = S * ((total + 1) // 2)
    if teleport:
        for j, gap in enumerate(gaps, 1):
            total -= gap
            tokens = min(tokens, j * T + S * ((total + 1) // 2))
    return max(single, tokens)


def _search(cmap: CouplingMap, cost: CostModel, state: MappingState, pairs, next_pairs,
            teleport: bool, node_budget: int, weight: float, deadline: float | None,
            heuristic: str = "sum"):
    if heuristic not in ("sum", "admissible"):
        raise ValueError(f"unknown heuristic {heuristic!r}")
    m = cmap.num_qubits
    S, T = cost.swap_cost, cost.teleport_cost
    adj = cmap.dist.tolist()
    occ0 = [FREE] * m
    for i, p in enumerate(state.placement):
        occ0[p] = i
    for c in state.channels:
        for q in c.ends:
            occ0[q] = CHAN
    occ0 = tuple(occ0)
    chans0 = frozenset(c.ends for c in state.channels)
    pos0 = state.placement
    metric = _metric(cmap, cost, teleport)
    relevant = {q for pr in pairs for q in pr}
    neighbors = [sorted(cmap.neighbors(q)) for q in range(m)]

    def goal(pos):
        return all(adj[pos[a]][pos[b]] == 1 for a, b in pairs)

    if heuristic == "sum":
        def estimate(chans, pos):
            return _heuristic(metric.table(chans), pos, pairs, next_pairs, S, weight)
    else:
        def estimate(chans, pos):
            return _admissible(metric.table(chans), adj, pos, pairs, S, T, teleport)

    if goal(pos0):
        return [], 0
    h0 = estimate(chans0, pos0)
    # heap entry: (f, teleports, sequence key, g, occ, chans, pos, moves)
    heap = [(h0, 0, (), 0, occ0, chans0, pos0, ())]
    best_g = {(occ0, chans0): 0}
    expanded = 0
    while heap:
        f, nt, seq, g, occ, chans, pos, moves = heapq.heappop(heap)
        key = (occ, chans)
        if best_g.get(key, float("inf")) < g:
            continue
        if goal(pos):
            return list(moves), g
        expanded += 1
        if expanded > node_budget:
            raise SearchBudgetExceeded(f"A* expanded more than {node_budget} nodes")
        if deadline is not None and expanded % 256 == 0 and time.monotonic() > deadline:
            raise RoutingTimeout("routing time limit exceeded")

        children = []
        for a, b in cmap.edges:
            oa, ob = occ[a], occ[b]
            useful = oa in relevant or ob in relevant
            if not useful:
                if not teleport or (oa != CHAN and ob != CHAN):
                    continue
                if oa == CHAN and ob == CHAN and (a, b) in chans:
                    continue
            new = list(occ)
            new[a], new[b] = ob, oa
            new_pos = pos
            if oa >= 0 or ob >= 0:
                lp = list(pos)
                if oa >= 0:
                    lp[oa] = b
                if ob >= 0:
                    lp[ob] = a
                new_pos = tuple(lp)
            new_chans = chans
            if oa == CHAN or ob == CHAN:
                sw = {a: b, b: a}
                new_chans = frozenset(tuple(sorted((sw.get(x, x), sw.get(y, y)))) for x, y in chans)
            children.append((Move("swap", (a, b), S), tuple(new), new_chans, new_pos, 0))
        if teleport:
            for e1, e2 in chans:
                for near, far in ((e1, e2), (e2, e1)):
                    for s in neighbors[near]:
                        if s == far or occ[s] < 0:
                            continue
                        new = list(occ)
                        new[far] = occ[s]
                        new[s] = CHAN
                        lp = list(pos)
                        lp[occ[s]] = far
                        new_chans = (chans - {(e1, e2)}) | {(min(s, near), max(s, near))}
                        children.append((Move("teleport", (s, near, far), T), tuple(new),
                                         new_chans, tuple(lp), 1))
        for mv, nocc, nchans, npos, dt in children:
            ng = g + mv.cost
            nkey = (nocc, nchans)
            if best_g.get(nkey, float("inf")) <= ng:
                continue
            best_g[nkey] = ng
            h = estimate(nchans, npos)
            heapq.heappush(heap, (ng + h, nt + dt, seq + (mv.sort_key,), ng, nocc, nchans, npos,
                                  moves + (mv,)))
    raise RoutingError("layer cannot be routed on this coupling map")


def route_layer(state: MappingState, layer, lookahead, cmap: CouplingMap, cost: CostModel,
                teleport: bool = True, *, node_budget: int = 1_000_000,
                lookahead_weight: float = 0.5, deadline: float | None = None,
                heuristic: str = "sum"):
    """Cheapest move sequence making every CNOT of ``layer`` act on a coupling edge.

    ``layer`` is a :class:`Layer` or a list of logical CNOT pairs;
    ``lookahead`` likewise (or ``None``) and only steers the heuristic.
    Returns ``(moves, new_state)``; the summed ``Move.cost`` is the layer cost.

    ``heuristic="sum"`` adds one distance bound per CNOT (plus the weighted
    lookahead). It is exact for single-CNOT layers but may overestimate when
    one SWAP helps two CNOTs. ``"admissible"`` never overestimates, ignores
    the lookahead, and guarantees a minimum-cost result at a higher search cost.
    """
    pairs = _pairs(layer)
    next_pairs = _pairs(lookahead) if lookahead else []
    moves, _ = _search(cmap, cost, state, pairs, next_pairs, teleport, node_budget,
                       lookahead_weight, deadline, heuristic)
    for mv in moves:
        state = _apply(state, mv, cmap)
    return moves, state


def _pairs(layer) -> list[tuple[int, int]]:
    if isinstance(layer, Layer):
        return [g.qubits for g in layer.cnots]
    return [tuple(p.qubits) if isinstance(p, Gate) else tuple(p) for p in layer]


def _apply(state: MappingState, mv: Move, cmap: CouplingMap) -> MappingState:
    if mv.kind == "swap":
        return apply_swap(state, mv.qubits, cmap)
    s, near, far = mv.qubits
    return apply_teleport(state, s, (near, far), cmap)


def bridge_plan(placement, gate: Gate, cmap: CouplingMap) -> list[Gate]:
    """Physical CNOTs realizing a logical CNOT along a shortest path, mapping unchanged."""
    c, t = (placement[q] for q in gate.qubits)
    gates = bridge_gates(cmap.shortest_path(c, t))
    if gate.condition is not None:
        gates = [Gate(g.name, g.qubits, condition=gate.condition) for g in gates]
    return gates


def bridge_initial_mapping(circuit: Circuit, cmap: CouplingMap) -> tuple[int, ...]:
    """Greedy static placement keeping frequently interacting qubits close.

    Logical qubits are placed in order of decreasing interaction count; each
    goes to the free physical qubit minimizing the interaction-weighted
    distance to those already placed.
    """
    n, m = circuit.num_qubits, cmap.num_qubits
    weight = np.zeros((n, n), dtype=int)
    for g in circuit.gates:
        if g.is_cnot:
            a, b = g.qubits
            weight[a, b] += 1
            weight[b, a] += 1
    order = sorted(range(n), key=lambda i: (-weight[i].sum(), i))
    pos: dict[int, int] = {}
    free = set(range(m))
    for i in order:
        if not pos:
            p = min(free, key=lambda q: (-cmap.degree(q), q))
        else:
            p = min(free, key=lambda q: (sum(weight[i, j] * cmap.dist[q, pj] for j, pj in pos.items()), q))
        pos[i] = p
        free.discard(p)
    return tuple(pos[i] for i in range(n))


# --- whole-circuit driver ----------------------------------------------------

@dataclass
class Trial:
    seed: int
    program: RoutedProgram | None
    swaps: int = 0
    teleports: int = 0
    bridges: int = 0
    cost: float = 0
    ms: float = 0
    timed_out: bool = False


@dataclass
class RoutingResult:
    strategy: str
    cost_model: CostModel
    trials: list[Trial] = field(default_factory=list)

    @property
    def best(self) -> Trial:
        done = [t for t in self.trials if not t.timed_out]
        if not done:
            raise RoutingTimeout("every trial timed out")
        return min(done, key=lambda t: (t.cost, t.swaps, t.seed))


def route_circuit(circuit: Circuit, cmap: CouplingMap, cost: CostModel = IBM,
                  strategy: str = "swap+teleport", seed: int = 0, trials: int = 1, *,
                  lookahead: bool = True, initial=None, eliminate: bool = True,
                  node_budget: int = 1_000_000, time_limit: float | None = 10.0) -> RoutingResult:
    """Map ``circuit`` onto ``cmap``, once per seed ``seed .. seed+trials-1``.

    ``initial`` fixes the logical-to-physical placement (or a full
    :class:`MappingState`) instead of sampling one; the bridge strategy
    otherwise uses :func:`bridge_initial_mapping`. The result keeps every
    trial; ``result.best`` is the cheapest.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if circuit.num_qubits > cmap.num_qubits:
        raise MappingError(f"{circuit.num_qubits} logical qubits do not fit on {cmap.num_qubits}")
    layers = partition_layers(circuit)
    result = RoutingResult(strategy, cost)
    for k in range(trials):
        trial_seed = seed + k
        start = time.monotonic()
        deadline = start + time_limit if time_limit else None
        try:
            if strategy == "bridge":
                trial = _route_bridge(circuit, layers, cmap, cost, initial)
            else:
                trial = _route_dynamic(circuit, layers, cmap, cost, strategy == "swap+teleport",
                                       trial_seed, lookahead, initial, node_budget, deadline)
        except RoutingTimeout:
            trial = Trial(trial_seed, None, timed_out=True)
        trial.seed = trial_seed
        trial.ms = (time.monotonic() - start) * 1000
        if trial.program is not None and eliminate:
            trial.program = eliminate_dead_channels(trial.program)
        result.trials.append(trial)
    return result


def _emit_layer(builder: ProgramBuilder, layer: Layer, placement):
    for idx, g in zip(layer.indices, layer.gates):
        builder.add([g.remap(placement)], ("gate", idx))


def _route_dynamic(circuit, layers, cmap, cost, teleport, seed, lookahead, initial,
                   node_budget, deadline) -> Trial:
    if isinstance(initial, MappingState):
        state = initial
    elif initial is not None:
        state = place_channels(cmap, initial)
    else:
        state = initial_mapping(layers, cmap, seed, circuit.num_qubits)
    start_placement = state.placement
    builder = ProgramBuilder(cmap.num_qubits, list(circuit.cregs))
    for c in state.channels:
        builder.add(establish_channel(*c.ends, cmap), ("establish", c.ident))
    cnot_layers = [i for i, layer in enumerate(layers) if layer.cnots]
    moves: list[Move] = []
    consumed: set[int] = set()
    trial = Trial(seed, None)
    for li, layer in enumerate(layers):
        if layer.cnots:
            nxt = next((layers[j] for j in cnot_layers if j > li), None) if lookahead else None
            step, _ = _search(cmap, cost, state, _pairs(layer), _pairs(nxt) if nxt else [],
                              teleport, node_budget, 0.5, deadline)
            for mv in step:
                k = len(moves)
                moves.append(mv)
                trial.cost += mv.cost
                if mv.kind == "swap":
                    trial.swaps += 1
                    builder.add(lower_swap(*mv.qubits), ("swap", k))
                else:
                    trial.teleports += 1
                    s, near, far = mv.qubits
                    ch = state.channel_at(near)
                    consumed.add(ch.ident)
                    gadget = lower_teleport(s, near, far, builder.fresh_bit(), builder.fresh_bit(), cmap)
                    builder.add(gadget[:-2], ("teleport", k))
                    builder.add(gadget[-2:], ("establish", state.next_ident))
                state = _apply(state, mv, cmap)
        _emit_layer(builder, layer, state.placement)
    trial.program = RoutedProgram(
        builder.circuit(), tuple(start_placement), tuple(state.placement), tuple(moves),
        tuple(builder.tags), frozenset(consumed),
        tuple((*c.ends, c.ident) for c in state.channels), circuit.num_clbits)
    return trial


def _route_bridge(circuit, layers, cmap, cost, initial) -> Trial:
    if isinstance(initial, MappingState):
        placement = initial.placement
    elif initial is not None:
        placement = tuple(initial)
    else:
        placement = bridge_initial_mapping(circuit, cmap)
    builder = ProgramBuilder(cmap.num_qubits, list(circuit.cregs))
    moves: list[Move] = []
    trial = Trial(0, None)
    for layer in layers:
        for idx, g in zip(layer.indices, layer.gates):
            if g.is_cnot and not cmap.adjacent(placement[g.qubits[0]], placement[g.qubits[1]]):
                path = cmap.shortest_path(placement[g.qubits[0]], placement[g.qubits[1]])
                mv = Move("bridge", tuple(path), cost.bridge_cost(len(path) - 2))
                builder.add(bridge_plan(placement, g, cmap), ("bridge", len(moves)))
                moves.append(mv)
                trial.bridges += 1
                trial.cost += mv.cost
            else:
                builder.add([g.remap(placement)], ("gate", idx))
    trial.program = RoutedProgram(builder.circuit(), tuple(placement), tuple(placement), tuple(moves),
                                  tuple(builder.tags), frozenset(), (), circuit.num_clbits)
    return trial
