"""Coupling maps with their hop distances and teleportation virtual edges."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class CouplingMapError(ValueError):
    pass


class CouplingMap:
    """Undirected connectivity graph over physical qubits ``0..num_qubits-1``.

    All-pairs hop distances are computed once on construction by BFS.
    """

    def __init__(self, num_qubits: int, edges):
        if num_qubits < 1:
            raise CouplingMapError("a coupling map needs at least one qubit")
        seen = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise CouplingMapError(f"self-loop on qubit {a}")
            if not (0 <= a < num_qubits and 0 <= b < num_qubits):
                raise CouplingMapError(f"edge ({a},{b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise CouplingMapError(f"duplicate edge {key}")
            seen.add(key)
        self.num_qubits = num_qubits
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(seen))
        adj: list[set[int]] = [set() for _ in range(num_qubits)]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        self._adj = tuple(frozenset(s) for s in adj)
        self.dist = self._bfs_all()
        if (self.dist < 0).any():
            raise CouplingMapError("coupling map is disconnected")
        self.dist.setflags(write=False)

    def _bfs_all(self) -> np.ndarray:
        m = self.num_qubits
        dist = np.full((m, m), -1, dtype=np.int64)
        for src in range(m):
            row = dist[src]
            row[src] = 0
            queue = deque([src])
            while queue:
                u = queue.popleft()
                for v in self._adj[u]:
                    if row[v] < 0:
                        row[v] = row[u] + 1
                        queue.append(v)
        return dist

    def neighbors(self, q: int) -> frozenset[int]:
        return self._adj[q]

    def degree(self, q: int) -> int:
        return len(self._adj[q])

    def adjacent(self, a: int, b: int) -> bool:
        return b in self._adj[a]

    def distance(self, a: int, b: int) -> int:
        return int(self.dist[a, b])

    def shortest_path(self, a: int, b: int) -> list[int]:
        """Shortest path from ``a`` to ``b``; ties go to the lowest-numbered next hop."""
        path = [a]
        while path[-1] != b:
            here = path[-1]
            path.append(min(v for v in self._adj[here] if self.dist[v, b] == self.dist[here, b] - 1))
        return path

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    def to_json(self) -> dict:
        return {"qubits": self.num_qubits, "edges": [list(e) for e in self.edges]}

    def __eq__(self, other):
        if not isinstance(other, CouplingMap):
            return NotImplemented
        return self.num_qubits == other.num_qubits and self.edges == other.edges

    def __hash__(self):
        return hash((self.num_qubits, self.edges))

    def __repr__(self):
        return f"CouplingMap(qubits={self.num_qubits}, edges={len(self.edges)})"


def distance(cmap: CouplingMap, a: int, b: int) -> int:
    return cmap.distance(a, b)


TOKYO_EDGES = (
    # rows
    (0, 1), (1, 2), (2, 3), (3, 4), (5, 6), (6, 7), (7, 8), (8, 9),
    (10, 11), (11, 12), (12, 13), (13, 14), (15, 16), (16, 17), (17, 18), (18, 19),
    # columns
    (0, 5), (5, 10), (10, 15), (1, 6), (6, 11), (11, 16), (2, 7), (7, 12), (12, 17),
    (3, 8), (8, 13), (13, 18), (4, 9), (9, 14), (14, 19),
    # diagonals
    (1, 7), (7, 13), (13, 19), (2, 6), (6, 10), (3, 9), (4, 8), (8, 12), (12, 16),
    (5, 11), (11, 17), (14, 18),
)


def tokyo_map() -> CouplingMap:
    """The 20-qubit IBM Q Tokyo device."""
    return CouplingMap(20, TOKYO_EDGES)


def line_map(m: int) -> CouplingMap:
    return CouplingMap(m, [(i, i + 1) for i in range(m - 1)])


def load_map(source) -> CouplingMap:
    """Read ``{"qubits": m, "edges": [[i, j], ...]}`` from a JSON path or stream; a dict is taken as already parsed."""
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            data = json.load(fh)
    try:
        m = data["qubits"]
        edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise CouplingMapError(f"malformed coupling map: missing {exc}") from None
    if not isinstance(m, int) or isinstance(m, bool):
        raise CouplingMapError("'qubits' must be an integer")
    if not isinstance(edges, list) or not all(
            isinstance(e, (list, tuple)) and len(e) == 2 and all(isinstance(x, int) for x in e)
            for e in edges):
        raise CouplingMapError("'edges' must be a list of integer pairs")
    return CouplingMap(m, edges)


@dataclass(frozen=True)
class VirtualEdge:
    """A teleport move: data on ``source`` jumps to ``dest`` through the channel ``(near, dest)``."""

    source: int
    near: int
    dest: int


def virtual_edges(cmap: CouplingMap, channels) -> list[VirtualEdge]:
    """Virtual edges contributed by the established channels.

    ``channels`` holds objects with ``ends`` and ``established`` attributes
    (see :class:`telemap.router.Channel`) or bare endpoint pairs. Neighbours of
    one endpoint reach the other endpoint; the opposite endpoint itself is
    never a source.
    """
    out = []
    for ch in channels:
        if isinstance(ch, tuple):
            ends = ch
        else:
            if not ch.established:
                continue
            ends = ch.ends
        a, b = ends
        if a == b:
            raise ValueError(f"channel endpoints must differ, got {ends}")
        for near, far in ((a, b), (b, a)):
            for s in sorted(cmap.neighbors(near)):
                if s != far:
                    out.append(VirtualEdge(s, near, far))
    return out
