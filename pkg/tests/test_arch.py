import io
import json
import random

import numpy as np
import pytest

from telemap.arch import (TOKYO_EDGES, CouplingMap, CouplingMapError, VirtualEdge, line_map,
                          load_map, tokyo_map, virtual_edges)

from oracles import floyd_distances, random_connected_map


def test_tokyo_size():
    t = tokyo_map()
    assert t.num_qubits == 20
    assert len(t.edges) == 43


def test_tokyo_neighbourhoods():
    t = tokyo_map()
    assert t.neighbors(17) == {11, 12, 16, 18}
    assert t.neighbors(2) == {1, 3, 6, 7}
    assert t.adjacent(0, 5)
    assert not t.adjacent(0, 2)


def test_tokyo_distances_match_floyd():
    t = tokyo_map()
    ref = floyd_distances(20, TOKYO_EDGES)
    assert np.array_equal(t.dist, ref.astype(int))
    assert t.distance(0, 0) == 0
    assert t.distance(0, 2) == 2
    assert t.distance(3, 16) == 3


def test_distance_matrix_properties():
    rng = random.Random(5)
    for _ in range(20):
        cmap = random_connected_map(rng, rng.randint(2, 12))
        d = cmap.dist
        assert np.array_equal(d, d.T)
        assert not d.diagonal().any()
        assert (d[:, :, None] <= d[:, None, :] + d[None, :, :]).all()
        for a in range(cmap.num_qubits):
            for b in range(cmap.num_qubits):
                assert (d[a, b] == 1) == cmap.adjacent(a, b)


def test_shortest_path_is_valid():
    t = tokyo_map()
    path = t.shortest_path(3, 16)
    assert len(path) == 4
    assert all(t.adjacent(a, b) for a, b in zip(path, path[1:]))


def test_load_map_from_json():
    cmap = load_map({"qubits": 2, "edges": [[0, 1]]})
    assert cmap.num_qubits == 2 and cmap.distance(0, 1) == 1
    with pytest.raises(CouplingMapError, match="disconnected"):
        load_map({"qubits": 3, "edges": [[0, 1]]})


def test_tokyo_json_round_trip(tmp_path):
    path = tmp_path / "tokyo.json"
    path.write_text(json.dumps(tokyo_map().to_json()))
    assert load_map(path) == tokyo_map()
    assert load_map(io.StringIO(path.read_text())) == tokyo_map()


@pytest.mark.parametrize("data", [
    {"qubits": 2, "edges": [[0, 0]]},
    {"qubits": 2, "edges": [[0, 2]]},
    {"qubits": 2, "edges": [[0, 1], [1, 0]]},
    {"qubits": 2},
    {"qubits": "2", "edges": [[0, 1]]},
    {"qubits": 2, "edges": [[0, 1.5]]},
])
def test_malformed_maps(data):
    with pytest.raises(CouplingMapError):
        load_map(data)


def test_channel_virtual_edges():
    t = tokyo_map()
    moves = virtual_edges(t, [(2, 17)])
    assert len(moves) == 8
    assert {(v.source, v.dest) for v in moves if v.dest == 2} == {(11, 2), (12, 2), (16, 2), (18, 2)}
    assert VirtualEdge(1, 2, 17) in moves


def test_virtual_edges_empty_and_degenerate():
    assert virtual_edges(tokyo_map(), []) == []
    assert virtual_edges(line_map(2), [(0, 1)]) == []


def test_virtual_edge_count_formula():
    rng = random.Random(11)
    for _ in range(50):
        cmap = random_connected_map(rng, rng.randint(3, 10))
        a, b = rng.sample(range(cmap.num_qubits), 2)
        adj = int(cmap.adjacent(a, b))
        moves = virtual_edges(cmap, [(a, b)])
        assert len(moves) == (cmap.degree(a) - adj) + (cmap.degree(b) - adj)
        for v in moves:
            assert cmap.adjacent(v.source, v.near)
            assert {v.near, v.dest} == {a, b}
        # virtual moves never leak into the physical edge set
        assert cmap.edge_set == frozenset(cmap.edges)


def test_distance_matrix_is_read_only():
    with pytest.raises(ValueError):
        tokyo_map().dist[0, 1] = 5


def test_maps_are_hashable_values():
    assert hash(CouplingMap(3, [(1, 0), (1, 2)])) == hash(line_map(3))
