import io

import numpy as np
import pytest

from geoas.asgraph import (AsGraph, bfs_parents, generate_pfp, load_graph,
                           path_from_parents, save_graph, shortest_as_path)
from geoas.errors import FormatError, NoPathError, ParameterError


def _floyd_warshall(g: AsGraph) -> np.ndarray:
    n = g.node_count
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v in g.edges():
        d[u, v] = d[v, u] = 1.0
    for k in range(n):
        d = np.minimum(d, d[:, k][:, None] + d[k, :][None, :])
    return d


def _random_graph(n, extra, seed):
    rng = np.random.default_rng(seed)
    edges = {(i, int(rng.integers(0, i))) for i in range(1, n)}
    while len(edges) < n - 1 + extra:
        u, v = rng.integers(0, n, 2)
        if u != v:
            edges.add((max(u, v), min(u, v)))
    return AsGraph(n, [(v, u) for u, v in edges])


class TestAsGraph:
    def test_rejects_bad_edges(self):
        with pytest.raises(ParameterError):
            AsGraph(3, [(0, 0)])
        with pytest.raises(ParameterError):
            AsGraph(3, [(0, 1), (1, 0)])
        with pytest.raises(ParameterError):
            AsGraph(3, [(0, 3)])
        with pytest.raises(ParameterError):
            AsGraph(0, [])

    def test_adjacency(self):
        g = AsGraph(4, [(2, 0), (0, 1), (2, 3)])
        assert list(g.neighbors(0)) == [1, 2]
        assert g.degree(2) == 2
        assert g.max_degree() == 2
        assert g.has_edge(0, 2) and g.has_edge(2, 0)
        assert not g.has_edge(1, 3)
        assert g.edge_count == 3
        assert list(g.edges()) == [(0, 1), (0, 2), (2, 3)]

    def test_connectivity(self):
        assert AsGraph(3, [(0, 1), (1, 2)]).is_connected()
        assert not AsGraph(3, [(0, 1)]).is_connected()
        assert AsGraph(1, []).is_connected()


class TestShortestPath:
    def test_direct_edge_wins_on_cycle(self):
        ring = AsGraph(3, [(0, 1), (1, 2), (0, 2)])
        assert shortest_as_path(ring, 0, 2) == [0, 2]

    def test_single_node_path(self):
        g = AsGraph(2, [(0, 1)])
        assert shortest_as_path(g, 1, 1) == [1]

    def test_diamond_prefers_smaller_ids(self):
        g = AsGraph(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
        assert shortest_as_path(g, 0, 3) == [0, 1, 3]

    def test_no_path_raises(self):
        g = AsGraph(4, [(0, 1), (2, 3)])
        with pytest.raises(NoPathError):
            shortest_as_path(g, 0, 3)

    def test_paths_match_distance_oracle(self):
        for seed in range(12):
            g = _random_graph(30, 25, seed)
            dist = _floyd_warshall(g)
            parents = bfs_parents(g, 0)
            for v in range(g.node_count):
                path = path_from_parents(parents, 0, v)
                assert path[0] == 0 and path[-1] == v
                assert len(path) - 1 == dist[0, v]
                for a, b in zip(path, path[1:]):
                    assert g.has_edge(a, b)

    def test_bfs_deterministic(self):
        g = _random_graph(40, 30, 99)
        p1 = bfs_parents(g, 5)
        p2 = bfs_parents(g, 5)
        assert np.array_equal(p1, p2)


class TestGeneratePfp:
    def test_triangle_seed(self):
        g = generate_pfp(3, 0.4, 0.11, seed=1)
        assert sorted(g.edges()) == [(0, 1), (0, 2), (1, 2)]

    def test_sizes_and_connectivity(self):
        for seed in (0, 1, 2):
            g = generate_pfp(200, 0.4, 0.11, seed=seed)
            assert g.node_count == 200
            assert g.is_connected()
            # steps add between one and three edges each
            steps = 200 - 3
            assert 3 + steps <= g.edge_count <= 3 + 3 * steps

    def test_deterministic_per_seed(self):
        a = generate_pfp(150, 0.4, 0.11, seed=42)
        b = generate_pfp(150, 0.4, 0.11, seed=42)
        c = generate_pfp(150, 0.4, 0.11, seed=43)
        assert a == b
        assert a != c

    def test_rich_get_richer(self):
        g = generate_pfp(600, 0.4, 0.11, seed=3)
        degs = np.sort(g.degrees())[::-1]
        # heavy tail: the top node dwarfs the median
        assert degs[0] >= 20
        assert np.median(degs) <= 4

    def test_tree_seed_variant(self):
        g = generate_pfp(50, 0.4, 0.11, seed=5, seed_size=10)
        assert g.node_count == 50
        assert g.is_connected()

    def test_parameter_validation(self):
        with pytest.raises(ParameterError):
            generate_pfp(100, 0.7, 0.5)
        with pytest.raises(ParameterError):
            generate_pfp(100, -0.1, 0.5)
        with pytest.raises(ParameterError):
            generate_pfp(2, 0.4, 0.11)
        with pytest.raises(ParameterError):
            generate_pfp(100, 0.4, 0.11, seed_size=1)
        with pytest.raises(ParameterError):
            generate_pfp(10, 0.4, 0.11, seed_size=11)


class TestGraphIO:
    def test_roundtrip(self):
        g = generate_pfp(80, 0.4, 0.11, seed=8)
        buf = io.StringIO()
        save_graph(g, buf, header={"p": 0.4})
        buf.seek(0)
        assert load_graph(buf) == g

    def test_header_is_comment(self):
        g = AsGraph(2, [(0, 1)])
        buf = io.StringIO()
        save_graph(g, buf, header={"q": 0.11})
        text = buf.getvalue()
        assert text.startswith("# q 0.11\n")
        assert "nodes 2\nedge 0 1\n" in text

    def test_rejects_unordered_edge(self):
        with pytest.raises(FormatError) as err:
            load_graph(io.StringIO("nodes 3\nedge 2 1\n"), path="g.txt")
        assert "g.txt:2" in str(err.value)

    def test_rejects_self_loop(self):
        with pytest.raises(FormatError):
            load_graph(io.StringIO("nodes 3\nedge 1 1\n"))

    def test_rejects_missing_header(self):
        with pytest.raises(FormatError):
            load_graph(io.StringIO("edge 0 1\n"))

    def test_rejects_unknown_line(self):
        with pytest.raises(FormatError):
            load_graph(io.StringIO("nodes 2\nvertex 0\n"))

    def test_disconnected_loads_with_warning(self, caplog):
        text = "nodes 4\nedge 0 1\nedge 2 3\n"
        with caplog.at_level("WARNING"):
            g = load_graph(io.StringIO(text))
        assert not g.is_connected()
        assert any("not connected" in r.message for r in caplog.records)
