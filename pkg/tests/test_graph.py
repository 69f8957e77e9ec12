import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beepmis.graph import (EdgeListError, Graph, GraphError, diameter, gen_complete,
                           gen_empty, gen_erdos_renyi, gen_grid, gen_path, gen_random_regular,
                           gen_star, gen_swat_line, load_edge_list, max_degree, neighborhood,
                           save_edge_list)


def assert_graph_invariants(g: Graph):
    for v in range(g.n):
        nb = g.adj[v]
        assert list(nb) == sorted(set(nb))
        assert v not in nb
        for u in nb:
            assert v in g.adj[u]
    assert g.max_degree() == max((len(a) for a in g.adj), default=0)


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, edges)


class TestMaxDegree:
    def test_edgeless(self):
        assert max_degree(gen_empty(3)) == 0

    def test_triangle(self):
        assert max_degree(gen_complete(3)) == 2

    def test_star(self):
        assert max_degree(gen_star(5)) == 5


class TestNeighborhood:
    def test_path_radius_one(self):
        assert neighborhood(gen_path(3), 1, 1) == {0, 1, 2}

    def test_path_radius_two_from_end(self):
        assert neighborhood(gen_path(3), 0, 2) == {0, 1, 2}
        assert neighborhood(gen_path(3), 0, 1) == {0, 1}

    @given(graphs(), st.data())
    def test_radius_zero(self, g, data):
        if g.n == 0:
            return
        v = data.draw(st.integers(0, g.n - 1))
        assert neighborhood(g, v, 0) == {v}

    def test_invalid_node(self):
        with pytest.raises(GraphError):
            neighborhood(gen_path(3), 3, 1)


class TestGenerators:
    def test_er_extremes(self):
        assert gen_erdos_renyi(4, 0.0, 1).edges() == []
        assert gen_erdos_renyi(4, 1.0, 1) == gen_complete(4)

    def test_er_deterministic(self):
        assert gen_erdos_renyi(50, 0.1, 9).edges() == gen_erdos_renyi(50, 0.1, 9).edges()
        assert gen_erdos_renyi(50, 0.1, 9).edges() != gen_erdos_renyi(50, 0.1, 10).edges()

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_er_bad_probability(self, p):
        with pytest.raises(GraphError):
            gen_erdos_renyi(4, p, 1)

    def test_swat_line_small(self):
        g = gen_swat_line(2)
        assert g.n == 2 and g.edges() == [(0, 1)]
        g4 = gen_swat_line(4)
        assert set(g4.adj[0]) == {1, 2}
        assert g4.degree(1) == 3 and g4.degree(2) == 3
        assert g4.max_degree() == 3

    @pytest.mark.parametrize("delta", [2, 4, 6, 10, 16])
    def test_swat_line_brute_force(self, delta):
        g = gen_swat_line(delta)
        for i, j in itertools.combinations(range(delta), 2):
            assert (j in g.adj[i]) == (abs(i - j) <= delta // 2)
        assert_graph_invariants(g)

    @pytest.mark.parametrize("delta", [0, 3, -2])
    def test_swat_line_rejects(self, delta):
        with pytest.raises(GraphError):
            gen_swat_line(delta)

    def test_random_regular(self):
        g = gen_random_regular(30, 4, 3)
        assert all(g.degree(v) == 4 for v in range(g.n))
        assert g == gen_random_regular(30, 4, 3)

    def test_grid_diameter(self):
        assert diameter(gen_grid(3, 4)) == 5

    @settings(max_examples=30)
    @given(st.integers(0, 25), st.floats(0, 1), st.integers(0, 1000))
    def test_er_invariants(self, n, p, seed):
        assert_graph_invariants(gen_erdos_renyi(n, p, seed))


class TestEdgeList:
    def test_single_edge(self):
        g = load_edge_list("n 2\n0 1")
        assert g.n == 2 and g.edges() == [(0, 1)]

    def test_edgeless(self):
        g = load_edge_list("n 3")
        assert g.n == 3 and g.edges() == []

    @pytest.mark.parametrize("text,line", [
        ("n 2\n0 0", 2),
        ("n 2\n0 2", 2),
        ("n 2\n0 1\nx y", 3),
        ("n 2\n0 1 2", 2),
        ("0 1", 1),
        ("", 1),
    ])
    def test_errors_carry_line_numbers(self, text, line):
        with pytest.raises(EdgeListError) as exc:
            load_edge_list(text)
        assert exc.value.lineno == line

    def test_self_loop_message(self):
        with pytest.raises(EdgeListError, match="self-loop"):
            load_edge_list("n 2\n0 0")

    @given(graphs())
    def test_roundtrip(self, g):
        assert load_edge_list(save_edge_list(g)) == g
