import xml.etree.ElementTree as ET

import numpy as np
import pytest

from gsdeform.graphstate import (
    encoded_graph_state,
    graph_state,
    simple_graph,
    stabilizer_generator,
    two_site_rdm,
    write_dot,
    write_graphml,
    z_measure_delete,
)


def ring(n):
    return simple_graph(n, [(i, (i + 1) % n) for i in range(n)])


def random_graph(rng, n, p=0.4):
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
    return simple_graph(n, edges)


class TestSimpleGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            simple_graph(3, [(0, 0)])

    def test_rejects_parallel(self):
        with pytest.raises(ValueError, match="parallel"):
            simple_graph(3, [(0, 1), (1, 0)])

    def test_neighbors_sorted(self):
        g = simple_graph(4, [(2, 0), (0, 3), (1, 0)])
        assert g.neighbors(0) == [1, 2, 3]


class TestGraphState:
    def test_single_edge(self):
        state = graph_state(simple_graph(2, [(0, 1)]))
        assert np.allclose(state, np.array([1, 1, 1, -1]) / 2)

    def test_empty_graph_plus_states(self):
        state = graph_state(simple_graph(3, []))
        assert np.allclose(state, np.full(8, 1 / np.sqrt(8)))

    def test_stabilizers_fix_state(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            g = random_graph(rng, 6)
            state = graph_state(g)
            for v in range(g.n):
                s = stabilizer_generator(g, v)
                assert np.linalg.norm(s @ state - state) < 1e-12

    def test_norm_and_edge_order_invariance(self):
        g1 = simple_graph(5, [(0, 1), (1, 2), (3, 4), (0, 4)])
        g2 = simple_graph(5, [(0, 4), (3, 4), (0, 1), (1, 2)])
        assert abs(np.linalg.norm(graph_state(g1)) - 1) < 1e-12
        assert np.allclose(graph_state(g1), graph_state(g2))


class TestTwoSiteRdm:
    def test_ring_adjacent_maximally_mixed(self):
        state = graph_state(ring(6))
        rdm = two_site_rdm(state, 0, 1)
        assert np.linalg.norm(rdm - np.eye(4) / 4) < 1e-12

    def test_product_state_pure(self):
        state = graph_state(simple_graph(4, []))
        rdm = two_site_rdm(state, 1, 3)
        vals = np.linalg.eigvalsh(rdm)
        assert abs(vals[-1] - 1) < 1e-12 and np.all(vals[:-1] < 1e-12)

    def test_same_site_rejected(self):
        with pytest.raises(ValueError):
            two_site_rdm(graph_state(ring(4)), 2, 2)


class TestZMeasureDelete:
    def test_c4_to_path(self):
        g = z_measure_delete(ring(4), 0)
        assert g.n == 3 and len(g.edges) == 2

    def test_isolated_vertex(self):
        g = simple_graph(3, [(0, 1)])
        out = z_measure_delete(g, 2)
        assert out.n == 2 and out.edges == ((0, 1),)

    def test_state_level_rule(self):
        # projecting qubit v onto |z> leaves graph_state(G - v) up to
        # Z byproducts on the neighborhood (outcome 1) and renormalization
        rng = np.random.default_rng(5)
        for _ in range(4):
            g = random_graph(rng, 5)
            v = int(rng.integers(g.n))
            state = graph_state(g).reshape([2] * g.n)
            remaining = graph_state(z_measure_delete(g, v))
            nbrs = [u - 1 if u > v else u for u in g.neighbors(v)]
            for outcome in (0, 1):
                proj = np.moveaxis(state, v, 0)[outcome].reshape(-1)
                proj = proj / np.linalg.norm(proj)
                expect = remaining.copy()
                if outcome == 1:
                    bits = (
                        np.arange(1 << (g.n - 1))[:, None]
                        >> (g.n - 2 - np.arange(g.n - 1))
                    ) & 1
                    parity = bits[:, nbrs].sum(axis=1) if nbrs else np.zeros(len(bits))
                    expect = expect * (-1.0) ** parity
                assert abs(abs(np.vdot(proj, expect)) - 1) < 1e-10


class TestEncodedGraphState:
    def test_qubit_bases_reduce_to_graph_state(self):
        g = ring(4)
        e0, e1 = np.array([1.0, 0j]), np.array([0j, 1.0])
        enc = encoded_graph_state(g, [(e0, e1)] * 4)
        assert np.allclose(enc, graph_state(g))

    def test_supported_on_logical_subspaces(self):
        g = ring(4)
        v0 = np.array([1.0, 0, 0], dtype=complex)
        v1 = np.array([0, 0, 1.0], dtype=complex)
        enc = encoded_graph_state(g, [(v0, v1)] * 4)
        t = enc.reshape(3, 3, 3, 3)
        # the middle level (outside span{v0,v1}) never appears
        assert np.linalg.norm(np.take(t, 1, axis=2)) < 1e-12
        assert abs(np.linalg.norm(enc) - 1) < 1e-12

    def test_rejects_non_orthonormal(self):
        g = simple_graph(2, [(0, 1)])
        v0 = np.array([1.0, 0, 0], dtype=complex)
        v1 = np.array([1.0, 1.0, 0], dtype=complex) / np.sqrt(2)
        with pytest.raises(ValueError, match="orthonormal"):
            encoded_graph_state(g, [(v0, v1)] * 2)


class TestExport:
    def test_graphml_parses(self, tmp_path):
        g = simple_graph(4, [(0, 1), (2, 3)], pos=np.zeros((4, 2)))
        path = tmp_path / "g.graphml"
        write_graphml(g, path)
        root = ET.parse(path).getroot()
        ns = "{http://graphml.graphdrawing.org/xmlns}"
        nodes = root.findall(f".//{ns}node")
        edges = root.findall(f".//{ns}edge")
        assert len(nodes) == 4 and len(edges) == 2

    def test_dot_output(self, tmp_path):
        g = simple_graph(3, [(0, 2)])
        path = tmp_path / "g.dot"
        write_dot(g, path)
        text = path.read_text()
        assert text.startswith("graph {") and "n0 -- n2;" in text
