import numpy as np
import pytest

from gsdeform.deform import deformed_weight_base
from gsdeform.lattice import (
    DomainDecomposition,
    build_star_lattice,
    config_stats,
    config_weight,
    decompose_domains,
    dodecagon_heuristic,
    domain_stats,
    encoded_graph,
    has_crossing_path,
    monochromatic_dodecagons,
)


def brute_force_domains(lat, sigma):
    """Independent BFS recompute: returns (labels, n_domains, n_inter_edges)."""
    label = -np.ones(lat.n, dtype=int)
    k = 0
    for start in range(lat.n):
        if label[start] >= 0:
            continue
        stack = [start]
        label[start] = k
        while stack:
            v = stack.pop()
            for u in lat.neighbors(v):
                if sigma[u] == sigma[v] and label[u] < 0:
                    label[u] = k
                    stack.append(u)
        k += 1
    inter = sum(1 for a, b in lat.edges if label[a] != label[b])
    return label, k, inter


class TestConstruction:
    def test_unit_torus_counts(self):
        lat = build_star_lattice(1, 1)
        assert lat.n == 6 and len(lat.edges) == 9
        degrees = np.bincount(lat.edges.ravel(), minlength=lat.n)
        assert np.all(degrees == 3)

    def test_coloring_proper(self):
        lat = build_star_lattice(4, 4)
        for a, b in lat.edges:
            assert lat.color[a] != lat.color[b]

    def test_triangle_count(self):
        lat = build_star_lattice(3, 3)
        assert lat.triangles.shape == (18, 3)
        edge_set = {tuple(e) for e in lat.edges.tolist()}
        for tri in lat.triangles:
            for a, b in [(0, 1), (1, 2), (2, 0)]:
                u, v = sorted((tri[a], tri[b]))
                assert (u, v) in edge_set

    def test_dodecagons_are_faces(self):
        lat = build_star_lattice(4, 4)
        assert lat.dodecagons.shape == (16, 3 * 4)
        edge_set = {tuple(e) for e in lat.edges.tolist()}
        for face in lat.dodecagons:
            assert len(set(face.tolist())) == 12
            for k in range(12):
                u, v = sorted((face[k], face[(k + 1) % 12]))
                assert (u, v) in edge_set
        # vertex configuration 3.12.12: each site lies on exactly two faces
        counts = np.bincount(lat.dodecagons.ravel(), minlength=lat.n)
        assert np.all(counts == 2)
        # Euler characteristic of the torus: V - E + F = 0
        n_faces = len(lat.triangles) + len(lat.dodecagons)
        assert lat.n - len(lat.edges) + n_faces == 0

    def test_open_boundary(self):
        lat = build_star_lattice(3, 4, boundary="open")
        assert lat.n == 72
        assert len(lat.edges) == 9 * 12 - 3 - 4
        degrees = np.bincount(lat.edges.ravel(), minlength=lat.n)
        assert degrees.min() == 2 and degrees.max() == 3

    def test_rejects_degenerate(self):
        with pytest.raises(ValueError):
            build_star_lattice(0, 3)
        with pytest.raises(ValueError):
            build_star_lattice(1, 5, boundary="open")


class TestDomains:
    def test_coloring_gives_singletons(self):
        lat = build_star_lattice(2, 2)
        decomp = decompose_domains(lat, lat.color)
        assert decomp.n_domains == lat.n
        assert decomp.n_inter_edges == len(lat.edges)

    def test_uniform_config_single_domain(self):
        lat = build_star_lattice(1, 1)
        decomp = decompose_domains(lat, np.zeros(6, dtype=np.int8))
        assert decomp.n_domains == 1 and decomp.n_inter_edges == 0

    def test_against_brute_force(self):
        rng = np.random.default_rng(42)
        lat = build_star_lattice(3, 3)
        for _ in range(20):
            sigma = rng.integers(0, 3, lat.n).astype(np.int8)
            decomp = decompose_domains(lat, sigma)
            labels, k, inter = brute_force_domains(lat, sigma)
            assert decomp.n_domains == k
            assert decomp.n_inter_edges == inter
            # same partition up to relabeling
            pairs = set(zip(decomp.domain_id.tolist(), labels.tolist()))
            assert len(pairs) == k

    def test_domain_stats(self):
        lat = build_star_lattice(2, 2)
        mx, mean, count = domain_stats(decompose_domains(lat, lat.color))
        assert (mx, mean, count) == (1, 1.0, lat.n)
        all_x = np.zeros(lat.n, dtype=np.int8)
        mx, mean, count = domain_stats(decompose_domains(lat, all_x))
        assert (mx, mean, count) == (lat.n, float(lat.n), 1)


class TestWeight:
    def test_monochromatic_triangle_inadmissible(self):
        lat = build_star_lattice(2, 2)
        sigma = lat.color.copy()
        sigma[lat.triangles[0]] = 0  # odd cycle of like outcomes
        assert config_weight(lat, sigma, 0.7) == 0.0
        assert not config_stats(lat, sigma).admissible

    def test_coloring_weight_value(self):
        lat = build_star_lattice(1, 1)
        delta = 0.5
        beta = deformed_weight_base(delta)
        # singleton domains: L = 6 - 9 = -3, every site matches
        expect = beta**6 * 2.0**-3
        assert np.isclose(config_weight(lat, lat.color, delta), expect, rtol=1e-12)

    def test_delta_one_label_permutation_invariance(self):
        lat = build_star_lattice(2, 2)
        rng = np.random.default_rng(3)
        for _ in range(10):
            sigma = rng.integers(0, 3, lat.n).astype(np.int8)
            w = config_weight(lat, sigma, 1.0)
            perm = rng.permutation(3).astype(np.int8)
            assert np.isclose(config_weight(lat, perm[sigma], 1.0), w, rtol=1e-12)

    def test_loop_term_flag(self):
        lat = build_star_lattice(1, 1)
        delta = 0.8
        w_on = config_weight(lat, lat.color, delta)
        w_off = config_weight(lat, lat.color, delta, include_loop_term=False)
        assert np.isclose(w_on / w_off, 2.0**-3, rtol=1e-12)

    def test_coloring_dominates_as_delta_shrinks(self):
        lat = build_star_lattice(1, 1)
        rng = np.random.default_rng(9)
        sigma = lat.color.copy()
        sigma[0] = (sigma[0] + 1) % 3
        ratios = []
        for delta in (0.5, 0.1, 0.02):
            ratios.append(
                config_weight(lat, lat.color, delta) / config_weight(lat, sigma, delta)
            )
        assert ratios[0] < ratios[1] < ratios[2]
        assert ratios[2] > 1e3


class TestEncodedGraph:
    def test_mod2_rule_synthetic(self):
        lat = build_star_lattice(1, 1)
        # fake split of the six sites into two domains of three
        domain_id = np.array([0, 0, 0, 1, 1, 1])
        domains = [np.arange(3), np.arange(3, 6)]
        for mult, expect_edge in [(2, False), (3, True)]:
            decomp = DomainDecomposition(
                domain_id=domain_id,
                domains=domains,
                bond_multiplicity={(0, 1): mult},
                field_sigma=None,
            )
            eg = encoded_graph(lat, decomp, check_admissible=False)
            assert (len(eg.graph.edges) == 1) == expect_edge

    def test_coloring_reproduces_lattice(self):
        lat = build_star_lattice(2, 3)
        decomp = decompose_domains(lat, lat.color)
        eg = encoded_graph(lat, decomp)
        assert eg.graph.n == lat.n
        assert set(eg.graph.edges) == {tuple(e) for e in lat.edges.tolist()}

    def test_rejects_inadmissible(self):
        lat = build_star_lattice(2, 2)
        sigma = lat.color.copy()
        sigma[lat.triangles[0]] = 1
        decomp = decompose_domains(lat, sigma)
        with pytest.raises(ValueError, match="inadmissible"):
            encoded_graph(lat, decomp)


class TestCrossing:
    def test_coloring_crosses_open_lattice(self):
        lat = build_star_lattice(4, 4, boundary="open")
        eg = encoded_graph(lat, decompose_domains(lat, lat.color))
        assert has_crossing_path(eg, lat, 1)
        assert has_crossing_path(eg, lat, 2)

    def test_isolated_domains_do_not_cross(self):
        lat = build_star_lattice(3, 3, boundary="open")
        decomp = decompose_domains(lat, lat.color)
        eg = encoded_graph(lat, decomp)
        stripped = type(eg)(
            graph=type(eg.graph)(n=eg.graph.n, edges=(), pos=eg.graph.pos),
            centroid=eg.centroid,
            extent=eg.extent,
        )
        assert not has_crossing_path(stripped, lat, 1)
        assert not has_crossing_path(stripped, lat, 2)

    def test_bad_dimension(self):
        lat = build_star_lattice(2, 2, boundary="open")
        eg = encoded_graph(lat, decompose_domains(lat, lat.color))
        with pytest.raises(ValueError):
            has_crossing_path(eg, lat, 3)


class TestDodecagonCounts:
    def test_heuristic_value(self):
        assert np.isclose(dodecagon_heuristic(), 1.129e-5, rtol=1e-3)

    def test_uniform_config_all_faces(self):
        lat = build_star_lattice(4, 4)
        assert monochromatic_dodecagons(lat, np.zeros(lat.n, dtype=np.int8)) == 16

    def test_single_mismatch_breaks_two_faces(self):
        lat = build_star_lattice(4, 4)
        sigma = np.zeros(lat.n, dtype=np.int8)
        sigma[0] = 1
        assert monochromatic_dodecagons(lat, sigma) == 14

    def test_needs_periodic(self):
        lat = build_star_lattice(4, 4, boundary="open")
        with pytest.raises(ValueError):
            monochromatic_dodecagons(lat, np.zeros(lat.n, dtype=np.int8))
