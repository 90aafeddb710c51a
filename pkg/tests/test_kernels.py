"""Tests for the Metropolis/measurement kernels and backend equivalence."""

import numpy as np
import pytest

from gsdeform._kernels import KERNEL_NAME, backends
from gsdeform._kernels import reference
from gsdeform.lattice import (
    build_star_lattice,
    config_stats,
    config_weight,
    decompose_domains,
    domain_stats,
    encoded_graph,
    has_crossing_path,
    monochromatic_dodecagons,
)


def weight_base(delta):
    return (3.0 - delta * delta) / (2.0 * delta * delta)


def proposal_arrays(rng, nswp, n):
    sites = rng.integers(0, n, (nswp, n)).astype(np.int32)
    labels = rng.integers(1, 3, (nswp, n)).astype(np.int8)
    urand = rng.random((nswp, n))
    return sites, labels, urand


def equilibrated_config(lat, delta, seed, nswp=300):
    """A typical valid configuration, produced by running the chain."""
    rng = np.random.default_rng(seed)
    sigma = lat.color.copy()
    mod = backends()[KERNEL_NAME]
    mod.run_sweeps(sigma, lat.color, lat.nbr_ptr, lat.nbr, weight_base(delta),
                   *proposal_arrays(rng, nswp, lat.n))
    return sigma


def empty_faces():
    return np.zeros((0, 12), dtype=np.int32)


class TestBackendSelection:
    def test_reference_always_available(self):
        assert "py" in backends()

    def test_active_backend_is_registered(self):
        assert KERNEL_NAME in backends()

    def test_backends_export_same_api(self):
        for mod in backends().values():
            for fn in ("run_sweeps", "run_sweeps_measured",
                       "accumulate_occupancy", "measure_config"):
                assert hasattr(mod, fn)


@pytest.mark.skipif(len(backends()) < 2, reason="compiled backend not built")
class TestBackendParity:
    """Fixed proposal arrays must yield bit-identical chains on all backends."""

    @pytest.mark.parametrize("delta", [0.3, 0.6, 1.0])
    def test_sweeps_and_records_identical(self, delta):
        lat = build_star_lattice(2, 2)
        rng = np.random.default_rng(int(delta * 100))
        sites, labels, urand = proposal_arrays(rng, 400, lat.n)
        results = {}
        for name, mod in backends().items():
            sigma = lat.color.copy()
            acc, rec = mod.run_sweeps_measured(
                sigma, lat.color, lat.nbr_ptr, lat.nbr, weight_base(delta),
                sites, labels, urand, lat.edges, lat.cell_i, lat.cell_j,
                lat.L1, lat.L2, lat.dodecagons, True)
            results[name] = (acc, rec, sigma)
        acc_c, rec_c, sig_c = results["c"]
        acc_p, rec_p, sig_p = results["py"]
        assert acc_c == acc_p
        assert np.array_equal(sig_c, sig_p)
        for key in rec_c:
            assert np.array_equal(rec_c[key], rec_p[key]), key

    def test_open_boundary_parity(self):
        lat = build_star_lattice(3, 2, boundary="open")
        rng = np.random.default_rng(5)
        sites, labels, urand = proposal_arrays(rng, 300, lat.n)
        outs = []
        for mod in backends().values():
            sigma = lat.color.copy()
            acc, rec = mod.run_sweeps_measured(
                sigma, lat.color, lat.nbr_ptr, lat.nbr, weight_base(0.45),
                sites, labels, urand, lat.edges, lat.cell_i, lat.cell_j,
                lat.L1, lat.L2, empty_faces(), False)
            outs.append((acc, sigma, rec["cross1"], rec["cross2"]))
        assert outs[0][0] == outs[1][0]
        assert np.array_equal(outs[0][1], outs[1][1])
        assert np.array_equal(outs[0][2], outs[1][2])
        assert np.array_equal(outs[0][3], outs[1][3])

    def test_occupancy_tables_identical(self):
        lat = build_star_lattice(1, 1)
        rng = np.random.default_rng(11)
        sites, labels, urand = proposal_arrays(rng, 500, lat.n)
        tables = []
        for mod in backends().values():
            sigma = lat.color.copy()
            occ = np.zeros(3**lat.n)
            mod.accumulate_occupancy(sigma, lat.color, lat.nbr_ptr, lat.nbr,
                                     weight_base(0.5), sites, labels, urand, occ)
            tables.append((occ, sigma.copy()))
        assert np.array_equal(tables[0][0], tables[1][0])
        assert np.array_equal(tables[0][1], tables[1][1])


class TestAcceptanceRatio:
    """The local ratio must equal the global weight ratio w(sigma')/w(sigma)."""

    @pytest.mark.parametrize("delta", [0.2, 0.5, 0.8, 1.0])
    def test_ratio_matches_full_recompute(self, delta):
        lat = build_star_lattice(2, 2)
        adj = reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
        col = lat.color.tolist()
        beta = weight_base(delta)
        rng = np.random.default_rng(17)
        checked_zero = 0
        for trial in range(25):
            sigma = equilibrated_config(lat, delta, seed=1000 + trial)
            w0 = config_weight(lat, sigma, delta)
            assert w0 > 0
            sig = sigma.tolist()
            for _ in range(20):
                v = int(rng.integers(0, lat.n))
                lab = int(rng.integers(1, 3))
                b, ratio = reference._ratio(v, lab, sig, col, adj, beta)
                new = sigma.copy()
                new[v] = b
                w1 = config_weight(lat, new, delta)
                if w1 == 0.0:
                    assert ratio == 0.0
                    checked_zero += 1
                else:
                    assert ratio == pytest.approx(w1 / w0, rel=1e-12)
        assert checked_zero > 0  # inadmissible proposals were exercised

    def test_ratio_exact_powers_of_two_at_delta_one(self):
        # at delta=1 the weight base is 1, so every ratio is exactly 2^dL;
        # census every proposal from a batch of equilibrated configurations
        lat = build_star_lattice(2, 2)
        adj = reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
        col = lat.color.tolist()
        seen = set()
        rejects = 0
        for trial in range(25):
            sigma = equilibrated_config(lat, 1.0, seed=2000 + trial)
            sig = sigma.tolist()
            for v in range(lat.n):
                for lab in (1, 2):
                    _, ratio = reference._ratio(v, lab, sig, col, adj, 1.0)
                    if ratio > 0.0:
                        exponent = np.log2(ratio)
                        assert exponent == np.round(exponent)
                        seen.add(int(exponent))
                    else:
                        rejects += 1
        assert rejects > 0  # odd-cycle rejections exercised
        assert 0 in seen  # equal-weight moves

    def test_loop_creating_and_destroying_ratios(self):
        # exhaustive search on the 6-site torus: flips that close or open a
        # loop must have ratio exactly 2 or 1/2 at delta=1
        import itertools

        lat = build_star_lattice(1, 1)
        adj = reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
        col = lat.color.tolist()
        seen = set()
        for cfg in itertools.product(range(3), repeat=lat.n):
            sigma = np.array(cfg, dtype=np.int8)
            if config_weight(lat, sigma, 1.0) == 0.0:
                continue
            for v in range(lat.n):
                for lab in (1, 2):
                    _, ratio = reference._ratio(v, lab, list(cfg), col, adj, 1.0)
                    if ratio > 0.0:
                        seen.add(ratio)
        assert 2.0 in seen
        assert 0.5 in seen
        assert all(np.log2(r) == np.round(np.log2(r)) for r in seen)

    def test_monochromatic_triangle_proposal_rejected(self):
        # two sites of a triangle already share an outcome; completing it
        # would close an odd cycle, so the ratio is exactly zero
        lat = build_star_lattice(1, 1)
        tri = lat.triangles[0]
        sigma = lat.color.copy()
        target = sigma[tri[0]]
        sigma[tri[1]] = target
        assert config_weight(lat, sigma, 0.7) > 0
        adj = reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
        a = int(sigma[tri[2]])
        lab = (int(target) - a) % 3
        b, ratio = reference._ratio(int(tri[2]), lab, sigma.tolist(),
                                    lat.color.tolist(), adj, weight_base(0.7))
        assert b == target
        assert ratio == 0.0

    def test_equal_weight_moves_accepted_with_probability_one(self):
        # from the coloring, flipping any single site keeps (h, L) unchanged,
        # so at delta=1 the ratio is exactly 1
        lat = build_star_lattice(1, 1)
        adj = reference._adjacency_lists(lat.nbr_ptr, lat.nbr)
        sig = lat.color.tolist()
        for v in range(lat.n):
            for lab in (1, 2):
                _, ratio = reference._ratio(v, lab, sig, lat.color.tolist(),
                                            adj, 1.0)
                assert ratio == 1.0


class TestChainValidity:
    @pytest.mark.parametrize("delta", [0.3, 0.7, 1.0])
    def test_chain_never_visits_zero_weight(self, delta):
        lat = build_star_lattice(2, 2)
        mod = backends()[KERNEL_NAME]
        rng = np.random.default_rng(int(delta * 10))
        sigma = lat.color.copy()
        for _ in range(60):
            mod.run_sweeps(sigma, lat.color, lat.nbr_ptr, lat.nbr,
                           weight_base(delta), *proposal_arrays(rng, 5, lat.n))
            assert config_weight(lat, sigma, delta) > 0

    def test_determinism(self):
        lat = build_star_lattice(2, 3)
        mod = backends()[KERNEL_NAME]
        runs = []
        for _ in range(2):
            rng = np.random.default_rng(99)
            sigma = lat.color.copy()
            acc, rec = mod.run_sweeps_measured(
                sigma, lat.color, lat.nbr_ptr, lat.nbr, weight_base(0.5),
                *proposal_arrays(rng, 200, lat.n), lat.edges, lat.cell_i,
                lat.cell_j, lat.L1, lat.L2, empty_faces(), True)
            runs.append((acc, sigma, rec))
        assert runs[0][0] == runs[1][0]
        assert np.array_equal(runs[0][1], runs[1][1])
        for key in runs[0][2]:
            assert np.array_equal(runs[0][2][key], runs[1][2][key])


class TestMeasurement:
    """Kernel per-sweep measurements must agree with the readable pipeline."""

    @pytest.mark.parametrize("boundary,L1,L2", [("periodic", 2, 2),
                                                ("open", 3, 3)])
    def test_measure_matches_highlevel(self, boundary, L1, L2):
        lat = build_star_lattice(L1, L2, boundary=boundary)
        mod = backends()[KERNEL_NAME]
        faces = lat.dodecagons if boundary == "periodic" else empty_faces()
        for trial in range(12):
            sigma = equilibrated_config(lat, 0.6, seed=300 + trial)
            out = mod.measure_config(sigma, lat.nbr_ptr, lat.nbr, lat.edges,
                                     lat.cell_i, lat.cell_j, lat.L1, lat.L2,
                                     faces)
            decomp = decompose_domains(lat, sigma)
            stats = config_stats(lat, sigma)
            assert stats.admissible
            assert out["ndom"] == decomp.n_domains
            mx, _, _ = domain_stats(decomp)
            assert out["maxdom"] == mx
            eg = encoded_graph(lat, decomp)
            assert out["cross1"] == has_crossing_path(eg, lat, 1)
            assert out["cross2"] == has_crossing_path(eg, lat, 2)
            if boundary == "periodic":
                assert out["mono"] == monochromatic_dodecagons(lat, sigma)

    def test_measure_code_roundtrip(self):
        lat = build_star_lattice(1, 1)
        mod = backends()[KERNEL_NAME]
        rng = np.random.default_rng(8)
        sigma = rng.integers(0, 3, lat.n).astype(np.int8)
        out = mod.measure_config(sigma, lat.nbr_ptr, lat.nbr, lat.edges,
                                 lat.cell_i, lat.cell_j, 1, 1, empty_faces())
        code = out["code"]
        digits = []
        for _ in range(lat.n):
            digits.append(code % 3)
            code //= 3
        assert digits == sigma.tolist()

    def test_sweep_records_match_one_shot_measure(self):
        lat = build_star_lattice(2, 2)
        mod = backends()[KERNEL_NAME]
        rng = np.random.default_rng(31)
        sites, labels, urand = proposal_arrays(rng, 50, lat.n)
        sigma = lat.color.copy()
        acc, rec = mod.run_sweeps_measured(
            sigma, lat.color, lat.nbr_ptr, lat.nbr, weight_base(0.8),
            sites, labels, urand, lat.edges, lat.cell_i, lat.cell_j,
            lat.L1, lat.L2, lat.dodecagons, False)
        out = mod.measure_config(sigma, lat.nbr_ptr, lat.nbr, lat.edges,
                                 lat.cell_i, lat.cell_j, lat.L1, lat.L2,
                                 lat.dodecagons)
        assert rec["ndom"][-1] == out["ndom"]
        assert rec["maxdom"][-1] == out["maxdom"]
        assert rec["mono"][-1] == out["mono"]
        assert rec["nmatch"][-1] == int(np.sum(sigma == lat.color))


class TestOccupancy:
    def test_mass_conservation_and_support(self):
        lat = build_star_lattice(1, 1)
        mod = backends()[KERNEL_NAME]
        rng = np.random.default_rng(12)
        nswp = 2_000
        sites, labels, urand = proposal_arrays(rng, nswp, lat.n)
        sigma = lat.color.copy()
        occ = np.zeros(3**lat.n)
        mod.accumulate_occupancy(sigma, lat.color, lat.nbr_ptr, lat.nbr,
                                 weight_base(0.5), sites, labels, urand, occ)
        assert occ.sum() == pytest.approx(nswp * lat.n, rel=1e-12)
        # no mass may ever land on an inadmissible configuration
        for code in np.nonzero(occ)[0][:200]:
            digits = []
            c = int(code)
            for _ in range(lat.n):
                digits.append(c % 3)
                c //= 3
            assert config_stats(lat, np.array(digits, dtype=np.int8)).admissible

    def test_wrong_table_size_rejected(self):
        lat = build_star_lattice(1, 1)
        mod = backends()[KERNEL_NAME]
        rng = np.random.default_rng(1)
        with pytest.raises(ValueError):
            mod.accumulate_occupancy(lat.color.copy(), lat.color, lat.nbr_ptr,
                                     lat.nbr, 1.0,
                                     *proposal_arrays(rng, 2, lat.n),
                                     np.zeros(100))
