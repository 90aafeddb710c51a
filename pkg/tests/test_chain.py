"""Tests for the deformed spin-1 ring: states, Hamiltonians, spectra."""

import numpy as np
import pytest

from gsdeform import chain
from gsdeform.linalg import embed_term, kron, lowest_eigs
from gsdeform.spin import spin_operators, total_spin_projector

S1 = spin_operators(1)


def apply_chain(ham, vec):
    return ham.operator.apply(vec)


class TestMPS:
    def test_contract_is_normalized(self):
        psi = chain.aklt_mps(5).contract()
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)

    def test_aklt_annihilated_by_every_bond_projector(self):
        n = 6
        psi = chain.aklt_mps(n).contract()
        h = total_spin_projector(1, 1, 2)
        for j in range(n):
            term = embed_term(h, [j, (j + 1) % n], [3] * n)
            assert np.linalg.norm(term.apply(psi)) < 1e-10

    def test_deformed_state_validation(self):
        with pytest.raises(ValueError):
            chain.deformed_ground_state(0.5, 5)
        with pytest.raises(ValueError):
            chain.deformed_ground_state(0.0, 6)
        with pytest.raises(ValueError):
            chain.deformed_ground_state(1.2, 6)

    def test_deformed_state_at_delta_one_is_aklt(self):
        a = chain.aklt_mps(6).contract()
        b = chain.deformed_ground_state(1.0, 6).contract()
        assert abs(np.vdot(a, b)) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("delta", [0.3, 0.7, 1.0])
    @pytest.mark.parametrize("body", [2, 3])
    def test_frustration_free(self, delta, body):
        n = 6
        psi = chain.deformed_ground_state(delta, n).contract()
        ham = chain.build_chain(delta, n, body=body)
        assert np.linalg.norm(apply_chain(ham, psi)) < 1e-9


class TestFidelity:
    def test_closed_form_values(self):
        assert chain.fidelity_per_site(1.0) == pytest.approx(2 / 3, rel=1e-15)
        assert chain.error_per_site(1.0) == pytest.approx(1 / 3, rel=1e-15)

    @pytest.mark.parametrize("n", [4, 6, 8, 10])
    @pytest.mark.parametrize("delta", [0.2, 0.5, 1.0])
    def test_contraction_matches_formula(self, n, delta):
        got = chain.fidelity_check(delta, n)
        assert abs(got - chain.fidelity_per_site(delta) ** n) < 1e-10

    def test_small_delta_error_expansion(self):
        # error per site approaches delta^2/2 with a quartic correction
        deltas = np.array([0.05, 0.08, 0.12, 0.2])
        resid = np.abs([chain.error_per_site(d) - d**2 / 2 for d in deltas])
        slope = np.polyfit(np.log(deltas), np.log(resid), 1)[0]
        assert slope >= 3.5

    def test_ring_fidelity_converges_to_formula(self):
        delta = 0.5
        per_site = chain.fidelity_per_site(delta)
        errs = [abs(chain.ring_fidelity(delta, n) ** (1 / n) - per_site)
                for n in (4, 8, 12)]
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 1e-6

    def test_ring_fidelity_matches_dense_overlap(self):
        n, delta = 4, 0.35
        psi = chain.deformed_ground_state(delta, n).contract()
        target = chain.aklt_mps(n).contract()
        for j in range(n):
            term = embed_term(chain.site_projector(j), [j], [3] * n)
            target = term.apply(target)
        target /= np.linalg.norm(target)
        assert chain.ring_fidelity(delta, n) == pytest.approx(
            abs(np.vdot(target, psi)) ** 2, abs=1e-12)


class TestRingGraphState:
    @pytest.mark.parametrize("n", [4, 6, 8])
    def test_projected_aklt_is_the_encoded_ring_graph_state(self, n):
        target = chain.aklt_mps(n).contract()
        for j in range(n):
            term = embed_term(chain.site_projector(j), [j], [3] * n)
            target = term.apply(target)
        target /= np.linalg.norm(target)
        overlap = abs(np.vdot(chain.ring_graph_state(n), target))
        assert overlap > 1 - 1e-10

    def test_logical_operators_algebra(self):
        for axis in ("x", "z"):
            z, x = chain.logical_operators(axis)
            p = chain.site_projector(0 if axis == "x" else 1)
            assert np.allclose(z @ z, p, atol=1e-12)
            assert np.allclose(x @ x, p, atol=1e-12)
            assert np.allclose(z @ x, -x @ z, atol=1e-12)
            assert np.allclose(z, z.conj().T, atol=1e-12)

    def test_deformed_state_approaches_graph_state(self):
        n = 4
        g = chain.ring_graph_state(n)
        psi = chain.deformed_ground_state(0.05, n).contract()
        assert abs(np.vdot(g, psi)) ** 2 > 0.995


class TestTerms:
    @pytest.mark.parametrize("parity", [0, 1])
    def test_deformed_terms_are_projectors(self, parity):
        for mat in (chain.two_body_term(0.6, parity),
                    chain.three_body_term(0.6, parity)):
            assert np.allclose(mat, mat.conj().T, atol=1e-12)
            assert np.allclose(mat @ mat, mat, atol=1e-12)

    def test_delta_one_two_body_is_undeformed(self):
        assert np.allclose(chain.two_body_term(1.0, 0),
                           total_spin_projector(1, 1, 2), atol=1e-12)

    @pytest.mark.parametrize("parity", [0, 1])
    def test_two_body_limit_closed_form(self, parity):
        lim = chain.two_body_limit(parity)
        p0 = chain.site_projector(parity)
        p1 = chain.site_projector(parity + 1)
        target = np.eye(9) - kron(p0, p1)
        assert np.abs(lim - target).max() < 1e-10
        assert np.linalg.matrix_rank(target) == 5

    @pytest.mark.parametrize("parity", [0, 1])
    def test_three_body_limit_stabilizer_form(self, parity):
        lim = chain.three_body_limit(parity)
        ps = [chain.site_projector(parity + i) for i in range(3)]
        z0, _ = chain.logical_operators(chain.site_axis(parity))
        _, x1 = chain.logical_operators(chain.site_axis(parity + 1))
        z2, _ = chain.logical_operators(chain.site_axis(parity + 2))
        ppp = kron(ps[0], kron(ps[1], ps[2]))
        zxz = kron(z0, kron(x1, z2))
        target = np.eye(27) - 0.5 * (ppp + zxz)
        assert np.abs(lim - target).max() < 1e-10

    def test_three_body_limit_terms_commute(self):
        ham = chain.build_limit_chain(4, body=3)
        dims = [3] * 4
        dense = [embed_term(m, list(s), dims).to_dense() for s, m in ham.terms]
        worst = max(np.abs(a @ b - b @ a).max()
                    for i, a in enumerate(dense) for b in dense[i + 1:])
        assert worst < 1e-12

    def test_limit_chain_ground_degeneracy(self):
        vals = np.linalg.eigvalsh(chain.build_limit_chain(4, 2).operator.to_dense())
        assert int(np.sum(vals < 1e-9)) == 16
        vals3 = np.linalg.eigvalsh(chain.build_limit_chain(4, 3).operator.to_dense())
        assert int(np.sum(vals3 < 1e-9)) == 1  # graph state is the unique ground

    def test_build_chain_validation(self):
        with pytest.raises(ValueError):
            chain.build_chain(0.5, 5)
        with pytest.raises(ValueError):
            chain.build_chain(0.0, 6)
        with pytest.raises(ValueError):
            chain.build_chain(1.5, 6)
        with pytest.raises(ValueError):
            chain.build_chain(0.5, 6, body=4)


class TestSpectra:
    def test_ground_sector_and_energy(self):
        ham = chain.build_chain(0.8, 6, body=2)
        specs = chain.sector_spectra(ham, n_levels=2)
        lowest = min(specs, key=lambda s: s.energies[0])
        assert lowest.k_index == 0
        assert lowest.sector == "1"
        assert abs(lowest.energies[0]) < 1e-9

    def test_undeformed_triple_degeneracy(self):
        specs = chain.sector_spectra(chain.build_chain(1.0, 6, 2), n_levels=1)
        by = {(s.k_index, s.sector): float(s.energies[0]) for s in specs}
        ex, ey, ez = by[(0, "x")], by[(0, "y")], by[(0, "z")]
        assert max(ex, ey, ez) - min(ex, ey, ez) < 1e-8

    def test_deformation_splits_y_level(self):
        specs = chain.sector_spectra(chain.build_chain(0.6, 6, 2), n_levels=1)
        by = {(s.k_index, s.sector): float(s.energies[0]) for s in specs}
        assert by[(0, "x")] == pytest.approx(by[(0, "z")], abs=1e-9)
        assert abs(by[(0, "y")] - by[(0, "x")]) > 1e-3

    def test_step_one_requires_undeformed_terms(self):
        with pytest.raises(ValueError):
            chain.sector_spectra(chain.build_chain(0.5, 6, 2), 2, step=1)

    def test_gap_and_degenerate_detection(self):
        assert chain.gap(chain.build_chain(1.0, 6, 2)) > 0.1
        with pytest.raises(ValueError):
            chain.gap(chain.build_limit_chain(4, 2))

    def test_gap_scaling_exponent_small_delta(self):
        slope, gaps = chain.gap_scaling_fit(
            np.linspace(0.08, 0.2, 5), 6, body=2)
        assert (np.diff(gaps) > 0).all()
        assert slope == pytest.approx(4.0, abs=0.7)

    def test_gap_scaling_validation(self):
        with pytest.raises(ValueError):
            chain.gap_scaling_fit([0.5], 6)
        with pytest.raises(ValueError):
            chain.gap_scaling_fit([0.0, 0.5], 6)

    def test_three_body_unit_gap_at_small_delta(self):
        ham = chain.build_chain(1e-3, 6, body=3)
        vals = lowest_eigs(ham.operator, 2)
        assert abs(vals[0]) < 1e-9
        assert abs(vals[1] - 1.0) < 1e-3


class TestTwoTermSum:
    def test_lambda_bounds_at_delta_one(self):
        lmin, lmax = chain.lambda_minmax(1.0)
        assert 0 < lmin <= lmax <= 2.0 + 1e-12
        assert lmin == pytest.approx(0.5, abs=1e-9)
        assert lmax == pytest.approx(2.0, abs=1e-9)

    @pytest.mark.parametrize("delta", [0.2, 0.5, 1.0])
    def test_kernel_dimension_is_four(self, delta):
        assert chain.two_term_kernel_dim(delta) == 4

    def test_lambda_min_quartic_scaling(self):
        deltas = np.linspace(0.05, 0.5, 8)
        lmins = [chain.lambda_minmax(float(d))[0] for d in deltas]
        slope = np.polyfit(np.log(deltas), np.log(lmins), 1)[0]
        assert slope == pytest.approx(4.0, abs=0.3)

    @pytest.mark.parametrize("delta", [0.2, 0.5, 1.0])
    def test_sandwich_bound(self, delta):
        gap2 = chain.gap(chain.build_chain(delta, 6, 2))
        gap3 = chain.gap(chain.build_chain(delta, 6, 3))
        lmin, _ = chain.lambda_minmax(delta)
        assert gap2 >= lmin * gap3 / 2


class TestCrackions:
    def test_dispersion_shape(self):
        pts = chain.crackion_dispersion(8)
        assert len(pts) == 8
        best = min(pts, key=lambda p: p.energy)
        assert best.momentum == pytest.approx(np.pi)
        assert max(p.splitting for p in pts) < 1e-8
        assert abs(best.energy - 10 / 27) / (10 / 27) < 0.15
        # reflection symmetry E(k) = E(2 pi - k)
        by_k = {p.k_index: p.energy for p in pts}
        for k in range(1, 8):
            assert by_k[k] == pytest.approx(by_k[8 - k], abs=1e-9)

    def test_dispersion_needs_undeformed_point(self):
        with pytest.raises(ValueError):
            chain.crackion_dispersion(8, delta=0.7)

    def test_deformation_scaling_exponents(self):
        s_min, s_other = chain.crackion_scaling([0.08, 0.1, 0.13, 0.16, 0.2], 8)
        assert s_min == pytest.approx(4.0, abs=0.7)
        assert s_other == pytest.approx(2.0, abs=0.5)


class TestSpectrumCsv:
    def test_layout(self):
        specs = chain.sector_spectra(chain.build_chain(1.0, 4, 2), n_levels=2)
        text = chain.spectrum_csv_text(specs, 1.0, 4, 2, meta={"seed": 7})
        lines = text.splitlines()
        assert lines[0] == "# seed=7"
        assert lines[1] == ",".join(chain.SPECTRUM_CSV_COLUMNS)
        rows = [ln.split(",") for ln in lines[2:]]
        assert all(len(r) == 7 for r in rows)
        assert text == chain.spectrum_csv_text(specs, 1.0, 4, 2, meta={"seed": 7})
