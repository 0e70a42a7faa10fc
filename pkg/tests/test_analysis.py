import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from q4lab import DomainError, make_params
from q4lab.analysis import (
    L2Frame,
    PolyPair,
    bound_pipeline,
    chebyshev_probe,
    count_zeros,
    keyhole_contour,
    frame_rotation_probe,
    inhomogeneous_bound_sample,
    random_poly_pair,
    residue_solution,
    residue_zero_level,
    sweep_bounds,
    vn_sample_test,
    winding_count,
)


class TestCountZeros:
    def test_two_simple_roots(self):
        zr = count_zeros(lambda h: (np.asarray(h) + 0.5) * (np.asarray(h) + 0.4),
                         (-0.6, -0.35), grid=64)
        assert zr.count == 2
        assert zr.locations == pytest.approx([-0.5, -0.4], abs=1e-8)

    def test_double_root(self):
        zr = count_zeros(lambda h: (np.asarray(h) + 0.5) ** 2, (-0.6, -0.4), grid=256)
        assert zr.count == 2
        assert zr.zeros[0]["multiplicity_estimate"] == 2
        assert zr.zeros[0]["location"] == pytest.approx(-0.5, abs=1e-9)

    def test_near_miss_not_counted(self):
        zr = count_zeros(lambda h: (np.asarray(h) + 0.5) ** 2 + 1e-4, (-0.6, -0.4),
                         grid=256)
        assert zr.count == 0

    def test_identically_zero(self):
        zr = count_zeros(lambda h: 0.0 * np.asarray(h), (-1.0, 1.0))
        assert zr.count == 0
        assert zr.identically_zero

    def test_stable_under_grid_doubling(self):
        f = lambda h: np.sin(10.0 * np.asarray(h))
        z1 = count_zeros(f, (0.05, 2.0), grid=128)
        z2 = count_zeros(f, (0.05, 2.0), grid=256)
        assert z1.count == z2.count
        assert np.allclose(z1.locations, z2.locations, atol=1e-9)

    @given(roots=st.lists(st.floats(-0.9, 0.9), min_size=1, max_size=4, unique=True))
    @settings(max_examples=60, deadline=None)
    def test_polynomial_products(self, roots):
        roots = sorted(roots)
        if any(abs(a - b) < 5e-2 for a, b in zip(roots[:-1], roots[1:])):
            return  # keep zeros separated for the scan
        def f(x):
            out = np.ones_like(np.asarray(x, dtype=float))
            for r in roots:
                out = out * (np.asarray(x) - r)
            return out
        zr = count_zeros(f, (-1.0, 1.0), grid=256)
        assert zr.count == len(roots)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            count_zeros(lambda x: x, (1.0, -1.0))


class TestResidueSolutionProbe:
    def test_boundary_value(self, p4):
        rs = residue_solution(-1 / 3 - 1e-9, p4)
        assert rs.y0 == pytest.approx(-1.0, abs=1e-6)
        assert rs.f == pytest.approx(4 / 3, rel=1e-5)

    def test_requires_below_saddle(self, p4):
        with pytest.raises(DomainError):
            residue_solution(-0.2, p4)

    def test_zero_level_closed_form(self, p4):
        assert residue_zero_level(p4) == pytest.approx(-(2 / 3) * math.sqrt(5 / 4))

    @pytest.mark.parametrize("kappa", [2.0, 4.0, 6.0, 9.0])
    def test_probe_findings(self, kappa):
        p = make_params(kappa)
        rep = chebyshev_probe(p)
        assert rep.l2_residual <= 1e-6
        assert rep.locate_error is not None and rep.locate_error <= 1e-8
        # the closed-form zero always sits inside the larger interval
        assert rep.in_half_line_interval
        assert rep.nonvanishing_on_half_line == "contradicted"
        # and inside the annulus interval exactly for kappa > 5
        assert rep.in_annulus_interval == (kappa > 5.0)
        assert rep.nonvanishing_on_annulus == (
            "contradicted" if kappa > 5.0 else "confirmed")
        # measured endpoint value of y0 disagrees with the claimed -sqrt(5/k)
        assert rep.saddle_y0 == pytest.approx(-2 / math.sqrt(kappa), abs=1e-6)
        assert abs(rep.saddle_y0 - rep.saddle_y0_claimed) > 0.05
        # the identity prefactor is y0, not h
        assert rep.identity_gap > 1e-4

    def test_rotation_under_pi_on_annulus(self):
        # the solution space stays Chebyshev on the annulus window even for
        # kappa > 5, where the residue certificate fails
        for kappa in (2.0, 9.0):
            rep = chebyshev_probe(make_params(kappa))
            assert rep.rotation_span_annulus < math.pi


class TestWinding:
    def test_constant_element(self, p4):
        wr = winding_count(PolyPair(P=(1.0,), Q=()), p4)
        assert wr.winding == 0
        assert wr.residual <= 0.2
        assert {s["name"] for s in wr.segments} == {
            "cut_upper", "small_circle", "cut_lower", "big_circle"}

    def test_contour_closure_and_wronskian(self, p4):
        ct = keyhole_contour(p4)
        assert ct.closure_drift < 1e-8
        assert ct.det_drift < 1e-8

    def test_n1_bound_over_random_pairs(self, p4, rng):
        maxw = 0
        for _ in range(50):
            pair = random_poly_pair(1, rng)
            wr = winding_count(pair, p4)
            assert wr.residual <= 0.2
            assert wr.bound_ok
            maxw = max(maxw, wr.winding)
        assert maxw <= 2

    def test_winding_at_least_real_zeros(self, p4, rng):
        from q4lab.analysis import j_table
        tab = j_table(p4)
        for _ in range(20):
            pair = random_poly_pair(2, rng)

            def V(s):
                J = tab.J(s)
                return pair.eval_P(s).real * J[0] + pair.eval_Q(s).real * J[1]

            zr = count_zeros(V, (tab.lo, tab.hi), grid=256)
            wr = winding_count(pair, p4)
            assert wr.winding >= zr.count

    def test_epsilon_stability(self, p4, rng):
        # the winding number is a zero count: halving/doubling epsilon moves
        # the contour but must not change the count for pairs whose zeros
        # stay away from the excluded neighbourhoods
        for _ in range(5):
            pair = random_poly_pair(2, rng)
            w = {eps: winding_count(pair, p4, eps).winding
                 for eps in (5e-4, 1e-3, 2e-3)}
            assert len(set(w.values())) == 1, w

    def test_degree_validation(self):
        with pytest.raises(DomainError):
            PolyPair(P=(1.0, 2.0), Q=(1.0, 2.0))


class TestVnSampling:
    def test_n1_kappa4(self, p4):
        out = vn_sample_test(1, 60, p4, seed=101)
        assert out["max_real_zeros"] <= 2
        assert out["max_winding"] <= 2
        assert not out["violations"]

    def test_n2_kappa2(self, p2):
        out = vn_sample_test(2, 40, p2, seed=102)
        assert out["max_real_zeros"] <= 4
        assert out["max_winding"] <= 4
        assert not out["violations"]

    def test_pure_J1_element_never_vanishes(self, p4):
        from q4lab.analysis import j_table
        tab = j_table(p4)
        zr = count_zeros(lambda s: tab.J(s)[0], (tab.lo, tab.hi), grid=512)
        assert zr.count == 0

    def test_deterministic(self, p4):
        a = vn_sample_test(1, 10, p4, seed=7)
        b = vn_sample_test(1, 10, p4, seed=7)
        assert a["rows"] == b["rows"]

    def test_rejects_bad_n(self, p4):
        with pytest.raises(DomainError):
            vn_sample_test(0, 5, p4, seed=0)


class TestBoundPipeline:
    def test_zero_weights(self, p4):
        br = bound_pipeline(replace(p4, mu=(0.0, 0.0, 0.0, 0.0)))
        assert (br.count_I, br.count_G, br.count_R) == (0, 0, 0)
        assert br.chain_ok

    def test_reconstruction(self, rng):
        p = make_params(4.0, mu=tuple(rng.normal(size=4)))
        br = bound_pipeline(p)
        assert br.reconstruction_rel_err is not None
        assert br.reconstruction_rel_err <= 1e-6

    def test_mini_sweep_no_violations(self):
        reports = sweep_bounds([1.5, 4.0], trials=40, seed=314)
        assert all(r.chain_ok for r in reports)
        assert max(r.count_G for r in reports) <= 8
        assert max(r.count_R for r in reports) <= 6

    def test_sweep_deterministic(self):
        a = sweep_bounds([2.0], trials=5, seed=9)
        b = sweep_bounds([2.0], trials=5, seed=9)
        assert [(r.mu, r.count_I, r.count_G, r.count_R) for r in a] == \
               [(r.mu, r.count_I, r.count_G, r.count_R) for r in b]


class TestZeroBoundProbes:
    def test_frame_probe_annulus(self, p4):
        window = (p4.center_h + 1e-6, p4.saddle_h - 1e-6)
        out = frame_rotation_probe(p4, window, trials=25, seed=5)
        assert out["exists_nonvanishing"]
        assert out["max_solution_zeros"] <= 1
        assert out["consistent"]

    def test_rotation_matches_probe(self, p4):
        window = (p4.center_h + 1e-6, p4.saddle_h - 1e-6)
        span = L2Frame(p4, window).rotation_span()
        assert span < math.pi

    def test_inhomogeneous_k_plus_2(self, p4):
        window = (p4.center_h + 1e-6, p4.saddle_h - 1e-6)
        out = inhomogeneous_bound_sample(p4, window, trials=25, seed=17)
        assert out["chebyshev_premise"]
        assert not out["violations"]
        assert out["max_excess"] <= 2

    def test_frame_window_validation(self, p4):
        with pytest.raises(DomainError):
            L2Frame(p4, (p4.saddle_h + 0.01, p4.saddle_h + 0.1))
