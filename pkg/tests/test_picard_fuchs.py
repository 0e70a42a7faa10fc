import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from q4lab import DomainError, PathProximityError, SingularityError, make_params
from q4lab.quadrature import basis_values
from q4lab.picard_fuchs import (
    Arc,
    PFPropagation,
    PFVector,
    apply_L1,
    apply_L2,
    apply_s_operator,
    continue_state,
    derivative_formulas,
    infinity_exponents,
    initial_jstate,
    l2_chain_factor,
    pf_derivative_chain,
    pf_derivatives,
    pf_matrix,
    pf_residuals,
    pfs_residuals,
    propagate,
    propagate_J,
)

H0 = -0.5


@pytest.fixture(scope="module")
def oracle4(p4):
    return basis_values(H0, p4)


@pytest.fixture(scope="module")
def prop4(p4):
    return PFPropagation(p4)


class TestSixEquationSystem:
    def test_residuals_with_fd_oracle_derivs(self, p4, oracle4):
        dh = 1e-5
        fd = (basis_values(H0 + dh, p4) - basis_values(H0 - dh, p4)) / (2 * dh)
        pf = PFVector(h=H0, values=oracle4, derivs=fd)
        rel = np.abs(pf_residuals(pf, p4)) / np.abs(oracle4)
        assert np.max(rel) < 1e-4

    def test_residuals_with_solve_derivs(self, p4, oracle4):
        pf = PFVector(h=H0, values=oracle4, derivs=pf_derivatives(H0, oracle4, p4))
        rel = np.abs(pf_residuals(pf, p4)) / np.abs(oracle4)
        assert np.max(rel) < 1e-12

    @given(lam=st.floats(-1e3, 1e3, allow_nan=False))
    @settings(max_examples=50)
    def test_residual_scaling(self, lam):
        p = make_params(4.0)
        v = np.array([0.3, 0.2, 0.25, 0.21, 0.4, 0.35])
        d = np.array([1.1, 0.9, 1.0, 0.95, 2.0, 1.7])
        r1 = pf_residuals(PFVector(H0, v, d), p)
        r2 = pf_residuals(PFVector(H0, lam * v, lam * d), p)
        assert np.allclose(r2, lam * r1, rtol=1e-12, atol=1e-12)

    def test_derivatives_match_fd_oracle(self, p4, oracle4):
        dh = 1e-5
        fd = (basis_values(H0 + dh, p4) - basis_values(H0 - dh, p4)) / (2 * dh)
        d = pf_derivatives(H0, oracle4, p4)
        assert np.max(np.abs(d - fd) / np.abs(d)) < 1e-4

    def test_derivatives_linear_in_values(self, p4, oracle4):
        d1 = pf_derivatives(H0, oracle4, p4)
        d2 = pf_derivatives(H0, 3.0 * oracle4, p4)
        assert np.allclose(d2, 3.0 * d1, rtol=1e-13)

    def test_singular_matrix_near_critical(self, p4):
        with pytest.raises(SingularityError, match="cond"):
            pf_derivatives(p4.saddle_h + 1e-15, np.ones(6), p4)

    def test_det_factorization(self, p4):
        # det B = (9h^2-4)(9kh^2-4)^2 / (144 k^2)
        k = p4.kappa
        for h in (-0.5, -0.41, -0.62):
            expect = (9 * h * h - 4) * (9 * k * h * h - 4) ** 2 / (144 * k * k)
            assert np.linalg.det(pf_matrix(h, p4)) == pytest.approx(expect, rel=1e-12)


class TestPropagation:
    def test_identity(self, p4, oracle4):
        assert np.array_equal(propagate(H0, oracle4, H0, p4), oracle4)

    def test_oracle_cross_check(self, p4, prop4):
        for q in (0.1, 0.25, 0.5, 0.75, 0.9):
            h = p4.center_h + q * (p4.saddle_h - p4.center_h)
            ref = basis_values(h, p4)
            rel = np.max(np.abs(prop4.values(h) - ref) / np.abs(ref))
            assert rel < 1e-6

    def test_back_and_forth(self, p4, oracle4):
        v = propagate(-0.55, propagate(H0, oracle4, -0.55, p4), H0, p4)
        assert np.max(np.abs(v - oracle4) / np.abs(oracle4)) < 1e-9

    def test_refuses_singularity_crossing(self, p4, oracle4):
        with pytest.raises(SingularityError):
            propagate(H0, oracle4, -0.8, p4)

    def test_chain_matches_fd(self, p4, oracle4):
        d1, d2, d3 = pf_derivative_chain(H0, oracle4, p4)
        dh = 1e-6
        vp = propagate(H0, oracle4, H0 + dh, p4)
        vm = propagate(H0, oracle4, H0 - dh, p4)
        fd1 = (vp - vm) / (2 * dh)
        assert np.max(np.abs(d1 - fd1) / np.abs(d1)) < 1e-8
        fd2 = (pf_derivatives(H0 + dh, vp, p4) - pf_derivatives(H0 - dh, vm, p4)) / (2 * dh)
        assert np.max(np.abs(d2 - fd2) / np.abs(d2)) < 1e-7


class TestDerivativeFormulas:
    def test_equal_J_kills_I11pp(self, p4):
        out = derivative_formulas("second", H0, 0.7, 0.7, p4)
        assert out[1] == 0.0

    def test_second_vs_chain(self, p4, prop4):
        for h in (-0.5, -0.45, -0.6):
            d1, d2, _ = prop4.chain(h)
            f2 = derivative_formulas("second", h, d1[0], d1[3], p4)
            assert f2[0] == pytest.approx(d2[0], rel=1e-10)
            assert f2[1] == pytest.approx(d2[3], rel=1e-10)

    def test_third_vs_chain(self, p4, prop4):
        for h in (-0.5, -0.45, -0.6):
            d1, _, d3 = prop4.chain(h)
            f3 = derivative_formulas("third", h, d1[0], d1[3], p4)
            assert f3[0] == pytest.approx(d3[0], rel=1e-9)
            assert f3[1] == pytest.approx(d3[3], rel=1e-9)

    def test_second_vs_fd_of_propagated(self, p4, prop4):
        h, dh = H0, 1e-6
        d1 = prop4.derivs(np.array([h - dh, h, h + dh]))
        f2 = derivative_formulas("second", h, d1[0, 1], d1[3, 1], p4)
        fdJ1 = (d1[0, 2] - d1[0, 0]) / (2 * dh)
        assert f2[0] == pytest.approx(fdJ1, rel=1e-6)

    def test_third_consistent_with_fd_of_second(self, p4, prop4):
        h, dh = H0, 1e-5
        vals = [prop4.derivs(hh) for hh in (h - dh, h, h + dh)]
        seconds = [derivative_formulas("second", hh, d[0], d[3], p4)
                   for hh, d in zip((h - dh, h, h + dh), vals)]
        fd3 = (seconds[2] - seconds[0]) / (2 * dh)
        f3 = derivative_formulas("third", h, vals[1][0], vals[1][3], p4)
        assert f3[0] == pytest.approx(fd3[0], rel=1e-4)
        assert f3[1] == pytest.approx(fd3[1], rel=1e-4)

    @pytest.mark.parametrize("h", [2 / 3, -2 / 3, 1 / 3, -1 / 3])
    def test_pole_errors(self, p4, h):
        with pytest.raises(SingularityError):
            derivative_formulas("second", h, 1.0, 2.0, p4)

    def test_pfs_closure(self, p4, prop4):
        # second derivatives from the closed-form formulas satisfy the 2x2
        # system when fed propagated J1, J2
        for h in (-0.5, -0.42, -0.58):
            d = prop4.derivs(h)
            f2 = derivative_formulas("second", h, d[0], d[3], p4)
            res = pfs_residuals(h, d[0], d[3], f2[0], f2[1], p4)
            scale = 3 * p4.kappa * abs(h) * max(abs(d[0]), abs(d[3]))
            assert np.max(np.abs(res)) < 1e-8 * scale

    def test_minus_one_row_system(self, p4, prop4):
        # I-10' = -(3h/2) I-10'' - I-11''
        # I-11' = -(2/k) I-10'' - 3h I-11'' + (4(k-1)/(3kh)) I11''
        k = p4.kappa
        for h in (-0.5, -0.45):
            d1, d2, _ = prop4.chain(h)
            r1 = d1[4] - (-1.5 * h * d2[4] - d2[5])
            r2 = d1[5] - (-(2 / k) * d2[4] - 3 * h * d2[5] + 4 * (k - 1) / (3 * k * h) * d2[3])
            assert abs(r1) < 1e-6 * max(abs(d1[4]), 1.0)
            assert abs(r2) < 1e-6 * max(abs(d1[5]), 1.0)

    def test_L2J_identity(self, p4, prop4):
        # J = -4h I-10' + (3kh^2-4) I-11' satisfies
        # L2 J = (4/3)(k-1)[h (9kh^2-4) I11''' + (6kh^2+8) I11'']
        k = p4.kappa
        for h in (-0.5, -0.45, -0.6):
            d1, d2, d3 = prop4.chain(h)
            J = -4 * h * d1[4] + (3 * k * h * h - 4) * d1[5]
            J1 = -4 * d1[4] - 4 * h * d2[4] + 6 * k * h * d1[5] + (3 * k * h * h - 4) * d2[5]
            J2 = (-8 * d2[4] - 4 * h * d3[4] + 6 * k * d1[5] + 12 * k * h * d2[5]
                  + (3 * k * h * h - 4) * d3[5])
            lhs = apply_L2(J, J1, J2, h, p4)
            rhs = (4 / 3) * (k - 1) * (h * (9 * k * h * h - 4) * d3[3]
                                       + (6 * k * h * h + 8) * d2[3])
            assert lhs == pytest.approx(rhs, rel=1e-6)


class TestOperators:
    @given(h=st.floats(-5, 5, allow_nan=False))
    def test_L1_annihilates_h(self, h):
        assert apply_L1(h, 1.0, h) == 0.0

    @given(c=st.floats(-100, 100, allow_nan=False), h=st.floats(-5, 5))
    def test_L1_constant(self, c, h):
        assert apply_L1(c, 0.0, h) == -c

    @given(h=st.floats(-2, 2, allow_nan=False))
    @settings(max_examples=50)
    def test_L2_on_h(self, h):
        p = make_params(4.0)
        assert apply_L2(h, 1.0, 0.0, h, p) == pytest.approx(-4 * p.kappa * h * h + 8)

    @given(h=st.floats(-2, 2, allow_nan=False))
    @settings(max_examples=50)
    def test_L2_on_one(self, h):
        p = make_params(4.0)
        assert apply_L2(1.0, 0.0, 0.0, h, p) == pytest.approx(5 * p.kappa * h)

    def test_s_operator_chain_rule(self, p4):
        # L2 in h equals 24 sqrt(kappa s) times the s-operator, chain-ruled
        # through s = (9 kappa/4) h^2; checked on a generic smooth function
        from q4lab.model import h_from_s
        k = p4.kappa
        for s in np.linspace(1.2, 3.8, 10):
            h = h_from_s(s, p4)
            g = math.sin(3 * h) + h * h
            gh = 3 * math.cos(3 * h) + 2 * h
            ghh = -9 * math.sin(3 * h) + 2
            dsdh = -3 * math.sqrt(k * s)
            gs = gh / dsdh
            gss = (ghh - gs * 4.5 * k) / dsdh**2
            lhs = apply_L2(g, gh, ghh, h, p4)
            rhs = l2_chain_factor(s, p4) * apply_s_operator(g, gs, gss, s)
            assert lhs == pytest.approx(rhs, rel=1e-12)


class TestContinuation:
    def test_closed_loop_returns(self, p4):
        st0 = initial_jstate(2.5, p4)
        loop = [2.5, 2.5 + 1j, 4.5 + 1j, 4.5 + 2j, 2.5 + 2j, 2.5 + 1j, 2.5]
        st1 = propagate_J([complex(z) for z in loop], st0, p4)
        assert np.max(np.abs(st1.J - st0.J)) < 1e-8 * np.max(np.abs(st0.J))

    def test_loop_around_kappa_trivial_monodromy(self, p4):
        # s = kappa is the center level: J continues analytically through it
        st0 = initial_jstate(2.5, p4)
        loop = [2.5, 2.5 - 0.7j, 6.0 - 0.7j, 6.0 + 0.7j, 2.5 + 0.7j, 2.5]
        st1 = propagate_J([complex(z) for z in loop], st0, p4)
        assert np.max(np.abs(st1.J - st0.J)) < 1e-8 * np.max(np.abs(st0.J))

    def test_wronskian_constant_real_interval(self, p4):
        st0 = initial_jstate(2.0, p4)
        det0 = st0.det_W
        st1 = propagate_J([2.0, 1.01], st0, p4)
        st2 = propagate_J([2.0, 3.99], st0, p4)
        assert abs(st1.det_W - det0) < 1e-8 * abs(det0)
        assert abs(st2.det_W - det0) < 1e-8 * abs(det0)

    def test_wronskian_constant_complex_rectangle(self, p4):
        st0 = initial_jstate(2.5, p4)
        det0 = st0.det_W
        rect = [2.5, 2.5 + 0.8j, 0.3 + 0.8j, 0.3 + 2j, 2.5 + 2j, 2.5 + 0.8j, 2.5]
        st1 = propagate_J([complex(z) for z in rect], st0, p4)
        assert abs(st1.det_W - det0) < 1e-8 * abs(det0)

    def test_arc_pieces(self, p4):
        st0 = initial_jstate(2.5, p4)
        stA = propagate_J([2.5, 1.0 + 0.5j], st0, p4)
        stB = continue_state([Arc(1.0 + 0j, 0.5, np.pi / 2, np.pi)], stA, p4)
        assert stB.s == pytest.approx(0.5 + 0j, abs=1e-12)
        assert abs(stB.det_W - st0.det_W) < 1e-8 * abs(st0.det_W)

    def test_exponents_fit_one_sixth(self):
        for kappa in (2.0, 4.0):
            lo, hi = infinity_exponents(make_params(kappa))
            assert abs(hi - 1 / 6) < 1e-3
            assert abs(lo + 1 / 6) < 1e-3

    def test_proximity_guard(self, p4):
        st0 = initial_jstate(2.5, p4)
        with pytest.raises(PathProximityError):
            propagate_J([2.5, 4.0], st0, p4)

    def test_cut_guard(self, p4):
        st0 = initial_jstate(2.5, p4)
        with pytest.raises(PathProximityError):
            propagate_J([2.5, 2.5 + 0.5j, 0.5 + 0.5j, 0.5 - 0.5j], st0, p4)

    def test_path_must_start_at_state(self, p4):
        st0 = initial_jstate(2.5, p4)
        with pytest.raises(DomainError):
            propagate_J([3.0, 3.5], st0, p4)

    def test_initial_state_positive_J1(self, p4):
        # I00' is the area derivative: positive on the annulus
        st0 = initial_jstate(2.5, p4)
        assert st0.J[0].real > 0
        assert abs(st0.J[0].imag) == 0
