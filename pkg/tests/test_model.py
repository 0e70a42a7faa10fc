import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from q4lab import (
    DegenerateLevelError,
    DomainError,
    HamiltonianForm,
    SingularityError,
    Window,
    coordinate_map,
    critical_levels,
    h_from_s,
    hamiltonian,
    in_omega,
    level_classify,
    make_params,
    oval,
    real_roots_y,
    s_from_h,
)

kappas = st.floats(min_value=1.0, max_value=50.0, exclude_min=True,
                   allow_nan=False, allow_infinity=False)


class TestMakeParams:
    def test_kappa4(self):
        p = make_params(4.0, mu=(1, 0, 0, 0))
        assert p.b == -1.0
        assert p.c == pytest.approx(math.sqrt(3.0), abs=0)
        assert p.alpha == pytest.approx(complex(-1.0, math.sqrt(3.0)))

    def test_kappa2(self):
        p = make_params(2.0)
        assert p.b == 0.0
        assert p.c == 2.0
        assert p.alpha == 2.0j

    @pytest.mark.parametrize("bad", [1.0, 0.5, -3.0, float("nan"), float("inf")])
    def test_rejects_bad_kappa(self, bad):
        with pytest.raises(DomainError):
            make_params(bad)

    @given(kappa=kappas)
    def test_invariants(self, kappa):
        p = make_params(kappa)
        assert abs(abs(p.alpha) - 2.0) < 1e-14
        assert p.c > 0.0
        assert -2.0 < p.b < 2.0


class TestHamiltonian:
    def test_rational_at_origin(self, p4):
        assert hamiltonian("original_rational", (0.0, 0.0), p4) == 4.0 / 9.0

    def test_rational_singularity(self, p2):
        # kappa = 2 has b = 0, so Y = 2(x - y); at x = y = 1/8 we get exactly
        # psi = 1 - 8y = 0
        with pytest.raises(SingularityError):
            hamiltonian("original_rational", (0.125, 0.125), p2)

    def test_cubic_form_at_center(self, p4):
        for h in (-0.5, -0.4, 0.3):
            assert hamiltonian("cubic_form", (1.0, 1.0), p4, h=h) == pytest.approx(-h - 2 / 3)

    def test_cubic_form_requires_h(self, p4):
        with pytest.raises(DomainError):
            hamiltonian("cubic_form", (1.0, 1.0), p4)

    @given(x=st.floats(-3, 3), y=st.floats(-3, 3), kappa=kappas)
    @settings(max_examples=200)
    def test_symmetric_oddness(self, x, y, kappa):
        p = make_params(kappa)
        a = hamiltonian("symmetric_form", (x, y), p)
        b = hamiltonian("symmetric_form", (-x, -y), p)
        assert a == pytest.approx(-b, abs=1e-12 * max(1.0, abs(a)))

    def test_first_integral_correspondence(self, rng):
        # Hcal = 64 (2-b)^2 H(X, Y)^2 on random Omega points
        for kappa in (1.5, 2.0, 4.0, 9.0):
            p = make_params(kappa)
            n = 0
            while n < 100:
                x, y = rng.uniform(-0.3, 0.3, 2)
                if not in_omega(x, y, p):
                    continue
                n += 1
                X, Y = coordinate_map((x, y), p)
                lhs = hamiltonian("original_rational", (x, y), p)
                rhs = 64.0 * (2.0 - p.b) ** 2 * hamiltonian("XY_form", (X, Y), p) ** 2
                assert lhs == pytest.approx(rhs, rel=1e-10)


class TestCoordinateMap:
    def test_origin(self, p4):
        assert coordinate_map((0.0, 0.0), p4) == (1.0, 0.0)

    def test_rejects_negative_psi(self, p4):
        # psi(0, 1) = 1 - 8 + 4 = -3 for kappa = 4
        with pytest.raises(DomainError):
            coordinate_map((0.0, 1.0), p4)


class TestCriticalLevels:
    @pytest.mark.parametrize("kappa", [1.1, 1.5, 2.0, 4.0, 9.0])
    def test_levels(self, kappa):
        p = make_params(kappa)
        cl = critical_levels(p)
        assert cl["center_h"] == -2 / 3
        assert cl["saddle_h"] == pytest.approx(-2 / (3 * math.sqrt(kappa)), abs=0)
        # the critical points really are critical values of the symmetric form
        assert hamiltonian("symmetric_form", cl["center_point"], p) == pytest.approx(-2 / 3)
        assert hamiltonian("symmetric_form", cl["saddle_point"], p) == pytest.approx(
            cl["saddle_h"])

    def test_kappa4_values(self, p4):
        cl = critical_levels(p4)
        assert cl["saddle_h"] == pytest.approx(-1 / 3)
        assert cl["saddle_point"] == (0.0, 0.5)


class TestLevelClassify:
    def test_examples(self, p4):
        assert level_classify(-2 / 3, p4).window is Window.CENTER_END
        assert level_classify(-2 / 3, p4).s == pytest.approx(4.0)
        lp = level_classify(-1 / 3, p4)
        assert lp.window is Window.SADDLE_END
        assert lp.s == pytest.approx(1.0)
        lp = level_classify(-0.5, p4)
        assert lp.window is Window.INTERIOR
        assert lp.s == pytest.approx(2.25)
        assert level_classify(-0.9, p4).window is Window.EXTENDED
        assert level_classify(-0.1, p4).window is Window.OUTSIDE

    @given(kappa=kappas, q=st.floats(1e-6, 1 - 1e-6))
    @settings(max_examples=200)
    def test_interior_iff_s_window(self, kappa, q):
        # for h < 0: window == interior  <=>  s in (1, kappa)
        p = make_params(kappa)
        h = p.center_h + q * (p.saddle_h - p.center_h)
        lp = level_classify(h, p)
        if lp.window is Window.INTERIOR:
            assert 1.0 < lp.s < kappa

    @given(kappa=kappas, s=st.floats(0.1, 60.0))
    @settings(max_examples=200)
    def test_s_roundtrip(self, kappa, s):
        p = make_params(kappa)
        assert s_from_h(h_from_s(s, p), p) == pytest.approx(s, rel=1e-12)


class TestRealRootsY:
    def test_double_root_level(self, p4):
        roots = real_roots_y(-1 / 3, p4)
        assert [(pytest.approx(r), m) for r, m in roots] == [(-1.0, 1), (0.5, 2)]

    def test_zero_level(self, p4):
        roots = real_roots_y(0.0, p4)
        vals = [r for r, _ in roots]
        assert vals == pytest.approx([-math.sqrt(3 / 4), 0.0, math.sqrt(3 / 4)])

    def test_unique_root_level(self, p4):
        h = -2 * math.sqrt(5) / (3 * math.sqrt(4.0))
        roots = real_roots_y(h, p4)
        assert len(roots) == 1
        assert roots[0][0] == pytest.approx(-math.sqrt(5) / 2, rel=1e-14)

    @given(h=st.floats(-3, 3), kappa=kappas)
    @settings(max_examples=300)
    def test_residual_bound(self, h, kappa):
        p = make_params(kappa)
        for r, _ in real_roots_y(h, p):
            assert abs((kappa / 3) * r**3 - r - h) <= 1e-12 * max(1.0, abs(h))

    @given(h=st.floats(-4, 4), kappa=kappas)
    @settings(max_examples=300)
    def test_root_count(self, h, kappa):
        p = make_params(kappa)
        fold = 2 / (3 * math.sqrt(kappa))
        roots = real_roots_y(h, p)
        total = sum(m for _, m in roots)
        if abs(abs(h) - fold) > 1e-9:
            assert total == (3 if abs(h) < fold else 1)


class TestOval:
    def test_small_oval_near_center(self, p4):
        ov = oval(-2 / 3 + 1e-8, p4)
        r = np.linalg.norm(ov.points[:-1] - np.array([1.0, 1.0]), axis=1)
        assert np.all(r < 5e-4)
        assert np.all(r > 1e-6)

    def test_vertices_on_level(self, p4):
        ov = oval(-0.5, p4)
        x, y = ov.points[:, 0], ov.points[:, 1]
        resid = np.abs(hamiltonian("symmetric_form", (x, y), p4) + 0.5)
        assert np.max(resid) < 1e-12
        assert ov.closure_gap == 0.0

    def test_point_reflection_duality(self, p4):
        # the dual annulus around (-1, -1) at level -h is the point reflection
        h = -0.5
        ov = oval(h, p4)
        dual = oval(-h, p4, center=(-1.0, -1.0))
        th = np.linspace(0.0, 2 * np.pi, 64, endpoint=False)
        x, y, _, _ = ov.point_tangent(th)
        xd, yd, _, _ = dual.point_tangent((th + np.pi) % (2 * np.pi))
        assert np.allclose(np.sort(-xd), np.sort(x), atol=1e-12)
        assert np.allclose(np.sort(-yd), np.sort(y), atol=1e-12)

    def test_degenerate_levels_rejected(self, p4):
        for h in (-2 / 3, -1 / 3, -2 / 3 + 1e-12, -0.9, -0.1):
            with pytest.raises(DegenerateLevelError):
                oval(h, p4)

    def test_min_x_positive_interior(self):
        for kappa in (1.5, 4.0, 9.0):
            p = make_params(kappa)
            for q in (0.05, 0.5, 0.95):
                h = p.center_h + q * (p.saddle_h - p.center_h)
                assert oval(h, p).min_x > 1e-3

    def test_continuation_matches_ray(self, p4):
        ray = oval(-0.5, p4)
        cont = oval(-0.5, p4, force_continuation=True)
        assert cont.by_continuation
        assert cont.closure_gap < 1e-2
        # same curve: every continuation vertex sits on the level set
        x, y = cont.points[:, 0], cont.points[:, 1]
        assert np.max(np.abs(hamiltonian("symmetric_form", (x, y), p4) + 0.5)) < 1e-10
        # and the enclosed areas agree (shoelace on the dense polylines)
        def shoelace(pts):
            x, y = pts[:, 0], pts[:, 1]
            return 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])
        assert shoelace(cont.points) == pytest.approx(shoelace(ray.points), rel=1e-3)

    def test_cubic_form_oval(self, p4):
        ov = oval(-0.5, p4, form=HamiltonianForm.CUBIC_FORM)
        x, y = ov.points[:, 0], ov.points[:, 1]
        resid = np.abs(hamiltonian("cubic_form", (x, y), p4, h=-0.5))
        assert np.max(resid) < 1e-12
        assert ov.min_x > 0.1
