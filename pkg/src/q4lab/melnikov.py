"""Assembly of G = L1(I) and R = L2(G), and exact extraction of R's
rational-function coefficients.

With the derivative pair J1 = I00', J2 = I11' and the combination
JJ = -4h I-10' + (3 kappa h^2 - 4) I-11', the normal form is

    G(h) = (nu1 h^2 + nu3) J1 + nu2 J2 + nu4 JJ,

where (nu1..nu4) are the G-stage weights (see
:func:`q4lab.reduction.mu_G_from_eq211` for the conversion from the
canonical stage).  R = L2(G) collapses to

    R(h) = h [ (a0 + a1 h^2 + a2 h^4 + a3 h^6) J1
             + (b0 + b1 h^2 + b2 h^4) J2 ] / [ (9h^2-4)^2 (9 kappa h^2-4) ]

with a_j, b_j linear in nu.  Two independent numerical routes to R are
implemented (the closed-form derivative formulas versus differentiation of
the propagated six-moment ODE), plus a once-per-kappa exact symbolic
extraction of (a_j, b_j) over Fraction arithmetic that never leaves this
package.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, DomainError
from .model import ModelParams
from .picard_fuchs import (
    PFPropagation,
    PFVector,
    apply_L2,
    derivative_formulas,
)
from .ratfunc import Poly, RatF

_prop_cache: dict[float, PFPropagation] = {}
_coeff_cache: dict[float, "RCoefficients"] = {}


def get_propagation(params: ModelParams) -> PFPropagation:
    """Dense six-moment propagation across the annulus window, cached per
    kappa (moments never depend on the perturbation weights)."""
    key = params.kappa
    if key not in _prop_cache:
        _prop_cache[key] = PFPropagation(params)
    return _prop_cache[key]


def clear_caches() -> None:
    _prop_cache.clear()
    _coeff_cache.clear()


def eval_G(h: float, params: ModelParams, pf: PFVector | None = None) -> float:
    """G(h) for the G-stage weights stored on ``params``.

    ``pf`` supplies the derivative data at level h; omitted, it is taken
    from the cached propagation.
    """
    if pf is None:
        pf = get_propagation(params).pf_vector(h)
    elif pf.h != h:
        raise DomainError(f"pf is at level {pf.h}, not {h}")
    d = pf.derivs
    n1, n2, n3, n4 = params.mu
    k = params.kappa
    return ((n1 * h * h + n3) * d[0] + n2 * d[3]
            + n4 * (-4.0 * h * d[4] + (3.0 * k * h * h - 4.0) * d[5]))


def eval_G_prime(h: float, params: ModelParams, prop: PFPropagation | None = None):
    """(G, G', G'') by exact differentiation of the six-moment ODE."""
    prop = prop or get_propagation(params)
    d1, d2, d3 = prop.chain(h)
    n1, n2, n3, n4 = params.mu
    k = params.kappa
    G = ((n1 * h * h + n3) * d1[0] + n2 * d1[3]
         + n4 * (-4.0 * h * d1[4] + (3.0 * k * h * h - 4.0) * d1[5]))
    Gp = (2.0 * n1 * h * d1[0] + (n1 * h * h + n3) * d2[0] + n2 * d2[3]
          + n4 * (-4.0 * d1[4] - 4.0 * h * d2[4] + 6.0 * k * h * d1[5]
                  + (3.0 * k * h * h - 4.0) * d2[5]))
    Gpp = (2.0 * n1 * d1[0] + 4.0 * n1 * h * d2[0] + (n1 * h * h + n3) * d3[0]
           + n2 * d3[3]
           + n4 * (-8.0 * d2[4] - 4.0 * h * d3[4] + 6.0 * k * d1[5]
                   + 12.0 * k * h * d2[5] + (3.0 * k * h * h - 4.0) * d3[5]))
    return G, Gp, Gpp


def eval_R(h: float, params: ModelParams, route: str = "direct",
           prop: PFPropagation | None = None) -> float:
    """R(h) = L2(G)(h) by one of two independent routes.

    ``direct``      L2 applied termwise to the normal form, using
                    the closed second/third derivative formulas for the
                    J-dependent terms and the closed-form image identity for the
                    L2-image of JJ.
    ``pf_numeric``  apply_L2 on (G, G', G'') obtained by differentiating
                    the closed six-moment linear ODE.
    """
    prop = prop or get_propagation(params)
    k = params.kappa
    if route == "pf_numeric":
        return apply_L2(*eval_G_prime(h, params, prop), h, params)
    if route != "direct":
        raise DomainError(f"unknown route {route!r}")
    d = prop.derivs(h)
    J1, J2 = d[0], d[3]
    n1, n2, n3, n4 = params.mu
    i200, i211 = derivative_formulas("second", h, J1, J2, params)
    i300, i311 = derivative_formulas("third", h, J1, J2, params)
    # term (nu1 h^2 + nu3) J1
    f, fp, fpp = n1 * h * h + n3, 2.0 * n1 * h, 2.0 * n1
    u = f * J1
    up = fp * J1 + f * i200
    upp = fpp * J1 + 2.0 * fp * i200 + f * i300
    out = apply_L2(u, up, upp, h, params)
    # term nu2 J2
    out += n2 * apply_L2(J2, i211, i311, h, params)
    # term nu4 JJ through the closed-form L2-image identity
    out += n4 * (4.0 / 3.0) * (k - 1.0) * (
        h * (9.0 * k * h * h - 4.0) * i311 + (6.0 * k * h * h + 8.0) * i211)
    return out


# ---------------------------------------------------------------------------
# exact extraction of the rational-template coefficients of R
# ---------------------------------------------------------------------------

def _pair_derive(p: RatF, q: RatF, M):
    """d/dh of p J1 + q J2 as a new (p, q) pair, via J' = M J."""
    M11, M12, M21, M22 = M
    return (p.deriv() + p * M11 + q * M21, q.deriv() + p * M12 + q * M22)


def _pair_L2(p: RatF, q: RatF, kf: Fraction, M):
    h = RatF(Poly.x())
    p1, q1 = _pair_derive(p, q, M)
    p2, q2 = _pair_derive(p1, q1, M)
    c0 = 5 * kf * h
    c1 = RatF(Poly([-8, 0, 9 * kf]))
    c2 = h * RatF(Poly([-4, 0, 9 * kf]))
    return (c0 * p - c1 * p1 + c2 * p2, c0 * q - c1 * q1 + c2 * q2)


@dataclass(frozen=True)
class RCoefficients:
    """Exact coefficients of the R template for one kappa: a_j, b_j as
    linear forms over the G-stage weights (nu1..nu4), Fraction entries."""

    kappa: float
    a: tuple  # 4 linear forms, each a 4-tuple of Fractions
    b: tuple  # 3 linear forms

    def a_values(self, mu) -> np.ndarray:
        return np.array([sum(float(c) * m for c, m in zip(row, mu)) for row in self.a])

    def b_values(self, mu) -> np.ndarray:
        return np.array([sum(float(c) * m for c, m in zip(row, mu)) for row in self.b])

    def template(self, h: float, J1: float, J2: float, mu) -> float:
        """Evaluate the rational template of R with these coefficients."""
        av, bv = self.a_values(mu), self.b_values(mu)
        h2 = h * h
        num = h * ((av[0] + av[1] * h2 + av[2] * h2**2 + av[3] * h2**3) * J1
                   + (bv[0] + bv[1] * h2 + bv[2] * h2**2) * J2)
        den = (9.0 * h2 - 4.0) ** 2 * (9.0 * self.kappa * h2 - 4.0)
        return num / den

    def as_text(self) -> str:
        lines = [f"# exact R-template coefficients at kappa = {Fraction(self.kappa)}",
                 "# numerator h*( (a0+a1 h^2+a2 h^4+a3 h^6) J1 + (b0+b1 h^2+b2 h^4) J2 )",
                 "# denominator (9h^2-4)^2 (9 kappa h^2-4); weights are G-stage nu1..nu4"]
        for name, rows in (("a", self.a), ("b", self.b)):
            for idx, row in enumerate(rows):
                terms = " + ".join(f"({c})*nu{m + 1}" for m, c in enumerate(row) if c != 0)
                lines.append(f"{name}{idx} = {terms if terms else '0'}")
        return "\n".join(lines)


def extract_R_coeffs(params: ModelParams) -> RCoefficients:
    """Carry out the substitution of the closed derivative formulas into
    L2(G) exactly, over Fractions, and clear denominators to the rational
    template.  Raises ConsistencyError if the rational function fails to
    cancel to the template's denominator and parity."""
    key = params.kappa
    if key in _coeff_cache:
        return _coeff_cache[key]
    kf = Fraction(params.kappa)
    h = Poly.x()
    d1 = Poly([-4, 0, 9])           # 9h^2 - 4
    d2 = Poly([-4, 0, 9 * kf])      # 9 kappa h^2 - 4
    delta = d1 * d2
    M = (
        RatF(Poly([0, -3]), d1),                      # M11 = -3h/(9h^2-4)
        RatF(Poly([0, 12 * (kf - 1)]), delta),        # M12
        RatF(Poly([0, -3]), d1),                      # M21
        RatF(Poly([0, 3]), d1),                       # M22
    )
    zero, one = RatF(0), RatF(1)
    h2 = RatF(Poly([0, 0, 1]))

    pairs = []
    # nu1, nu2, nu3 terms go through L2 directly
    pairs.append(_pair_L2(h2, zero, kf, M))
    pairs.append(_pair_L2(zero, one, kf, M))
    pairs.append(_pair_L2(one, zero, kf, M))
    # nu4: the L2-image of JJ, expressed through I11'' and I11'''
    d2pair = _pair_derive(zero, one, M)          # I11'' as p J1 + q J2
    d3pair = _pair_derive(*d2pair, M)            # I11'''
    c_third = RatF(Poly([0, -4, 0, 9 * kf])) * Fraction(4, 3) * (kf - 1)
    c_second = RatF(Poly([8, 0, 6 * kf])) * Fraction(4, 3) * (kf - 1)
    pairs.append((c_third * d3pair[0] + c_second * d2pair[0],
                  c_third * d3pair[1] + c_second * d2pair[1]))

    dstd = RatF(d1 * d1 * d2)
    a_rows, b_rows = [[], [], [], []], [[], [], []]
    for p, q in pairs:
        cleared = []
        for r in (p, q):
            rp = r * dstd
            if not rp.is_poly():
                raise ConsistencyError(
                    f"R numerator failed to cancel to the template denominator: {rp.den!r}")
            cleared.append(rp.as_poly())
        pnum, qnum = cleared
        if pnum.degree > 7 or qnum.degree > 5:
            raise ConsistencyError("R numerator exceeds the template degrees")
        for poly in (pnum, qnum):
            for pw, coef in enumerate(poly.c):
                if pw % 2 == 0 and coef != 0:
                    raise ConsistencyError("R numerator has an even-power term")
        for idx in range(4):
            a_rows[idx].append(pnum.c[2 * idx + 1] if pnum.degree >= 2 * idx + 1 else Fraction(0))
        for idx in range(3):
            b_rows[idx].append(qnum.c[2 * idx + 1] if qnum.degree >= 2 * idx + 1 else Fraction(0))

    rc = RCoefficients(kappa=params.kappa,
                       a=tuple(tuple(row) for row in a_rows),
                       b=tuple(tuple(row) for row in b_rows))
    _coeff_cache[key] = rc
    return rc
