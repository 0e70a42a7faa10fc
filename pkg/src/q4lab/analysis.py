"""Zero counting, Chebyshev-property probes, and the bound pipeline.

Real zero counts come from sign scanning on Chebyshev-distributed grids
with bracket refinement, plus a heuristic even-multiplicity detector
(local quadratic fit at interior near-tangencies).  Complex zero counts
come from the argument principle on the keyhole domain

    D_eps = (C \\ (-inf, 1])  with  |s - 1| > eps,  |s| < 1/eps,

traversed positively: the winding of F = (P J1 + Q J2)/J1 along the four
boundary pieces equals the zero count of P J1 + Q J2 inside, and is the
empirical content of the 2n bound for the spaces V_n.

The Chebyshev probe studies the residue solution f(h) of L2 x = 0 given by
the residue of the underlying differential at (0, y0(h)): it checks
L2(f) = 0 by finite differences, locates f's zero against the closed-form
candidate h* = -(2/3) sqrt(5/kappa) (obtained by eliminating y0 from the
vanishing condition through the defining cubic), and reports where h*
falls relative to the two intervals of interest.  No nonvanishing claim is
asserted; the probe measures it, alongside a direct projective-rotation
measurement of the solution frame (a two-dimensional solution space is
Chebyshev on a window iff the frame direction sweeps less than a half
turn).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError, GeometryError
from .model import ModelParams, real_roots_y
from .picard_fuchs import (
    Arc,
    Line,
    apply_L2,
    continue_state,
    initial_jstate,
)
from .melnikov import extract_R_coeffs, get_propagation
from .reduction import mu_G_from_eq211

# ---------------------------------------------------------------------------
# real zero counting
# ---------------------------------------------------------------------------

@dataclass
class ZeroReport:
    interval: tuple[float, float]
    zeros: list[dict] = field(default_factory=list)
    count: int = 0
    grid_size: int = 0
    refined: bool = False
    identically_zero: bool = False
    warnings: list[str] = field(default_factory=list)

    @property
    def locations(self) -> list[float]:
        return [z["location"] for z in self.zeros]


def _cheb_grid(a: float, b: float, n: int) -> np.ndarray:
    k = np.arange(n)
    nodes = 0.5 * (a + b) + 0.5 * (b - a) * np.cos(np.pi * k / (n - 1))
    return nodes[::-1]


def _eval_f(f, xs: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(xs), dtype=float)
        if vals.shape == xs.shape:
            return vals
    except Exception:
        pass
    return np.array([float(f(x)) for x in xs])


def count_zeros(f, interval: tuple[float, float], grid: int = 256,
                tol: float = 1e-9) -> ZeroReport:
    """Count zeros of f on the open interval, with multiplicity heuristics.

    Sign changes between Chebyshev nodes are refined by bisection/secant
    (brentq); interior near-tangencies (|f| below tol * scale at a local
    minimum without sign change) are fitted by a local quadratic and
    counted with multiplicity two.  Zeros closer than the refinement
    tolerance trigger an unresolved-cluster warning.
    """
    a, b = interval
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise DomainError(f"bad interval {interval}")
    grid = max(int(grid), 64)
    xs = _cheb_grid(a, b, grid)
    fs = _eval_f(f, xs)
    if np.any(~np.isfinite(fs)):
        raise DomainError("f evaluated non-finite on the scan grid")
    fvec = lambda x: _eval_f(f, np.asarray(x, dtype=float))
    return _count_from_scan(xs, fs, fvec, (a, b), tol)


# ---------------------------------------------------------------------------
# the residue solution and the Chebyshev probe
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ResidueSolution:
    h: float
    y0: float
    f: float


def residue_solution(h: float, params: ModelParams) -> ResidueSolution:
    """The candidate nonvanishing solution of L2 x = 0: the residue at
    (0, y0(h)) with y0 the unique real root below the saddle level."""
    if h >= params.saddle_h:
        raise DomainError(f"h={h} not below the saddle level {params.saddle_h}")
    roots = real_roots_y(h, params)
    if len(roots) != 1:
        raise DomainError(f"expected a unique real root at h={h}, got {roots}")
    y0 = roots[0][0]
    k = params.kappa
    f = (-4.0 * h + (3.0 * k * h * h - 4.0) * y0) / (k * y0 * y0 - 1.0)
    return ResidueSolution(h=h, y0=y0, f=f)


def residue_zero_level(params: ModelParams) -> float:
    """Closed-form level where the residue solution vanishes: eliminating
    y0 from -4h + (3 kappa h^2 - 4) y0 = 0 through the defining cubic gives
    y0^2 = 5/kappa, hence h* = -(2/3) sqrt(5/kappa)."""
    return -(2.0 / 3.0) * math.sqrt(5.0 / params.kappa)


class L2Frame:
    """Fundamental solution frame of L2 x = 0 on a window left of the
    saddle level, integrated densely from the window midpoint."""

    def __init__(self, params: ModelParams, window: tuple[float, float],
                 tol: float = 1e-12):
        a, b = window
        if not (a < b <= params.saddle_h - 1e-12):
            raise DomainError("window must sit left of the saddle level")
        if a < 0.0 < b:
            raise DomainError("window crosses the singular level h = 0")
        self.params = params
        self.window = window
        k = params.kappa

        def rhs(h, y):
            x1, d1, x2, d2 = y
            a2 = h * (9.0 * k * h * h - 4.0)
            a1 = -(9.0 * k * h * h - 8.0)
            a0 = 5.0 * k * h
            return [d1, -(a1 * d1 + a0 * x1) / a2, d2, -(a1 * d2 + a0 * x2) / a2]

        mid = 0.5 * (a + b)
        y0 = [1.0, 0.0, 0.0, 1.0]
        kw = dict(method="DOP853", rtol=tol, atol=1e-14, dense_output=True)
        self._left = solve_ivp(rhs, (mid, a), y0, **kw)
        self._right = solve_ivp(rhs, (mid, b), y0, **kw)
        if not (self._left.success and self._right.success):
            raise ConvergenceError("L2 frame integration failed")
        self.mid = mid

    def frame(self, h):
        h = np.atleast_1d(np.asarray(h, dtype=float))
        out = np.empty((4, h.size))
        left = h <= self.mid
        if np.any(left):
            out[:, left] = self._left.sol(h[left])
        if np.any(~left):
            out[:, ~left] = self._right.sol(h[~left])
        return out

    def rotation_span(self, n: int = 4096) -> float:
        """Total sweep (radians) of the direction of (x1, x2)(h); the
        solution space is Chebyshev on the window iff the sweep < pi."""
        hs = np.linspace(self.window[0], self.window[1], n)
        fr = self.frame(hs)
        theta = np.unwrap(np.arctan2(fr[2], fr[0]))
        return float(theta.max() - theta.min())

    def solution(self, c1: float, c2: float):
        def sol(h):
            fr = self.frame(h)
            return c1 * fr[0] + c2 * fr[2]
        return sol


@dataclass
class ChebyshevProbeReport:
    kappa: float
    window: tuple[float, float]
    l2_residual: float
    zero_report: ZeroReport
    h_star: float
    h_star_located: float | None
    locate_error: float | None
    saddle_y0: float
    saddle_y0_claimed: float
    identity_gap: float
    in_half_line_interval: bool
    in_annulus_interval: bool
    nonvanishing_on_half_line: str
    nonvanishing_on_annulus: str
    rotation_span_window: float
    rotation_span_annulus: float
    rows: list[dict] = field(default_factory=list)


def chebyshev_probe(params: ModelParams, window: tuple[float, float] | None = None,
                    grid: int = 512, tol: float = 1e-9) -> ChebyshevProbeReport:
    """Measure the nonvanishing claim for the residue solution.

    The verdicts are reported, never asserted: the closed-form candidate
    zero h* lies inside the interval (-inf, saddle) for every kappa > 1,
    and inside the annulus interval exactly when kappa > 5.
    """
    k = params.kappa
    hs_level = params.saddle_h
    h_star = residue_zero_level(params)
    if window is None:
        window = (h_star - 1.0, hs_level - 1e-6 * abs(hs_level))
    a, b = window
    if not (a < b < hs_level):
        raise DomainError("probe window must sit left of the saddle level")

    # L2(f) residual by centered finite differences on the exact f; the
    # stencil must stay strictly below the saddle level
    f_of = lambda h: residue_solution(h, params).f
    inset = 3e-4 * max(abs(a), abs(b), 1.0)
    hgrid = np.linspace(a + inset, b - inset, 20)
    worst = 0.0
    rows = []
    for h in hgrid:
        dh = 1e-4 * max(abs(h), 1.0)
        fm2, fm1, f0, fp1, fp2 = (f_of(h + m * dh) for m in (-2, -1, 0, 1, 2))
        g1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * dh)
        g2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * dh * dh)
        val = apply_L2(f0, g1, g2, h, params)
        scale = max(abs(5 * k * h * f0), abs((9 * k * h * h - 8) * g1),
                    abs(h * (9 * k * h * h - 4) * g2))
        rel = abs(val) / scale
        worst = max(worst, rel)
        rows.append({"h": h, "f": f0, "L2f_rel": rel})

    zr = count_zeros(lambda hh: np.array([f_of(x) for x in np.atleast_1d(hh)]),
                     window, grid=grid, tol=tol)
    located, err = None, None
    for z in zr.zeros:
        e = abs(z["location"] - h_star)
        if err is None or e < err:
            located, err = z["location"], e

    # y0 at the saddle level (sampled just outside the fold-classification
    # tolerance of the cubic solver).  A strict-monotonicity argument for
    # nonvanishing of f would need this endpoint value to be -sqrt(5/kappa),
    # the root of the vanishing condition; the cubic itself gives -2/sqrt(kappa).
    saddle_y0 = residue_solution(hs_level - 1e-9 * abs(hs_level), params).y0
    claimed = -math.sqrt(5.0 / k)
    # the algebraic identity: -4h + (3kh^2-4) y0 recomputes to
    # kappa * y0 * (3h^2 - (4/3) y0^2); measure the gap to the kappa*h variant
    hprobe = a + 0.37 * (b - a)
    rs = residue_solution(hprobe, params)
    lhs = -4.0 * hprobe + (3.0 * k * hprobe**2 - 4.0) * rs.y0
    good = k * rs.y0 * (3.0 * hprobe**2 - (4.0 / 3.0) * rs.y0**2)
    bad = k * hprobe * (3.0 * hprobe**2 - (4.0 / 3.0) * rs.y0**2)
    identity_gap = abs(lhs - bad) / max(abs(lhs), 1e-300)
    assert abs(lhs - good) <= 1e-10 * max(abs(lhs), 1.0)

    in_half_line = h_star < hs_level
    in_annulus = params.center_h < h_star < hs_level
    verdict = lambda inside: "contradicted" if inside else "confirmed"

    rot_window = L2Frame(params, window).rotation_span()
    ann = (params.center_h + 1e-9, hs_level - 1e-9)
    rot_annulus = L2Frame(params, ann).rotation_span()

    return ChebyshevProbeReport(
        kappa=k, window=window, l2_residual=worst, zero_report=zr,
        h_star=h_star, h_star_located=located, locate_error=err,
        saddle_y0=saddle_y0, saddle_y0_claimed=claimed,
        identity_gap=identity_gap,
        in_half_line_interval=in_half_line, in_annulus_interval=in_annulus,
        nonvanishing_on_half_line=verdict(in_half_line),
        nonvanishing_on_annulus=verdict(in_annulus),
        rotation_span_window=rot_window, rotation_span_annulus=rot_annulus,
        rows=rows,
    )


# ---------------------------------------------------------------------------
# Petrov winding counts in the complex domain
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyPair:
    """P of degree <= n and Q of degree <= n - 1 (ascending coefficients),
    representing the element P(s) J1(s) + Q(s) J2(s) of V_n."""

    P: tuple
    Q: tuple

    def __post_init__(self):
        object.__setattr__(self, "P", tuple(float(c) for c in self.P))
        object.__setattr__(self, "Q", tuple(float(c) for c in self.Q))
        if len(self.P) < 1:
            raise DomainError("P must have at least the constant coefficient")
        if len(self.Q) > len(self.P) - 1 and not (len(self.P) == 1 and len(self.Q) == 0):
            raise DomainError("deg Q must be < deg P bound n")

    @property
    def n(self) -> int:
        return len(self.P) - 1

    def eval_P(self, s):
        return np.polynomial.polynomial.polyval(s, np.asarray(self.P))

    def eval_Q(self, s):
        if not self.Q:
            return np.zeros_like(np.asarray(s, dtype=complex))
        return np.polynomial.polynomial.polyval(s, np.asarray(self.Q))


@dataclass
class WindingReport:
    n: int
    epsilon: float
    segments: list[dict]
    winding: int
    residual: float
    min_abs_J1: float
    closure_drift: float
    bound_ok: bool
    max_arg_step: float
    edge_im_agreement: float


class KeyholeContour:
    """Continuation of (J, W) around the keyhole boundary of D_eps, cached
    per (kappa, eps); per-element winding counts then reduce to array
    arithmetic on the stored samples."""

    def __init__(self, params: ModelParams, epsilon: float = 1e-3,
                 delta: float | None = None, tol: float = 1e-11,
                 samples: int = 257):
        if not (0.0 < epsilon < 0.05):
            raise DomainError("epsilon out of range")
        self.params = params
        self.epsilon = epsilon
        self.delta = epsilon**2 if delta is None else delta
        k = params.kappa
        eps, dlt = self.epsilon, self.delta
        R = 1.0 / eps
        a_small = math.asin(dlt / eps)

        s_mid = math.sqrt(k)  # geometric midpoint of (1, kappa)
        state = initial_jstate(s_mid, params)
        self.det_W0 = state.det_W
        lift = max(0.25, 4.0 * eps)
        start = complex(-R, dlt)
        pre = [Line(complex(s_mid), complex(s_mid, lift)),
               Line(complex(s_mid, lift), complex(-R, lift)),
               Line(complex(-R, lift), start)]
        state = continue_state(pre, state, params, tol=tol, eps_min=min(0.5 * eps, 1e-4))
        self.start_state = state

        # geometric breakpoints along the cut edges, clustered toward s = 1
        def edge_nodes(sign):
            gaps = np.geomspace(R + 1.0, eps, 28)
            xs = 1.0 - gaps
            xs[-1] = 1.0 - math.sqrt(eps * eps - dlt * dlt)
            return [complex(x, sign * dlt) for x in xs]

        upper = edge_nodes(+1.0)
        lower = edge_nodes(-1.0)[::-1]
        segs = {
            "cut_upper": [Line(a, b) for a, b in zip(upper[:-1], upper[1:])],
            "small_circle": [Arc(1.0 + 0j, eps, math.pi - a_small,
                                 -(math.pi - a_small))],
            "cut_lower": [Line(a, b) for a, b in zip(lower[:-1], lower[1:])],
            # counterclockwise from just below the negative real axis back
            # to just above it
            "big_circle": [Arc(0j, R, math.atan2(-dlt, -R),
                               math.atan2(dlt, -R))],
        }
        # traversal order with positive orientation of the keyhole
        self.samples = {}
        eps_min = min(0.45 * eps, 1e-4)
        per_piece = {"cut_upper": samples, "cut_lower": samples,
                     "small_circle": 4 * samples, "big_circle": 16 * samples}
        for name in ("cut_upper", "small_circle", "cut_lower", "big_circle"):
            state, recs = continue_state(segs[name], state, params, tol=tol,
                                         eps_min=eps_min,
                                         samples_per_piece=per_piece[name])
            s_all = np.concatenate([r[0] for r in recs])
            J_all = np.concatenate([r[1] for r in recs], axis=1)
            W_all = np.concatenate([r[2] for r in recs], axis=2)
            self.samples[name] = (s_all, J_all, W_all)
        self.end_state = state
        j0 = self.start_state.J
        self.closure_drift = float(np.max(np.abs(state.J - j0)) / np.max(np.abs(j0)))
        self.det_drift = abs(state.det_W - self.det_W0) / abs(self.det_W0)


_contour_cache: dict = {}


def keyhole_contour(params: ModelParams, epsilon: float = 1e-3) -> KeyholeContour:
    key = (params.kappa, epsilon)
    if key not in _contour_cache:
        _contour_cache[key] = KeyholeContour(params, epsilon)
    return _contour_cache[key]


def _arg_increment(z: np.ndarray):
    """Total continuous argument increment along a sampled curve, plus the
    largest single-step jump (for refinement diagnostics)."""
    ang = np.angle(z)
    steps = np.diff(ang)
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return float(np.sum(steps)), float(np.max(np.abs(steps))) if steps.size else 0.0


def winding_count(pair: PolyPair, params: ModelParams,
                  epsilon: float = 1e-3) -> WindingReport:
    """Argument-principle zero count of P J1 + Q J2 on the keyhole domain.

    On the cut edges the imaginary part of F is assembled from the
    pointwise conjugate-pair fundamental matrix, Im F =
    Q Im(J2 conj(J1)) / |J1|^2, matching the boundary analysis; elsewhere F
    is used directly.
    """
    ct = keyhole_contour(params, epsilon)
    segments = []
    total = 0.0
    min_j1 = math.inf
    max_step = 0.0
    edge_gap = 0.0
    for name in ("cut_upper", "small_circle", "cut_lower", "big_circle"):
        s, J, W = ct.samples[name]
        J1, J2 = J[0], J[1]
        amin = float(np.min(np.abs(J1)))
        min_j1 = min(min_j1, amin)
        if amin == 0.0:
            raise GeometryError("J1 vanishes on the contour; F undefined")
        P = pair.eval_P(s)
        Q = pair.eval_Q(s)
        F = (P * J1 + Q * J2) / J1
        if name.startswith("cut"):
            imf = Q.real * (J2 * np.conj(J1)).imag / np.abs(J1) ** 2
            edge_gap = max(edge_gap, float(np.max(np.abs(imf - F.imag))
                                           / (np.max(np.abs(F)) + 1e-300)))
            F = F.real + 1j * imf
        inc, step = _arg_increment(F)
        max_step = max(max_step, step)
        total += inc
        segments.append({"name": name, "arg_increment": inc})
    w = int(round(total / (2.0 * math.pi)))
    residual = abs(total / (2.0 * math.pi) - w)
    return WindingReport(
        n=pair.n, epsilon=epsilon, segments=segments, winding=w,
        residual=residual, min_abs_J1=min_j1, closure_drift=ct.closure_drift,
        bound_ok=w <= 2 * pair.n, max_arg_step=max_step,
        edge_im_agreement=edge_gap,
    )


# ---------------------------------------------------------------------------
# real-line sampling of V_n elements
# ---------------------------------------------------------------------------

class JTable:
    """J = (J1, J2) tabulated densely on (1 + margin, kappa - margin) by
    propagating the hypergeometric-type system from the geometric midpoint
    initialized with oracle data."""

    def __init__(self, params: ModelParams, margin: float = 1e-3,
                 tol: float = 1e-12):
        k = params.kappa
        self.lo = 1.0 + margin * (k - 1.0)
        self.hi = k - margin * (k - 1.0)
        s_mid = math.sqrt(k)
        st = initial_jstate(s_mid, params)
        y0 = np.array([st.J[0].real, st.J[1].real])

        def rhs(s, y):
            N = np.array([[1.0 - s, k - 1.0], [1.0 - s, s - 1.0]])
            return N @ y / (6.0 * (s - 1.0) * (s - k))

        kw = dict(method="DOP853", rtol=tol, atol=1e-14, dense_output=True)
        self._left = solve_ivp(rhs, (s_mid, self.lo), y0, **kw)
        self._right = solve_ivp(rhs, (s_mid, self.hi), y0, **kw)
        if not (self._left.success and self._right.success):
            raise ConvergenceError("J tabulation failed")
        self.mid = s_mid

    def J(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = np.empty((2, s.size))
        left = s <= self.mid
        if np.any(left):
            out[:, left] = self._left.sol(s[left])
        if np.any(~left):
            out[:, ~left] = self._right.sol(s[~left])
        return out


_jtable_cache: dict = {}


def j_table(params: ModelParams, margin: float = 1e-3) -> JTable:
    key = (params.kappa, margin)
    if key not in _jtable_cache:
        _jtable_cache[key] = JTable(params, margin)
    return _jtable_cache[key]


def random_poly_pair(n: int, rng) -> PolyPair:
    coeffs = rng.normal(size=2 * n + 1)
    coeffs /= np.linalg.norm(coeffs)
    return PolyPair(P=tuple(coeffs[: n + 1]), Q=tuple(coeffs[n + 1:]))


def vn_sample_test(n: int, trials: int, params: ModelParams, seed: int,
                   grid: int = 512, with_winding: bool = True,
                   epsilon: float = 1e-3) -> dict:
    """Random sampling of V_n: real-zero counts on (1, kappa) and winding
    counts on the keyhole domain, against the dimension bound 2n."""
    if not (1 <= n <= 4):
        raise DomainError("n must be in 1..4")
    tab = j_table(params)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    max_real = 0
    max_winding = 0
    worst_residual = 0.0
    violations = []
    rows = []
    for t in range(trials):
        pair = random_poly_pair(n, rng)

        def V(s):
            J = tab.J(s)
            return pair.eval_P(s).real * J[0] + pair.eval_Q(s).real * J[1]

        zr = count_zeros(V, (tab.lo, tab.hi), grid=grid)
        max_real = max(max_real, zr.count)
        row = {"trial": t, "real_zeros": zr.count}
        if with_winding:
            wr = winding_count(pair, params, epsilon)
            max_winding = max(max_winding, wr.winding)
            worst_residual = max(worst_residual, wr.residual)
            row.update({"winding": wr.winding, "residual": wr.residual})
            if not wr.bound_ok:
                violations.append({"trial": t, "kind": "winding", "value": wr.winding})
        if zr.count > 2 * n:
            violations.append({"trial": t, "kind": "real", "value": zr.count})
        rows.append(row)
    return {
        "n": n, "trials": trials, "kappa": params.kappa,
        "max_real_zeros": max_real, "max_winding": max_winding,
        "worst_residual": worst_residual, "bound": 2 * n,
        "violations": violations, "rows": rows,
    }


# ---------------------------------------------------------------------------
# the bound pipeline (empirical bound chain)
# ---------------------------------------------------------------------------

class BoundScanner:
    """Per-kappa precomputation for fast zero counts of I, G and R over
    many weight vectors: each function is linear in the weights, so a
    4 x grid basis matrix reduces one trial to a matvec plus sign scan."""

    def __init__(self, params: ModelParams, grid: int = 512,
                 margin_rel: float = 1e-6):
        self.params = params
        self.prop = get_propagation(params)
        self.rc = extract_R_coeffs(params)
        hc, hs = params.center_h, params.saddle_h
        w = hs - hc
        self.window = (hc + margin_rel * w, hs - margin_rel * w)
        self.grid = max(int(grid), 64)
        self.hs = _cheb_grid(*self.window, self.grid)
        k = params.kappa
        V = self.prop.values(self.hs)
        D = self.prop.derivs(self.hs)
        h = self.hs
        self.I_basis = np.stack([
            h * V[0], V[1], V[2], 2.0 * V[4] + 3.0 * k * h * V[5]])
        J1, J2 = D[0], D[3]
        self.G_basis = np.stack([
            h * h * J1, J2, J1, -4.0 * h * D[4] + (3.0 * k * h * h - 4.0) * D[5]])
        self.R_basis = np.stack(
            [self._R_unit_row(m, h, J1, J2) for m in range(4)])

    def _R_unit_row(self, m: int, h, J1, J2):
        unit = np.zeros(4)
        unit[m] = 1.0
        av, bv = self.rc.a_values(unit), self.rc.b_values(unit)
        den = (9.0 * h * h - 4.0) ** 2 * (9.0 * self.params.kappa * h * h - 4.0)
        num = h * ((av[0] + av[1] * h**2 + av[2] * h**4 + av[3] * h**6) * J1
                   + (bv[0] + bv[1] * h**2 + bv[2] * h**4) * J2)
        return num / den

    def _pointwise(self, which: str, mu: np.ndarray):
        k = self.params.kappa

        def f(h):
            h = np.atleast_1d(np.asarray(h, dtype=float))
            if which == "I":
                V = self.prop.values(h)
                basis = np.stack([h * V[0], V[1], V[2], 2.0 * V[4] + 3.0 * k * h * V[5]])
                return mu @ basis
            D = self.prop.derivs(h)
            J1, J2 = D[0], D[3]
            if which == "G":
                basis = np.stack([h * h * J1, J2, J1,
                                  -4.0 * h * D[4] + (3.0 * k * h * h - 4.0) * D[5]])
                return mu @ basis
            # same arithmetic path as the precomputed grid rows
            basis = np.stack([self._R_unit_row(m, h, J1, J2) for m in range(4)])
            return mu @ basis

        return f

    def count(self, which: str, mu, tol: float = 1e-9) -> ZeroReport:
        mu = np.asarray(mu, dtype=float)
        basis = {"I": self.I_basis, "G": self.G_basis, "R": self.R_basis}[which]
        fs = mu @ basis
        return _count_from_scan(self.hs, fs, self._pointwise(which, mu),
                                self.window, tol)


def _count_from_scan(xs, fs, fvec, interval, tol) -> ZeroReport:
    """Shared scan-and-refine logic against precomputed grid values."""
    report = ZeroReport(interval=interval, grid_size=xs.size)
    scale = float(np.max(np.abs(fs)))
    if scale == 0.0:
        report.identically_zero = True
        return report
    f1 = lambda x: float(np.atleast_1d(fvec(np.array([x])))[0])
    xtol = max(tol * (interval[1] - interval[0]), 1e-15)
    zeros = []
    for idx in np.nonzero(fs[:-1] * fs[1:] < 0)[0]:
        fa, fb = f1(xs[idx]), f1(xs[idx + 1])
        if fa == 0.0:
            root = xs[idx]
        elif fb == 0.0:
            root = xs[idx + 1]
        elif fa * fb < 0.0:
            root = brentq(f1, xs[idx], xs[idx + 1], xtol=xtol, rtol=1e-14)
        else:
            # the scanned sign change is not reproduced pointwise: a grazing
            # zero at rounding level; place it by linear interpolation
            root = xs[idx] + fs[idx] / (fs[idx] - fs[idx + 1]) * (xs[idx + 1] - xs[idx])
        zeros.append({"location": float(root), "multiplicity_estimate": 1})
    for idx in np.nonzero(fs == 0.0)[0]:
        zeros.append({"location": float(xs[idx]), "multiplicity_estimate": 1})
    # interior near-tangencies away from detected sign changes: fit a local
    # quadratic; a tangency is declared when the fitted minimum value sits
    # at zero within tolerance (nodes themselves never land on it)
    absf = np.abs(fs)
    for idx in range(1, xs.size - 1):
        if not (absf[idx] <= absf[idx - 1] and absf[idx] <= absf[idx + 1]):
            continue
        if fs[idx] == 0.0:
            continue
        if any(xs[idx - 1] <= z["location"] <= xs[idx + 1] for z in zeros):
            continue
        x0, delta = xs[idx], 0.5 * (xs[idx + 1] - xs[idx - 1])
        fmin, curv = fs[idx], 0.0
        for _ in range(3):
            delta = min(delta, x0 - interval[0], interval[1] - x0)
            if delta <= 0.0:
                break
            st = np.array([x0 - delta, x0, x0 + delta])
            fv = fvec(st)
            coef = np.polyfit(st - x0, fv, 2)
            if coef[0] == 0.0 or coef[0] * fs[idx] < 0:
                break
            x0 = float(x0 - coef[1] / (2 * coef[0]))
            x0 = min(max(x0, xs[idx - 1]), xs[idx + 1])
            fmin = float(np.polyval(coef, np.clip(-coef[1] / (2 * coef[0]),
                                                   -delta, delta)))
            curv = coef[0]
            delta /= 8.0
        if curv * fs[idx] > 0 and abs(fmin) <= max(tol * scale, 64 * np.finfo(float).eps * scale):
            zeros.append({"location": float(x0), "multiplicity_estimate": 2})
    zeros.sort(key=lambda z: z["location"])
    for za, zb in zip(zeros[:-1], zeros[1:]):
        if zb["location"] - za["location"] < 2 * xtol:
            report.warnings.append(
                f"unresolved cluster near {za['location']:.12g}")
    report.zeros = zeros
    report.count = sum(z["multiplicity_estimate"] for z in zeros)
    report.refined = True
    return report


_scanner_cache: dict = {}


def bound_scanner(params: ModelParams, grid: int = 512) -> BoundScanner:
    key = (params.kappa, grid)
    if key not in _scanner_cache:
        _scanner_cache[key] = BoundScanner(params, grid)
    return _scanner_cache[key]


@dataclass
class BoundReport:
    kappa: float
    mu: tuple
    count_I: int
    count_G: int
    count_R: int
    chain_ok: bool
    violations: list[str]
    reconstruction_rel_err: float | None
    reports: dict


def bound_pipeline(params: ModelParams, grid: int = 512,
                   check_reconstruction: bool = True) -> BoundReport:
    """Empirical bound chain for the stored canonical weights: count zeros
    of I (eq211 route), G = L1(I) and R = L2(G) on the annulus interval and
    test count(R) <= 6, count(G) <= count(R) + 2, count(I) <= count(G) <= 8.
    Violations are reported, never clipped."""
    sc = bound_scanner(params, grid)
    mu = np.asarray(params.mu, dtype=float)
    muG = mu_G_from_eq211(mu, params.kappa)
    rep_I = sc.count("I", mu)
    rep_G = sc.count("G", muG)
    rep_R = sc.count("R", muG)
    violations = []
    if rep_R.count > 6:
        violations.append(f"count(R) = {rep_R.count} > 6")
    if rep_G.count > rep_R.count + 2:
        violations.append(f"count(G) = {rep_G.count} > count(R) + 2 = {rep_R.count + 2}")
    if rep_I.count > rep_G.count:
        violations.append(f"count(I) = {rep_I.count} > count(G) = {rep_G.count}")
    if rep_G.count > 8:
        violations.append(f"count(G) = {rep_G.count} > 8")

    rec_err = None
    if check_reconstruction and np.any(mu != 0.0):
        rec_err = _reconstruction_error(sc, mu, muG)

    return BoundReport(
        kappa=params.kappa, mu=tuple(mu), count_I=rep_I.count,
        count_G=rep_G.count, count_R=rep_R.count,
        chain_ok=not violations, violations=violations,
        reconstruction_rel_err=rec_err,
        reports={"I": rep_I, "G": rep_G, "R": rep_R},
    )


def _reconstruction_error(sc: BoundScanner, mu, muG) -> float:
    """Check I(h) = h * int_{-2/3}^h xi^-2 G(xi) d xi against the moment
    route, at three interior levels."""
    from .quadrature import _adaptive_gk
    params = sc.params
    prop = sc.prop
    k = params.kappa
    hc = params.center_h
    lo = prop.lo

    def G_of(h):
        h = np.atleast_1d(np.asarray(h, dtype=float))
        D = np.stack([prop.derivs(float(x)) for x in h], axis=1)
        return (muG[0] * h * h * D[0] + muG[2] * D[0] + muG[1] * D[3]
                + muG[3] * (-4.0 * h * D[4] + (3.0 * k * h * h - 4.0) * D[5]))

    def I_of(h):
        V = prop.values(float(h))
        return (mu[0] * h * V[0] + mu[1] * V[1] + mu[2] * V[2]
                + mu[3] * (2.0 * V[4] + 3.0 * k * h * V[5]))

    worst = 0.0
    scale = max(abs(I_of(0.5 * (sc.window[0] + sc.window[1]))), 1e-12)
    for q in (0.3, 0.55, 0.8):
        h = sc.window[0] + q * (sc.window[1] - sc.window[0])
        integral, _ = _adaptive_gk(lambda x: G_of(x) / x**2, lo, h, 1e-10)
        # the sliver between the true endpoint -2/3 and the propagation edge
        integral += float(G_of(lo)[0]) * (1.0 / hc - 1.0 / lo)
        rec = h * integral
        worst = max(worst, abs(rec - I_of(h)) / scale)
    return worst


def sweep_bounds(kappas, trials: int, seed: int, grid: int = 512) -> list[BoundReport]:
    """Monte-Carlo bound_pipeline over weight vectors uniform on the unit
    sphere, deterministic per (seed, kappa order, trial index)."""
    from dataclasses import replace

    from .model import make_params
    reports = []
    children = np.random.SeedSequence(seed).spawn(len(kappas))
    for kap, child in zip(kappas, children):
        rng = np.random.default_rng(child)
        base = make_params(kap)
        for _ in range(trials):
            mu = rng.normal(size=4)
            mu /= np.linalg.norm(mu)
            reports.append(bound_pipeline(
                replace(base, mu=tuple(mu)), grid=grid, check_reconstruction=False))
    return reports


# ---------------------------------------------------------------------------
# executable forms of the two zero-bound criteria
# ---------------------------------------------------------------------------

def frame_rotation_probe(params: ModelParams, window: tuple[float, float],
                trials: int = 40, seed: int = 0, grid: int = 512) -> dict:
    """Executable Chebyshev criterion for L2 on a window: measure the frame
    rotation (nonvanishing solution exists iff the sweep stays under pi)
    and cross-check by zero counts of random solutions."""
    frame = L2Frame(params, window)
    span = frame.rotation_span()
    exists_nonvanishing = span < math.pi - 1e-9
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    max_count = 0
    all_vanish = True
    for _ in range(trials):
        c = rng.normal(size=2)
        c /= np.linalg.norm(c)
        zr = count_zeros(frame.solution(*c), window, grid=grid)
        max_count = max(max_count, zr.count)
        if zr.count == 0:
            all_vanish = False
    return {
        "kappa": params.kappa, "window": window, "rotation_span": span,
        "exists_nonvanishing": exists_nonvanishing,
        "max_solution_zeros": max_count, "all_sampled_vanish": all_vanish,
        "consistent": (not exists_nonvanishing) or max_count <= 1,
    }


def inhomogeneous_bound_sample(params: ModelParams, window: tuple[float, float],
                 trials: int = 100, seed: int = 0, grid: int = 512,
                 rhs_degree: int = 6) -> dict:
    """Sample solutions of the non-homogeneous equation L2(G) = R by
    variation of parameters on the numerically integrated frame, for random
    polynomial right-hand sides with k <= rhs_degree zeros, and test
    count(G) <= k + 2."""
    a, b = window
    k = params.kappa
    frame = L2Frame(params, window)
    span = frame.rotation_span()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    max_excess = -10
    violations = []
    rows = []
    for t in range(trials):
        coeffs = rng.normal(size=rhs_degree + 1)
        Rpoly = np.polynomial.Polynomial(coeffs)
        kzeros = count_zeros(lambda x: Rpoly(np.asarray(x)), window, grid=grid).count

        def rhs(h, y):
            x1, d1, x2, d2, q1, q2 = y
            a2 = h * (9.0 * k * h * h - 4.0)
            a1 = -(9.0 * k * h * h - 8.0)
            a0 = 5.0 * k * h
            wr = x1 * d2 - d1 * x2
            rr = Rpoly(h) / (a2 * wr)
            return [d1, -(a1 * d1 + a0 * x1) / a2,
                    d2, -(a1 * d2 + a0 * x2) / a2,
                    x2 * rr, x1 * rr]

        mid = 0.5 * (a + b)
        y0 = [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        kw = dict(method="DOP853", rtol=1e-11, atol=1e-13, dense_output=True)
        solL = solve_ivp(rhs, (mid, a), y0, **kw)
        solR = solve_ivp(rhs, (mid, b), y0, **kw)
        if not (solL.success and solR.success):
            raise ConvergenceError("variation-of-parameters integration failed")

        c = rng.normal(size=2)

        def G(h):
            h = np.atleast_1d(np.asarray(h, dtype=float))
            out = np.empty((6, h.size))
            left = h <= mid
            if np.any(left):
                out[:, left] = solL.sol(h[left])
            if np.any(~left):
                out[:, ~left] = solR.sol(h[~left])
            x1, _, x2, _, q1, q2 = out
            return -x1 * q1 + x2 * q2 + c[0] * x1 + c[1] * x2

        gcount = count_zeros(G, window, grid=grid).count
        rows.append({"trial": t, "k": kzeros, "count_G": gcount})
        max_excess = max(max_excess, gcount - kzeros)
        if gcount > kzeros + 2:
            violations.append({"trial": t, "k": kzeros, "count_G": gcount})
    return {
        "kappa": params.kappa, "window": window, "trials": trials,
        "rotation_span": span, "chebyshev_premise": span < math.pi,
        "max_excess": max_excess, "violations": violations, "rows": rows,
    }
