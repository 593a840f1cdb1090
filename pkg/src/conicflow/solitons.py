"""Rotationally symmetric shrinking solitons with two conical points.

The metric is written ds^2 + r(t)^2 dphi^2 in arc length t from the north
pole.  With the soliton potential theta (artifact normalization, so that
R = gamma + lap_hat theta with lap_hat = Laplace-Beltrami / 4 pi), the
traceless Hessian equation integrates to theta' = 2 c r for a constant c,
and the curvature equation becomes the profile ODE

    r'' = -r (Lam + 2 c_side r'),      Lam = 2 pi gamma,

where c_side is +/- c depending on which pole the arc parameter starts
from.  Boundary slopes encode the cone angles: r'(0) = 1 - beta_north,
r'(L) = -(1 - beta_south).

The solver shoots from both poles with quarter-order series starts, matches
at the common turning point, and runs a damped Newton iteration on the pair
(c, Lam) against the two conditions {turning heights equal, area = 2}.
Gauss-Bonnet then forces Lam = 2 pi gamma automatically, which is reported
as a consistency diagnostic.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .divisor import two_pole_divisor
from .grids import Symmetric1D, d2_fourth_order
from .metrics import ConicMetric
from .reference import (football_reference, build_fields_1d, make_reference,
                        GridFields1D, auto_s_max)


class ShootingError(RuntimeError):
    pass


TWO_PI = 2.0 * np.pi


@dataclass
class SolitonProfile:
    beta_north: float
    beta_south: float
    gamma: float
    c: float                 # theta' = 2 c r in arc length from the south pole
    lam: float               # curvature-scale parameter, = 2 pi gamma at the solution
    length: float            # total arc length L
    t: np.ndarray            # arc-length grid from the north pole
    r: np.ndarray            # profile radius
    theta: np.ndarray        # potential, normalized so int e^theta dmu = 2
    area: float
    int_e_theta: float
    matching_defect: float
    residual_curvature: float
    residual_hessian: float
    series: dict = field(default_factory=dict)   # per-pole series coefficients
    arc_top_south: float = 0.0                   # arc distance south pole -> r maximum
    r_top: float = 0.0
    theta_shift: float = 0.0                     # additive normalization constant

    @property
    def slope_north(self):
        return 1.0 - self.beta_north

    @property
    def slope_south(self):
        return 1.0 - self.beta_south

    def summary(self):
        return {
            "beta_north": self.beta_north,
            "beta_south": self.beta_south,
            "gamma": self.gamma,
            "c": self.c,
            "lam": self.lam,
            "lam_over_2pi_gamma": self.lam / (TWO_PI * self.gamma),
            "length": self.length,
            "area": self.area,
            "int_e_theta": self.int_e_theta,
            "matching_defect": self.matching_defect,
            "residual_curvature": self.residual_curvature,
            "residual_hessian": self.residual_hessian,
            "boundary_slopes": {"north": self.slope_north, "south": self.slope_south},
            "series": self.series,
        }


def _series_coeffs(a, c_side, lam):
    """r = a t + b t^3 + e t^5 + f t^7 near a pole with slope a."""
    b = -a * (lam + 2.0 * c_side * a) / 6.0
    e = -b * (lam + 8.0 * c_side * a) / 20.0
    f = -(lam * e + 12.0 * c_side * a * e + 6.0 * c_side * b * b) / 42.0
    return b, e, f


def _shoot(a, c_side, lam, rtol=1e-12, dense=True):
    """Integrate one side from its pole to the first turning point.

    States: r, r' plus accumulated area and int e^{theta_raw} dmu with
    theta_raw the artifact potential vanishing at this pole.
    Returns None when no turning point is found (invalid parameters).
    """
    if lam <= 0 or a <= 0:
        return None
    # strongly asymmetric solitons develop a slow cigar-like phase whose
    # length grows with |c|; size the window accordingly
    smax = 8.0 * np.pi / np.sqrt(lam) + 6.0 * abs(c_side) / lam
    t0 = 1e-3 * np.pi / np.sqrt(lam)
    b, e, f = _series_coeffs(a, c_side, lam)
    r0 = a * t0 + b * t0**3 + e * t0**5 + f * t0**7
    v0 = a + 3 * b * t0**2 + 5 * e * t0**4 + 7 * f * t0**6
    # theta_raw' = 2 c_side r (this side's arc direction)
    th0 = 2.0 * c_side * (a * t0**2 / 2 + b * t0**4 / 4 + e * t0**6 / 6 + f * t0**8 / 8)
    area0 = TWO_PI * (a * t0**2 / 2 + b * t0**4 / 4 + e * t0**6 / 6 + f * t0**8 / 8)
    # e^theta-weighted area of the series zone, to the same order
    etheta0 = area0   # theta = O(t0^2): correction below quadrature tolerance

    def rhs(t, y):
        r, v, th, A, E = y
        return [v, -r * (lam + 2.0 * c_side * v), 2.0 * c_side * r,
                TWO_PI * r, TWO_PI * r * np.exp(th)]

    def turning(t, y):
        return y[1]
    turning.terminal = True
    turning.direction = -1

    sol = solve_ivp(rhs, [t0, smax], [r0, v0, th0, area0, etheta0],
                    rtol=rtol, atol=max(1e-14, rtol * 1e-2),
                    events=turning, dense_output=dense)
    if sol.t_events[0].size == 0:
        return None
    t_top = float(sol.t_events[0][0])
    y_top = sol.sol(t_top) if dense else sol.y_events[0][0]
    return {"t_top": t_top, "r_top": float(y_top[0]), "area": float(y_top[3]),
            "etheta": float(y_top[4]), "theta_top": float(y_top[2]),
            "sol": sol if dense else None, "series": (a, b, e, f),
            "t0": t0, "c_side": c_side}


def _match(x, a_north, a_south, rtol=1e-12, dense=False):
    c, lam = x
    north = _shoot(a_north, -c, lam, rtol=rtol, dense=dense)
    south = _shoot(a_south, +c, lam, rtol=rtol, dense=dense)
    if north is None or south is None:
        return None, None
    F = np.array([north["r_top"] - south["r_top"],
                  north["area"] + south["area"] - 2.0])
    return F, (north, south)


def solve_soliton(beta_north, beta_south, tol=1e-12, n_profile=8192):
    """Solve the two-pole shrinking soliton; see the module docstring.

    Weights may be 0 (smooth pole); gamma must stay positive.  Raises
    ShootingError with the scanned parameter rectangle when no bracketing
    value of c exists.
    """
    for b in (beta_north, beta_south):
        if not (0.0 <= b < 1.0):
            raise ValueError("cone weights must lie in [0, 1)")
    gamma = 1.0 - 0.5 * (beta_north + beta_south)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    a_n, a_s = 1.0 - beta_north, 1.0 - beta_south
    lam0 = TWO_PI * gamma

    # coarse scan brackets the height mismatch in c at the Gauss-Bonnet lam
    span = 20.0
    c0 = None
    tried = []
    while span <= 320.0:
        cs = np.linspace(-span, span, 41)
        vals = np.full(cs.size, np.nan)
        for i, cc in enumerate(cs):
            F, _ = _match([cc, lam0], a_n, a_s, rtol=1e-7)
            if F is not None:
                vals[i] = F[0]
        tried.append((float(-span), float(span)))
        hit = None
        for i in range(cs.size - 1):
            if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) \
                    and vals[i] * vals[i + 1] <= 0:
                hit = i
                break
        if hit is not None:
            i = hit
            denom = vals[i + 1] - vals[i]
            c0 = cs[i] - vals[i] * (cs[i + 1] - cs[i]) / denom if denom != 0 else cs[i]
            break
        span *= 2.0
    if c0 is None:
        raise ShootingError(
            "no sign change of the matching defect; scanned c in %s at lam=%.6f"
            % (tried, lam0))

    # damped Newton at full integrator tolerance
    x = np.array([c0, lam0])
    F, info = _match(x, a_n, a_s)
    if F is None:
        raise ShootingError("initial shoot lost the turning point")
    for _ in range(60):
        if np.max(np.abs(F)) < tol:
            break
        J = np.zeros((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = 1e-7 * max(1.0, abs(x[j]))
            Fp, _ = _match(x + dx, a_n, a_s)
            if Fp is None:
                dx[j] = -dx[j]
                Fp, _ = _match(x + dx, a_n, a_s)
                if Fp is None:
                    raise ShootingError("Jacobian evaluation lost the turning point")
            J[:, j] = (Fp - F) / dx[j]
        try:
            step = np.linalg.solve(J, F)
        except np.linalg.LinAlgError as exc:
            raise ShootingError("singular matching Jacobian") from exc
        lam_ls, ok = 1.0, False
        for _ in range(40):
            Fn, infon = _match(x - lam_ls * step, a_n, a_s)
            if Fn is not None and np.linalg.norm(Fn) < np.linalg.norm(F):
                ok = True
                break
            lam_ls *= 0.5
        if not ok:
            break
        x = x - lam_ls * step
        F, info = Fn, infon
    if np.max(np.abs(F)) > max(tol, 1e-10):
        raise ShootingError("matching did not converge: defect %s" % F)

    c, lam = float(x[0]), float(x[1])
    # final dense integration for the profile
    F, info = _match(x, a_n, a_s, dense=True)
    north, south = info
    length = north["t_top"] + south["t_top"]

    # assemble the profile on a uniform arc grid from the north pole
    t = np.linspace(0.0, length, n_profile)
    r = np.empty_like(t)
    theta = np.empty_like(t)
    on_north = t <= north["t_top"]
    tn = t[on_north]
    ts = length - t[~on_north]
    r[on_north], theta[on_north] = _eval_side(north, tn)
    r_s, th_s = _eval_side(south, ts)
    r[~on_north] = r_s
    # south-side theta_raw runs from the south pole; rebase to the north
    th_north_top = north["theta_top"]
    th_south_top = south["theta_top"]
    theta[~on_north] = th_s - th_south_top + th_north_top
    r[0] = 0.0
    r[-1] = 0.0

    int_e_theta = north["etheta"] + np.exp(th_north_top - th_south_top) * south["etheta"]
    shift = float(np.log(2.0 / int_e_theta))
    theta = theta + shift
    area = north["area"] + south["area"]

    prof = SolitonProfile(
        beta_north=float(beta_north), beta_south=float(beta_south), gamma=gamma,
        c=c, lam=lam, length=float(length), t=t, r=r, theta=theta,
        area=float(area), int_e_theta=2.0,
        matching_defect=float(np.max(np.abs(F))),
        residual_curvature=0.0, residual_hessian=0.0,
        series={"north": north["series"], "south": south["series"]},
        arc_top_south=float(south["t_top"]), r_top=float(north["r_top"]),
        theta_shift=shift,
    )
    prof.residual_curvature, prof.residual_hessian = _equation_residuals(prof)
    return prof


def _eval_side(side, tq):
    """Evaluate (r, theta_raw) on one side, series below t0, dense above."""
    sol = side["sol"]
    a, b, e, f = side["series"]
    t0 = side["t0"]
    c_side = side["c_side"]
    tq = np.asarray(tq, dtype=float)
    r = np.empty_like(tq)
    th = np.empty_like(tq)
    low = tq < t0
    if np.any(low):
        ts = tq[low]
        r[low] = a * ts + b * ts**3 + e * ts**5 + f * ts**7
        th[low] = 2.0 * c_side * (a * ts**2 / 2 + b * ts**4 / 4
                                  + e * ts**6 / 6 + f * ts**8 / 8)
    if np.any(~low):
        vals = sol.sol(np.clip(tq[~low], t0, sol.t[-1]))
        r[~low] = vals[0]
        th[~low] = vals[2]
    return r, th


def _equation_residuals(prof, skip=4):
    """Fourth-order FD residuals of the two soliton equations on the profile.

    Evaluated on a subsampled grid (spacing ~7e-3) so the dense-output
    interpolation noise of the integrator is not amplified by the 1/h^2 of
    the stencils; the combined floor sits well below 1e-7.
    """
    from .grids import d1_fourth_order
    h_raw = prof.t[1] - prof.t[0]
    stride = max(1, int(round(0.007 / h_raw)))
    t = prof.t[::stride]
    r = prof.r[::stride]
    theta = prof.theta[::stride]
    h = t[1] - t[0]
    rpp = d2_fourth_order(r, h)
    thpp = d2_fourth_order(theta, h)
    rp = d1_fourth_order(r, h)
    thp = d1_fourth_order(theta, h)
    inner = slice(skip, len(t) - skip)
    rr = r[inner]
    # curvature equation: R = gamma + lap_hat theta with R = (-r''/r)/(2 pi)
    # and lap_hat theta = (theta'' + (r'/r) theta')/(4 pi)
    lap_theta = thpp[inner] + (rp[inner] / rr) * thp[inner]
    res1 = (-rpp[inner] / rr) / TWO_PI - prof.gamma - lap_theta / (2.0 * TWO_PI)
    # traceless Hessian first integral: theta'' = (r'/r) theta'
    res2 = thpp[inner] - (rp[inner] / rr) * thp[inner]
    return float(np.max(np.abs(res1))), float(np.max(np.abs(res2)))


# ----------------------------------------------------------------------
# closed-form footballs and conversion to conformal data
# ----------------------------------------------------------------------

def football_metric(beta, disc=None, s_max=None):
    """Constant-curvature metric with weight beta at 0 and infinity."""
    disc = disc or Symmetric1D()
    ref = football_reference(beta)
    if isinstance(disc, Symmetric1D):
        fields = build_fields_1d(ref, disc, s_max)
        return ConicMetric(fields=fields, u=np.zeros_like(fields.s))
    from .fields2d import build_fields_2d
    fields = build_fields_2d(ref, disc)
    return ConicMetric(fields=fields, u=np.zeros(fields.n_total))


def cylinder_solution(prof, s_grid):
    """Evaluate the soliton on cylinder coordinates s = log|z|.

    Integrates the regular system (arc, r, r', theta, area) in s from the
    turning point; the s-origin is gauged so the area median sits at s = 0.
    Returns dict with r, v=dr/darc, theta (normalized), m = 2 pi r^2 and
    curvature R = (lam + 2 c v)/(2 pi) -- all exact to ODE tolerance.
    """
    c, lam = prof.c, prof.lam

    def rhs(s, y):
        st, r, v, th, A = y
        return [r, r * v, -r * r * (lam + 2.0 * c * v), 2.0 * c * r * r,
                TWO_PI * r * r]

    y0 = [prof.arc_top_south, prof.r_top, 0.0, 0.0, 0.0]
    s_hi = float(np.max(s_grid)) + 3.0
    s_lo = float(np.min(s_grid)) - 3.0
    up = solve_ivp(rhs, [0.0, s_hi], y0, rtol=1e-12, atol=1e-16,
                   dense_output=True)
    dn = solve_ivp(rhs, [0.0, s_lo], y0, rtol=1e-12, atol=1e-16,
                   dense_output=True)
    area_lo = dn.sol(s_lo)[4]

    def eval_at(ss):
        ss = np.atleast_1d(np.asarray(ss, dtype=float))
        out = np.empty((5, ss.size))
        pos = ss >= 0
        if pos.any():
            out[:, pos] = up.sol(ss[pos])
        if (~pos).any():
            out[:, ~pos] = dn.sol(ss[~pos])
        return out

    s_med = brentq(lambda ss: eval_at(ss)[4, 0] - area_lo - 1.0,
                   s_lo + 1e-9, s_hi - 1e-9, xtol=1e-13)
    Y = eval_at(np.asarray(s_grid) + s_med)
    st, r, v, th_raw, _ = Y
    # th_raw vanishes at the turning point; rebase to the normalized profile
    arc_top_from_north = prof.length - prof.arc_top_south
    th_top_profile = float(np.interp(arc_top_from_north, prof.t, prof.theta))
    theta = th_raw + th_top_profile
    m = TWO_PI * r**2
    R = (lam + 2.0 * c * v) / TWO_PI
    return {"arc_from_south": st, "r": r, "v": v, "theta": theta, "m": m,
            "R": R, "s_median_offset": float(s_med)}


def to_conformal(prof, disc=None, s_max=None):
    """Convert a profile to a conic metric over the matching glued reference.

    Returns (metric, theta_field).  The reference carries the south weight at
    0 and the north weight at infinity; the potential u = log(m_sol/m_ref) is
    bounded because the cone exponents match.  Requires beta_north >=
    beta_south (reflect the profile first otherwise).
    """
    if prof.beta_north < prof.beta_south:
        raise ValueError("to_conformal expects beta_north >= beta_south")
    disc = disc or Symmetric1D()
    divisor = two_pole_divisor(prof.beta_south, prof.beta_north) \
        if prof.beta_south > 0 else _north_only_divisor(prof.beta_north)
    if isinstance(disc, Symmetric1D):
        ref, _ = make_reference(divisor)
        fields = build_fields_1d(ref, disc, s_max)
        sol = cylinder_solution(prof, fields.s)
        u = np.log(sol["m"] / fields.m)
        metric = ConicMetric(fields=fields, u=u)
        return metric, sol["theta"]
    from .fields2d import build_fields_2d, radial_potential_2d
    ref, _ = make_reference(divisor)
    fields = build_fields_2d(ref, disc)
    metric, theta = radial_potential_2d(prof, fields)
    return metric, theta


def _north_only_divisor(beta_north):
    from .divisor import make_divisor
    if beta_north == 0.0:
        from .divisor import ConeDivisor
        return ConeDivisor(points=(), weights=(), weights_exact=())
    return make_divisor(["inf"], [repr(beta_north)])
