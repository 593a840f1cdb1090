"""Reference conic densities on the sphere and their grid realizations.

Measure convention: a metric is stored through the Lebesgue density of its
area measure on each stereographic chart, normalized so the total measure of
the sphere is 2.  Scalar curvature is R = -lap(log F)/(4 pi F), which makes
the round sphere have R = 1 and any constant-curvature conic metric R = gamma
(see docs/conventions.md for the worked example).

Three density families:

* ``glued``   - the cutoff-glued reference for a divisor with the largest
                weight at the north pole: exact power-law product inside the
                cutoff ball B, Fubini-Study-type tail outside 2B.
* ``round``   - the round metric (empty divisor).
* ``football``- constant-curvature metric with equal weights at 0 and inf.
"""

from dataclasses import dataclass

import numpy as np

from .cutoff import CutoffSpec, default_cutoff
from .divisor import ConeDivisor, make_divisor, normalize_divisor, DivisorError
from .grids import Symmetric1D, Stereo2D, d2_slopes, GridError


class ReferenceError(ValueError):
    pass


# ----------------------------------------------------------------------
# density families (chart evaluations, unnormalized where noted)
# ----------------------------------------------------------------------

def round_density(z):
    """Area-2 round density (2/pi) (1+|z|^2)^-2; identical on both charts."""
    a2 = np.abs(z) ** 2
    return (2.0 / np.pi) / (1.0 + a2) ** 2


def football_density(z, beta):
    """Area-2 constant-curvature density with weight beta at 0 and inf."""
    alpha = 1.0 - beta
    r = np.abs(z)
    t = r ** (2.0 * alpha)
    with np.errstate(divide="ignore"):
        return (2.0 * alpha / np.pi) * r ** (2.0 * alpha - 2.0) / (1.0 + t) ** 2


def _glued_unnormalized(z, divisor, cutoff):
    """Glued density without the c(beta) factor, on the south chart."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    chi = cutoff.chi(r)
    prod = np.ones_like(r)
    for p, b in zip(divisor.points[:-1], divisor.weights[:-1]):
        with np.errstate(divide="ignore"):
            prod = prod * np.abs(z - p) ** (-2.0 * b)
    beta_k = divisor.weights[-1]
    tail = (1.0 + r ** 2) ** (beta_k - 2.0)
    return chi * prod + (1.0 - chi) * tail


def _glued_unnormalized_north(w, divisor, cutoff):
    """Same density pulled to the north chart: F(1/w) |w|^-4, stably."""
    w = np.asarray(w, dtype=complex)
    rw = np.abs(w)
    beta_k = divisor.weights[-1]
    out = np.empty_like(rw)
    # outside 2B the closed form is exact and avoids evaluating 1/w
    far = rw < 1.0 / (2.0 * cutoff.radius)
    near = ~far
    with np.errstate(divide="ignore"):
        out[far] = (1.0 + rw[far] ** 2) ** (beta_k - 2.0) * rw[far] ** (-2.0 * beta_k)
    if np.any(near):
        zn = 1.0 / w[near]
        out[near] = _glued_unnormalized(zn, divisor, cutoff) * rw[near] ** (-4.0)
    return out


@dataclass(frozen=True)
class ReferenceDensity:
    """A reference density with its normalization constant.

    kind: 'glued' | 'round' | 'football'.  For football, weights holds the
    single weight at both poles.
    """

    kind: str
    divisor: ConeDivisor
    cutoff: CutoffSpec
    c_beta: float = 1.0

    def density_south(self, z):
        if self.kind == "round":
            return round_density(z)
        if self.kind == "football":
            return football_density(z, self.divisor.weights[-1])
        return self.c_beta * _glued_unnormalized(z, self.divisor, self.cutoff)

    def density_north(self, w):
        if self.kind == "round":
            return round_density(w)
        if self.kind == "football":
            return football_density(w, self.divisor.weights[-1])
        return self.c_beta * _glued_unnormalized_north(w, self.divisor, self.cutoff)

    def density(self, side, pts):
        return self.density_south(pts) if side == 0 else self.density_north(pts)

    @property
    def gamma(self):
        return self.divisor.gamma

    @property
    def beta_north(self):
        """Weight at the north pole (0 for the round reference)."""
        if self.kind == "round":
            return 0.0
        if self.divisor.points[-1] is not None:
            raise ReferenceError("reference divisor must have its largest weight at infinity")
        return self.divisor.weights[-1]

    @property
    def beta_origin(self):
        """Weight sitting exactly at z = 0 (0 if none)."""
        for p, b in zip(self.divisor.points, self.divisor.weights):
            if p is not None and p == 0:
                return b
        return 0.0


def make_reference(divisor, cutoff=None):
    """Reference density for a divisor (round metric for the empty divisor).

    Returns (reference, moebius_pivot); the pivot is None unless the divisor
    had to be moved to put its largest weight at the north pole.
    """
    if divisor.k == 0:
        return ReferenceDensity(kind="round", divisor=divisor,
                                cutoff=cutoff or CutoffSpec()), None
    div, moved = normalize_divisor(divisor)
    cut = cutoff or default_cutoff(div)
    for p in div.finite_points():
        if not cut.contains(p):
            raise ReferenceError("finite cone point %s outside the cutoff ball" % p)
        if cut.on_transition(p):
            raise ReferenceError("cone point on the cutoff annulus")
    return ReferenceDensity(kind="glued", divisor=div, cutoff=cut), moved


def football_reference(beta):
    """Closed-form constant-curvature reference with weight beta at both poles."""
    if not (0.0 < beta < 1.0):
        raise ReferenceError("football weight must lie in (0,1)")
    div = make_divisor([0.0, "inf"], [repr(beta), repr(beta)])
    return ReferenceDensity(kind="football", divisor=div, cutoff=CutoffSpec())


def round_reference():
    div = ConeDivisor(points=(), weights=(), weights_exact=())
    return ReferenceDensity(kind="round", divisor=div, cutoff=CutoffSpec())


# ----------------------------------------------------------------------
# 1D grid fields
# ----------------------------------------------------------------------

class GridFields1D:
    """Cached arrays of a reference on a Symmetric1D grid.

    m(s) = 2 pi e^{2s} F(e^s) is the cylinder measure density (area =
    int m ds + analytic pole tails).  R_ref is the reference curvature:
    analytic for round/football, grid-consistent otherwise so that the
    discrete Gauss-Bonnet identity is exact.
    """

    def __init__(self, ref, disc, s_max):
        self.ref = ref
        self.disc = disc
        self.s_max = float(s_max)
        self.s = disc.nodes(self.s_max)
        self.h = disc.spacing(self.s_max)
        r = np.exp(self.s)
        dens = ref.density_south(r.astype(complex))
        self.m = 2.0 * np.pi * r**2 * dens
        self.logm = np.log(self.m)

        bS = ref.beta_origin
        bN = ref.beta_north
        self.beta_south, self.beta_north = bS, bN
        r1 = np.exp(self.s_max)
        r0 = np.exp(-self.s_max)

        if ref.kind == "round":
            self.slope_lo = 2.0 * np.tanh(self.s_max)
            self.slope_hi = -self.slope_lo
            self.area_tail = (1.0 - np.tanh(self.s_max),) * 2
            self.R_ref = np.ones_like(self.s)
            self.R_tail = tuple(ref.gamma * t for t in self.area_tail)
        elif ref.kind == "football":
            al = 1.0 - bN
            self.slope_lo = 2.0 * al * np.tanh(al * self.s_max)
            self.slope_hi = -self.slope_lo
            self.area_tail = (1.0 - np.tanh(al * self.s_max),) * 2
            self.R_ref = np.full_like(self.s, ref.gamma)
            self.R_tail = tuple(ref.gamma * t for t in self.area_tail)
        else:
            c = ref.c_beta
            # exact cone forms at the ends: F = c r^{-2 bS} inside B,
            # F = c (1+r^2)^{bN-2} outside 2B
            self.slope_lo = 2.0 - 2.0 * bS
            self.slope_hi = 2.0 + (bN - 2.0) * 2.0 * r1**2 / (1.0 + r1**2)
            tail_s = 2.0 * np.pi * c * r0 ** (2.0 - 2.0 * bS) / (2.0 - 2.0 * bS)
            tail_n = np.pi * c * (1.0 + r1**2) ** (bN - 1.0) / (1.0 - bN)
            self.area_tail = (tail_s, tail_n)
            d2 = d2_slopes(self.logm, self.h, self.slope_lo, self.slope_hi)
            self.R_ref = -d2 / (2.0 * self.m)
            self.R_tail = (0.0, (2.0 - bN) / (1.0 + r1**2))

    def area_of(self, u):
        tS, tN = self.area_tail
        return float(np.sum(self.m * np.exp(u)) * self.h
                     + tS * np.exp(u[0]) + tN * np.exp(u[-1]))

    def measure_weights(self, u):
        """Per-node quadrature weights of the metric e^u * ref (tails excluded)."""
        return self.m * np.exp(u) * self.h


def auto_s_max(divisor, deficit=1e-11):
    """Symmetric truncation with area deficit below `deficit` at both ends."""
    if divisor.k == 0:
        return max(18.0, 0.5 * np.log(4.0 / deficit))
    bN = divisor.weights[-1]
    bS = 0.0
    for p, b in zip(divisor.points, divisor.weights):
        if p is not None and p == 0:
            bS = b
    need_n = np.log(4.0 / deficit) / (2.0 * (1.0 - bN))
    need_s = np.log(4.0 / deficit) / (2.0 * (1.0 - bS))
    return float(max(18.0, need_n, need_s))


def build_fields_1d(ref_unnormalized, disc, s_max=None):
    """Normalize c(beta) on the grid and return GridFields1D with area 2."""
    ref = ref_unnormalized
    if s_max is None:
        s_max = disc.s_max or auto_s_max(ref.divisor)
    if ref.kind in ("round", "football"):
        return GridFields1D(ref, disc, s_max)
    # choose c so that grid area (with exact tails) equals 2
    base = ReferenceDensity(kind="glued", divisor=ref.divisor,
                            cutoff=ref.cutoff, c_beta=1.0)
    raw = GridFields1D(base, disc, s_max)
    c = 2.0 / raw.area_of(np.zeros_like(raw.s))
    ref2 = ReferenceDensity(kind="glued", divisor=ref.divisor,
                            cutoff=ref.cutoff, c_beta=c)
    return GridFields1D(ref2, disc, s_max)


def check_1d_compatible(divisor):
    """1D grids require rotational symmetry: finite support only at z = 0."""
    for p in divisor.points[:-1]:
        if p is not None and p != 0:
            raise GridError("Symmetric1D supports divisors with points only at 0 and infinity")
    if divisor.k >= 1 and divisor.points[-1] is not None:
        raise GridError("Symmetric1D expects the largest weight at the north pole")
