"""Conic metrics as (reference density) x exp(potential) on a discretization.

Curvature convention (see docs/conventions.md): with F the area density on a
chart and total measure 2,

    R = -lap(log F) / (4 pi F),

so constant-curvature conic metrics have R = gamma and the Gauss-Bonnet
integral int R dmu equals 2 gamma.  On the cylinder grid this reduces to
R = -(log m)'' / (2 m); the potential enters through

    R(e^u g_ref) = e^{-u} (R_ref - lap_hat_ref u),

with lap_hat the reference Laplacian carrying the same normalization
(1/(4 pi) of the metric Laplace-Beltrami operator).
"""

from dataclasses import dataclass, replace

import numpy as np

from .grids import Symmetric1D, Stereo2D, d2_neumann, GridError
from .reference import (GridFields1D, build_fields_1d, make_reference,
                        check_1d_compatible, round_reference, ReferenceError)

# nodes whose density falls below this fraction of the peak stand in for the
# cone tips; curvature values there are dominated by roundoff amplification
# and are masked from sup-norm observables (integrals keep every node)
MASK_DENSITY_REL = 1e-8


class MetricError(ValueError):
    pass


@dataclass
class ConicMetric:
    """A conic metric e^u g_ref on a fixed discretization."""

    fields: object            # GridFields1D or GridFields2D
    u: np.ndarray

    @property
    def is_1d(self):
        return isinstance(self.fields, GridFields1D)

    @property
    def reference(self):
        return self.fields.ref

    @property
    def divisor(self):
        return self.fields.ref.divisor

    @property
    def gamma(self):
        return self.fields.ref.gamma

    def with_potential(self, u):
        return ConicMetric(fields=self.fields, u=np.asarray(u, dtype=float))

    def copy(self):
        return ConicMetric(fields=self.fields, u=self.u.copy())

    # -- measure -------------------------------------------------------
    def area(self):
        if self.is_1d:
            return self.fields.area_of(self.u)
        return self.fields.area_of(self.u)

    def normalize_area(self):
        """Shift u additively so the total measure is exactly 2."""
        self.u = self.u + np.log(2.0 / self.area())
        return self

    def measure_weights(self):
        """Quadrature weights of the metric measure (1D: tails excluded)."""
        return self.fields.measure_weights(self.u)

    def density(self):
        """Metric density against the grid's own background coordinate."""
        if self.is_1d:
            return self.fields.m * np.exp(self.u)
        return self.fields.F * np.exp(self.u)

    # -- masks -----------------------------------------------------------
    def curvature_mask(self):
        """True at nodes where curvature is trustworthy (off cone tips)."""
        if self.is_1d:
            dens = self.density()
            mask = dens > MASK_DENSITY_REL * dens.max()
            mask[:2] = False
            mask[-2:] = False
            return mask
        return self.fields.curvature_mask


def validate_potential(u):
    if not np.all(np.isfinite(u)):
        raise MetricError("potential contains non-finite values")


def scalar_curvature(metric, masked=True):
    """Scalar curvature field R = e^{-u}(R_ref - lap_hat u).

    Values at cone-tip nodes are unreliable and replaced by the nearest
    trustworthy value when ``masked`` (integrals weight them negligibly).
    """
    validate_potential(metric.u)
    f = metric.fields
    if metric.is_1d:
        lap = d2_neumann(metric.u, f.h) / (2.0 * f.m)
        R = np.exp(-metric.u) * (f.R_ref - lap)
        if masked:
            R = _clip_to_mask_1d(R, metric.curvature_mask())
        return R
    R = f.curvature_of(metric.u)
    if masked:
        R = f.clip_to_mask(R)
    return R


def _clip_to_mask_1d(R, mask):
    out = R.copy()
    idx = np.where(mask)[0]
    if idx.size == 0:
        return out
    out[: idx[0]] = R[idx[0]]
    out[idx[-1] + 1:] = R[idx[-1]]
    return out


def area_and_gauss_bonnet(metric):
    """Total measure, curvature integral and defect (integral - 2 gamma)."""
    f = metric.fields
    area = metric.area()
    if metric.is_1d:
        R = scalar_curvature(metric, masked=False)
        w = f.measure_weights(metric.u)
        # analytic tails: R e^{-u} e^{u} dmu_ref reduces to the reference
        # tail integral when u is asymptotically constant
        integral = float(np.sum(R * w)) + f.R_tail[0] + f.R_tail[1]
    else:
        R = scalar_curvature(metric, masked=True)
        w = f.measure_weights(metric.u)
        integral = float(np.sum(R * w))
    defect = integral - 2.0 * metric.gamma
    if not np.isfinite(integral):
        raise MetricError("curvature quadrature diverged (under-resolved grid)")
    return {"area": area, "curvature_integral": integral, "defect": defect}


def build_reference_metric(divisor, cutoff=None, disc=None, s_max=None):
    """The reference metric itself (u = 0) on a discretization.

    1D grids require rotational symmetry (points only at 0/infinity); the
    empty divisor yields the round metric.  Area is 2 by construction.
    """
    disc = disc or Symmetric1D()
    if isinstance(disc, Symmetric1D):
        ref, _ = make_reference(divisor, cutoff)
        check_1d_compatible(ref.divisor)
        fields = build_fields_1d(ref, disc, s_max)
        return ConicMetric(fields=fields, u=np.zeros_like(fields.s))
    from .fields2d import build_fields_2d
    ref, _ = make_reference(divisor, cutoff)
    fields = build_fields_2d(ref, disc)
    return ConicMetric(fields=fields, u=np.zeros(fields.n_total))


def round_metric(disc=None, s_max=None):
    """The round area-2 metric."""
    disc = disc or Symmetric1D()
    ref = round_reference()
    if isinstance(disc, Symmetric1D):
        fields = build_fields_1d(ref, disc, s_max)
        return ConicMetric(fields=fields, u=np.zeros_like(fields.s))
    from .fields2d import build_fields_2d
    fields = build_fields_2d(ref, disc)
    return ConicMetric(fields=fields, u=np.zeros(fields.n_total))


def smooth_random_potential(metric, seed, amplitude=0.3, nbumps=4):
    """A reproducible smooth potential, constant near every cone point.

    Bumps are placed in the cylinder coordinate away from the ends (1D), or
    at chart positions away from the cone points (2D); the metric is then
    area-normalized.
    """
    rng = np.random.default_rng(seed)
    f = metric.fields
    if metric.is_1d:
        s = f.s
        span = 0.45 * f.s_max
        u = np.zeros_like(s)
        for _ in range(nbumps):
            center = rng.uniform(-span, span)
            width = rng.uniform(0.8, 2.5)
            amp = rng.uniform(-amplitude, amplitude)
            u += amp * np.exp(-((s - center) / width) ** 2)
    else:
        u = np.zeros(f.n_total)
        pts = np.concatenate([f.grid.south.z, f.grid.north.z])
        sides = np.concatenate([np.zeros(f.grid.n_south, dtype=bool),
                                np.ones(f.n_total - f.grid.n_south, dtype=bool)])
        for _ in range(nbumps):
            center = rng.uniform(-0.6, 0.6) + 1j * rng.uniform(-0.6, 0.6)
            width = rng.uniform(0.25, 0.5)
            amp = rng.uniform(-amplitude, amplitude)
            on_north = rng.uniform() < 0.5
            # express the bump on both charts through the transition map
            zs = pts.copy()
            zs[sides != on_north] = 1.0 / pts[sides != on_north]
            d2 = np.abs(zs - center) ** 2
            u += amp * np.exp(-d2 / width**2)
        # flatten near cone points to keep the metric regular
        u = f.flatten_near_cones(u)
    out = metric.with_potential(u)
    out.normalize_area()
    return out
