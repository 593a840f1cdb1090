"""Normalized entropy functional and its constrained minimization.

For a metric g with measure mu (total 2), curvature R and level gamma, the
functional of a positive field Phi with ||Phi||_{L2(dmu)} = 1 is

    W(g, Phi) = (2/gamma) D(Phi) - 1/(2 gamma) int Phi^2 R dmu
                - int Phi^2 log(Phi^2) dmu,

where D is the metric Dirichlet energy; in two dimensions it is conformally
invariant and equals the flat-chart Dirichlet integral, which is what the
grids evaluate.  mu(g) = inf over admissible Phi.

At constant Phi = 1/sqrt(2) the value is log 2 - 1/2 for every metric in the
class (Gauss-Bonnet), which bounds mu(g) from above.

The minimizer runs projected gradient descent with an H1-preconditioner and
Armijo backtracking, then polishes with a Newton iteration on the KKT
system.  The reported Euler-Lagrange residual is the dual norm of the
constrained gradient in the problem's H1(dmu) metric (mesh-robust; zero at
exact critical points).
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla
from concurrent.futures import ThreadPoolExecutor

from .util import PHI_FLOOR, thread_budget
from .metrics import scalar_curvature

LOG2_HALF = float(np.log(2.0) - 0.5)


class EntropyError(ValueError):
    pass


class NormalizationError(EntropyError):
    pass


class PositivityError(EntropyError):
    pass


@dataclass
class EntropyResult:
    mu: float
    phi: np.ndarray
    residual: float
    iterations: int
    start_index: int
    converged: bool
    starts: list = field(default_factory=list)   # per-start (mu, residual)

    def as_dict(self):
        return {
            "mu": self.mu,
            "residual": self.residual,
            "iterations": self.iterations,
            "start_index": self.start_index,
            "converged": self.converged,
            "starts": [{"mu": m, "residual": r} for (m, r) in self.starts],
        }


@dataclass
class EntropyOptions:
    tol_residual: float = 1e-9
    max_pgd: int = 2000
    max_newton: int = 60
    multistart: bool = True
    warm_phi: np.ndarray | None = None


# ----------------------------------------------------------------------
# problem assembly
# ----------------------------------------------------------------------

class _Problem:
    """Quadrature weights, curvature and Dirichlet form for one metric."""

    def __init__(self, metric):
        f = metric.fields
        self.gamma = metric.gamma
        if metric.is_1d:
            self.w = f.measure_weights(metric.u)
            self.R = scalar_curvature(metric, masked=True)
            # stiffness: D(phi) = phi^T H phi = 2 pi sum diff^2 / h
            n = f.s.size
            ones = np.ones(n - 1)
            diag = np.full(n, 2.0)
            diag[0] = diag[-1] = 1.0
            self.H = (2.0 * np.pi / f.h) * sps.diags_array(
                [-ones, diag, -ones], offsets=[-1, 0, 1], format="csc")
        else:
            self.w = f.entropy_weights(metric.u)
            self.R = f.entropy_curvature(metric.u)
            self.H = f.entropy_dirichlet()
        if np.any(self.w < 0):
            raise EntropyError("negative quadrature weight")
        self.wpos = np.maximum(self.w, 0.0)
        self.M = sps.diags_array(self.wpos, format="csc")
        self._precset = False

    # natural H1(dmu) operator used for preconditioning and the dual norm
    def _precond(self):
        if not self._precset:
            A = (self.M + (4.0 / self.gamma) * self.H).tocsc()
            self._lu = spla.splu(A)
            self._precset = True
        return self._lu

    def dirichlet(self, phi):
        return float(phi @ (self.H @ phi))

    def value(self, phi):
        ps = np.maximum(phi, PHI_FLOOR)
        quad = float(np.sum(phi * phi * self.R * self.wpos))
        ent = float(np.sum(ps * ps * np.log(ps * ps) * self.wpos))
        return (2.0 / self.gamma) * self.dirichlet(phi) \
            - quad / (2.0 * self.gamma) - ent

    def grad(self, phi):
        """Euclidean gradient dW/dphi (vector against plain sums)."""
        ps = np.maximum(phi, PHI_FLOOR)
        loc = -(self.R / self.gamma) * phi - (2.0 * ps * np.log(ps * ps) + 2.0 * phi)
        return (4.0 / self.gamma) * (self.H @ phi) + loc * self.wpos

    def norm2(self, phi):
        return float(np.sum(phi * phi * self.wpos))

    def normalize(self, phi):
        out = np.maximum(phi, PHI_FLOOR)
        return out / np.sqrt(self.norm2(out))

    def kkt_residual(self, phi):
        g = self.grad(phi)
        nu = 0.5 * float(phi @ g)
        gl = g - 2.0 * nu * self.wpos * phi
        return gl, nu

    def residual_norm(self, gl):
        """Dual H1(dmu) norm of the constrained gradient."""
        return float(np.sqrt(max(0.0, gl @ self._precond().solve(gl))))


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------

def w_functional(metric, phi):
    """Entropy functional at a normalized positive field.

    Raises NormalizationError / PositivityError when the admissibility
    constraints are violated.
    """
    phi = np.asarray(phi, dtype=float)
    prob = _Problem(metric)
    nrm = prob.norm2(phi)
    if abs(nrm - 1.0) > 1e-8:
        raise NormalizationError("||phi||^2_{L2(dmu)} = %.3e, expected 1" % nrm)
    if np.any(phi <= 0):
        raise PositivityError("phi must be positive at every node")
    return prob.value(phi)


def constant_candidate(metric):
    """The admissible constant field (value 1/sqrt(2) when area is 2)."""
    prob = _Problem(metric)
    return prob.normalize(np.ones_like(prob.w, dtype=float))


def _cone_bumps(metric):
    """Starting fields concentrated near each cone point."""
    f = metric.fields
    bumps = []
    if metric.is_1d:
        w = f.measure_weights(metric.u)
        cum = np.cumsum(w)
        cum = cum / cum[-1]
        for q in (0.05, 0.95):
            center = float(np.interp(q, cum, f.s))
            bumps.append(1.0 + 3.0 * np.exp(-((f.s - center) / 2.0) ** 2))
    else:
        for side, zc in f.cone_chart_points():
            d2 = np.abs(f.entropy_points(side) - zc) ** 2
            bump = 1.0 + 3.0 * np.exp(-d2 / 0.16)
            bumps.append(bump)
    return bumps


def _run_single_start(prob, phi0, opts):
    phi = prob.normalize(phi0.astype(float))
    Wv = prob.value(phi)
    lu = prob._precond()
    it = 0
    for it in range(opts.max_pgd):
        gl, _ = prob.kkt_residual(phi)
        res = prob.residual_norm(gl)
        if res < max(opts.tol_residual, 1e-12):
            break
        p = lu.solve(gl)
        p -= float(np.sum(p * phi * prob.wpos)) * phi
        t, ok = 1.0, False
        gp = float(gl @ p)
        for _ in range(50):
            cand = prob.normalize(phi - t * p)
            Wc = prob.value(cand)
            if Wc <= Wv - 1e-4 * t * abs(gp) or Wc < Wv - 1e-15:
                ok = True
                break
            t *= 0.5
        if not ok:
            break
        phi, Wv = cand, Wc
    # Newton polish on the KKT system
    n = phi.size
    for nit in range(opts.max_newton):
        gl, nu = prob.kkt_residual(phi)
        res = prob.residual_norm(gl)
        if res < opts.tol_residual:
            break
        ps = np.maximum(phi, PHI_FLOOR)
        dloc = (-(prob.R / prob.gamma) - 2.0 * np.log(ps * ps) - 6.0
                - 2.0 * nu) * prob.wpos
        Hess = ((4.0 / prob.gamma) * prob.H + sps.diags_array(dloc)).tocsc()
        mphi = prob.wpos * phi
        KKT = sps.block_array([[Hess, -2.0 * mphi[:, None]],
                               [-2.0 * mphi[None, :], None]], format="csc")
        rhs = np.concatenate([-gl, [0.0]])
        try:
            step = spla.splu(KKT).solve(rhs)
        except RuntimeError:
            break
        dphi = step[:n]
        lam, accepted = 1.0, False
        for _ in range(40):
            cand = phi + lam * dphi
            if np.all(cand > 0):
                cand = prob.normalize(cand)
                gl2, _ = prob.kkt_residual(cand)
                if prob.residual_norm(gl2) < res:
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break
        phi = cand
        it += 1
    gl, _ = prob.kkt_residual(phi)
    res = prob.residual_norm(gl)
    return phi, prob.value(phi), res, it


def minimize_mu(metric, opts=None):
    """Minimize the entropy functional over the unit sphere of L2(dmu).

    Multi-start (constant plus a bump at each cone point, plus the warm
    start when provided); deterministic reduction picks the smallest value
    with lowest start index on ties.
    """
    opts = opts or EntropyOptions()
    prob = _Problem(metric)
    starts = []
    if opts.warm_phi is not None:
        starts.append(np.asarray(opts.warm_phi, dtype=float))
    starts.append(np.ones_like(prob.w, dtype=float))
    if opts.multistart:
        starts.extend(_cone_bumps(metric))

    results = []
    if len(starts) > 1 and thread_budget() > 1:
        with ThreadPoolExecutor(max_workers=min(thread_budget(), len(starts))) as ex:
            futs = [ex.submit(_run_single_start, prob, s, opts) for s in starts]
            results = [f.result() for f in futs]
    else:
        results = [_run_single_start(prob, s, opts) for s in starts]

    best = min(range(len(results)),
               key=lambda i: (round(results[i][1], 12), i))
    phi, mu, res, iters = results[best]
    return EntropyResult(
        mu=mu, phi=phi, residual=res, iterations=iters,
        start_index=best, converged=res < 1e-8,
        starts=[(r[1], r[2]) for r in results],
    )


def spherical_harmonic_probe(metric, result, degrees=range(1, 5), eps=1e-2):
    """Second-difference probe: W increase along low harmonics at a minimizer.

    Returns the list of (degree, order, delta) with delta = W(perturbed) -
    W(minimizer); all deltas should be positive at a strict local minimum.
    Only available on 2D grids (harmonics need the full sphere).
    """
    from scipy.special import lpmv
    f = metric.fields
    if metric.is_1d:
        raise EntropyError("harmonic probe requires a 2D discretization")
    prob = _Problem(metric)
    phi = result.phi
    W0 = prob.value(prob.normalize(phi))
    x, y, zeta = f.entropy_unit_vectors()
    theta = np.arccos(np.clip(zeta, -1.0, 1.0))
    az = np.arctan2(y, x)
    out = []
    for ell in degrees:
        for mm in range(0, ell + 1):
            base = lpmv(mm, ell, np.cos(theta))
            for trig in ((np.cos,) if mm == 0 else (np.cos, np.sin)):
                pert = base * trig(mm * az)
                scale = np.sqrt(prob.norm2(pert))
                if scale < 1e-14:
                    continue
                cand = prob.normalize(phi + eps * pert / scale)
                out.append((ell, mm, prob.value(cand) - W0))
    return out
