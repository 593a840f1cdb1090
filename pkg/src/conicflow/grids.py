"""Discretizations of the sphere: a rotationally symmetric cylinder grid and
a two-chart stereographic composite grid.

Symmetric1D lives on the cylinder coordinate s = log|z|, truncated to
[-s_max, s_max].  Stereo2D covers the sphere with two overlapping square
stereographic charts (south: z, north: w = 1/z) coupled through an
interpolation fringe.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps


class GridError(ValueError):
    pass


# ----------------------------------------------------------------------
# 1D cylinder grid
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Symmetric1D:
    n: int = 2048
    s_max: float | None = None    # None: chosen from the weights at build time

    def __post_init__(self):
        if self.n < 64:
            raise GridError("Symmetric1D needs at least 64 nodes")

    def nodes(self, s_max):
        return np.linspace(-s_max, s_max, self.n)

    def spacing(self, s_max):
        return 2.0 * s_max / (self.n - 1)


def d2_neumann(u, h):
    """Second difference with mirror ghosts (zero-slope ends)."""
    out = np.empty_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    out[0] = (u[1] - u[0]) / h**2
    out[-1] = (u[-2] - u[-1]) / h**2
    return out


def d2_slopes(f, h, slope_lo, slope_hi):
    """Second difference with ghosts set by prescribed end slopes."""
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    out[0] = (f[1] - f[0] - h * slope_lo) / h**2
    out[-1] = (f[-2] - f[-1] + h * slope_hi) / h**2
    return out


def d2_fourth_order(f, h):
    """Interior fourth-order second derivative; copies second-order ends."""
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 16 * f[3:-1] - 30 * f[2:-2] + 16 * f[1:-3] - f[:-4]) / (12 * h**2)
    out[:2] = out[2]
    out[-2:] = out[-3]
    return out


def d1_fourth_order(f, h):
    """Interior fourth-order first derivative; copies ends."""
    out = np.empty_like(f)
    out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    out[:2] = out[2]
    out[-2:] = out[-3]
    return out


def tridiag_neumann(n, h):
    """Sparse 1D Laplacian (second difference, mirror ends)."""
    main = np.full(n, -2.0)
    main[0] = -1.0
    main[-1] = -1.0
    return sps.diags_array(
        [np.ones(n - 1), main, np.ones(n - 1)], offsets=[-1, 0, 1], format="csc"
    ) / h**2


def dirichlet_energy_1d(phi, h):
    """Flat-chart Dirichlet integral of a radial field: 2*pi*int phi_s^2 ds."""
    d = np.diff(phi)
    return 2.0 * np.pi * float(np.dot(d, d)) / h


# ----------------------------------------------------------------------
# 2D two-chart composite grid
# ----------------------------------------------------------------------

SOUTH, NORTH = 0, 1


@dataclass(frozen=True)
class Stereo2D:
    n: int = 256                  # nodes per chart side
    r_own: float = 1.08           # ownership radius (south owns |z| <= r_own)
    r_halo: float = 1.16          # active radius per chart
    subsample: int = 16           # supersampling for boundary/singular cells

    def __post_init__(self):
        if self.n < 128:
            raise GridError("Stereo2D needs at least 128x128 nodes per chart")
        if not (1.0 < self.r_own < self.r_halo):
            raise GridError("overlap annulus must satisfy 1 < r_own < r_halo")
        h = 2.0 * self.r_halo / self.n
        if self.r_own + 2.0 * h > self.r_halo:
            raise GridError("overlap annulus too thin: ownership circle must be "
                            "interior to the active disk")

    @property
    def h(self):
        return 2.0 * self.r_halo / self.n

    def axis(self):
        # cell-centered nodes; the origin sits at a cell corner (n even)
        return -self.r_halo + (np.arange(self.n) + 0.5) * self.h


class ChartGrid:
    """Node bookkeeping for one chart of a Stereo2D discretization."""

    def __init__(self, disc):
        ax = disc.axis()
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        Z = X + 1j * Y
        rad = np.abs(Z)
        h = disc.h
        self.shape = (disc.n, disc.n)
        self.active = rad <= disc.r_halo
        self.idx = -np.ones(self.shape, dtype=np.int64)
        self.idx[self.active] = np.arange(int(self.active.sum()))
        self.z = Z[self.active]
        self.rad = rad[self.active]
        # interior nodes have all four neighbours active
        act = self.active
        nb_ok = np.zeros(self.shape, dtype=bool)
        nb_ok[1:-1, 1:-1] = (act[2:, 1:-1] & act[:-2, 1:-1] &
                             act[1:-1, 2:] & act[1:-1, :-2])
        self.interior = (act & nb_ok)[act]
        self.fringe = ~self.interior
        self.h = h
        self.n_active = self.z.size


def _bilinear_weights(disc, pts):
    """Bilinear interpolation of active-node fields at complex points.

    Returns (rows, cols, vals) triplets addressing active-node indices.
    """
    ax = disc.axis()
    h = disc.h
    x = np.real(pts)
    y = np.imag(pts)
    ix = np.clip(np.floor((x - ax[0]) / h).astype(int), 0, disc.n - 2)
    iy = np.clip(np.floor((y - ax[0]) / h).astype(int), 0, disc.n - 2)
    tx = (x - ax[ix]) / h
    ty = (y - ax[iy]) / h
    corners = [(ix, iy, (1 - tx) * (1 - ty)), (ix + 1, iy, tx * (1 - ty)),
               (ix, iy + 1, (1 - tx) * ty), (ix + 1, iy + 1, tx * ty)]
    return corners


class CompositeGrid:
    """Two coupled chart grids plus ownership quadrature bookkeeping.

    Fields live as flat vectors over [south active; north active].  Fringe
    nodes of one chart interpolate the partner chart through w = 1/z.
    """

    def __init__(self, disc):
        self.disc = disc
        self.south = ChartGrid(disc)
        self.north = ChartGrid(disc)
        self.n_south = self.south.n_active
        self.n_total = self.n_south + self.north.n_active
        self.offsets = (0, self.n_south)
        self._build_fringe_interp()
        self._build_ownership()
        self._lap = None
        self._dirichlet = None

    # -- chart helpers -------------------------------------------------
    def chart(self, side):
        return self.south if side == SOUTH else self.north

    def chart_slice(self, side):
        off = self.offsets[side]
        return slice(off, off + self.chart(side).n_active)

    def split(self, vec):
        return vec[: self.n_south], vec[self.n_south:]

    # -- fringe interpolation ------------------------------------------
    def _build_fringe_interp(self):
        rows, cols, vals = [], [], []
        fringe_idx = []
        for side in (SOUTH, NORTH):
            me = self.chart(side)
            other = self.chart(1 - side)
            off_me = self.offsets[side]
            off_ot = self.offsets[1 - side]
            f = np.where(me.fringe)[0]
            pts = 1.0 / me.z[f]          # partner chart coordinates
            for ix, iy, wgt in _bilinear_weights(self.disc, pts):
                src = other.idx[ix, iy]
                if np.any(src < 0):
                    raise GridError("fringe interpolation hit an inactive node")
                rows.extend((off_me + f).tolist())
                cols.extend((off_ot + src).tolist())
                vals.extend(wgt.tolist())
            fringe_idx.extend((off_me + f).tolist())
        self.fringe_rows = np.array(fringe_idx, dtype=np.int64)
        self.interp = sps.csr_array(
            (vals, (rows, cols)), shape=(self.n_total, self.n_total)
        )
        interior = np.ones(self.n_total, dtype=bool)
        interior[self.fringe_rows] = False
        self.interior_mask = interior

    # -- ownership quadrature -------------------------------------------
    def _build_ownership(self):
        """Fraction of each active cell owned by its chart.

        South owns |z| <= r_own, north owns |z| > r_own (i.e. |w| < 1/r_own).
        Cells straddling the circle are weighted by a supersampled fraction.
        """
        disc = self.disc
        h = disc.h
        ss = disc.subsample
        offs = (np.arange(ss) + 0.5) / ss - 0.5
        OX, OY = np.meshgrid(offs * h, offs * h, indexing="ij")
        sub = (OX + 1j * OY).ravel()
        fractions = []
        for side, r_cut, inside in ((SOUTH, disc.r_own, True),
                                    (NORTH, 1.0 / disc.r_own, True)):
            me = self.chart(side)
            rad = me.rad
            frac = np.zeros(me.n_active)
            frac[rad <= r_cut - h] = 1.0
            border = (rad > r_cut - h) & (rad < r_cut + h)
            zb = me.z[border]
            if zb.size:
                counts = np.zeros(zb.size)
                samples = zb[:, None] + sub[None, :]
                counts = (np.abs(samples) <= r_cut).mean(axis=1)
                frac[border] = counts
            fractions.append(frac)
        self.own_frac = np.concatenate(fractions)

    # -- operators -------------------------------------------------------
    def laplacian_flat(self):
        """Flat 5-point Laplacian rows for interior nodes (lazy, cached).

        Returns a CSR matrix L with L u = flat Laplacian at interior nodes
        and zero rows at fringe nodes (fringe closure handled separately).
        """
        if self._lap is not None:
            return self._lap
        h2 = self.disc.h ** 2
        rows, cols, vals = [], [], []
        for side in (SOUTH, NORTH):
            me = self.chart(side)
            off = self.offsets[side]
            idx = me.idx
            act = idx >= 0
            ii, jj = np.where(act)
            center = idx[ii, jj]
            is_int = me.interior[center]
            ii, jj, center = ii[is_int], jj[is_int], center[is_int]
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                nb = idx[ii + di, jj + dj]
                rows.extend((off + center).tolist())
                cols.extend((off + nb).tolist())
                vals.extend([1.0 / h2] * len(nb))
            rows.extend((off + center).tolist())
            cols.extend((off + center).tolist())
            vals.extend([-4.0 / h2] * len(center))
        self._lap = sps.csr_array((vals, (rows, cols)),
                                  shape=(self.n_total, self.n_total))
        return self._lap

    def extend(self, vec):
        """Overwrite fringe entries with partner-chart interpolation."""
        out = vec.copy()
        out[self.fringe_rows] = (self.interp @ vec)[self.fringe_rows]
        return out

    def dirichlet_matrix(self):
        """Sparse PSD matrix D with phi^T D phi = flat Dirichlet integral.

        Edge-based: every in-chart grid edge contributes (dphi)^2 weighted by
        the mean ownership fraction of its endpoint cells, so overlapping
        charts partition the sphere integral.
        """
        if self._dirichlet is not None:
            return self._dirichlet
        rows, cols, vals = [], [], []
        for side in (SOUTH, NORTH):
            me = self.chart(side)
            off = self.offsets[side]
            idx = me.idx
            own = self.own_frac[self.chart_slice(side)]
            for di, dj in ((1, 0), (0, 1)):
                a = idx[: idx.shape[0] - di, : idx.shape[1] - dj]
                b = idx[di:, dj:]
                ok = (a >= 0) & (b >= 0)
                ia, ib = a[ok], b[ok]
                wgt = 0.5 * (own[ia] + own[ib])
                keep = wgt > 0
                ia, ib, wgt = ia[keep], ib[keep], wgt[keep]
                # (phi_a - phi_b)^2 * wgt  contributes to the quadratic form
                rows.extend((off + ia).tolist()); cols.extend((off + ia).tolist()); vals.extend(wgt.tolist())
                rows.extend((off + ib).tolist()); cols.extend((off + ib).tolist()); vals.extend(wgt.tolist())
                rows.extend((off + ia).tolist()); cols.extend((off + ib).tolist()); vals.extend((-wgt).tolist())
                rows.extend((off + ib).tolist()); cols.extend((off + ia).tolist()); vals.extend((-wgt).tolist())
        self._dirichlet = sps.csr_array((vals, (rows, cols)),
                                        shape=(self.n_total, self.n_total))
        return self._dirichlet
