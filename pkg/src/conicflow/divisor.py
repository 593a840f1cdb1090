"""Cone divisors on the 2-sphere: marked points with weights in (0,1).

Points live on the stereographic chart; ``None`` stands for the north pole
(z = infinity).  Weights are kept both as floats (numerics) and as exact
fractions parsed from their decimal representation, so that the
stable/semi-stable/unstable boundary is decidable without floating-point
ties.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .util import parse_point, format_point


class DivisorError(ValueError):
    pass


def _exact_weight(w):
    """Exact decimal weight.  Accepts str ('0.4') or float with <= 12 digits."""
    if isinstance(w, Fraction):
        return w
    if isinstance(w, str):
        return Fraction(w)
    text = "%.12g" % float(w)
    return Fraction(text)


@dataclass(frozen=True)
class ConeDivisor:
    """Marked points with cone weights, sorted by ascending weight.

    gamma = 1 - sum(weights)/2 must be positive.  The largest weight is
    last; charts downstream expect it at the north pole (use
    :func:`normalize_divisor` to move it there).
    """

    points: tuple          # chart coordinates, None = north pole
    weights: tuple         # floats, ascending
    weights_exact: tuple = field(repr=False, default=())

    @property
    def gamma(self):
        return 1.0 - 0.5 * sum(self.weights)

    @property
    def gamma_exact(self):
        return Fraction(1) - sum(self.weights_exact, Fraction(0)) / 2

    @property
    def k(self):
        return len(self.weights)

    def finite_points(self):
        return [p for p in self.points if p is not None]

    def point_labels(self):
        return [format_point(p) for p in self.points]

    def as_config(self):
        return {
            "points": self.point_labels(),
            "weights": [str(w) for w in self.weights_exact],
        }


def make_divisor(points, weights):
    """Build a validated ConeDivisor; sorts by weight (stable order on ties)."""
    pts = [parse_point(p) for p in points]
    exact = [_exact_weight(w) for w in weights]
    if len(pts) != len(exact):
        raise DivisorError("points and weights must have equal length")
    for w in exact:
        if not (Fraction(0) < w < Fraction(1)):
            raise DivisorError("cone weights must lie strictly in (0, 1), got %s" % w)
    seen = set()
    for p in pts:
        key = "inf" if p is None else (round(p.real, 12), round(p.imag, 12))
        if key in seen:
            raise DivisorError("cone points must be pairwise distinct")
        seen.add(key)
    order = sorted(range(len(exact)), key=lambda i: (exact[i], i))
    pts = tuple(pts[i] for i in order)
    exact = tuple(exact[i] for i in order)
    div = ConeDivisor(points=pts, weights=tuple(float(w) for w in exact),
                      weights_exact=exact)
    if div.gamma_exact <= 0:
        raise DivisorError("gamma = 1 - sum(weights)/2 must be positive, got %s"
                           % div.gamma_exact)
    return div


def normalize_divisor(divisor):
    """Send the largest-weight point to the north pole by a Moebius move.

    Returns (normalized divisor, moebius) where moebius is None if the input
    already complied, else the pivot p_k of the map z -> 1/(z - p_k).
    """
    if divisor.points[-1] is None:
        return divisor, None
    pivot = divisor.points[-1]
    new_pts = []
    for p in divisor.points[:-1]:
        if p is None:
            new_pts.append(complex(0.0))     # infinity maps to 0 under 1/(z-p_k)
        else:
            new_pts.append(1.0 / (p - pivot))
    new_pts.append(None)
    out = ConeDivisor(points=tuple(new_pts), weights=divisor.weights,
                      weights_exact=divisor.weights_exact)
    return out, pivot


def two_pole_divisor(beta_south, beta_north):
    """Divisor with beta_south at 0 and beta_north at the north pole.

    Requires beta_north >= beta_south so the largest weight sits at the pole.
    """
    if _exact_weight(beta_south) > _exact_weight(beta_north):
        raise DivisorError("two-pole divisor expects beta_north >= beta_south")
    return make_divisor([0.0, "inf"], [beta_south, beta_north])
