"""Radial cutoff profile used to glue the reference densities.

chi is a fixed C^2 quintic bump: identically 1 on the ball of radius
``radius``, identically 0 outside twice that radius, monotone in between.
psi = 1 - chi.  A fixed polynomial keeps runs reproducible.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CutoffSpec:
    radius: float = 1.0      # inner ball B; transition ends at 2*radius

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("cutoff radius must be positive")

    def chi(self, r):
        """1 on B, 0 outside 2B, C^2 quintic smoothstep in between."""
        x = np.clip((np.asarray(r, dtype=float) - self.radius) / self.radius, 0.0, 1.0)
        return 1.0 - x * x * x * (10.0 + x * (-15.0 + 6.0 * x))

    def psi(self, r):
        """1 - chi: 0 on B, 1 outside 2B."""
        return 1.0 - self.chi(r)

    def contains(self, p):
        """Whether a finite chart point lies strictly inside B."""
        return abs(p) < self.radius

    def on_transition(self, p):
        r = abs(p)
        return self.radius <= r <= 2.0 * self.radius


def default_cutoff(divisor):
    """Cutoff ball comfortably containing every finite cone point."""
    finite = divisor.finite_points()
    rmax = max((abs(p) for p in finite), default=0.0)
    return CutoffSpec(radius=max(1.0, 1.25 * rmax))
