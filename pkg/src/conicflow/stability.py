"""Stability trichotomy for cone divisors and the predicted flow limit.

A divisor is stable, semi-stable or unstable according to whether the sum of
the smaller weights exceeds, equals or falls below the largest weight.  The
comparison is exact (fractions), so the semi-stable boundary never depends on
floating-point rounding.
"""

from dataclasses import dataclass
from fractions import Fraction

from .divisor import DivisorError

STABLE = "Stable"
SEMI_STABLE = "SemiStable"
UNSTABLE = "Unstable"

LIMIT_CONSTANT_CURVATURE = "ConstantCurvatureOnBeta"
LIMIT_CONSTANT_CURVATURE_SPLIT = "ConstantCurvatureOnBetaInfinity"
LIMIT_SOLITON = "SolitonGInfinity"


@dataclass(frozen=True)
class StabilityReport:
    classification: str          # Stable | SemiStable | Unstable
    beta_k: float                # largest weight
    beta_k_prime: float          # sum of the others
    limit_north: float           # limit divisor: weight at the north pole
    limit_south: float           # weight at the south pole
    predicted_limit: str

    def as_dict(self):
        return {
            "class": self.classification,
            "beta_k": self.beta_k,
            "beta_k_prime": self.beta_k_prime,
            "limit_divisor": {"north": self.limit_north, "south": self.limit_south},
            "predicted_limit": self.predicted_limit,
        }


def classify_divisor(divisor):
    """Classify a divisor and name the predicted long-time limit of the flow."""
    if divisor.gamma_exact <= 0:
        raise DivisorError("gamma must be positive")
    exact = divisor.weights_exact
    bk = exact[-1]
    bkp = sum(exact[:-1], Fraction(0))
    if bkp > bk:
        cls, limit = STABLE, LIMIT_CONSTANT_CURVATURE
    elif bkp == bk:
        cls, limit = SEMI_STABLE, LIMIT_CONSTANT_CURVATURE_SPLIT
    else:
        cls, limit = UNSTABLE, LIMIT_SOLITON
    return StabilityReport(
        classification=cls,
        beta_k=float(bk),
        beta_k_prime=float(bkp),
        limit_north=float(bk),
        limit_south=float(bkp),
        predicted_limit=limit,
    )
