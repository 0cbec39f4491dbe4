"""Exception types shared across the package."""

from __future__ import annotations

__all__ = [
    "BarycenterOutOfRange",
    "DegenerateWindow",
    "DegreeTooLarge",
    "DimensionTooSmall",
    "HypothesisNotSatisfied",
    "IndexOutOfRange",
    "MassNotOne",
    "NoConvergence",
    "NotADensity",
    "OrderOutOfRange",
    "OrderTooSmall",
    "PreconditionViolated",
    "RateNotApplicable",
    "SpectralGapViolation",
    "TruncationOverflow",
]


class IndexOutOfRange(ValueError):
    """Binomial or coefficient index outside its admissible range."""


class DegreeTooLarge(ValueError):
    """Monomial conversion requested beyond the exact-integer range."""


class OrderOutOfRange(ValueError):
    """Quadrature order outside the supported range."""


class MassNotOne(ValueError):
    """Constant coefficient of a candidate density is not 1."""


class NotADensity(ValueError):
    """Candidate function is negative somewhere.

    ``witness`` is a point where the function is negative (or the failure
    is structural, e.g. odd leading degree, and the witness is the point
    found while scanning the dominant tail).
    """

    def __init__(self, message: str, witness: float | None = None):
        super().__init__(message)
        self.witness = witness


class DimensionTooSmall(ValueError):
    """Requested matrix truncation cannot hold the operator band."""


class TruncationOverflow(ValueError):
    """Applying an operator would push coefficients past the truncation cap."""


class NoConvergence(RuntimeError):
    """Iterative solver exhausted its budget without meeting tolerance."""


class SpectralGapViolation(ValueError):
    """Input has nonzero coefficients inside the supposedly empty band."""


class HypothesisNotSatisfied(ValueError):
    """Density does not satisfy the decay conditions the bound requires."""


class BarycenterOutOfRange(ValueError):
    """Mixing weight a outside the admissible interval for this density."""


class DegenerateWindow(ValueError):
    """Fit window is empty or contains non-finite data."""


class RateNotApplicable(ValueError):
    """Rate machinery requested for a schedule with r < 2."""


class OrderTooSmall(ValueError):
    """Quadrature order below the polynomial-exactness threshold."""


class PreconditionViolated(ValueError):
    """Arguments violate a documented precondition."""
