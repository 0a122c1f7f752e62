"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class.  The rule of thumb: undecidable-at-precision conditions raise
``PrecisionExhausted`` instead of guessing, and domain preconditions that
fail raise a dedicated error instead of returning a wrong value.
"""
from __future__ import annotations


class PadicLabError(Exception):
    """Base class for all domain errors raised by this package."""


class ContextMismatch(PadicLabError):
    """Two operands live in different (p, m) contexts."""


class NonUnitError(PadicLabError):
    """Inversion was requested for an element with positive valuation."""


class PrecisionExhausted(PadicLabError):
    """A strict-inequality test would need digits beyond precision m."""


class HenselPreconditionFailed(PadicLabError):
    """|P(x)|_p < |P'(x)|_p^2 does not hold (or is undecidable) at x."""


class UnresolvedBranchError(PadicLabError):
    """A root-finding branch neither died nor separated by depth m."""


class NoRootInZp(PadicLabError):
    """The polynomial has no root in Z_p at the working precision."""


class ProfileUnavailable(PadicLabError):
    """Fewer than two Z_p roots; no separation profile exists."""


class BoxExhausted(PadicLabError):
    """The pigeonhole coefficient box contained no small-value collision."""


class ApproximantRejected(PadicLabError):
    """Constructive approximation failed for a nameable reason.

    ``reason`` is one of ``DERIVATIVE_TOO_SMALL`` (the sample point lands
    in the small-derivative exceptional set) or
    ``NOT_IRREDUCIBLE_FALLBACK_EXHAUSTED`` (no verified minimal polynomial
    within the height bound could be extracted).
    """

    DERIVATIVE_TOO_SMALL = "DerivativeTooSmall"
    NOT_IRREDUCIBLE_FALLBACK_EXHAUSTED = "NotIrreducibleFallbackExhausted"

    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {message}" if message else reason)


class CommonFactorError(PadicLabError):
    """Resultant is zero: the two polynomials share a factor."""


class UnsupportedDegreeError(PadicLabError):
    """The operation is only implemented up to a fixed degree bound."""


class MemoryCapExceeded(PadicLabError):
    """A residue scan would need more than the allowed 2^26 classes."""
