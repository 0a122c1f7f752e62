"""Exact arithmetic in Z_p at a fixed working precision.

An element is a canonical residue mod p^m.  All arithmetic is exact modulo
p^m; the only "rounding" anywhere is the reduction itself.  Valuations of
a zero residue saturate as ``at_least(m)`` rather than pretending to know
unresolved digits, and comparisons that would need those digits raise
:class:`~padiclab.errors.PrecisionExhausted`.

Values are immutable and safe to share; every operation is a pure function.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ContextMismatch, NonUnitError, PrecisionExhausted


def is_prime(n: int) -> bool:
    """Trial-division primality check; desk-scale moduli only."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def int_valuation(z: int, p: int) -> int:
    """v_p(z) for a nonzero integer z."""
    if z == 0:
        raise ValueError("p-adic valuation of the integer 0 is infinite")
    z = abs(z)
    v = 0
    while z % p == 0:
        z //= p
        v += 1
    return v


@dataclass(frozen=True)
class PrimeContext:
    """A prime p with working precision m; caches p^m.

    Attributes:
        p: the prime (verified by trial division at construction).
        m: number of base-p digits carried by every residue, m >= 1.
        pm: p**m, precomputed.
    """

    p: int
    m: int
    pm: int = 0

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.m < 1:
            raise ValueError(f"precision m must be >= 1, got {self.m}")
        object.__setattr__(self, "pm", self.p ** self.m)

    def __repr__(self) -> str:
        return f"PrimeContext(p={self.p}, m={self.m})"


@dataclass(frozen=True)
class Valuation:
    """Result of a valuation query at precision m.

    Either ``exact(k)`` (p^k exactly divides the residue, 0 <= k < m) or
    ``at_least(m)`` (the residue is 0 mod p^m, so the true valuation is
    unresolvable at this precision).
    """

    exponent: int
    is_exact: bool

    @classmethod
    def exact(cls, k: int) -> "Valuation":
        return cls(k, True)

    @classmethod
    def at_least(cls, m: int) -> "Valuation":
        return cls(m, False)

    def norm(self, p: int) -> Fraction:
        """|x|_p = p^(-exponent).  For an inexact valuation this is an
        upper bound on the true norm, not its value."""
        return Fraction(1, p ** self.exponent)

    def norm_le(self, other: "Valuation") -> bool:
        """Decide |self| <= |other|; raise if unresolved digits matter."""
        if self.is_exact and other.is_exact:
            return self.exponent >= other.exponent
        if not self.is_exact and other.is_exact:
            return True  # |self| <= p^-m < p^-other.exponent
        if self.is_exact and not other.is_exact:
            return False  # |self| >= p^-(m-1) > p^-m >= |other|
        raise PrecisionExhausted(
            "comparing two saturated valuations needs digits beyond m"
        )

    def norm_lt(self, other: "Valuation") -> bool:
        """Decide |self| < |other| strictly."""
        if self.is_exact and other.is_exact:
            return self.exponent > other.exponent
        if not self.is_exact and other.is_exact:
            return True
        if self.is_exact and not other.is_exact:
            return False
        raise PrecisionExhausted(
            "comparing two saturated valuations needs digits beyond m"
        )

    def norm_lt_pow(self, k: int) -> bool:
        """Decide |x| < p^-k, i.e. v(x) >= k + 1.

        Decidable whenever k < m; for k >= m a saturated valuation cannot
        answer and PrecisionExhausted is raised.
        """
        if self.is_exact:
            return self.exponent >= k + 1
        if k + 1 <= self.exponent:  # exponent == m here
            return True
        raise PrecisionExhausted(
            f"|x|_p < p^-{k} undecidable: valuation saturated at {self.exponent}"
        )

    def norm_le_pow(self, k: int) -> bool:
        """Decide |x| <= p^-k, i.e. v(x) >= k."""
        if self.is_exact:
            return self.exponent >= k
        if k <= self.exponent:
            return True
        raise PrecisionExhausted(
            f"|x|_p <= p^-{k} undecidable: valuation saturated at {self.exponent}"
        )

    def __str__(self) -> str:
        return f"v={self.exponent}" if self.is_exact else f"v>={self.exponent}"

    def to_json(self) -> dict:
        return {"kind": "exact" if self.is_exact else "at_least",
                "exponent": self.exponent}


@dataclass(frozen=True)
class PadicInt:
    """An element of Z_p known to precision m: a residue in [0, p^m)."""

    residue: int
    ctx: PrimeContext

    def __post_init__(self) -> None:
        if not 0 <= self.residue < self.ctx.pm:
            raise ValueError("residue out of range; use make_padic")

    # -- arithmetic ---------------------------------------------------

    def _require_same_ctx(self, other: "PadicInt") -> None:
        if self.ctx != other.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")

    def __add__(self, other: "PadicInt") -> "PadicInt":
        self._require_same_ctx(other)
        return PadicInt((self.residue + other.residue) % self.ctx.pm, self.ctx)

    def __sub__(self, other: "PadicInt") -> "PadicInt":
        self._require_same_ctx(other)
        return PadicInt((self.residue - other.residue) % self.ctx.pm, self.ctx)

    def __mul__(self, other: "PadicInt") -> "PadicInt":
        self._require_same_ctx(other)
        return PadicInt((self.residue * other.residue) % self.ctx.pm, self.ctx)

    def __neg__(self) -> "PadicInt":
        return PadicInt((-self.residue) % self.ctx.pm, self.ctx)

    # -- queries ------------------------------------------------------

    def valuation(self) -> Valuation:
        if self.residue == 0:
            return Valuation.at_least(self.ctx.m)
        return Valuation.exact(int_valuation(self.residue, self.ctx.p))

    def is_unit(self) -> bool:
        return self.residue % self.ctx.p != 0

    def invert(self) -> "PadicInt":
        """Multiplicative inverse mod p^m; the input must be a unit."""
        if not self.is_unit():
            raise NonUnitError(
                f"residue {self.residue} has positive valuation; not invertible"
            )
        return PadicInt(pow(self.residue, -1, self.ctx.pm), self.ctx)

    def digits(self) -> list[int]:
        """Base-p digits, least significant first, padded to length m."""
        out = []
        r = self.residue
        for _ in range(self.ctx.m):
            out.append(r % self.ctx.p)
            r //= self.ctx.p
        return out

    def __str__(self) -> str:
        ds = ",".join(str(d) for d in self.digits())
        return f"{self.ctx.p}:{self.ctx.m}:[{ds}]"

    def __repr__(self) -> str:
        return f"PadicInt({self.residue}, p={self.ctx.p}, m={self.ctx.m})"


def make_padic(z: int, ctx: PrimeContext) -> PadicInt:
    """Canonicalize an arbitrary integer into [0, p^m)."""
    return PadicInt(z % ctx.pm, ctx)


def parse_padic(text: str) -> PadicInt:
    """Inverse of str(PadicInt): 'p:m:[d0,d1,...]' with digits low-first."""
    head, mid, digits = text.split(":", 2)
    p, m = int(head), int(mid)
    digits = digits.strip()
    if not (digits.startswith("[") and digits.endswith("]")):
        raise ValueError(f"malformed digit list in {text!r}")
    ds = [int(t) for t in digits[1:-1].split(",")] if digits != "[]" else []
    ctx = PrimeContext(p, m)
    if len(ds) != m or any(not 0 <= d < p for d in ds):
        raise ValueError(f"digit list does not match p={p}, m={m}")
    value = 0
    for d in reversed(ds):
        value = value * p + d
    return PadicInt(value, ctx)


def arith(op: str, x: PadicInt, y: PadicInt) -> PadicInt:
    """Dispatch form of +, -, *; kept for symmetry with the wire format."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown operation {op!r}")


def valuation(x: PadicInt) -> Valuation:
    return x.valuation()


def invert(x: PadicInt) -> PadicInt:
    return x.invert()


def dist(x: PadicInt, y: PadicInt) -> Valuation:
    """Valuation of x - y; the ultrametric distance is p^(-exponent)."""
    return (x - y).valuation()


def strict_threshold_exponent(theta: Fraction, p: int) -> int:
    """Translate a strict norm threshold into a valuation bound.

    For x in Z_p the set {|x|_p < theta} equals {v_p(x) >= K} with
    K = min{k >= 0 : p^-k < theta}; since norms only take the values
    p^-k this translation is exact for every positive rational theta.
    """
    theta = Fraction(theta)
    if theta <= 0:
        raise ValueError("threshold must be positive")
    a, b = theta.numerator, theta.denominator
    k = 0
    pk = 1
    while b >= a * pk:  # p^-k >= theta
        k += 1
        pk *= p
    return k


def floor_threshold_exponent(theta: Fraction, p: int) -> int:
    """Exponent of the largest power p^-k that is <= theta.

    Used where a threshold is, by convention, rounded down to the norm
    scale before being applied as a closed bound {v_p(x) >= k}.
    """
    theta = Fraction(theta)
    if theta <= 0:
        raise ValueError("threshold must be positive")
    a, b = theta.numerator, theta.denominator
    k = 0
    pk = 1
    while b > a * pk:  # p^-k > theta
        k += 1
        pk *= p
    return k
