"""Integer polynomials of bounded degree.

Coefficients are arbitrary-precision integers stored lowest power first,
the same convention as the textual form "[1,-5,1]" for x^2 - 5x + 1.
The zero polynomial is rejected at construction: every set in this
package ranges over nonzero polynomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator

from .errors import UnsupportedDegreeError
from .padic import PadicInt, PrimeContext, int_valuation, make_padic


@dataclass(frozen=True)
class IntPoly:
    """A nonzero polynomial in Z[x], trailing zero coefficients trimmed."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        cs = tuple(int(c) for c in self.coeffs)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        if not cs:
            raise ValueError("the zero polynomial is not representable")
        object.__setattr__(self, "coeffs", cs)

    # -- basic shape ----------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    @property
    def height(self) -> int:
        """H(P) = max |a_i|."""
        return max(abs(c) for c in self.coeffs)

    def content(self) -> int:
        """Positive gcd of the coefficients."""
        return math.gcd(*self.coeffs) if len(self.coeffs) > 1 else abs(self.coeffs[0])

    def is_primitive(self) -> bool:
        return self.content() == 1

    # -- algebra ----------------------------------------------------------

    def __mul__(self, other: "IntPoly") -> "IntPoly":
        out = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPoly(tuple(out))

    def __neg__(self) -> "IntPoly":
        return IntPoly(tuple(-c for c in self.coeffs))

    def scale(self, k: int) -> "IntPoly":
        if k == 0:
            raise ValueError("scaling by 0 gives the zero polynomial")
        return IntPoly(tuple(k * c for c in self.coeffs))

    def eval_int(self, x: int) -> int:
        """Exact integer evaluation by Horner's rule."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_mod(self, x: int, mod: int) -> int:
        """Horner evaluation mod an integer; exactness by locality:
        the result mod p^k depends only on x mod p^k."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % mod
        return acc

    def __str__(self) -> str:
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"

    def __repr__(self) -> str:
        return f"IntPoly({list(self.coeffs)})"


def parse_poly(text: str) -> IntPoly:
    """Parse the textual form '[a0,a1,...]' (lowest power first)."""
    t = text.strip()
    if not (t.startswith("[") and t.endswith("]")):
        raise ValueError(f"polynomial must look like [a0,a1,...], got {text!r}")
    return IntPoly(tuple(int(tok) for tok in t[1:-1].split(",")))


def height(poly: IntPoly) -> int:
    return poly.height


def content_and_primitive(poly: IntPoly) -> tuple[int, IntPoly]:
    """Split P = a_P * P1 with a_P the positive content and P1 primitive.

    P1 inherits P's signs (in particular the sign of the leading
    coefficient), which makes the decomposition deterministic.
    """
    c = poly.content()
    return c, IntPoly(tuple(a // c for a in poly.coeffs))


def derivative(poly: IntPoly, j: int = 1) -> IntPoly:
    """Exact j-th derivative, j >= 1.  Raises ValueError if it vanishes
    (j exceeds the degree), since the zero polynomial has no carrier."""
    if j < 1:
        raise ValueError("derivative order must be >= 1")
    if j > poly.degree:
        raise ValueError(f"derivative of order {j} of {poly} vanishes")
    cs = poly.coeffs
    for _ in range(j):
        cs = tuple(i * cs[i] for i in range(1, len(cs)))
    return IntPoly(cs)


def eval_padic(poly: IntPoly, omega: PadicInt) -> PadicInt:
    """P(omega) as an element of Z_p, exact mod p^m."""
    return make_padic(poly.eval_mod(omega.residue, omega.ctx.pm), omega.ctx)


# -- resultants ------------------------------------------------------------


def _bareiss_det(mat: list[list[int]]) -> int:
    """Fraction-free determinant of an integer matrix (Bareiss)."""
    n = len(mat)
    if n == 0:
        return 1
    m = [row[:] for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def resultant(p: IntPoly, q: IntPoly) -> int:
    """Exact resultant via the Sylvester determinant.

    Zero iff P and Q share a common factor of positive degree over Q.
    Degenerate degrees follow the usual conventions:
    res(c, Q) = c^deg(Q) for a constant c, and res(c, d) = 1.
    """
    dp, dq = p.degree, q.degree
    if dp == 0 and dq == 0:
        return 1
    if dp == 0:
        return p.coeffs[0] ** dq
    if dq == 0:
        return q.coeffs[0] ** dp
    n = dp + dq
    rows: list[list[int]] = []
    pc = list(reversed(p.coeffs))  # highest power first
    qc = list(reversed(q.coeffs))
    for i in range(dq):
        rows.append([0] * i + pc + [0] * (n - dp - 1 - i))
    for i in range(dp):
        rows.append([0] * i + qc + [0] * (n - dq - 1 - i))
    return _bareiss_det(rows)


# -- irreducibility over Q --------------------------------------------------


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            if d != n // d:
                out.append(n // d)
        d += 1
    return sorted(out)


def _has_rational_root(poly: IntPoly) -> bool:
    """Rational root test: any root q/r in lowest terms has q | a0, r | a_n.

    Evaluates the homogenized form sum c_i q^i r^(deg-i) exactly.
    """
    a0, an = poly.coeffs[0], poly.leading
    if a0 == 0:
        return True  # x divides
    deg = poly.degree
    for r in _divisors(an):
        for q in _divisors(a0):
            if math.gcd(q, r) != 1:
                continue
            for num in (q, -q):
                val = sum(c * num ** i * r ** (deg - i)
                          for i, c in enumerate(poly.coeffs))
                if val == 0:
                    return True
    return False


def _quadratic_factor_exists(poly: IntPoly) -> bool:
    """Search for a degree-2 integer factor of a degree-4 polynomial.

    Exhausts b2 | a4, b0 | a0 and a Mignotte-style bound on the middle
    coefficient; exact and complete at desk scale.
    """
    a4, a0 = poly.leading, poly.coeffs[0]
    a3, a2, a1 = poly.coeffs[3], poly.coeffs[2], poly.coeffs[1]
    bound = 4 * math.isqrt(5) * poly.height + 4 * poly.height + 1
    for b2 in _divisors(a4):
        c2s = [a4 // b2, -(a4 // b2)] if b2 != 0 else []
        for c2 in c2s:
            if b2 * c2 != a4:
                continue
            for b0 in _divisors(a0) + [-d for d in _divisors(a0)]:
                if b0 == 0 or a0 % b0 != 0:
                    continue
                c0 = a0 // b0
                for b1 in range(-bound, bound + 1):
                    # a3 = b2*c1 + b1*c2  =>  c1 determined if divisible
                    num = a3 - b1 * c2
                    if num % b2 != 0:
                        continue
                    c1 = num // b2
                    if a2 != b2 * c0 + b1 * c1 + b0 * c2:
                        continue
                    if a1 != b1 * c0 + b0 * c1:
                        continue
                    return True
    return False


def is_irreducible(poly: IntPoly) -> bool:
    """Irreducibility over Q for deg <= 4 (desk-scale bound).

    True iff P admits no factorization into two integer polynomials of
    positive degree; content is irrelevant (Q[x] sense).  Constants are
    not considered irreducible.  Degrees above 4 raise
    UnsupportedDegreeError.
    """
    d = poly.degree
    if d > 4:
        raise UnsupportedDegreeError(f"irreducibility implemented for deg <= 4, got {d}")
    if d == 0:
        return False
    if d == 1:
        return True
    prim = content_and_primitive(poly)[1]
    if prim.coeffs[0] == 0:
        return False  # x divides, leaving a positive-degree cofactor
    if _has_rational_root(prim):
        return False
    if d <= 3:
        return True  # deg 2/3 reducible only via a linear factor
    return not _quadratic_factor_exists(prim)


# -- leading predicate -------------------------------------------------------


def is_leading(poly: IntPoly, ctx: PrimeContext) -> bool:
    """Leading polynomial test: a_n = H(P) and |a_n|_p > p^(-n)."""
    n = poly.degree
    if n == 0:
        return False
    an = poly.leading
    if an != poly.height:
        return False
    return int_valuation(an, ctx.p) < n


# -- enumeration --------------------------------------------------------------


@dataclass(frozen=True)
class PolyFilter:
    """Membership predicates for enumeration streams.

    ``require_leading`` needs a prime context since the leading predicate
    involves |a_n|_p.
    """

    height_max: int
    require_irreducible: bool = False
    require_primitive: bool = False
    require_leading: bool = False
    require_exact_degree: bool = False
    ctx: PrimeContext | None = None

    def __post_init__(self) -> None:
        if self.height_max < 1:
            raise ValueError("height_max must be >= 1")
        if self.require_leading and self.ctx is None:
            raise ValueError("require_leading needs a PrimeContext")

    def admits(self, poly: IntPoly, n: int) -> bool:
        if self.require_exact_degree and poly.degree != n:
            return False
        if self.require_leading and not (poly.degree == n and is_leading(poly, self.ctx)):
            return False
        if self.require_primitive and not poly.is_primitive():
            return False
        if self.require_irreducible and not is_irreducible(poly):
            return False
        return True


def enumerate_polys(n: int, filt: PolyFilter) -> Iterator[IntPoly]:
    """Deterministic stream of all polynomials with deg <= n passing the
    filter, each exactly once.

    Total order: by height shell H = 1..height_max, then lexicographic on
    the coefficient tuple (a_n, ..., a_0).  Without filters the shells up
    to H contain (2H+1)^(n+1) - 1 polynomials in total.
    """
    for h in range(1, filt.height_max + 1):
        rng = range(-h, h + 1)
        for tup in product(rng, repeat=n + 1):  # tup = (a_n, ..., a_0)
            if max(abs(c) for c in tup) != h:
                continue
            poly = IntPoly(tuple(reversed(tup)))
            if filt.admits(poly, n):
                yield poly


# -- residue solutions --------------------------------------------------------


def solutions_mod_prime_power(poly: IntPoly, p: int, k: int) -> list[int]:
    """All residues r mod p^k with P(r) = 0 mod p^k, by branch refinement.

    Exact: a residue class survives level j iff P vanishes on it mod p^j,
    which by evaluation locality is a property of the class.  Sorted output.
    """
    if k == 0:
        return [0]
    level = [r for r in range(p) if poly.eval_mod(r, p) == 0]
    pj = p
    for _ in range(1, k):
        pj1 = pj * p
        nxt = []
        for r in level:
            for t in range(p):
                cand = r + t * pj
                if poly.eval_mod(cand, pj1) == 0:
                    nxt.append(cand)
        level = nxt
        pj = pj1
    return sorted(level)
