"""Algebraic numbers in Z_p of bounded height.

An algebraic number is carried as its primitive minimal polynomial with
positive leading coefficient together with the canonical residue of one
of its Z_p roots.  Conjugate roots of the same polynomial are distinct
points here; identity is (minimal polynomial, residue mod p^m).

The module also hosts the small-value pigeonhole search, the approximant
pipeline built on it, and greedy separated-witness reports for the
regular-system density audits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator

from .errors import (
    ApproximantRejected,
    BoxExhausted,
    HenselPreconditionFailed,
    PrecisionExhausted,
    UnresolvedBranchError,
    UnsupportedDegreeError,
)
from .padic import (
    PadicInt,
    PrimeContext,
    Valuation,
    int_valuation,
    make_padic,
    strict_threshold_exponent,
)
from .polyzx import (
    IntPoly,
    content_and_primitive,
    derivative,
    is_irreducible,
)
from .roots import hensel_lift, zp_roots


@dataclass(frozen=True)
class Disc:
    """A closed ball |omega - center|_p <= p^(-radius_exp) inside Z_p.

    In the ultrametric the open ball of radius p^-k is the closed ball of
    radius p^-(k+1), so one convention suffices; strict-radius sets are
    expressed by shifting the exponent.  Membership is the congruence
    omega = center mod p^radius_exp, and the Haar measure is p^(-radius_exp)
    under the mu(Z_p) = 1 normalization.
    """

    center: PadicInt
    radius_exp: int

    def __post_init__(self) -> None:
        if not 0 <= self.radius_exp <= self.center.ctx.m:
            raise ValueError("radius exponent must lie in [0, m]")

    @classmethod
    def full(cls, ctx: PrimeContext) -> "Disc":
        return cls(make_padic(0, ctx), 0)

    @property
    def ctx(self) -> PrimeContext:
        return self.center.ctx

    @property
    def measure(self) -> Fraction:
        return Fraction(1, self.ctx.p ** self.radius_exp)

    def contains_residue(self, residue: int) -> bool:
        pk = self.ctx.p ** self.radius_exp
        return (residue - self.center.residue) % pk == 0

    def contains(self, x: PadicInt) -> bool:
        return self.contains_residue(x.residue)

    def to_json(self) -> dict:
        return {"center": self.center.residue, "k": self.radius_exp}


@dataclass(frozen=True)
class AlgebraicNumber:
    """A Z_p root of a primitive irreducible integer polynomial.

    Construction checks the cheap invariants (content 1, positive leading
    coefficient, residue actually vanishes mod p^m); irreducibility is
    guaranteed by the constructors that filter for it.
    """

    minpoly: IntPoly
    root: PadicInt
    height: int

    def __post_init__(self) -> None:
        if self.minpoly.leading <= 0:
            raise ValueError("minimal polynomial must have positive leading coefficient")
        if not self.minpoly.is_primitive():
            raise ValueError("minimal polynomial must be primitive")
        if self.height != self.minpoly.height:
            raise ValueError("height must equal the minimal polynomial height")
        if self.minpoly.eval_mod(self.root.residue, self.root.ctx.pm) != 0:
            raise ValueError("stored residue is not a root mod p^m")

    @property
    def degree(self) -> int:
        return self.minpoly.degree

    def weight(self) -> int:
        """N(alpha) = H(alpha)^(n+1) with n the degree."""
        return self.height ** (self.degree + 1)

    def to_json(self) -> dict:
        return {
            "minpoly": str(self.minpoly),
            "root": self.root.residue,
            "height": self.height,
        }


# -- enumeration ---------------------------------------------------------------


def _minimal_poly_candidates(n: int, h: int) -> Iterator[IntPoly]:
    """Height-h shell of candidate minimal polynomials of degree n:
    positive leading coefficient, primitive, irreducible over Q.
    Lexicographic in (a_n, ..., a_0)."""
    rng = range(-h, h + 1)
    for top in range(1, h + 1):
        for rest in product(rng, repeat=n):
            if max(abs(c) for c in rest + (top,)) != h:
                continue
            coeffs = tuple(reversed(rest)) + (top,)
            if math.gcd(*coeffs) != 1:
                continue
            poly = IntPoly(coeffs)
            if not is_irreducible(poly):
                continue
            yield poly


def enumerate_algebraic(
    n: int, hmax: int, disc: Disc, ctx: PrimeContext
) -> list[AlgebraicNumber]:
    """All algebraic numbers of degree n, height <= hmax, with root in the
    disc, each listed exactly once in deterministic order.

    Order: height shells ascending, coefficient tuples lexicographic,
    root residues ascending.  Degree is capped at 3 (the exact
    irreducibility search is a desk-scale tool).
    """
    if n > 3:
        raise UnsupportedDegreeError("enumeration is supported for degree <= 3")
    if n < 1 or hmax < 1:
        raise ValueError("need degree >= 1 and height bound >= 1")
    out: list[AlgebraicNumber] = []
    for h in range(1, hmax + 1):
        for poly in _minimal_poly_candidates(n, h):
            rs = zp_roots(poly, ctx)
            if not rs.complete_in_Zp:
                raise UnresolvedBranchError(
                    f"{poly}: unresolved root branches; raise the precision m"
                )
            for root in rs.roots:
                if disc.contains(root):
                    out.append(AlgebraicNumber(poly, root, h))
    return out


def count_by_height(n: int, h: int, ctx: PrimeContext) -> int:
    """#{alpha in A_(p,n) with root in Z_p : H(alpha) = h}, by enumeration."""
    if h < 1:
        raise ValueError("heights are >= 1")
    count = 0
    for poly in _minimal_poly_candidates(n, h):
        rs = zp_roots(poly, ctx)
        if not rs.complete_in_Zp:
            raise UnresolvedBranchError(f"{poly}: unresolved root branches")
        count += len(rs.roots)  # the disc is all of Z_p: every root counts
    return count


# -- small-value pigeonhole search ----------------------------------------------


def dirichlet_polynomial(
    omega: PadicInt, Q: int, delta_exp: int, C: Fraction, n: int
) -> IntPoly:
    """Find a nonzero P with |P(omega)|_p < delta^2 C Q^(-n-1) inside the box
    |a_j| <= delta^-1 Q (all j), p^delta_exp | a_j for 2 <= j <= n.

    Exhaustive pigeonhole at desk scale: box tuples with coefficients in
    [0, X] are hashed by the value of P(omega) modulo the target power of
    p; two tuples that agree are subtracted.  A tuple whose own value
    already vanishes is returned directly.  If the scan finishes without
    a collision the box was too small for the target and BoxExhausted is
    raised (enlarge C).
    """
    ctx = omega.ctx
    p = ctx.p
    if Q <= 1:
        raise ValueError("Q must be an integer > 1")
    if delta_exp < 0:
        raise ValueError("delta_exp must be >= 0")
    if n < 1:
        raise ValueError("degree bound must be >= 1")
    C = Fraction(C)
    if C <= 0:
        raise ValueError("C must be positive")
    delta_inv = p ** delta_exp
    x_bound = delta_inv * Q
    theta = C / (p ** (2 * delta_exp) * Fraction(Q) ** (n + 1))
    target_k = strict_threshold_exponent(theta, p)
    if target_k > ctx.m:
        raise PrecisionExhausted(
            f"target exponent {target_k} exceeds working precision {ctx.m}"
        )
    pk = p ** target_k
    powers = [pow(omega.residue, j, pk) for j in range(n + 1)]
    step = p ** delta_exp
    ranges = [range(0, x_bound + 1)] * 2 + [
        range(0, x_bound + 1, step) for _ in range(n - 1)
    ]  # (a_0, a_1, a_2..a_n)
    seen: dict[int, tuple[int, ...]] = {}
    for tup in product(*reversed(ranges)):  # (a_n, ..., a_0), lexicographic
        coeffs = tuple(reversed(tup))  # (a_0, ..., a_n)
        val = sum(c * powers[j] for j, c in enumerate(coeffs)) % pk
        if val == 0:
            if any(coeffs):
                return IntPoly(coeffs)
            continue
        if val in seen:
            other = seen[val]
            diff = tuple(a - b for a, b in zip(coeffs, other))
            return IntPoly(diff)
        seen[val] = coeffs
    raise BoxExhausted(
        f"no collision in a box of size {x_bound} at target p^-{target_k}; "
        "enlarge C"
    )


# -- exact division / factor extraction ------------------------------------------


def _divide_exact(num: IntPoly, den: IntPoly) -> IntPoly | None:
    """num / den over Z if the division is exact, else None."""
    if den.degree > num.degree:
        return None
    rem = list(num.coeffs)
    out = [0] * (num.degree - den.degree + 1)
    dc = den.coeffs
    for i in range(len(out) - 1, -1, -1):
        lead = rem[i + den.degree]
        if lead % dc[-1] != 0:
            return None
        q = lead // dc[-1]
        out[i] = q
        for j, c in enumerate(dc):
            rem[i + j] -= q * c
    if any(rem):
        return None
    return IntPoly(tuple(out))


def _linear_factor(poly: IntPoly) -> IntPoly | None:
    """A primitive linear factor of a primitive polynomial, if any."""
    a0, an = poly.coeffs[0], poly.leading
    if a0 == 0:
        return IntPoly((0, 1))
    divs_const = set()
    for d in range(1, abs(a0) + 1):
        if abs(a0) % d == 0:
            divs_const.update((d, -d))
    divs_lead = [d for d in range(1, abs(an) + 1) if abs(an) % d == 0]
    for r in divs_lead:
        for q in sorted(divs_const):
            if math.gcd(abs(q), r) != 1:
                continue
            cand = IntPoly((-q, r))  # root q/r
            if _divide_exact(poly, cand) is not None:
                return cand
    return None


def factor_primitive(poly: IntPoly) -> list[IntPoly]:
    """Irreducible factors (primitive, positive leading) of the primitive
    part of a polynomial with deg <= 4; multiplicities repeated."""
    if poly.degree > 4:
        raise UnsupportedDegreeError("factorization implemented for deg <= 4")
    _, prim = content_and_primitive(poly)
    if prim.leading < 0:
        prim = -prim
    factors: list[IntPoly] = []
    work = prim
    while work.degree >= 1:
        if is_irreducible(work):
            factors.append(work if work.leading > 0 else -work)
            break
        lin = _linear_factor(work)
        if lin is not None:
            lin = lin if lin.leading > 0 else -lin
            factors.append(lin)
            work = _divide_exact(work, lin)
            continue
        # no linear factor: deg 4 splitting into two irreducible quadratics
        found = False
        h = work.height
        bound = 12 * h + 1
        for b2 in range(1, abs(work.leading) + 1):
            if abs(work.leading) % b2 != 0 or found:
                continue
            for b0 in range(-bound, bound + 1):
                if found:
                    break
                for b1 in range(-bound, bound + 1):
                    cand = IntPoly((b0, b1, b2))
                    rest = _divide_exact(work, cand)
                    if rest is not None:
                        factors.append(cand)
                        work = rest
                        found = True
                        break
        if not found:
            raise AssertionError(f"reducible {work} resisted factor search")
    return factors


# -- constructive approximant pipeline --------------------------------------------


def constructive_approximant(
    omega: PadicInt, Q: int, delta_exp: int, C: Fraction, n: int
) -> AlgebraicNumber:
    """Produce an algebraic alpha with |omega - alpha|_p < C Q^(-n-1) and
    H(alpha) <= delta^-1 Q, or raise ApproximantRejected.

    Pipeline: pigeonhole polynomial, derivative-size gate (points failing
    |P'(omega)|_p >= delta land in the exceptional set and are rejected),
    Hensel lift to a root, then extraction of a verified irreducible
    minimal polynomial for the root.  Every claimed bound is re-checked
    before returning; nothing is returned on faith.
    """
    ctx = omega.ctx
    p = ctx.p
    C = Fraction(C)
    if C * Fraction(Q) ** (-n - 1) >= 1:
        raise ValueError("need C Q^(-n-1) < 1 so the Hensel precondition can hold")
    poly = dirichlet_polynomial(omega, Q, delta_exp, C, n)

    dval = derivative(poly).eval_int(omega.residue) if poly.degree >= 1 else 0
    if dval == 0 or int_valuation(dval, p) > delta_exp:
        raise ApproximantRejected(
            ApproximantRejected.DERIVATIVE_TOO_SMALL,
            f"|P'(omega)|_p < p^-{delta_exp} for P = {poly}",
        )

    alpha = hensel_lift(poly, omega)
    dist_k = strict_threshold_exponent(C * Fraction(Q) ** (-n - 1), p)
    height_bound = p ** delta_exp * Q

    for factor in factor_primitive(poly):
        cand = _certify_factor(factor, alpha, omega, dist_k, height_bound)
        if cand is not None:
            return cand
    raise ApproximantRejected(
        ApproximantRejected.NOT_IRREDUCIBLE_FALLBACK_EXHAUSTED,
        f"no factor of {poly} yielded a verified approximant",
    )


def _certify_factor(
    factor: IntPoly,
    alpha: PadicInt,
    omega: PadicInt,
    dist_k: int,
    height_bound: int,
) -> AlgebraicNumber | None:
    """Try to realize alpha as a root of an irreducible factor, verifying
    the residual, the distance bound and the height bound exactly."""
    ctx = omega.ctx
    if factor.height > height_bound:
        return None
    try:
        root = hensel_lift(factor, alpha)
    except HenselPreconditionFailed:
        return None
    if factor.eval_mod(root.residue, ctx.pm) != 0:
        return None
    dv = (omega - root).valuation()
    if dv.exponent < dist_k:
        return None
    return AlgebraicNumber(factor, root, factor.height)


# -- regular system witnesses -------------------------------------------------------


@dataclass(frozen=True)
class RegularSystemReport:
    """A maximal T^-1-separated collection of algebraic points in a disc.

    Every point has weight N = H^(n+1) <= T; separation and maximality are
    exactly auditable.  ``density_constant`` is t / (T mu(disc)), the
    finite-sample stand-in for the density constant whose existence the
    regular-system property asserts.
    """

    n: int
    T: int
    disc: Disc
    points: tuple[AlgebraicNumber, ...]
    density_constant: Fraction

    @property
    def t(self) -> int:
        return len(self.points)

    @property
    def separation_exp(self) -> int:
        """e with T = p^e; points must differ mod p^(e+1)."""
        return _exact_power_exponent(self.T, self.disc.ctx.p)

    def audit_separation(self, pair_scan_limit: int = 2000) -> bool:
        """Exact pairwise check |g_i - g_j|_p >= T^-1.

        For collections small enough, literally scans all pairs; beyond
        the limit it checks that residues mod p^(e+1) are pairwise
        distinct, which in the ultrametric is the same statement.
        """
        e = self.separation_exp
        mod = self.disc.ctx.p ** (e + 1)
        residues = [pt.root.residue % mod for pt in self.points]
        if len(residues) != len(set(residues)):
            return False
        if len(self.points) <= pair_scan_limit:
            for i in range(len(self.points)):
                for j in range(i + 1, len(self.points)):
                    d = (self.points[i].root - self.points[j].root).valuation()
                    if d.exponent > e or not d.is_exact:
                        return False
        return True

    def audit_maximality(self, candidates: list[AlgebraicNumber]) -> bool:
        """Every admissible candidate not selected is within < T^-1 of a
        selected point (greedy cover property)."""
        e = self.separation_exp
        mod = self.disc.ctx.p ** (e + 1)
        chosen = {pt.root.residue % mod for pt in self.points}
        keys = {(pt.minpoly.coeffs, pt.root.residue) for pt in self.points}
        for cand in candidates:
            if cand.weight() > self.T:
                continue
            if (cand.minpoly.coeffs, cand.root.residue) in keys:
                continue
            if cand.root.residue % mod not in chosen:
                return False
        return True

    def to_json(self) -> dict:
        ctx = self.disc.ctx
        return {
            "p": ctx.p,
            "m": ctx.m,
            "n": self.n,
            "T": self.T,
            "disc": self.disc.to_json(),
            "t": self.t,
            "density_constant": f"{self.density_constant.numerator}/"
                                f"{self.density_constant.denominator}",
            "points": [pt.to_json() for pt in self.points],
        }


def _exact_power_exponent(T: int, p: int) -> int:
    e = 0
    x = 1
    while x < T:
        x *= p
        e += 1
    if x != T:
        raise ValueError(f"T = {T} is not a power of p = {p}")
    return e


def regular_witness(
    disc: Disc, T: int, n: int, ctx: PrimeContext
) -> RegularSystemReport:
    """Greedy maximal T^-1-separated subset of the weight-<=T algebraic
    numbers of degree n in the disc, in deterministic enumeration order.

    T must be p^(s(n+1)) for an integer s >= 1 so that both the weight
    cutoff (H <= p^s) and the separation radius are exact.
    """
    e = _exact_power_exponent(T, ctx.p)
    if e % (n + 1) != 0 or e < n + 1:
        raise ValueError(
            f"T must be p^(s(n+1)) with s >= 1; got exponent {e} for n = {n}"
        )
    if ctx.m < e + 1:
        raise PrecisionExhausted(
            f"separation at T = p^{e} needs precision m >= {e + 1}, have {ctx.m}"
        )
    s = e // (n + 1)
    hmax = ctx.p ** s
    candidates = enumerate_algebraic(n, hmax, disc, ctx)
    mod = ctx.p ** (e + 1)
    chosen: dict[int, AlgebraicNumber] = {}
    points: list[AlgebraicNumber] = []
    for cand in candidates:
        key = cand.root.residue % mod
        if key not in chosen:
            chosen[key] = cand
            points.append(cand)
    density = Fraction(len(points)) / (T * disc.measure)
    return RegularSystemReport(
        n=n, T=T, disc=disc, points=tuple(points), density_constant=density
    )
