"""Root finding in Z_p and the root-geometry diagnostics.

The two engines are Newton iteration under Hensel's lemma for confirmed
simple roots, and breadth-first branch refinement over residue classes
for isolation.  A branch that neither dies nor separates by depth m is
surfaced as unresolved rather than being merged or guessed; callers
decide what a possible multiple root means for them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    HenselPreconditionFailed,
    NoRootInZp,
    PrecisionExhausted,
    ProfileUnavailable,
    UnresolvedBranchError,
)
from .padic import PadicInt, PrimeContext, Valuation, int_valuation, make_padic
from .polyzx import IntPoly, derivative, eval_padic, is_leading


def _vp_or_none(z: int, p: int) -> int | None:
    """Exact integer valuation; None encodes v = infinity (z == 0)."""
    return None if z == 0 else int_valuation(z, p)


# -- Hensel lifting -----------------------------------------------------------


def hensel_lift(poly: IntPoly, start: PadicInt) -> PadicInt:
    """Newton-lift an approximate root to a root mod p^m.

    Precondition (checked on the residue, decidable at precision m):
    |P(x0)|_p < |P'(x0)|_p^2.  The returned residue is the true root's
    canonical residue mod p^m -- the iteration runs at an elevated
    internal modulus so that non-unit derivatives do not leak junk into
    the reported digits -- and satisfies

        P(alpha) = 0 mod p^m,
        |alpha - x0|_p <= |P(x0)|_p / |P'(x0)|_p^2.
    """
    ctx = start.ctx
    p, m = ctx.p, ctx.m
    x0 = start.residue
    a = poly.eval_int(x0)
    b = derivative(poly).eval_int(x0) if poly.degree >= 1 else 0
    vb = _vp_or_none(b, p)
    if vb is None or vb >= m:
        raise HenselPreconditionFailed(
            "|P'(x0)|_p is saturated at precision m; precondition undecidable"
        )
    va = _vp_or_none(a, p)
    if va is None or va >= m:
        # Residue-level |P(x0)|_p <= p^-m; strict comparison against
        # |P'|^2 = p^-2vb is decidable only when m > 2 vb.
        if not m > 2 * vb:
            raise HenselPreconditionFailed(
                "residual saturated and 2 v(P') >= m: precondition undecidable"
            )
    elif not va > 2 * vb:
        raise HenselPreconditionFailed(
            f"v(P(x0)) = {va} must exceed 2 v(P'(x0)) = {2 * vb}"
        )

    # Elevated working modulus: each division by P'(x) can cost vb digits,
    # and quadratic convergence needs ~log2(m) steps.
    target = m + 2 * vb + 1
    big = target + vb * (m.bit_length() + 4) + 2
    pbig = p ** big
    ptarget = p ** target
    x = x0 % pbig
    dpoly = derivative(poly)
    pvb = p ** vb
    for _ in range(4 * (m.bit_length() + big.bit_length()) + 16):
        fx = poly.eval_mod(x, pbig)
        if fx % ptarget == 0:
            return make_padic(x, ctx)
        dx = dpoly.eval_mod(x, pbig)
        u = dx // pvb
        if u % p == 0:
            raise AssertionError("derivative valuation drifted during lift")
        step = ((fx // pvb) * pow(u, -1, pbig)) % pbig
        x = (x - step) % pbig
    raise AssertionError("Newton iteration failed to converge; impossible "
                         "when the precondition holds")


# -- exhaustive-in-principle root isolation -----------------------------------


@dataclass(frozen=True)
class RootSet:
    """Roots of a polynomial in Z_p at precision m.

    ``roots`` are confirmed, pairwise-distinct-mod-p^m residues, each a
    simple root isolated by the Hensel criterion; ``deriv_valuations``
    aligns with ``roots`` and records v_p(P'(alpha)).  ``unresolved``
    holds depth-m branch residues that never separated (possible multiple
    roots).  ``complete_in_Zp`` is True iff nothing was left unresolved.
    """

    poly: IntPoly
    ctx: PrimeContext
    roots: tuple[PadicInt, ...]
    deriv_valuations: tuple[int, ...]
    unresolved: tuple[int, ...]
    complete_in_Zp: bool

    def residues(self) -> list[int]:
        return [r.residue for r in self.roots]

    def solution_residues(self) -> list[int]:
        """All residues r mod p^m with P(r) = 0 mod p^m.

        Around a confirmed root alpha with v_p(P'(alpha)) = d the solution
        set is the ball alpha + p^(m-d) Z mod p^m.  Rather than trusting
        that analysis, the ball is grown outward one level at a time with
        every member re-verified by evaluation, so the output is exact by
        construction.
        """
        p, m, pm = self.ctx.p, self.ctx.m, self.ctx.pm
        out: set[int] = set(self.unresolved)
        for root in self.roots:
            alpha = root.residue
            best_ball = [alpha]
            for s in range(m - 1, -1, -1):
                spacing = p ** s
                ball = [(alpha + j * spacing) % pm for j in range(p ** (m - s))]
                if all(self.poly.eval_mod(r, pm) == 0 for r in ball):
                    best_ball = ball
                else:
                    break
            out.update(best_ball)
        return sorted(out)

    def to_json(self) -> dict:
        return {
            "poly": str(self.poly),
            "p": self.ctx.p,
            "m": self.ctx.m,
            "roots": [r.residue for r in self.roots],
            "deriv_valuations": list(self.deriv_valuations),
            "unresolved": list(self.unresolved),
            "complete_in_Zp": self.complete_in_Zp,
        }


def zp_roots(poly: IntPoly, ctx: PrimeContext) -> RootSet:
    """All Z_p roots of P at precision m by branch-and-lift.

    Residue classes r mod p^k with P(r) = 0 mod p^k are refined level by
    level; as soon as a branch satisfies the simple-root criterion
    (min(v(P(r)), m) > 2 v(P'(r)) and branch depth k > v(P'(r))) it is
    handed to Hensel lifting, which confirms the unique root in that
    class.  Branches alive at depth m are reported unresolved.
    """
    p, m = ctx.p, ctx.m
    dpoly = derivative(poly) if poly.degree >= 1 else None
    confirmed: dict[int, int] = {}
    unresolved: list[int] = []
    frontier: list[tuple[int, int]] = [(0, 0)]
    while frontier:
        r, k = frontier.pop()
        if k == m:
            unresolved.append(r)
            continue
        a = poly.eval_int(r)
        va = _vp_or_none(a, p)
        va_eff = m if va is None else min(va, m)
        b = dpoly.eval_int(r) if dpoly is not None else 0
        vb = _vp_or_none(b, p)
        if vb is not None and va_eff > 2 * vb and k > vb:
            alpha = hensel_lift(poly, make_padic(r, ctx))
            confirmed.setdefault(alpha.residue, vb)
            continue
        pk1 = p ** (k + 1)
        base = p ** k
        for t in range(p):
            cand = r + t * base
            if poly.eval_mod(cand, pk1) == 0:
                frontier.append((cand, k + 1))
    ordered = sorted(confirmed)
    return RootSet(
        poly=poly,
        ctx=ctx,
        roots=tuple(make_padic(r, ctx) for r in ordered),
        deriv_valuations=tuple(confirmed[r] for r in ordered),
        unresolved=tuple(sorted(unresolved)),
        complete_in_Zp=not unresolved,
    )


# -- nearest root and the Lemma-style diagnostics -----------------------------


def nearest_root(poly: IntPoly, omega: PadicInt) -> tuple[PadicInt, Valuation]:
    """The Z_p root nearest to omega and the distance valuation.

    Ties are broken toward the smallest canonical residue, which makes
    fixtures reproducible (any choice is mathematically admissible).
    Raises NoRootInZp when the root set is empty and UnresolvedBranchError
    when possible multiple roots make "nearest" uncertifiable.
    """
    rs = zp_roots(poly, omega.ctx)
    if not rs.complete_in_Zp:
        raise UnresolvedBranchError(
            f"{poly} has unresolved branches at precision {omega.ctx.m}"
        )
    if not rs.roots:
        raise NoRootInZp(f"{poly} has no roots in Z_p at precision {omega.ctx.m}")
    best: PadicInt | None = None
    best_v = -1
    for root in rs.roots:  # ascending residue order; strict > keeps the smallest
        v = (omega - root).valuation().exponent
        if v > best_v:
            best, best_v = root, v
    d = (omega - best).valuation()
    return best, d


@dataclass(frozen=True)
class Lemma4Record:
    """One checked instance of the nearest-root distance bound
    |omega - alpha|_p <= |P(omega)|_p / |P'(alpha)|_p."""

    poly: IntPoly
    omega: PadicInt
    alpha: PadicInt
    lhs: Valuation
    value_valuation: int | None  # v_p(P(omega)) exact, None = infinite
    deriv_valuation: int
    holds: bool

    def to_json(self) -> dict:
        p = self.omega.ctx.p
        va = self.value_valuation
        rhs = ("0" if va is None
               else f"{p}^{-(va - self.deriv_valuation)}")
        return {
            "poly": str(self.poly),
            "omega": str(self.omega),
            "lhs_val": str(self.lhs),
            "rhs_val": rhs,
            "holds": self.holds,
        }


def lemma4_check(poly: IntPoly, omega: PadicInt) -> Lemma4Record:
    """Evaluate both sides of the nearest-root bound at precision m.

    ``holds`` is True only when the inequality is certified; undecidable
    configurations raise PrecisionExhausted.  A False return is a
    build-stopping defect by contract.
    """
    ctx = omega.ctx
    p, m = ctx.p, ctx.m
    alpha, lhs = nearest_root(poly, omega)
    dval = derivative(poly).eval_int(alpha.residue)
    vd = _vp_or_none(dval, p)
    if vd is None or vd >= m:
        raise PrecisionExhausted("|P'(alpha)|_p saturated; bound unresolvable")
    value = poly.eval_int(omega.residue)
    va = _vp_or_none(value, p)
    if va is None:
        # omega is an exact integer root; alpha is its own residue and the
        # true distance is 0, below any resolution.
        holds = (not lhs.is_exact) and alpha.residue == omega.residue
        return Lemma4Record(poly, omega, alpha, lhs, None, vd, holds)
    need = va - vd  # rhs norm is p^-(va - vd)
    if lhs.is_exact:
        holds = lhs.exponent >= need
    else:
        holds = m >= need
        if not holds:
            raise PrecisionExhausted(
                "distance saturated but the bound needs more digits"
            )
    return Lemma4Record(poly, omega, alpha, lhs, va, vd, holds)


def root_size_check(poly: IntPoly, ctx: PrimeContext) -> bool:
    """Leading polynomials have all roots of norm < p^n.

    For Z_p roots this is automatic (|alpha|_p <= 1 < p^n for n >= 1); the
    check guards the data model and documents the restriction to Q_p.
    """
    if not is_leading(poly, ctx):
        raise ValueError("root_size_check requires a leading polynomial")
    rs = zp_roots(poly, ctx)
    # every residue has |alpha|_p <= 1 and 1 < p^n since is_leading forces
    # n >= 1, so the bound can only hold; vacuously true without roots
    return all(rt.valuation().exponent >= 0 for rt in rs.roots)


# -- separation profiles -------------------------------------------------------


@dataclass(frozen=True)
class RootSeparationProfile:
    """Discretized pairwise root distances relative to a base root.

    rho[j] solves |alpha_1 - alpha_j|_p = H^(-rho_j) for the visible
    (Z_p) roots, sorted non-increasing; l[j] is the integer bracket index
    with (l_j - 1)/T <= rho_j < l_j/T; r[j] = (l_(j+1) + ... + l_n)/T.
    Invisible roots (outside Z_p) carry rho = l = 0, a documented
    restriction of the profile to the Q_p-visible part.
    """

    poly: IntPoly
    base_root: PadicInt
    grid_T: int
    eps1: Fraction
    rho: tuple[object, ...]   # Fraction when H is a power of p, else float
    l: tuple[int, ...]
    r: tuple[Fraction, ...]
    visible_roots: int

    def to_json(self) -> dict:
        return {
            "poly": str(self.poly),
            "base_root": self.base_root.residue,
            "T": self.grid_T,
            "eps1": str(self.eps1),
            "rho": [str(x) for x in self.rho],
            "l": list(self.l),
            "r": [str(x) for x in self.r],
            "visible_roots": self.visible_roots,
        }


def separation_profile(
    poly: IntPoly, eps: Fraction, d: int, ctx: PrimeContext
) -> RootSeparationProfile:
    """Compute the (rho_j, l_j, r_j) profile over Z_p-visible root pairs.

    T = floor(1/eps1) + 1 with eps1 = eps/d.  rho_j is exact (a Fraction)
    whenever H(P) is a power of p; otherwise it is evaluated in floating
    point and the half-open bracket is resolved toward the lower l_j.
    """
    if poly.height < 2:
        raise ProfileUnavailable("profiles need H(P) >= 2")
    eps = Fraction(eps)
    if eps <= 0 or d <= 0:
        raise ValueError("eps and d must be positive")
    rs = zp_roots(poly, ctx)
    if not rs.complete_in_Zp:
        raise UnresolvedBranchError(f"{poly} has unresolved branches")
    if len(rs.roots) < 2:
        raise ProfileUnavailable("fewer than 2 roots in Z_p")
    eps1 = eps / d
    grid_T = int(1 / eps1) + 1
    p = ctx.p
    h = poly.height
    alpha1 = rs.roots[0]
    vals = sorted(
        ((alpha1 - rt).valuation().exponent for rt in rs.roots[1:]),
        reverse=True,
    )
    # exact exponent: p^-v = H^-rho  =>  rho = v * log_p(H)^-1
    e = _exact_log(h, p)
    rho: list[object] = []
    l: list[int] = []
    for v in vals:
        if e is not None:
            rho_j: object = Fraction(v, e)
            l_j = math.floor(Fraction(v, e) * grid_T) + 1
        else:
            rho_j = v * math.log(p) / math.log(h)
            l_j = math.floor(rho_j * grid_T) + 1
        rho.append(rho_j)
        l.append(l_j)
    n = poly.degree
    while len(l) < n - 1:  # invisible roots: rho = l = 0 by convention
        rho.append(Fraction(0))
        l.append(0)
    # l holds (l_2, ..., l_n); r_j = (l_(j+1) + ... + l_n)/T for j = 1..n-1
    r = tuple(Fraction(sum(l[j - 1:]), grid_T) for j in range(1, n))
    return RootSeparationProfile(
        poly=poly,
        base_root=alpha1,
        grid_T=grid_T,
        eps1=eps1,
        rho=tuple(rho),
        l=tuple(l),
        r=r,
        visible_roots=len(rs.roots),
    )


def _exact_log(h: int, p: int) -> int | None:
    """e with p^e = h, or None if h is not a power of p."""
    e = 0
    x = 1
    while x < h:
        x *= p
        e += 1
    return e if x == h else None


@dataclass(frozen=True)
class Lemma5Record:
    """Reported (not asserted) comparison of |P'(alpha_1)|_p against
    H^-r1: the two-sided bound holds up to implicit constants, so only
    the ratio is meaningful."""

    poly: IntPoly
    r1: Fraction
    deriv_valuation: int
    lower_bound: float       # H^-r1
    upper_bound: float       # H^(-r1 + (m_idx - 1) eps1)
    deriv_norm: float        # p^-v(P'(alpha_1))
    ratio: float             # deriv_norm / lower_bound

    def to_json(self) -> dict:
        return {
            "poly": str(self.poly),
            "r1": str(self.r1),
            "deriv_valuation": self.deriv_valuation,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "deriv_norm": self.deriv_norm,
            "ratio": self.ratio,
        }


def lemma5_check(
    poly: IntPoly, profile: RootSeparationProfile, ctx: PrimeContext
) -> Lemma5Record:
    """Derivative-size diagnostic at the profile's base root."""
    if not is_leading(poly, ctx):
        raise ValueError("lemma5_check requires a leading polynomial")
    n = poly.degree
    r1 = profile.r[0] if profile.r else Fraction(0)
    dval = derivative(poly).eval_int(profile.base_root.residue)
    vd = int_valuation(dval, ctx.p) if dval != 0 else ctx.m
    h = poly.height
    m_idx = profile.visible_roots
    lower = float(h) ** (-float(r1))
    upper = float(h) ** (-float(r1) + (m_idx - 1) * float(profile.eps1))
    dnorm = float(ctx.p) ** (-vd)
    return Lemma5Record(
        poly=poly,
        r1=r1,
        deriv_valuation=vd,
        lower_bound=lower,
        upper_bound=upper,
        deriv_norm=dnorm,
        ratio=dnorm / lower,
    )
