"""Exact Haar measures of polynomial solution sets, and the approximation
function machinery.

Measures are exact rationals obtained by full residue-class enumeration:
by evaluation locality, whether |P(omega)|_p <= p^-k holds depends only on
omega mod p^k, so counting classes is not an approximation.  Threshold
convention: a rational threshold theta is rounded down to the norm scale,
i.e. the solution set is {v_p(P(omega)) >= k} for the largest p^-k <= theta.

The approximation function Psi lives here too: power and power-log
families with an analytic convergence verdict for the tail sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .errors import MemoryCapExceeded, PrecisionExhausted
from .padic import (
    PrimeContext,
    floor_threshold_exponent,
    int_valuation,
    make_padic,
)
from .polyzx import IntPoly, derivative, solutions_mod_prime_power
from .roots import zp_roots
from .algnum import Disc

RESIDUE_CAP = 1 << 26  # hard rail on the number of residue classes scanned


def fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MeasureEstimate:
    """An exact rational Haar measure computed at a finite resolution.

    When ``exact`` is True the value is the true measure of the set, not
    an approximation: refining the resolution cannot change it.  ``exact``
    is False only when some defining condition could not be decided at
    the resolution (the undecidable classes are counted in metadata).
    """

    value: Fraction
    resolution_exp: int
    exact: bool
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "value": fraction_str(self.value),
            "decimal": float(self.value),
            "resolution_exp": self.resolution_exp,
            "exact": self.exact,
            "metadata": dict(self.metadata),
        }


def _check_cap(p: int, k: int) -> None:
    if p ** k > RESIDUE_CAP:
        raise MemoryCapExceeded(
            f"residue scan at p^{k} exceeds the 2^26 class cap"
        )


def solution_measure(
    poly: IntPoly, k_theta: int, disc: Disc, ctx: PrimeContext
) -> MeasureEstimate:
    """mu{omega in disc : v_p(P(omega)) >= k_theta}, exactly.

    Counts residue classes mod p^k_theta on which P vanishes mod
    p^k_theta (solution sets of the threshold p^-k_theta under the
    rounding convention above), intersected with the disc.
    """
    p, m = ctx.p, ctx.m
    if k_theta > m:
        raise PrecisionExhausted(f"k_theta = {k_theta} exceeds precision m = {m}")
    if k_theta < 0:
        raise ValueError("k_theta must be >= 0")
    _check_cap(p, k_theta)
    kd = disc.radius_exp
    sols = solutions_mod_prime_power(poly, p, k_theta)
    if kd <= k_theta:
        pk = p ** kd
        want = disc.center.residue % pk
        count = sum(1 for r in sols if r % pk == want)
        value = Fraction(count, p ** k_theta)
        res = k_theta
    else:
        # disc is finer than the threshold resolution: the disc either
        # lies inside a solution class or misses them all
        pk = p ** k_theta
        inside = disc.center.residue % pk in set(sols)
        value = disc.measure if inside else Fraction(0)
        res = kd
    return MeasureEstimate(value, res, True, {"poly": str(poly)})


def solution_measure_scan(
    poly: IntPoly, k_theta: int, disc: Disc, ctx: PrimeContext, resolution: int
) -> MeasureEstimate:
    """Independent brute-force recount of solution_measure at a chosen
    resolution >= max(k_theta, disc exponent); used as the second route
    in refinement-invariance checks."""
    p, m = ctx.p, ctx.m
    if k_theta > m or resolution > m:
        raise PrecisionExhausted("resolution beyond working precision")
    if resolution < max(k_theta, disc.radius_exp):
        raise ValueError("resolution must refine both the threshold and the disc")
    _check_cap(p, resolution)
    pr = p ** resolution
    pk = p ** k_theta
    count = 0
    for r in range(pr):
        if disc.contains_residue(r) and poly.eval_mod(r, pk) == 0:
            count += 1
    return MeasureEstimate(Fraction(count, pr), resolution, True, {"route": "scan"})


# -- unions over polynomial families ------------------------------------------


def _family_half(n: int, q: int):
    """Nonzero coefficient tuples (a_0..a_n), deg <= n, H <= Q, one per
    sign-pair: the first nonzero coefficient from the top is positive.
    P and -P carry identical solution sets, so half the box suffices."""
    rng = range(-q, q + 1)
    for tup in product(rng, repeat=n + 1):  # (a_n, ..., a_0)
        lead = next((c for c in tup if c != 0), 0)
        if lead <= 0:
            continue
        yield tuple(reversed(tup))


def union_measure_E(
    delta: Fraction, Q: int, n: int, disc: Disc, ctx: PrimeContext
) -> MeasureEstimate:
    """Exact measure of the union over all nonzero P (deg <= n, H <= Q) of
    {omega in disc : |P(omega)|_p below delta Q^(-n-1)}.

    The threshold is rounded down to the norm scale (largest p^-k <= the
    rational threshold) and applied as {v_p(P(omega)) >= k}; residue
    classes mod p^k are marked in one bitset pass per polynomial.
    """
    p, m = ctx.p, ctx.m
    if Q < 1:
        raise ValueError("Q must be >= 1")
    delta = Fraction(delta)
    theta = delta * Fraction(1, Q ** (n + 1))
    k = floor_threshold_exponent(theta, p)
    if k > m:
        raise PrecisionExhausted(f"threshold exponent {k} exceeds precision {m}")
    _check_cap(p, k)
    pk = p ** k
    marked = bytearray(pk)
    for coeffs in _family_half(n, Q):
        for r in solutions_mod_prime_power(IntPoly(coeffs), p, k):
            marked[r] = 1
    kd = disc.radius_exp
    if kd <= k:
        pkd = p ** kd
        want = disc.center.residue % pkd
        count = sum(1 for r in range(pk) if marked[r] and r % pkd == want)
        value = Fraction(count, pk)
        res = k
    else:
        inside = marked[disc.center.residue % pk] == 1
        value = disc.measure if inside else Fraction(0)
        res = kd
    return MeasureEstimate(
        value, res, True, {"k_theta": k, "n": n, "Q": Q, "delta": fraction_str(delta)}
    )


def e1_measure(
    delta: Fraction,
    Q: int,
    xi: Fraction,
    n: int,
    disc: Disc,
    ctx: PrimeContext,
) -> MeasureEstimate:
    """Exact measure of the two-condition set: some nonzero P (deg <= n,
    H <= Q) has |P(omega)|_p below delta Q^(-n-1) AND the derivative at
    the root of P nearest omega satisfies |P'(alpha)|_p >= H(P)^(-xi).

    Pairs (omega-class, P) where P has no Z_p root contribute nothing and
    are tallied in metadata; classes where the nearest-root choice is not
    constant over the class are undecidable at this resolution, excluded,
    and tallied (exact=False if any occurred).
    """
    p, m = ctx.p, ctx.m
    delta = Fraction(delta)
    xi = Fraction(xi)
    if xi < 0:
        raise ValueError("xi must be >= 0")
    theta = delta * Fraction(1, Q ** (n + 1))
    k = floor_threshold_exponent(theta, p)
    if k > m:
        raise PrecisionExhausted(f"threshold exponent {k} exceeds precision {m}")
    _check_cap(p, k)
    pk = p ** k
    marked = bytearray(pk)
    no_root_pairs = 0
    undecided: set[int] = set()
    for coeffs in _family_half(n, Q):
        poly = IntPoly(coeffs)
        sols = solutions_mod_prime_power(poly, p, k)
        if not sols:
            continue
        rs = zp_roots(poly, ctx)
        if not rs.complete_in_Zp:
            undecided.update(sols)
            continue
        if not rs.roots:
            no_root_pairs += len(sols)
            continue
        h = poly.height
        dpoly = derivative(poly) if poly.degree >= 1 else None
        for r in sols:
            if marked[r]:
                continue
            alpha, ok = _nearest_root_on_class(rs, r, k, m)
            if not ok:
                undecided.add(r)
                continue
            dv = dpoly.eval_int(alpha) if dpoly is not None else 0
            if dv == 0:
                continue  # P' vanishes at the residue: condition exactly false
            vd = int_valuation(dv, p)
            # |P'(alpha)|_p >= H^-xi  <=>  p^(vd * xi_den) <= H^xi_num
            if p ** (vd * xi.denominator) <= h ** xi.numerator:
                marked[r] = 1
    kd = disc.radius_exp
    # a class is genuinely undecided only if nothing else certified it
    pending = sum(1 for r in undecided if not marked[r])
    meta = {
        "no_root_pairs": no_root_pairs,
        "unresolved_classes": pending,
        "k_theta": k,
        "xi": fraction_str(xi),
    }
    if kd <= k:
        pkd = p ** kd
        want = disc.center.residue % pkd
        count = sum(1 for r in range(pk) if marked[r] and r % pkd == want)
        value = Fraction(count, pk)
        res = k
    else:
        inside = marked[disc.center.residue % pk] == 1
        value = disc.measure if inside else Fraction(0)
        res = kd
    return MeasureEstimate(value, res, pending == 0, meta)


def _nearest_root_on_class(rs, class_residue: int, k: int, m: int):
    """Nearest confirmed root for every omega in a class mod p^k, if the
    choice is constant over the class.  Returns (root_residue, ok)."""
    p = rs.ctx.p
    dists = []
    for root in rs.roots:
        diff = (class_residue - root.residue) % rs.ctx.pm
        v = m if diff == 0 else int_valuation(diff, p)
        dists.append((min(v, k), root.residue))
    dists.sort(key=lambda t: (-t[0], t[1]))
    best_v, best_r = dists[0]
    if best_v >= k and len(dists) > 1 and dists[1][0] >= k:
        return best_r, False  # two roots inside the class: choice varies
    return best_r, True


# -- approximation functions -----------------------------------------------------


@dataclass(frozen=True)
class PsiModel:
    """A monotone approximation function from the power / power-log family.

    Power(s):      Psi(h) = h^s               (s < 0, exact rationals)
    PowerLog(s,q): Psi(h) = h^s (ln h)^(-q)   (floating point)

    With this convention the borderline s = -1 series converges exactly
    when q > 1 (e.g. 'powlog:-1:1.1' converges, 'powlog:-1:1' diverges).
    Psi(1) is defined as Psi(2): sums start at h = 1 but the log factor
    degenerates there, and the convention cannot change any verdict.
    """

    family: str
    s: Fraction
    q: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        if self.family not in ("pow", "powlog"):
            raise ValueError("family must be 'pow' or 'powlog'")
        object.__setattr__(self, "s", Fraction(self.s))
        object.__setattr__(self, "q", Fraction(self.q))
        if self.s >= 0:
            raise ValueError("the exponent s must be negative")

    @classmethod
    def power(cls, s) -> "PsiModel":
        return cls("pow", Fraction(s))

    @classmethod
    def power_log(cls, s, q) -> "PsiModel":
        return cls("powlog", Fraction(s), Fraction(q))

    @classmethod
    def parse(cls, spec: str) -> "PsiModel":
        """Parse 'pow:-2' or 'powlog:-1:1.1' (exponents as int/float/frac)."""
        parts = spec.split(":")
        if parts[0] == "pow" and len(parts) == 2:
            return cls.power(_parse_number(parts[1]))
        if parts[0] == "powlog" and len(parts) == 3:
            return cls.power_log(_parse_number(parts[1]), _parse_number(parts[2]))
        raise ValueError(f"bad psi spec {spec!r}; want pow:S or powlog:S:Q")

    @property
    def spec_string(self) -> str:
        if self.family == "pow":
            return f"pow:{self.s}"
        return f"powlog:{self.s}:{self.q}"

    def is_exact(self) -> bool:
        return self.family == "pow" and self.s.denominator == 1

    def value(self, h: int):
        """Psi(h): a Fraction for integer-exponent power families, else float."""
        if h < 1:
            raise ValueError("Psi is evaluated at integers h >= 1")
        if h == 1:
            return self.value(2)
        if self.is_exact():
            return Fraction(1, h ** (-self.s.numerator))
        base = float(h) ** float(self.s)
        if self.family == "powlog":
            base *= math.log(h) ** (-float(self.q))
        return base

    def value_fraction(self, h: int) -> Fraction:
        """Psi(h) as an exact Fraction; float-valued families are pinned to
        the exact rational value of their float (documented determinism)."""
        v = self.value(h)
        return v if isinstance(v, Fraction) else Fraction(v)

    def is_convergent(self) -> bool:
        """Analytic verdict for the series sum of Psi(h)."""
        if self.s < -1:
            return True
        if self.s > -1:
            return False
        if self.family == "pow":
            return False  # harmonic
        return self.q > 1  # sum 1/(h (ln h)^q) converges iff q > 1

    def check_monotone(self, h_lo: int, h_hi: int) -> bool:
        """Psi non-increasing on the evaluated grid."""
        prev = None
        for h in range(max(h_lo, 1), h_hi + 1):
            v = self.value(h)
            if prev is not None and v > prev:
                return False
            prev = v
        return True


def _parse_number(tok: str) -> Fraction:
    tok = tok.strip()
    if "/" in tok:
        return Fraction(tok)
    if "." in tok or "e" in tok or "E" in tok:
        return Fraction(float(tok))
    return Fraction(int(tok))


@dataclass(frozen=True)
class TailSum:
    """Partial sums of Psi over a height window, the dyadic transform
    partials, and the analytic convergence verdict."""

    psi: PsiModel
    h_lo: int
    h_hi: int
    partial_sum: object           # Fraction or float
    dyadic_partials: tuple        # partial sums of 2^t Psi(2^t)
    verdict: str                  # "Convergent" | "Divergent"

    def to_json(self) -> dict:
        ps = self.partial_sum
        return {
            "psi": self.psi.spec_string,
            "h_lo": self.h_lo,
            "h_hi": self.h_hi,
            "partial_sum": fraction_str(ps) if isinstance(ps, Fraction) else ps,
            "partial_sum_decimal": float(ps),
            "dyadic_partials": [float(x) for x in self.dyadic_partials],
            "verdict": self.verdict,
        }


def tail_sum(psi: PsiModel, h_lo: int, h_hi: int) -> TailSum:
    """Sum Psi(h) for h in [h_lo, h_hi] plus the dyadic-transform partials
    sum 2^t Psi(2^t); the verdict comes from the family parameters, not
    from the finite window."""
    if h_lo < 1 or h_hi < h_lo:
        raise ValueError("need 1 <= h_lo <= h_hi")
    exact = psi.is_exact()
    total = Fraction(0) if exact else 0.0
    for h in range(h_lo, h_hi + 1):
        total += psi.value(h)
    dyadic = []
    acc = Fraction(0) if exact else 0.0
    t = 0
    while 2 ** t <= h_hi:
        acc += (2 ** t) * psi.value(2 ** t)
        dyadic.append(acc)
        t += 1
    verdict = "Convergent" if psi.is_convergent() else "Divergent"
    return TailSum(psi, h_lo, h_hi, total, tuple(dyadic), verdict)
