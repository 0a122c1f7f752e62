"""Desk-scale empirical harness for the convergence/divergence dichotomy.

Counts, for seeded Haar-uniform sample points, how many polynomials (or
algebraic numbers) of height up to a grid of cutoffs satisfy the defining
approximation inequality.  Nothing here claims anything about the limsup
sets themselves; the reports carry shape statistics (increment decay,
log-slope) whose thresholds are declared engineering choices.

Strict thresholds: a solution at height h must satisfy
v_p(value) >= K(h) with K(h) = min{k : p^-k < h^-n Psi(h)}, the exact
translation of the strict norm inequality.  Trials therefore require
K(h) <= m for every height in range and raise PrecisionExhausted
otherwise; the report generator instead elevates its working precision,
which refines - and cannot bias - Haar-uniform sampling.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CommonFactorError, PrecisionExhausted
from .padic import (
    PadicInt,
    PrimeContext,
    int_valuation,
    make_padic,
    strict_threshold_exponent,
)
from .polyzx import IntPoly, PolyFilter, enumerate_polys, resultant
from .algnum import AlgebraicNumber, Disc, count_by_height, enumerate_algebraic
from .measure import PsiModel, fraction_str

RNG_ALGORITHM = "cpython-random-mt19937"


def _threshold_exponents(psi: PsiModel, n: int, hmax: int, p: int) -> list[int]:
    """K(h) for h = 1..hmax (index h-1)."""
    out = []
    for h in range(1, hmax + 1):
        theta = psi.value_fraction(h) * Fraction(1, h ** n)
        out.append(strict_threshold_exponent(theta, p))
    return out


# -- single trials -----------------------------------------------------------


def dichotomy_trial(
    omega: PadicInt, psi: PsiModel, n: int, hmax: int
) -> list[IntPoly]:
    """All nonzero P with deg <= n, H(P) <= hmax satisfying the strict
    height-scaled inequality at omega; exact filtered enumeration."""
    ctx = omega.ctx
    ks = _threshold_exponents(psi, n, hmax, ctx.p)
    if max(ks) > ctx.m:
        raise PrecisionExhausted(
            f"threshold at height <= {hmax} needs v >= {max(ks)} > m = {ctx.m}"
        )
    out = []
    for poly in enumerate_polys(n, PolyFilter(height_max=hmax)):
        k = ks[poly.height - 1]
        if poly.eval_mod(omega.residue, ctx.p ** k) == 0:
            out.append(poly)
    return out


def thm2_trial(
    omega: PadicInt, psi: PsiModel, n: int, hmax: int
) -> list[AlgebraicNumber]:
    """All alpha in A_(p,n) with H(alpha) <= hmax and
    |omega - alpha|_p below the strict height-scaled threshold."""
    ctx = omega.ctx
    ks = _threshold_exponents(psi, n, hmax, ctx.p)
    if max(ks) > ctx.m:
        raise PrecisionExhausted(
            f"threshold at height <= {hmax} needs v >= {max(ks)} > m = {ctx.m}"
        )
    out = []
    for alpha in enumerate_algebraic(n, hmax, Disc.full(ctx), ctx):
        k = ks[alpha.height - 1]
        if (omega.residue - alpha.root.residue) % ctx.p ** k == 0:
            out.append(alpha)
    return out


def chi_measure_partial_sums(
    psi: PsiModel, n: int, hmax: int, ctx: PrimeContext
) -> tuple[list[Fraction], list[Fraction]]:
    """Convergence-side mass: partial sums over h <= hmax of
    sum_(H(alpha)=h) mu{omega : |omega - alpha|_p < h^-n Psi(h)}
    against the partial sums of Psi(h)."""
    mass: list[Fraction] = []
    psis: list[Fraction] = []
    acc = Fraction(0)
    accp = Fraction(0)
    for h in range(1, hmax + 1):
        k = strict_threshold_exponent(
            psi.value_fraction(h) * Fraction(1, h ** n), ctx.p
        )
        cnt = count_by_height(n, h, ctx)
        acc += cnt * Fraction(1, ctx.p ** k)
        accp += psi.value_fraction(h)
        mass.append(acc)
        psis.append(accp)
    return mass, psis


# -- fast exact counting for reports --------------------------------------------


def _a0_count_for_targets(t, x: int, pk: int):
    """Vectorized #{a_0 in [-x, x] : a_0 = -t mod pk} for an array of
    partial sums t.  Offsets o = (x - t) mod pk place the first admissible
    a_0 at -x + o; the rest follow at spacing pk."""
    o = (x - t) % pk
    return np.where(o <= 2 * x, (2 * x - o) // pk + 1, 0)


def _count_congruent_box(x: int, k_exp: int, weights: list[int], p: int) -> int:
    """#{(a_0..a_n) in [-x, x]^(n+1) : sum a_j w_j = 0 mod p^k}, the zero
    tuple included.  w_0 = 1 always, so a_0 is pinned mod p^k by the other
    coefficients and counted in closed form; the sweep over (a_1, a_2) is
    vectorized and any higher coefficients are exhausted in python loops.
    """
    npow = len(weights) - 1
    if x == 0:
        return 1
    if k_exp == 0:
        return (2 * x + 1) ** (npow + 1)
    pk = p ** k_exp
    ws = [w % pk for w in weights]
    if pk > (1 << 40):  # keep the int64 arithmetic safely below overflow
        return _count_congruent_box_slow(x, pk, ws)
    a = np.arange(-x, x + 1, dtype=np.int64)
    if npow == 0:
        return int(_a0_count_for_targets(np.zeros(1, dtype=np.int64), x, pk)[0])
    if npow == 1:
        t = (a * ws[1]) % pk
        return int(_a0_count_for_targets(t, x, pk).sum())
    base = (a[:, None] * ws[2] + a[None, :] * ws[1]) % pk  # rows a_2, cols a_1
    if npow == 2:
        return int(_a0_count_for_targets(base, x, pk).sum())
    total = 0
    rest = ws[3:]

    def rec(idx: int, acc: int) -> None:
        nonlocal total
        if idx == len(rest):
            t = (base + acc) % pk
            total += int(_a0_count_for_targets(t, x, pk).sum())
            return
        for coeff in range(-x, x + 1):
            rec(idx + 1, (acc + coeff * rest[idx]) % pk)

    rec(0, 0)
    return total


def _count_congruent_box_slow(x: int, pk: int, ws: list[int]) -> int:
    """Arbitrary-precision fallback for very deep moduli."""
    from itertools import product as _product

    total = 0
    for tup in _product(range(-x, x + 1), repeat=len(ws) - 1):  # (a_1..a_n)
        t = sum(c * w for c, w in zip(tup, ws[1:])) % pk
        o = (x - t) % pk
        if o <= 2 * x:
            total += (2 * x - o) // pk + 1
    return total


def count_solutions_fast(
    omega_residue: int, psi: PsiModel, n: int, cutoff: int, p: int, ks: list[int]
) -> int:
    """Exact count of nonzero solutions P (deg <= n, H(P) <= cutoff) of the
    dichotomy inequality at a sample point, without enumerating polynomials.

    Heights are grouped into runs where the threshold exponent K(h) is
    constant; on each run the count telescopes to two box counts of a
    linear congruence in the coefficients.  The zero tuple cancels between
    the two box counts of every run, so no correction is needed.
    """
    total = 0
    h = 1
    while h <= cutoff:
        k = ks[h - 1]
        hi = h
        while hi + 1 <= cutoff and ks[hi] == k:
            hi += 1
        pk = p ** k
        weights = [pow(omega_residue, j, pk) for j in range(n + 1)]
        total += _count_congruent_box(hi, k, weights, p)
        total -= _count_congruent_box(h - 1, k, weights, p)
        h = hi + 1
    return total


# -- reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class DichotomyReport:
    """Per-sample solution counts along a height grid, with shape stats."""

    psi: PsiModel
    n: int
    p: int
    m: int
    precision_used: int
    h_grid: tuple[int, ...]
    seed: int
    samples: tuple[int, ...]              # sampled residues mod p^precision_used
    per_omega_counts: tuple[tuple[int, ...], ...]
    mean_curve: tuple[Fraction, ...]
    mean_increments: tuple[Fraction, ...]
    log_slope: float

    def to_json(self) -> dict:
        return {
            "psi": self.psi.spec_string,
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "precision_used": self.precision_used,
            "h_grid": list(self.h_grid),
            "seed": self.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "num_samples": len(self.samples),
            "mean_curve": [fraction_str(x) for x in self.mean_curve],
            "mean_curve_decimal": [float(x) for x in self.mean_curve],
            "mean_increments": [fraction_str(x) for x in self.mean_increments],
            "log_slope": self.log_slope,
            "per_omega_counts": [list(row) for row in self.per_omega_counts],
            "thresholds_note": (
                "shape thresholds are engineering choices; finite-height "
                "counts prove nothing about the limsup sets"
            ),
        }

    def sample_lines(self) -> list[str]:
        """JSON lines, one sample per line."""
        out = []
        for i, (res, row) in enumerate(zip(self.samples, self.per_omega_counts)):
            out.append(json.dumps(
                {"index": i, "omega_residue": res, "counts": list(row)},
                sort_keys=True,
            ))
        return out

    def mean_curve_csv(self) -> str:
        lines = ["h,mean_count"]
        for h, v in zip(self.h_grid, self.mean_curve):
            lines.append(f"{h},{float(v)}")
        return "\n".join(lines) + "\n"


def _fit_log_slope(h_grid, means) -> float:
    """Least-squares slope of mean count against ln h."""
    xs = [math.log(h) for h in h_grid]
    ys = [float(v) for v in means]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    denom = sum((x - mx) ** 2 for x in xs)
    if denom == 0:
        return 0.0
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom


def dichotomy_report(
    num_samples: int,
    seed: int,
    psi: PsiModel,
    n: int,
    h_grid: list[int],
    ctx: PrimeContext,
) -> DichotomyReport:
    """Sample seeded Haar-uniform points and count their solutions at each
    grid cutoff, exactly.

    If the strict thresholds need more digits than ctx.m, the working
    precision is elevated for sampling and evaluation (recorded in the
    report); uniform residues mod p^m' refine uniform residues mod p^m,
    so the sampling law is unchanged.
    """
    if any(b <= a for a, b in zip(h_grid, h_grid[1:])) or not h_grid:
        raise ValueError("h_grid must be strictly increasing and nonempty")
    if not psi.check_monotone(1, h_grid[-1]):
        raise ValueError("psi is not monotone non-increasing on the grid")
    hmax = h_grid[-1]
    ks = _threshold_exponents(psi, n, hmax, ctx.p)
    precision_used = max(ctx.m, max(ks))
    pmu = ctx.p ** precision_used
    rng = random.Random(seed)
    samples = tuple(rng.randrange(pmu) for _ in range(num_samples))
    counts = []
    for res in samples:
        row = tuple(
            count_solutions_fast(res, psi, n, cutoff, ctx.p, ks)
            for cutoff in h_grid
        )
        counts.append(row)
    means = tuple(
        Fraction(sum(row[j] for row in counts), num_samples)
        for j in range(len(h_grid))
    )
    incs = tuple(b - a for a, b in zip(means, means[1:]))
    return DichotomyReport(
        psi=psi,
        n=n,
        p=ctx.p,
        m=ctx.m,
        precision_used=precision_used,
        h_grid=tuple(h_grid),
        seed=seed,
        samples=samples,
        per_omega_counts=tuple(counts),
        mean_curve=means,
        mean_increments=incs,
        log_slope=_fit_log_slope(h_grid, means),
    )


@dataclass(frozen=True)
class Thm2Report:
    """Same shape as DichotomyReport, counting algebraic-number solutions."""

    psi: PsiModel
    n: int
    p: int
    m: int
    precision_used: int
    h_grid: tuple[int, ...]
    seed: int
    samples: tuple[int, ...]
    per_omega_counts: tuple[tuple[int, ...], ...]
    mean_curve: tuple[Fraction, ...]
    log_slope: float

    def to_json(self) -> dict:
        return {
            "psi": self.psi.spec_string,
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "precision_used": self.precision_used,
            "h_grid": list(self.h_grid),
            "seed": self.seed,
            "rng_algorithm": RNG_ALGORITHM,
            "num_samples": len(self.samples),
            "mean_curve": [fraction_str(x) for x in self.mean_curve],
            "mean_curve_decimal": [float(x) for x in self.mean_curve],
            "log_slope": self.log_slope,
            "per_omega_counts": [list(row) for row in self.per_omega_counts],
        }

    def sample_lines(self) -> list[str]:
        out = []
        for i, (res, row) in enumerate(zip(self.samples, self.per_omega_counts)):
            out.append(json.dumps(
                {"index": i, "omega_residue": res, "counts": list(row)},
                sort_keys=True,
            ))
        return out

    def mean_curve_csv(self) -> str:
        lines = ["h,mean_count"]
        for h, v in zip(self.h_grid, self.mean_curve):
            lines.append(f"{h},{float(v)}")
        return "\n".join(lines) + "\n"


def thm2_report(
    num_samples: int,
    seed: int,
    psi: PsiModel,
    n: int,
    h_grid: list[int],
    ctx: PrimeContext,
) -> Thm2Report:
    """Seeded sampling harness over enumerated algebraic numbers.

    The candidate set is enumerated once (heights up to the grid maximum)
    and shared across samples; counts per sample are exact."""
    if any(b <= a for a, b in zip(h_grid, h_grid[1:])) or not h_grid:
        raise ValueError("h_grid must be strictly increasing and nonempty")
    hmax = h_grid[-1]
    ks = _threshold_exponents(psi, n, hmax, ctx.p)
    precision_used = max(ctx.m, max(ks))
    work_ctx = ctx if precision_used == ctx.m else PrimeContext(ctx.p, precision_used)
    alphas = enumerate_algebraic(n, hmax, Disc.full(work_ctx), work_ctx)
    by_cutoff: list[list[tuple[int, int]]] = []
    for cutoff in h_grid:
        by_cutoff.append([
            (a.root.residue, ctx.p ** ks[a.height - 1])
            for a in alphas
            if a.height <= cutoff
        ])
    pmu = work_ctx.pm
    rng = random.Random(seed)
    samples = tuple(rng.randrange(pmu) for _ in range(num_samples))
    counts = []
    for res in samples:
        row = tuple(
            sum(1 for root, pk in group if (res - root) % pk == 0)
            for group in by_cutoff
        )
        counts.append(row)
    means = tuple(
        Fraction(sum(row[j] for row in counts), num_samples)
        for j in range(len(h_grid))
    )
    return Thm2Report(
        psi=psi,
        n=n,
        p=ctx.p,
        m=ctx.m,
        precision_used=precision_used,
        h_grid=tuple(h_grid),
        seed=seed,
        samples=samples,
        per_omega_counts=tuple(counts),
        mean_curve=means,
        log_slope=_fit_log_slope(h_grid, means),
    )


# -- resultant diagnostics ----------------------------------------------------------


@dataclass(frozen=True)
class ResultantBoundRecord:
    """|R(P,Q)|_p against 1/|R(P,Q)| for a coprime pair: the exact integer
    form of the nonzero-resultant lower bound."""

    p: int
    poly1: IntPoly
    poly2: IntPoly
    resultant_value: int
    p_norm: Fraction
    inverse_abs: Fraction
    holds: bool

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "poly1": str(self.poly1),
            "poly2": str(self.poly2),
            "resultant": self.resultant_value,
            "p_norm": fraction_str(self.p_norm),
            "inverse_abs": fraction_str(self.inverse_abs),
            "holds": self.holds,
        }


def resultant_bound_check(
    poly1: IntPoly, poly2: IntPoly, ctx: PrimeContext
) -> ResultantBoundRecord:
    """Check |R(P,Q)|_p >= 1/|R(P,Q)| for a coprime pair.

    This must hold for every nonzero integer (p^v divides R, so
    p^v <= |R|); a zero resultant raises CommonFactorError instead."""
    r = resultant(poly1, poly2)
    if r == 0:
        raise CommonFactorError(f"{poly1} and {poly2} share a factor")
    v = int_valuation(r, ctx.p)
    p_norm = Fraction(1, ctx.p ** v)
    inv = Fraction(1, abs(r))
    return ResultantBoundRecord(
        p=ctx.p,
        poly1=poly1,
        poly2=poly2,
        resultant_value=r,
        p_norm=p_norm,
        inverse_abs=inv,
        holds=p_norm >= inv,
    )
