"""Command-line front door.

Every subcommand takes the shared (p, m) flags, validates its inputs up
front (invalid combinations produce one aggregated error report and exit
code 2), computes, and emits JSON.  Exact rationals are always serialized
as fraction strings; decimal renderings are advisory duplicates.  Domain
errors exit 1 with machine-readable JSON on stderr; usage errors exit 2.

Outputs contain no timestamps, so a fixed configuration reproduces
byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .errors import PadicLabError
from . import checks
from .algnum import (
    Disc,
    constructive_approximant,
    dirichlet_polynomial,
    enumerate_algebraic,
    regular_witness,
)
from .errors import ApproximantRejected
from .measure import (
    PsiModel,
    e1_measure,
    solution_measure,
    tail_sum,
    union_measure_E,
)
from .padic import PrimeContext, make_padic
from .polyzx import parse_poly
from .roots import hensel_lift, zp_roots
from .experiments import dichotomy_report, thm2_report


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--prime", type=int, required=True, help="the prime p")
    parser.add_argument("--precision", type=int, required=True,
                        help="working precision m (base-p digits)")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallelism cap (results are schedule-independent)")
    parser.add_argument("--output", type=str, default=None,
                        help="write the main artifact here instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--config", type=str, default=None,
                        help="flat key=value file; command-line flags override")


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="padiclab",
        description="exact p-adic approximation laboratory",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p_roots = sub.add_parser("roots", help="Z_p roots / Hensel lift of a polynomial")
    _add_common(p_roots)
    p_roots.add_argument("--poly", type=str, required=True,
                         help="coefficients lowest first, e.g. [-2,0,1]")
    p_roots.add_argument("--hensel-start", type=int, default=None,
                         help="lift from this integer instead of isolating all roots")

    p_enum = sub.add_parser("enum-alg", help="enumerate algebraic numbers")
    _add_common(p_enum)
    p_enum.add_argument("--degree", type=int, required=True)
    p_enum.add_argument("--height-max", type=int, required=True)
    p_enum.add_argument("--disc-center", type=int, default=0)
    p_enum.add_argument("--disc-k", type=int, default=0)

    p_dir = sub.add_parser("dirichlet", help="small-value pigeonhole polynomial")
    _add_common(p_dir)
    p_dir.add_argument("--omega", type=int, required=True)
    p_dir.add_argument("--q", type=int, required=True)
    p_dir.add_argument("--delta-exp", type=int, required=True)
    p_dir.add_argument("--c", type=_parse_fraction, required=True)
    p_dir.add_argument("--degree", type=int, required=True)

    p_apx = sub.add_parser("approx", help="constructive algebraic approximant")
    _add_common(p_apx)
    p_apx.add_argument("--omega", type=int, required=True)
    p_apx.add_argument("--q", type=int, required=True)
    p_apx.add_argument("--delta-exp", type=int, required=True)
    p_apx.add_argument("--c", type=_parse_fraction, required=True)
    p_apx.add_argument("--degree", type=int, required=True)

    p_reg = sub.add_parser("regsys", help="regular-system witness report")
    _add_common(p_reg)
    p_reg.add_argument("--degree", type=int, required=True)
    p_reg.add_argument("--t-param", type=int, required=True,
                       help="weight cutoff T, a power of p with exponent divisible by n+1")
    p_reg.add_argument("--disc-center", type=int, default=0)
    p_reg.add_argument("--disc-k", type=int, default=0)

    p_meas = sub.add_parser("measure", help="exact Haar measures")
    _add_common(p_meas)
    p_meas.add_argument("mode", choices=("solution", "union", "e1"))
    p_meas.add_argument("--poly", type=str, default=None)
    p_meas.add_argument("--k-theta", type=int, default=None)
    p_meas.add_argument("--q", type=int, default=None)
    p_meas.add_argument("--delta", type=_parse_fraction, default=None)
    p_meas.add_argument("--xi", type=_parse_fraction, default=None)
    p_meas.add_argument("--degree", type=int, default=None)
    p_meas.add_argument("--disc-center", type=int, default=0)
    p_meas.add_argument("--disc-k", type=int, default=0)

    for name, helptext in (
        ("dichotomy", "height-scaled polynomial-value dichotomy harness"),
        ("thm2", "algebraic-number distance dichotomy harness"),
    ):
        p_exp = sub.add_parser(name, help=helptext)
        _add_common(p_exp)
        p_exp.add_argument("--samples", type=int, required=True)
        p_exp.add_argument("--seed", type=int, required=True)
        p_exp.add_argument("--psi", type=str, required=True,
                           help="pow:S or powlog:S:Q")
        p_exp.add_argument("--degree", type=int, required=True)
        p_exp.add_argument("--h-grid", type=str, required=True,
                           help="comma-separated increasing height cutoffs")

    p_chk = sub.add_parser("check", help="run the invariant suite")
    _add_common(p_chk)
    p_chk.add_argument("--degree", type=int, default=2)
    p_chk.add_argument("--height-max", type=int, default=4)
    p_chk.add_argument("--seed", type=int, default=0)

    p_tail = sub.add_parser("tailsum", help="partial sums and convergence verdict")
    _add_common(p_tail)
    p_tail.add_argument("--psi", type=str, required=True)
    p_tail.add_argument("--h-lo", type=int, default=1)
    p_tail.add_argument("--h-hi", type=int, required=True)

    return top


def _load_config(ns: argparse.Namespace, parser: argparse.ArgumentParser,
                 argv: list[str]) -> argparse.Namespace:
    """Re-parse with defaults taken from the key=value config file."""
    if not ns.config:
        return ns
    path = Path(ns.config)
    if not path.exists():
        raise UsageErrors([f"config file not found: {path}"])
    overrides = {}
    for line_no, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageErrors([f"{path}:{line_no}: expected key=value"])
        key, value = line.split("=", 1)
        overrides[key.strip().replace("-", "_")] = value.strip()
    parser.set_defaults(**overrides)
    return parser.parse_args(argv)


class UsageErrors(Exception):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


def _validate(ns: argparse.Namespace) -> None:
    problems = []
    if ns.prime is not None and int(ns.prime) < 2:
        problems.append("--prime must be >= 2")
    if ns.precision is not None and int(ns.precision) < 1:
        problems.append("--precision must be >= 1")
    if int(ns.threads) < 1:
        problems.append("--threads must be >= 1")
    if ns.command == "measure":
        if ns.mode == "solution" and (ns.poly is None or ns.k_theta is None):
            problems.append("measure solution needs --poly and --k-theta")
        if ns.mode in ("union", "e1") and (
            ns.q is None or ns.delta is None or ns.degree is None
        ):
            problems.append(f"measure {ns.mode} needs --q, --delta, --degree")
        if ns.mode == "e1" and ns.xi is None:
            problems.append("measure e1 needs --xi")
    if ns.command in ("dichotomy", "thm2"):
        try:
            grid = [int(t) for t in ns.h_grid.split(",")]
            if any(b <= a for a, b in zip(grid, grid[1:])) or not grid:
                problems.append("--h-grid must be strictly increasing")
        except ValueError:
            problems.append("--h-grid must be comma-separated integers")
    if ns.format == "csv" and ns.command not in ("dichotomy", "thm2"):
        problems.append("--format csv is only available for report commands")
    if problems:
        raise UsageErrors(problems)


def _emit(ns: argparse.Namespace, payload: dict | str) -> None:
    text = payload if isinstance(payload, str) else json.dumps(
        payload, indent=2, sort_keys=True
    ) + "\n"
    if ns.output:
        Path(ns.output).write_text(text)
    else:
        sys.stdout.write(text)


def _run_report(ns: argparse.Namespace, ctx: PrimeContext) -> int:
    psi = PsiModel.parse(ns.psi)
    grid = [int(t) for t in ns.h_grid.split(",")]
    fn = dichotomy_report if ns.command == "dichotomy" else thm2_report
    report = fn(ns.samples, ns.seed, psi, ns.degree, grid, ctx)
    if ns.format == "csv":
        _emit(ns, report.mean_curve_csv())
        return 0
    if ns.output:
        base = Path(ns.output)
        base.with_suffix(".jsonl").write_text(
            "\n".join(report.sample_lines()) + "\n"
        )
        base.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    return 0


def _dispatch(ns: argparse.Namespace) -> int:
    ctx = PrimeContext(int(ns.prime), int(ns.precision))
    if ns.command == "roots":
        poly = parse_poly(ns.poly)
        if ns.hensel_start is not None:
            alpha = hensel_lift(poly, make_padic(int(ns.hensel_start), ctx))
            _emit(ns, {"poly": str(poly), "hensel_root": alpha.residue,
                       "p": ctx.p, "m": ctx.m})
        else:
            _emit(ns, zp_roots(poly, ctx).to_json())
        return 0
    if ns.command == "enum-alg":
        disc = Disc(make_padic(int(ns.disc_center), ctx), int(ns.disc_k))
        points = enumerate_algebraic(int(ns.degree), int(ns.height_max), disc, ctx)
        _emit(ns, {"count": len(points), "points": [a.to_json() for a in points]})
        return 0
    if ns.command == "dirichlet":
        poly = dirichlet_polynomial(
            make_padic(int(ns.omega), ctx), int(ns.q), int(ns.delta_exp),
            ns.c, int(ns.degree),
        )
        _emit(ns, {"poly": str(poly), "height": poly.height})
        return 0
    if ns.command == "approx":
        try:
            alpha = constructive_approximant(
                make_padic(int(ns.omega), ctx), int(ns.q), int(ns.delta_exp),
                ns.c, int(ns.degree),
            )
            _emit(ns, {"status": "ok", "approximant": alpha.to_json()})
        except ApproximantRejected as exc:
            _emit(ns, {"status": "rejected", "reason": exc.reason})
        return 0
    if ns.command == "regsys":
        disc = Disc(make_padic(int(ns.disc_center), ctx), int(ns.disc_k))
        report = regular_witness(disc, int(ns.t_param), int(ns.degree), ctx)
        _emit(ns, report.to_json())
        return 0
    if ns.command == "measure":
        disc = Disc(make_padic(int(ns.disc_center), ctx), int(ns.disc_k))
        if ns.mode == "solution":
            est = solution_measure(parse_poly(ns.poly), int(ns.k_theta), disc, ctx)
        elif ns.mode == "union":
            est = union_measure_E(ns.delta, int(ns.q), int(ns.degree), disc, ctx)
        else:
            est = e1_measure(ns.delta, int(ns.q), ns.xi, int(ns.degree), disc, ctx)
        _emit(ns, est.to_json())
        return 0
    if ns.command in ("dichotomy", "thm2"):
        return _run_report(ns, ctx)
    if ns.command == "tailsum":
        _emit(ns, tail_sum(PsiModel.parse(ns.psi), int(ns.h_lo), int(ns.h_hi)).to_json())
        return 0
    if ns.command == "check":
        summary = checks.run_suite(
            ctx, n=int(ns.degree), hmax=int(ns.height_max), seed=int(ns.seed)
        )
        _emit(ns, summary)
        return 0 if summary["violations_total"] == 0 else 1
    raise AssertionError(f"unhandled command {ns.command}")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        ns = _load_config(ns, parser, argv)
        _validate(ns)
    except UsageErrors as exc:
        sys.stderr.write(json.dumps(
            {"error": "usage", "problems": exc.problems}, sort_keys=True
        ) + "\n")
        return 2
    try:
        return _dispatch(ns)
    except PadicLabError as exc:
        sys.stderr.write(json.dumps(
            {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
        ) + "\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(json.dumps(
            {"error": "ValueError", "message": str(exc)}, sort_keys=True
        ) + "\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
