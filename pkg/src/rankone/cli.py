"""Command-line front end.

Exit codes: 0 ok, 1 inconsistency found by ``verify``/``example``, 2 bad input or
violated precondition, 3 conditioning failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import formats
from .assignment import (
    TargetSpectrum,
    design_confluent,
    design_phi_given_psi,
    design_psi_given_phi,
    parse_complex,
    parse_targets,
)
from .charfn import eval_derivative, from_pair, zeros
from .errors import ConditioningError, ContractError, GenericityError, RankOneError
from .jordan import chain_dense, chain_resolvent_case, chain_sigma0
from .localization import (
    asymptotics_scan,
    circle_counts,
    empirical_k,
    region_parts,
    sample_region_min_abs_f,
    trend_blocks,
)
from .operator_model import (
    BaseOperator,
    PerturbationPair,
    assemble_dense,
    example_decay_profile,
    example_periodic_derivative,
)
from .verify import VerificationReport, verify_instance

log = logging.getLogger("rankone")

EXIT_OK, EXIT_INCONSISTENT, EXIT_CONTRACT, EXIT_CONDITIONING = 0, 1, 2, 3
COND_FAIL = 1e12
COND_WARN = 1e10
EXAMPLES = ("periodic-derivative", "move-to-i")


class UsageError(Exception):
    pass


def _load_base(text: str) -> BaseOperator:
    """A base file, or an inline comma list of eigenvalues such as ``"1,2"``."""
    path = Path(text)
    if path.suffix == ".json" or path.is_file():
        return formats.base_from_json(formats.load_json(path))
    try:
        return BaseOperator([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as exc:
        raise ContractError(f"cannot read eigenvalues from {text!r}") from exc


def _load_problem(args) -> tuple[BaseOperator, PerturbationPair, dict]:
    data = formats.load_json(args.pair)
    base = _load_base(args.base) if getattr(args, "base", None) else formats.base_from_json(data)
    pair = formats.pair_from_json(data)
    pair.check_against(base)
    return base, pair, data


def _report_json(report: VerificationReport, pair: PerturbationPair) -> dict:
    predicted = []
    for p, om, res in zip(report.predicted, report.oracle_multiplicities, report.chain_residuals):
        predicted.append({
            "point": formats.encode_complex([p.point])[0],
            "multiplicity": int(p.multiplicity),
            "kind": p.kind,
            "index": p.index,
            "oracle_multiplicity": int(om),
            "chain_residuals": [float(r) for r in res],
        })
    return {
        "passed": report.passed,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in report.checks],
        "eigenvalues": formats.encode_complex(report.oracle_values),
        "predicted": predicted,
        "strip_halfwidth": float(np.linalg.norm(pair.a_coeffs) * np.linalg.norm(pair.b_coeffs)),
    }


def _summarize(report: VerificationReport) -> None:
    for c in report.checks:
        log.info("%-12s %s  %s", c.name, "ok  " if c.passed else "FAIL", c.detail)


def _run_verification(base, pair, targets, args) -> tuple[VerificationReport, dict]:
    report = verify_instance(base, pair, targets=targets, tol=args.tol)
    _summarize(report)
    return report, _report_json(report, pair)


def cmd_design(args) -> int:
    base = _load_base(args.base)
    target = parse_targets(args.targets)
    if args.mode == "confluent":
        result = design_confluent(
            base, target,
            phi_coeffs=None if args.phi is None else formats.load_vector(args.phi),
            psi_coeffs=None if args.psi is None else formats.load_vector(args.psi),
        )
    elif args.phi is None and args.psi is None:
        raise ContractError("residue mode needs --phi or --psi")
    elif args.phi is not None:
        result = design_psi_given_phi(base, formats.load_vector(args.phi), target, relaxed=args.relaxed)
    else:
        result = design_phi_given_psi(base, formats.load_vector(args.psi), target, relaxed=args.relaxed)
    est = result.condition_estimate
    if not np.isfinite(est) or est > COND_FAIL:
        log.error("condition estimate %.3e exceeds %.0e; no pair written", est, COND_FAIL)
        return EXIT_CONDITIONING
    if est > COND_WARN:
        log.warning("condition estimate %.3e: expect visible eigenvalue errors", est)
    formats.dump_json(formats.design_to_json(base, result), args.out, args.json_indent)
    return EXIT_OK


def _chain_at(base, pair, z, tol):
    dist = np.abs(base.eigenvalues - z)
    pos = int(np.argmin(dist))
    if dist[pos] > 1e-12 * base.span():
        return chain_resolvent_case(base, pair, z, tol=tol)
    a, b = pair.a_coeffs[pos], pair.b_coeffs[pos]
    n = int(base.indices[pos])
    if a == 0 and b == 0:
        unit = np.zeros(base.dim, dtype=complex)
        unit[pos] = 1.0
        return chain_dense(assemble_dense(base, pair), base.eigenvalues[pos], unit, 1)
    return chain_sigma0(base, pair, n, tol=tol)


def cmd_verify(args) -> int:
    base, pair, data = _load_problem(args)
    target_text = args.targets if args.targets is not None else data.get("targets")
    targets = parse_targets(target_text) if target_text else None
    report, payload = _run_verification(base, pair, targets, args)
    ok = report.passed
    if args.at is not None:
        chain = _chain_at(base, pair, parse_complex(args.at), args.tol)
        good = chain.max_residual <= args.tol
        log.info("chain at %s: length %d, max residual %.3g", args.at, chain.length, chain.max_residual)
        payload["checks"].append({"name": "chain_at", "passed": bool(good),
                                  "detail": f"length {chain.length}, max residual {chain.max_residual:.3g}"})
        payload["passed"] = payload["passed"] and bool(good)
        ok = ok and good
        if args.chain_out:
            formats.write_chain_csv(chain, args.chain_out)
    formats.dump_json(payload, args.out, args.json_indent)
    return EXIT_OK if ok else EXIT_INCONSISTENT


def build_example(name: str, m: int, window: int | None):
    """``(base, pair, targets)`` for a named example; ``targets`` may be None."""
    if name == "periodic-derivative":
        base, pair = example_periodic_derivative(m, m + 3 if window is None else window)
        return base, pair, None
    if name == "move-to-i":
        base = BaseOperator(np.arange(m + 1, dtype=float), 0, 1.0)
        target = TargetSpectrum([1j], [m + 1])
        result = design_phi_given_psi(base, np.ones(m + 1), target)
        return base, result.pair, target
    raise UsageError(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")


def cmd_example(args) -> int:
    base, pair, targets = build_example(args.name, args.m, args.window)
    if args.problem_out:
        payload = formats.base_to_json(base)
        payload.update(formats.pair_to_json(pair))
        payload["targets"] = None if targets is None else str(targets)
        formats.dump_json(payload, args.problem_out, args.json_indent)
    report, payload = _run_verification(base, pair, targets, args)
    formats.dump_json(payload, args.out, args.json_indent)
    return EXIT_OK if report.passed else EXIT_INCONSISTENT


def cmd_scan(args) -> int:
    if args.profile is not None:
        base, pair = example_decay_profile(args.window, args.power)
    elif args.pair is not None:
        base, pair, _ = _load_problem(args)
    else:
        raise UsageError("scan needs --pair (with optional --base) or --profile")
    gap = base.min_gap()
    eps = args.eps if args.eps is not None else 0.4 * (gap if np.isfinite(gap) else 1.0)
    if not 0 < eps < gap / 2:
        raise ContractError(f"eps={eps} must lie in (0, gap/2) with gap={gap}")
    counts = circle_counts(base, pair, eps)
    scan = asymptotics_scan(base, pair, eps)
    formats.write_scan_csv(scan, counts, args.out)
    relocated = base.dim - sum(counts.values())
    log.info("relocated eigenvalues: %d; empirical K: %s", relocated, empirical_k(counts))
    if base.gap_d is not None:
        try:
            parts = region_parts(base, pair, eps)
            low = sample_region_min_abs_f(base, pair, eps, parts.N, rng=args.seed)
            log.info("far region |Re z| >= %g: sampled min |F| = %.4g", parts.N, low)
        except RankOneError as exc:
            log.info("far region not checked: %s", exc)
    if args.trend_out:
        with open(args.trend_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["block_start", "block_end", "median_deviation"])
            for lo, hi, med in trend_blocks(scan.deviations(), args.trend_start):
                w.writerow([lo, hi, repr(med)])
    return EXIT_OK


def cmd_charfn(args) -> int:
    if args.charfn is not None:
        f = formats.charfn_from_json(formats.load_json(args.charfn))
    elif args.pair is not None:
        base, pair, _ = _load_problem(args)
        f = from_pair(base, pair)
    else:
        raise UsageError("charfn needs --pair or --charfn")
    if args.action == "dump":
        formats.dump_json(formats.charfn_to_json(f), args.out, args.json_indent)
    elif args.action == "eval":
        if args.at is None:
            raise UsageError("charfn eval needs --at")
        z = parse_complex(args.at)
        rows = [{"order": k, "value": formats.encode_complex([eval_derivative(f, z, k)])[0]}
                for k in range(args.order + 1)]
        formats.dump_json({"z": formats.encode_complex([z])[0], "taylor": rows}, args.out, args.json_indent)
    else:
        formats.write_zeros_csv(zeros(f, order_tol=args.tol), args.out)
    return EXIT_OK


def _add_globals(parser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--tol", type=float, default=default(1e-8),
                        help="relative tolerance for zero orders, ranks and residuals (default 1e-8)")
    parser.add_argument("--seed", type=int, default=default(0), help="seed for randomized sampling")
    parser.add_argument("--json-indent", type=int, default=default(2), help="JSON indentation")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rankone", description="Design and verify rank-one perturbations.")
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", parents=[common], help="place a target spectrum")
    p.add_argument("--base", required=True, help="base JSON file or inline eigenvalues '1,2'")
    given = p.add_mutually_exclusive_group()
    given.add_argument("--phi", help="fixed phi: JSON file or inline list '1,1+2i'")
    given.add_argument("--psi", help="fixed psi: JSON file or inline list")
    p.add_argument("--targets", required=True, help="'point:mult,...', e.g. '0:2,1+2i:1'")
    p.add_argument("--mode", choices=("residue", "confluent"), default="residue",
                   help="residue: prescribed F; confluent: direct solve of the multiplicity system")
    p.add_argument("--relaxed", action="store_true",
                   help="allow multiplicities summing to less than the dimension")
    p.add_argument("--out", default="-", help="output JSON (default stdout)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("verify", parents=[common], help="check a pair against the dense oracle")
    p.add_argument("--pair", required=True, help="problem or design JSON with a and b")
    p.add_argument("--base", help="base JSON, if the pair file has no lambdas")
    p.add_argument("--targets", help="targets to check (default: the design file's own)")
    p.add_argument("--at", help="build the Jordan chain at this point")
    p.add_argument("--chain-out", help="CSV for the chain built with --at")
    p.add_argument("--out", default="-", help="report JSON (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", parents=[common], help="build and verify a named example")
    p.add_argument("name", help=" | ".join(EXAMPLES))
    p.add_argument("--m", type=int, default=1, help="example size parameter")
    p.add_argument("--window", type=int, help="index window (periodic-derivative; default m+3)")
    p.add_argument("--problem-out", help="write the generated problem JSON here")
    p.add_argument("--out", default="-", help="report JSON (default stdout)")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("scan", parents=[common], help="disk counts and eigenvalue deviations")
    p.add_argument("--pair", help="problem JSON to scan")
    p.add_argument("--base", help="base JSON, if the pair file has no lambdas")
    p.add_argument("--profile", choices=("decay",), help="built-in a_n = b_n = 1/|n|^power data")
    p.add_argument("--window", type=int, default=200, help="index window for --profile (default 200)")
    p.add_argument("--power", type=float, default=1.0, help="decay exponent for --profile (default 1)")
    p.add_argument("--eps", type=float, help="disk radius, below gap/2 (default 0.4 gap)")
    p.add_argument("--trend-out", help="CSV of dyadic block medians of the deviations")
    p.add_argument("--trend-start", type=int, default=50, help="first |n| of the trend blocks (default 50)")
    p.add_argument("--out", default="-", help="scan CSV (default stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("charfn", parents=[common], help="dump, evaluate or find zeros of F")
    p.add_argument("action", choices=("dump", "eval", "roots"))
    p.add_argument("--pair", help="problem JSON")
    p.add_argument("--base", help="base JSON, if the pair file has no lambdas")
    p.add_argument("--charfn", help="charfn JSON dump instead of a pair")
    p.add_argument("--at", help="evaluation point, e.g. 1+2i")
    p.add_argument("--order", type=int, default=0, help="eval: Taylor coefficients up to this order")
    p.add_argument("--out", default="-", help="output (default stdout)")
    p.set_defaults(func=cmd_charfn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        log.error("%s", exc)
        return EXIT_CONTRACT
    except GenericityError as exc:
        log.error("genericity violated: %s", exc)
        return EXIT_CONTRACT
    except ConditioningError as exc:
        log.error("conditioning failure: %s", exc)
        return EXIT_CONDITIONING
    except (ContractError, FileNotFoundError) as exc:
        log.error("%s", exc)
        return EXIT_CONTRACT
    except RankOneError as exc:
        log.error("%s", exc)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
