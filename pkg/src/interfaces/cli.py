import argparse
import logging
import os
import sys
from datetime import datetime
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from reports.json_operations import ReportStore
from reports.models import DEFAULT_SEED, CheckRow, DecompositionReport, RunConfig
from verification.suite import ToleranceError, VerificationSuite, run_polydisc

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _tolerance(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} is not a number: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mob_rkhs",
        description="Decompose Moebius-homogeneous tensor products of weighted Bergman spaces",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("decompose", "run the summand ladder and write a JSON report"),
                            ("verify", "run the invariant suites and write a CSV of checks")):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--lambdas", type=_float_list, help="a,b (bidisc) or a,b,c (polydisc)")
        sub.add_argument("--degree", type=int, default=12, help="degree bound N (default 12)")
        sub.add_argument("--parity", choices=["symmetric", "antisymmetric"])
        sub.add_argument("--polydisc", type=_float_list, help="three lambdas for the tridisc")
        sub.add_argument("--out", help="report path (default under $MOB_RKHS_REPORT_DIR)")
        sub.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
        sub.add_argument("--inject-noise", type=float, metavar="EPS", help="perturb the Gram weights by a factor 1 +- EPS")
        sub.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        lambdas=args.lambdas,
        degree=args.degree,
        parity=args.parity,
        polydisc=args.polydisc,
        out=args.out,
        tolerances=dict(args.tol),
        inject_noise=args.inject_noise,
        seed=args.seed,
    )


def _session_id(command: str) -> str:
    return f"{command}_{datetime.now().strftime('%Y%m%d_%H%M%S')}"


def homogeneous_path(checks_path: str) -> str:
    """JSON report path next to the checks CSV"""
    return os.path.splitext(checks_path)[0] + "_homogeneous.json"


def print_ladder(report: DecompositionReport):
    print("=" * 60)
    title = f"lambdas={report.lambdas} N={report.degree_bound}"
    if report.parity:
        title += f" parity={report.parity}"
    print(f"SUMMAND LADDER  {title}")
    print("=" * 60)
    if report.lambda_hat is not None:
        print(f"lambda_hat = {report.lambda_hat:.8f}")
    rows = [
        {
            "m": s.m,
            "dim": s.dim,
            "K_m(0,0)": s.k00,
            "parameter": s.parameter,
            "expected": None if s.empty or report.lambda_hat is None else report.lambda_hat + 2 * s.m,
            "residual": s.residual,
        }
        for s in report.summands
    ]
    if rows:
        print(pd.DataFrame(rows).to_string(index=False, na_rep="-"))
    print(f"dimension {report.total_dim}/{report.expected_dim}, orthonormality defect {report.orthonormality_defect:.2e}")


def print_multiplicities(report: DecompositionReport):
    print("=" * 60)
    print(f"POLYDISC MULTIPLICITIES  lambdas={report.lambdas} N={report.degree_bound}")
    print("=" * 60)
    frame = pd.DataFrame([row.model_dump() for row in report.multiplicities or []])
    print(frame.to_string(index=False) if not frame.empty else "(no parameters found)")


def print_checks(rows: List[CheckRow]):
    print("=" * 60)
    print("VERIFICATION CHECKS")
    print("=" * 60)
    for row in rows:
        mark = "ok  " if row.passed else "FAIL"
        print(f"[{mark}] {row.check:<24} residual {row.residual:.3e}  tolerance {row.tolerance:.1e}")
        if not row.passed and row.message:
            print(f"       {row.message}")


def _print_violations(violations: List[str]):
    if violations:
        print("\nContract violations:")
        for violation in violations:
            print(f"   • {violation}")


def cmd_decompose(config: RunConfig) -> int:
    store = ReportStore()
    if config.polydisc is not None:
        result = run_polydisc(config.polydisc, config.degree, config.tolerances)
        if result["data"] is None:
            print(result["message"])
            return EXIT_VIOLATION
        report = result["data"]["report"]
        print_multiplicities(report)
    else:
        suite = VerificationSuite(config.lambdas, config.degree, config.tolerances, config.seed,
                                  config.inject_noise, session_id=_session_id("decompose"))
        result = suite.run_decomposition(config.parity)
        if result["data"] is None:
            print(result["message"])
            return EXIT_VIOLATION
        report = result["data"]
        print_ladder(report)

    path = store.save_report(report, config.out, stem="decomposition")
    print(f"\nReport written to {path}")
    _print_violations(report.violations)
    return EXIT_OK if result["success"] else EXIT_VIOLATION


def cmd_verify(config: RunConfig) -> int:
    store = ReportStore()
    homogeneous = None
    if config.polydisc is not None:
        result = run_polydisc(config.polydisc, config.degree, config.tolerances)
        if result["data"] is None:
            print(result["message"])
            return EXIT_VIOLATION
        print_multiplicities(result["data"]["report"])
        rows = [result["data"]["row"]]
    else:
        suite = VerificationSuite(config.lambdas, config.degree, config.tolerances, config.seed,
                                  config.inject_noise, session_id=_session_id("verify"))
        rows = suite.run_all()
        homogeneous = suite.run_homogeneous_report()

    print_checks(rows)
    path = store.save_checks(rows, config.out)
    print(f"\nChecks written to {path}")
    if homogeneous is not None:
        if homogeneous["data"] is None:
            print(homogeneous["message"])
            return EXIT_VIOLATION
        report_path = store.save_report(homogeneous["data"], homogeneous_path(path), stem="homogeneous")
        print(f"Homogeneous pair report written to {report_path}")
    return EXIT_OK if all(row.passed for row in rows) else EXIT_VIOLATION


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.getenv("MOB_RKHS_LOG", "INFO").upper(),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK

    try:
        config = config_from_args(args)
    except ValidationError as e:
        print("Invalid configuration:")
        for error in e.errors():
            print(f"   • {error['msg']}")
        return EXIT_CONFIG

    try:
        if config.command == "decompose":
            return cmd_decompose(config)
        return cmd_verify(config)
    except ToleranceError as e:
        print(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except ValueError as e:
        print(f"Run failed: {e}")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
