"""Command-line front end.

Exit codes: 0 success, 2 malformed or invalid input, 3 solver failure,
4 invalid multiplier, 5 witness verification failed.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from .entanglement_compass import EntanglementCompass
from .hermitian import InvariantError
from .nodes import DEFAULT_CONFIG
from .parsers import MatrixFileParser
from .utils import format_value
from .witness import PRODUCT_TOL, min_separable_value, ppt_check, verify_witness

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_SOLVER_FAILURE = 3
EXIT_INVALID_MULTIPLIER = 4
EXIT_VERIFY_FAILED = 5

EXIT_CODES = {
    "invalid_input": EXIT_INVALID_INPUT,
    "solver_failure": EXIT_SOLVER_FAILURE,
    "invalid_multiplier": EXIT_INVALID_MULTIPLIER,
}

LOG_LEVEL_ENV = "ENTANGLEMENT_COMPASS_LOG_LEVEL"


def configure_logging(level: Optional[str] = None):
    level = (level or os.getenv(LOG_LEVEL_ENV) or "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_solve(args: argparse.Namespace) -> int:
    tunables = {
        "gap_tol": args.tol,
        "detect_eps": args.detect_eps,
        "seed": args.seed,
        "samples": args.samples,
        "validate": not args.no_validate,
    }
    multiplier = None
    if args.multiplier is not None:
        if args.method != "sprocedure":
            return _fail("--multiplier is only used with --method sprocedure", EXIT_INVALID_INPUT)
        try:
            parsed = MatrixFileParser.load(args.multiplier)
        except InvariantError as e:
            return _fail(f"multiplier file: {e}", EXIT_INVALID_MULTIPLIER)
        multiplier = MatrixFileParser.matrix_document(parsed.matrix, parsed.dims, parsed.name)

    compass = EntanglementCompass(enable_checkpointing=False)
    result = compass.analyze_file(args.input, method=args.method, multiplier=multiplier, **tunables)
    if result["status"] != "success":
        return _fail(result.get("error", "analysis failed"), EXIT_CODES.get(result.get("error_kind"), EXIT_SOLVER_FAILURE))

    if args.output:
        MatrixFileParser.write(args.output, result["report"])
    print(result["verdict_line"])
    return EXIT_OK


def cmd_ppt(args: argparse.Namespace) -> int:
    try:
        rho = MatrixFileParser.load(args.input).to_density()
        is_ppt, min_eig = ppt_check(rho)
    except InvariantError as e:
        return _fail(str(e), EXIT_INVALID_INPUT)
    print("PPT" if is_ppt else f"NPT min_eig={format_value(min_eig)}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        witness = MatrixFileParser.load(args.witness)
        rho = MatrixFileParser.load(args.input).to_density() if args.input else None
        check = verify_witness(witness.matrix, witness.dims, rho, restarts=args.restarts, seed=args.seed)
        separable_min = min_separable_value(witness.to_hermitian(), witness.dims, args.samples, args.seed)
    except ValueError as e:
        return _fail(str(e), EXIT_INVALID_INPUT)

    print(f"trace={format_value(check.trace)}")
    print(f"min_eig={format_value(check.min_eigenvalue)}")
    if check.state_value is not None:
        print(f"tr_w_rho={format_value(check.state_value)}")
    print(f"seesaw_min={format_value(check.seesaw_value)} (threshold {-PRODUCT_TOL:g})")
    print(f"separable_min={format_value(separable_min)} over {args.samples} samples")
    failures = list(check.failures)
    if separable_min < -PRODUCT_TOL:
        failures.append(f"negative on a sampled separable state: {separable_min:.3e}")
    if not failures:
        print("PASS")
        return EXIT_OK
    for failure in failures:
        print(f"FAIL {failure}")
    return EXIT_VERIFY_FAILED


def cmd_scenarios(args: argparse.Namespace) -> int:
    from .scenarios import run_compass_scenarios

    return EXIT_OK if run_compass_scenarios() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entanglement-compass",
        description="Certify entanglement of density operators with semidefinite relaxations.",
    )
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: ${LOG_LEVEL_ENV} or WARNING).")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="Run a relaxation and print the verdict.")
    solve.add_argument("--input", required=True, help="MatrixFile with the density operator.")
    solve.add_argument("--output", default=None, help="Where to write the ReportFile.")
    solve.add_argument("--method", choices=["theorem2", "sprocedure", "cuts", "auto"], default="theorem2")
    solve.add_argument("--tol", type=float, default=DEFAULT_CONFIG["gap_tol"], help="Solver duality-gap tolerance.")
    solve.add_argument("--detect-eps", type=float, default=DEFAULT_CONFIG["detect_eps"],
                       help="Entangled iff the optimum is below -detect_eps.")
    solve.add_argument("--seed", type=int, default=DEFAULT_CONFIG["seed"])
    solve.add_argument("--samples", type=int, default=DEFAULT_CONFIG["samples"],
                       help="Separable samples used to validate the witness.")
    solve.add_argument("--multiplier", default=None, help="MatrixFile with P = [[Q, S], [S^dagger, R]] (sprocedure).")
    solve.add_argument("--no-validate", action="store_true", help="Skip witness validation.")
    solve.set_defaults(handler=cmd_solve)

    ppt = sub.add_parser("ppt", help="Partial-transpose test of a bipartite state.")
    ppt.add_argument("--input", required=True)
    ppt.set_defaults(handler=cmd_ppt)

    verify = sub.add_parser("verify", help="Check a witness against the witness conditions.")
    verify.add_argument("--witness", required=True, help="MatrixFile with the witness operator.")
    verify.add_argument("--input", default=None, help="Optional MatrixFile with a state to evaluate.")
    verify.add_argument("--samples", type=int, default=DEFAULT_CONFIG["samples"],
                        help="Separable samples the witness is evaluated on.")
    verify.add_argument("--restarts", type=int, default=DEFAULT_CONFIG["restarts"], help="See-saw restarts.")
    verify.add_argument("--seed", type=int, default=DEFAULT_CONFIG["seed"])
    verify.set_defaults(handler=cmd_verify)

    scenarios = sub.add_parser("scenarios", help="Replay the bundled case studies.")
    scenarios.set_defaults(handler=cmd_scenarios)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
