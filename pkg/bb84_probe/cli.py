#!/usr/bin/env python3
"""Command-line interface for bb84-probe."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import asdict
from typing import List, NoReturn, Optional

from . import __version__
from .analysis import intercept_resend, threshold, tradeoff_curve
from .errors import RejectedInputError
from .export import export_strategy_to_json, round_floats, strategy_to_dict, write_json_document, write_rows
from .optimizer import DEFAULT_RESTARTS, MEASUREMENT_MODES, METHODS, SearchConfig, search
from .probe import build_optimal
from .simulate import ProtocolConfig, run
from .verify import SUITES, run_suite

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NOT_CONVERGED = 3
EXIT_INTERRUPTED = 130


def _report_time(args: argparse.Namespace, start: float, doc: dict) -> dict:
    elapsed = time.perf_counter() - start
    print(f"Wall time: {elapsed:.3f} s", file=sys.stderr)
    if args.timing:
        doc["wall_time_s"] = elapsed
    return doc


def cmd_tradeoff(args: argparse.Namespace) -> None:
    """Emit the closed-form information-disturbance curve."""
    rows = tradeoff_curve(args.d_min, args.d_max, args.step)
    write_rows(rows, args.format, args.out)

    roots = threshold()
    print(f"Threshold: d = {roots.closed_form:.8f} (bisection {roots.bisection:.8f})", file=sys.stderr)
    if args.baseline:
        ir = intercept_resend()
        print(f"Intercept-resend: d = {ir.d:.6g}, I = {ir.i_eve_nats:.6g} nats", file=sys.stderr)
    if args.out:
        print(f"Wrote {len(rows)} rows -> {args.out}", file=sys.stderr)


def cmd_simulate(args: argparse.Namespace) -> None:
    """Run the protocol Monte Carlo and write its summary."""
    start = time.perf_counter()
    cfg = ProtocolConfig(
        n_signals=args.n,
        d=args.d,
        attack_enabled=args.attack != "off",
        seed=args.seed,
        workers=args.workers,
        attack="intercept-resend" if args.attack == "intercept-resend" else "optimal",
    )
    summary = run(cfg)
    doc = round_floats({"config": asdict(cfg), "summary": summary.to_dict()})
    write_json_document(_report_time(args, start, doc), args.out)


def cmd_optimize(args: argparse.Namespace) -> None:
    """Numerical search for the best attack at a target disturbance."""
    start = time.perf_counter()
    cfg = SearchConfig(
        d_target=args.d,
        probe_dim=args.probe_dim,
        restarts=args.restarts,
        seed=args.seed,
        measurement=args.measurement,
        method=args.method,
        workers=args.workers,
    )
    result = search(cfg)
    doc = round_floats(result.report())
    if args.include_strategy:
        doc["strategy"] = strategy_to_dict(result.best)
    write_json_document(_report_time(args, start, doc), args.out)
    print(f"Gap to bound: {result.gap_to_bound:.3g} nats", file=sys.stderr)

    if not result.converged:
        print("Best restart did not converge.", file=sys.stderr)
        sys.exit(EXIT_NOT_CONVERGED)


def cmd_verify(args: argparse.Namespace) -> None:
    """Run verification suites and print a pass/fail table."""
    checks = run_suite(args.suite)
    width = max(len(c.name) for c in checks)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status}  {c.suite:<9} {c.name:<{width}}  {c.detail}")

    failed = [c for c in checks if not c.passed]
    print(f"\n{len(checks) - len(failed)}/{len(checks)} checks passed.")
    if failed:
        sys.exit(EXIT_VERIFY_FAILED)


def cmd_strategy_dump(args: argparse.Namespace) -> None:
    """Write the optimal strategy for the given disturbances."""
    strategy = build_optimal(args.dxy, args.duv).strategy()
    export_strategy_to_json(strategy, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bb84-probe",
        description="Optimal eavesdropping on BB84: bounds, strategies, simulation",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log progress to stderr")

    subparsers = parser.add_subparsers(dest="command", required=True)

    # tradeoff command
    tradeoff_parser = subparsers.add_parser("tradeoff", help="Information-disturbance curve")
    tradeoff_parser.add_argument("--d-min", type=float, default=0.0, help="Smallest disturbance (default: 0)")
    tradeoff_parser.add_argument("--d-max", type=float, default=0.5, help="Largest disturbance (default: 0.5)")
    tradeoff_parser.add_argument("--step", type=float, default=0.01, help="Grid step (default: 0.01)")
    tradeoff_parser.add_argument("--out", help="Output file (default: stdout)")
    tradeoff_parser.add_argument("-f", "--format", choices=["csv", "json"], default="csv", help="Output format")
    tradeoff_parser.add_argument("--baseline", action="store_true", help="Also report the intercept-resend point")
    tradeoff_parser.set_defaults(func=cmd_tradeoff)

    # simulate command
    simulate_parser = subparsers.add_parser("simulate", help="Monte Carlo run of the protocol")
    simulate_parser.add_argument("--d", type=float, default=0.1, help="Attack disturbance (default: 0.1)")
    simulate_parser.add_argument("-n", "--n", type=int, default=100_000, help="Number of signals (default: 100000)")
    simulate_parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    simulate_parser.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    simulate_parser.add_argument(
        "--attack",
        choices=["on", "off", "intercept-resend"],
        default="on",
        help="Eavesdropper: optimal (on), none (off) or intercept-resend",
    )
    simulate_parser.add_argument("--out", help="Output file (default: stdout)")
    simulate_parser.add_argument("--timing", action="store_true", help="Include wall time in the JSON")
    simulate_parser.set_defaults(func=cmd_simulate)

    # optimize command
    optimize_parser = subparsers.add_parser("optimize", help="Numerical search for the best attack")
    optimize_parser.add_argument("--probe-dim", type=int, choices=[2, 4], default=4, help="Probe dimension (default: 4)")
    optimize_parser.add_argument("--d", type=float, default=0.1, help="Target disturbance (default: 0.1)")
    optimize_parser.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS,
                                 help=f"Random restarts (default: {DEFAULT_RESTARTS})")
    optimize_parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    optimize_parser.add_argument("--measurement", choices=MEASUREMENT_MODES, default="projective",
                                 help="Eve's measurement model (default: projective)")
    optimize_parser.add_argument("--method", choices=sorted(METHODS), default="powell",
                                 help="Local optimizer (default: powell)")
    optimize_parser.add_argument("--workers", type=int, default=1, help="Worker processes (default: 1)")
    optimize_parser.add_argument("--include-strategy", action="store_true", help="Embed the best strategy")
    optimize_parser.add_argument("--out", help="Output file (default: stdout)")
    optimize_parser.add_argument("--timing", action="store_true", help="Include wall time in the JSON")
    optimize_parser.set_defaults(func=cmd_optimize)

    # verify command
    verify_parser = subparsers.add_parser("verify", help="Run verification suites")
    verify_parser.add_argument("--suite", choices=[*SUITES, "all"], default="all", help="Suite to run (default: all)")
    verify_parser.set_defaults(func=cmd_verify)

    # strategy-dump command
    dump_parser = subparsers.add_parser("strategy-dump", help="Write the optimal strategy as JSON")
    dump_parser.add_argument("--dxy", type=float, default=0.1, help="Disturbance in the xy basis (default: 0.1)")
    dump_parser.add_argument("--duv", type=float, default=0.1, help="Disturbance in the uv basis (default: 0.1)")
    dump_parser.add_argument("-f", "--format", choices=["json"], default="json", help="Output format")
    dump_parser.add_argument("--out", help="Output file (default: stdout)")
    dump_parser.set_defaults(func=cmd_strategy_dump)

    return parser


def main(argv: Optional[List[str]] = None) -> NoReturn:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr, format="%(name)s: %(message)s")

    try:
        args.func(args)
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        sys.exit(EXIT_INTERRUPTED)
    except RejectedInputError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(EXIT_USAGE)
    except Exception as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)

    sys.exit(0)


if __name__ == "__main__":
    main()
