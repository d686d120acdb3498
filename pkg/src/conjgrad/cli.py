"""``conjgrad`` command line: solve, generate, diagnose, bench.

Exit codes: 0 converged (or all checks passed), 1 I/O or parse error,
2 usage error, 3 iteration cap reached, 4 breakdown, 5 a diagnose check failed.
"""
from __future__ import annotations

import argparse
import io
import sys
import time

import numpy as np

from . import mmio
from .diagnostics import FAIL, run_all
from .errors import CGError
from .linalg import (LinearSystem, SparseMatrixCSR, generate_laplacian_1d, generate_random_spd,
                     matvec, random_vector)
from .solver import SolverConfig, StopReason, solve, steepest_descent_solve

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_MAX_ITER = 3
EXIT_BREAKDOWN = 4
EXIT_CHECK_FAILED = 5

# x_true is drawn from its own SplitMix64 stream so it never shares draws with Q
XTRUE_STREAM = 0x5851F42D4C957F2D

STOP_EXIT = {
    StopReason.CONVERGED: EXIT_OK,
    StopReason.ZERO_RHS: EXIT_OK,
    StopReason.MAX_ITERATIONS: EXIT_MAX_ITER,
    StopReason.BREAKDOWN: EXIT_BREAKDOWN,
}

CSV_HEADER = "family,n,method,iterations,final_relres,wall_ms"


def _add_system_flags(p):
    p.add_argument("--matrix", required=True, help="Matrix Market file")
    p.add_argument("--rhs", required=True, help="vector file for b")
    p.add_argument("--x0", help="vector file for the initial guess (default: zero)")
    p.add_argument("--tol", type=float, default=1e-10, help="relative residual tolerance")
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap (default: 2n)")
    p.add_argument("--true-residual-interval", type=int, default=0,
                   help="recompute r = b - Ax every K steps (0 = never)")
    p.add_argument("--report", help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conjgrad", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve Ax = b with conjugate gradients")
    _add_system_flags(p)
    p.add_argument("--x-out", help="write the final iterate here")

    p = sub.add_parser("diagnose", help="solve and check every CG identity on the trace")
    _add_system_flags(p)

    p = sub.add_parser("generate", help="write an SPD test matrix (and optionally b, x_true)")
    p.add_argument("family", choices=["laplacian1d", "random-spd"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond", type=float, default=100.0, help="condition number (random-spd)")
    p.add_argument("--out", required=True)
    p.add_argument("--rhs-out", help="write b = A x_true here")
    p.add_argument("--xtrue-out", help="write the seeded x_true here")

    p = sub.add_parser("bench", help="CG vs steepest descent iteration counts, as CSV")
    p.add_argument("--family", required=True, choices=["identity", "laplacian1d", "random-spd"])
    p.add_argument("--sizes", required=True, help="comma-separated list of n")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond", type=float, default=100.0, help="condition number (random-spd)")
    p.add_argument("--max-iter", type=int, default=None, help="iteration cap (default: 20 n^2)")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.add_argument("--no-timing", action="store_true",
                   help="write wall_ms as 0 so output is byte-reproducible")
    return parser


def _load_system(args):
    matrix = mmio.read_matrix_market(args.matrix)
    rhs = mmio.read_vector(args.rhs)
    mmio.check_dimensions(matrix, rhs)
    x0 = None
    if args.x0:
        x0 = mmio.read_vector(args.x0)
        mmio.check_dimensions(matrix, x0, "x0")
    return LinearSystem(matrix, rhs), x0


def _config(args, parser):
    try:
        return SolverConfig(tol_rel=args.tol, max_iter=args.max_iter,
                            true_residual_check_interval=args.true_residual_interval)
    except CGError as exc:
        parser.error(str(exc))


def summary_line(report) -> str:
    words = {
        StopReason.CONVERGED: "converged",
        StopReason.ZERO_RHS: "converged",
        StopReason.MAX_ITERATIONS: "stopped at iteration cap",
        StopReason.BREAKDOWN: "breakdown",
    }
    return (f"{words[report.stop_reason]} in {report.iterations} iterations, "
            f"||r||/||b|| = {report.relative_residual:.6e}")


def cmd_solve(args, parser) -> int:
    config = _config(args, parser)
    system, x0 = _load_system(args)
    report = solve(system, x0, config)
    if args.report:
        mmio.write_report(report, None, args.report)
    if args.x_out:
        mmio.write_vector(report.x, args.x_out)
    print(summary_line(report))
    return STOP_EXIT[report.stop_reason]


def format_checks(inv) -> str:
    lines = [f"{'check':<24} {'violation':>12} {'threshold':>10}  status"]
    for c in inv.checks:
        lines.append(f"{c.name:<24} {c.violation:>12.3e} {c.threshold:>10.0e}  {c.status}")
    return "\n".join(lines)


def cmd_diagnose(args, parser) -> int:
    config = _config(args, parser)
    system, x0 = _load_system(args)
    inv = run_all(system, config, x0)
    print(format_checks(inv))
    print(summary_line(inv.solve_report))
    if args.report:
        mmio.write_report(inv.solve_report, inv, args.report)
    return _diag_exit(inv)


def _diag_exit(inv) -> int:
    failed = [c.name for c in inv.checks if c.status == FAIL]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_generate(args, parser) -> int:
    if args.n < 1 or (args.family == "laplacian1d" and args.n < 2):
        parser.error(f"--n {args.n} is too small for {args.family}")
    if args.family == "random-spd" and not args.cond >= 1.0:
        parser.error("--cond must be >= 1")
    if args.family == "laplacian1d":
        matrix = generate_laplacian_1d(args.n)
    else:
        matrix = generate_random_spd(args.n, args.seed, args.cond)
    mmio.write_matrix_market(matrix, args.out)
    if args.rhs_out or args.xtrue_out:
        x_true = random_vector(args.n, args.seed ^ XTRUE_STREAM)
        if args.xtrue_out:
            mmio.write_vector(x_true, args.xtrue_out)
        if args.rhs_out:
            mmio.write_vector(matvec(matrix, x_true), args.rhs_out)
    return EXIT_OK


def bench_matrix(family, n, seed, cond):
    if family == "identity":
        return SparseMatrixCSR.from_dense(np.eye(n))
    if family == "laplacian1d":
        return generate_laplacian_1d(n)
    return generate_random_spd(n, seed, cond)


def bench_rows(family, sizes, tol, seed=0, cond=100.0, max_iter=None, timing=True):
    """Yield one CSV row per (size, method)."""
    for n in sizes:
        system = LinearSystem(bench_matrix(family, n, seed, cond), random_vector(n, seed))
        config = SolverConfig(tol_rel=tol, max_iter=max_iter or 20 * n * n)
        for method, run in (("cg", solve), ("sd", steepest_descent_solve)):
            t0 = time.perf_counter()
            report = run(system, None, config)
            ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
            yield (f"{family},{n},{method},{report.iterations},"
                   f"{report.relative_residual:.6e},{ms:.3f}")


def cmd_bench(args, parser) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        parser.error(f"--sizes must be comma-separated integers, got {args.sizes!r}")
    if not sizes or min(sizes) < (2 if args.family == "laplacian1d" else 1):
        parser.error("--sizes holds an invalid dimension")
    if not args.tol > 0 or (args.max_iter is not None and args.max_iter < 1):
        parser.error("--tol must be > 0 and --max-iter >= 1")
    if args.family == "random-spd" and not args.cond >= 1.0:
        parser.error("--cond must be >= 1")
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in bench_rows(args.family, sizes, args.tol, args.seed, args.cond, args.max_iter,
                          timing=not args.no_timing):
        out.write(row + "\n")
    if args.csv:
        mmio._write_text(args.csv, out.getvalue())
    else:
        sys.stdout.write(out.getvalue())
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "diagnose": cmd_diagnose, "generate": cmd_generate,
            "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, parser)
    except CGError as exc:
        print(f"conjgrad {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
