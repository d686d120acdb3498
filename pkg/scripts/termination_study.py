"""Iterations CG needs to reach a relative residual, against n and condition number.

In exact arithmetic the count is at most n; in double precision it grows past
n once the spectrum is spread out. Prints a table of max iterations over seeds.

    python scripts/termination_study.py --sizes 4,8,16,32,64 --conds 2,10,100,1e3,1e4
"""
import argparse

from conjgrad.linalg import LinearSystem, generate_random_spd, random_vector
from conjgrad.solver import SolverConfig, StopReason, solve


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="4,8,16,32,64")
    p.add_argument("--conds", default="2,10,100,1e3,1e4")
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--tol", type=float, default=1e-10)
    args = p.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    conds = [float(c) for c in args.conds.split(",")]

    print("n".rjust(5) + "".join(f"{c:>10g}" for c in conds))
    for n in sizes:
        cells = []
        for cond in conds:
            worst = 0
            for seed in range(args.seeds):
                system = LinearSystem(generate_random_spd(n, seed, cond),
                                      random_vector(n, seed + 1))
                report = solve(system, config=SolverConfig(tol_rel=args.tol, max_iter=50 * n))
                if report.stop_reason is not StopReason.CONVERGED:
                    worst = None
                    break
                worst = max(worst, report.iterations)
            mark = "" if worst is not None and worst <= n else "*"
            cells.append(f"{('-' if worst is None else worst)}{mark}".rjust(10))
        print(f"{n:5d}" + "".join(cells))
    print("* = more than n iterations (or no convergence within 50n)")


if __name__ == "__main__":
    main()
