"""Per-step agreement of the three beta formulas on one random SPD instance.

For every step prints the residual drop rho_{i+1}/rho_i, the largest pairwise
relative gap between the conjugacy-form, alpha-form and rho-ratio betas, and
the orthogonality defect |r_i . r_{i+1}| / rho_{i+1}. The first gap tracks the
last column: it is set by how orthogonal consecutive residuals actually are.

    python scripts/beta_chain_study.py --n 16 --seed 3 --cond 10
"""
import argparse

from conjgrad.diagnostics import beta_three_ways
from conjgrad.linalg import LinearSystem, dot, generate_random_spd, random_vector
from conjgrad.solver import SolverConfig, solve


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-10)
    args = p.parse_args()

    system = LinearSystem(generate_random_spd(args.n, args.seed, args.cond),
                          random_vector(args.n, args.seed + 1))
    report = solve(system, config=SolverConfig(tol_rel=args.tol, max_iter=20 * args.n,
                                               capture_trace=True))
    print(f"{report.stop_reason.value} after {report.iterations} iterations")
    print(f"{'i':>4} {'rho drop':>10} {'beta gap':>10} {'orth defect':>12}")
    tr = report.trace
    for prev, nxt in zip(tr, tr[1:]):
        b = beta_three_ways(prev, nxt, system.operator)
        scale = max(abs(v) for v in b) or 1.0
        gap = (max(b) - min(b)) / scale
        defect = abs(dot(prev.r, nxt.r)) / nxt.rho if nxt.rho else 0.0
        print(f"{prev.i:4d} {nxt.rho / prev.rho:10.2e} {gap:10.2e} {defect:12.2e}")


if __name__ == "__main__":
    main()
