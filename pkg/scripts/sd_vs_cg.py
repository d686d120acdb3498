"""Steepest descent vs CG iteration counts on 1D Laplacians, written as CSV.

    python scripts/sd_vs_cg.py --sizes 8,16,32,64,128 --tol 1e-8 > sd_vs_cg.csv
"""
import argparse
import sys

from conjgrad.cli import CSV_HEADER, bench_rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="8,16,32,64")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--family", default="laplacian1d")
    args = p.parse_args()
    sys.stdout.write(CSV_HEADER + "\n")
    for row in bench_rows(args.family, [int(s) for s in args.sizes.split(",")], args.tol):
        sys.stdout.write(row + "\n")


if __name__ == "__main__":
    main()
