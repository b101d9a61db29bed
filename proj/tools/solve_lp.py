#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and write `name value` lines.

Usage: solve_lp.py MODEL.lp SOLUTION.txt [--time-limit SECONDS]

Exit status: 0 optimal, 3 infeasible or no solution, 4 missing solver or I/O.
"""

import argparse
import sys


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    try:
        import highspy
    except ImportError:
        print("highspy is not installed", file=sys.stderr)
        return 4

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 1e-9)
    if h.readModel(args.model) != highspy.HighsStatus.kOk:
        print(f"cannot read {args.model}", file=sys.stderr)
        return 4
    h.run()
    status = h.getModelStatus()
    if status != highspy.HighsModelStatus.kOptimal:
        print(f"solver status: {h.modelStatusToString(status)}", file=sys.stderr)
        return 3

    lp = h.getLp()
    values = h.getSolution().col_value
    try:
        with open(args.solution, "w") as out:
            out.write(f"objective {h.getInfo().objective_function_value:.12g}\n")
            for name, v in zip(lp.col_names_, values):
                out.write(f"{name} {v:.12g}\n")
    except OSError as e:
        print(e, file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
