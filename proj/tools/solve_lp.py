#!/usr/bin/env python3
"""Solve an exported LP file with HiGHS and print variable values as JSON.

Exit status 0 on an optimal solve, 2 when HiGHS is unavailable, 1 otherwise.
"""
import argparse
import json
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("lp")
    ap.add_argument("--out", help="write JSON here instead of stdout")
    ap.add_argument("--time-limit", type=float, default=300.0)
    args = ap.parse_args()

    try:
        import highspy
    except ImportError:
        print("highspy not installed", file=sys.stderr)
        return 2

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", args.time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print("could not read " + args.lp, file=sys.stderr)
        return 1
    h.run()
    status = h.modelStatusToString(h.getModelStatus())
    lp = h.getLp()
    values = list(h.getSolution().col_value)
    result = {
        "status": status,
        "objective": h.getInfo().objective_function_value,
        "values": dict(zip(lp.col_names_, values)),
    }
    text = json.dumps(result, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0 if status == "Optimal" else 1


if __name__ == "__main__":
    sys.exit(main())
