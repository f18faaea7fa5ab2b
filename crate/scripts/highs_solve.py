#!/usr/bin/env python3
"""Solve an LP-format model with HiGHS and print the result as JSON.

Usage: highs_solve.py MODEL.lp [OUT.json]

Output: {"status": ..., "objective": ..., "values": {name: value}}
"""

import json
import sys

import highspy


def main() -> int:
    if len(sys.argv) not in (2, 3):
        print(__doc__, file=sys.stderr)
        return 2
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.setOptionValue("mip_abs_gap", 0.0)
    if h.readModel(sys.argv[1]) != highspy.HighsStatus.kOk:
        print(f"cannot read {sys.argv[1]}", file=sys.stderr)
        return 1
    h.run()
    status = h.getModelStatus()
    out = {"status": h.modelStatusToString(status), "objective": None, "values": {}}
    if status == highspy.HighsModelStatus.kOptimal:
        lp = h.getLp()
        out["objective"] = h.getInfo().objective_function_value
        out["values"] = dict(zip(lp.col_names_, h.getSolution().col_value))
    text = json.dumps(out, indent=1)
    if len(sys.argv) == 3:
        with open(sys.argv[2], "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
