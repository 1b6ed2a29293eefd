#!/usr/bin/env python3
"""Run HiGHS on an MPS file and write a "name value" solution file.

Usage: highs_solve.py MODEL.mps SOLUTION.sol [TIME_LIMIT] [GAP] [FEASTOL]

Command template for valign:
  python3 tools/highs_solve.py {mps} {sol} {timelimit} {gap} {feastol}
"""
import sys

import highspy


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    mps, sol = argv[1], argv[2]
    h = highspy.Highs()
    h.setOptionValue("output_flag", True)
    if len(argv) > 3:
        h.setOptionValue("time_limit", float(argv[3]))
    if len(argv) > 4:
        h.setOptionValue("mip_rel_gap", float(argv[4]))
    if len(argv) > 5:
        h.setOptionValue("primal_feasibility_tolerance", float(argv[5]))
        h.setOptionValue("mip_feasibility_tolerance", float(argv[5]))
    if h.readModel(mps) != highspy.HighsStatus.kOk:
        print("cannot read " + mps, file=sys.stderr)
        return 1
    h.run()

    status = h.getModelStatus()
    info = h.getInfo()
    has_point = info.primal_solution_status == 2
    S = highspy.HighsModelStatus
    if status == S.kOptimal:
        text = "optimal solution found"
    elif status in (S.kInfeasible, S.kUnboundedOrInfeasible):
        text = "infeasible"
    elif status == S.kTimeLimit:
        text = "time limit reached"
    else:
        text = h.modelStatusToString(status)

    lp = h.getLp()
    values = h.getSolution().col_value
    with open(sol, "w") as out:
        out.write("solution status: %s\n" % text)
        if has_point:
            out.write("objective value: %.17g\n" % info.objective_function_value)
            for name, v in zip(lp.col_names_, values):
                if v != 0.0:
                    out.write("%s %.17g\n" % (name, v))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
