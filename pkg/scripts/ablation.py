"""Chain ablations at full renewable share: drop storage+compressor or turbine+fuel cell and compare."""

import argparse
import csv
from pathlib import Path

from h2plan.assemble import build_planning_lp, extract_solution
from h2plan.core import validate_scenario
from h2plan.scenarios import desk_document
from h2plan.solve import solve

CASES = {"full": [], "no_HS_COP": ["HS", "COP"], "no_HT_FC": ["HT", "FC"], "no_H2_demand": ["H2_DEMAND"]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hours", type=int, default=96)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--out", default="runs/ablation.csv")
    args = ap.parse_args()

    rows = []
    for name, links in CASES.items():
        doc = desk_document(args.hours, rps_gamma=args.gamma)
        doc["chain_ablation"] = links
        model = build_planning_lp(validate_scenario(doc))
        res = solve(model.lp)
        if not res.ok:
            print(f"{name}: {res.status}")
            continue
        sol = extract_solution(model, res)
        rows.append([name, sol.objective, sol.renewable_curtailment, sol.heat_curtailment])
        print(f"{name:14s} cost {sol.objective:14.1f}  curtailed {sol.renewable_curtailment:10.1f} MWh")

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["case", "cost_usd", "renewable_curtailment_mwh", "heat_curtailment_mwh"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
