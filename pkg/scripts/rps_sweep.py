"""Solve the desk instance over a grid of renewable shares and tabulate cost, CO2, TU output and curtailment."""

import argparse
import csv
from pathlib import Path

import numpy as np

from h2plan.assemble import build_planning_lp, extract_solution
from h2plan.core import validate_scenario
from h2plan.scenarios import desk_document
from h2plan.solve import solve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--hours", type=int, default=96)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    ap.add_argument("--out", default="runs/rps_sweep.csv")
    args = ap.parse_args()

    rows = []
    for g in args.gammas:
        model = build_planning_lp(validate_scenario(desk_document(args.hours, rps_gamma=g)))
        res = solve(model.lp)
        if not res.ok:
            print(f"gamma {g}: {res.status}")
            continue
        sol = extract_solution(model, res)
        tu = sum(float(np.sum(sol.get("P", r, t.id))) for r, t in sol.techs_of("TU", "CHP"))
        rows.append([g, sol.objective, sol.co2, tu, sol.renewable_curtailment, sol.heat_curtailment])
        print(f"gamma {g:.2f}: cost {sol.objective:14.1f}  co2 {sol.co2:12.1f}  TU {tu:10.1f} MWh")

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "cost_usd", "co2_tons", "tu_mwh", "renewable_curtailment_mwh", "heat_curtailment_mwh"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
