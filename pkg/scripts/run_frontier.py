"""Cost-emission frontier on a built-in instance; writes frontier.csv and prints reduction costs."""

import argparse
from pathlib import Path

from h2plan.pareto import frontier
from h2plan.scenarios import builtin_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--scenario", default="desk")
    ap.add_argument("--hours", type=int, default=96)
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--baseline", choices=("min-cost", "min-co2"), default="min-cost")
    ap.add_argument("--out", default="runs/frontier")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fr = frontier(builtin_scenario(args.scenario, hours=args.hours), args.points, baseline=args.baseline)
    fr.write_csv(out / "frontier.csv")
    for p in fr.points:
        print(f"{p.emissions:14.1f} t  {p.cost:16.1f} USD  {p.reduction_cost:10.2f} USD/t")


if __name__ == "__main__":
    main()
