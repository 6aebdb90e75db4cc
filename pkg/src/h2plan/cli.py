"""Command-line runner: ``h2plan prep|plan|pareto|pipelines|validate|sweep|report``.

Every command writes ``manifest.json`` into its output directory. Failures
print a JSON error object on stderr (and to ``error.json`` when an output
directory is known) and exit nonzero.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .assemble import build_planning_lp, extract_solution, scenario_fingerprint
from .core import ScenarioConfig, ScenarioError, load_scenario, write_series_csv
from .flex import relaxation_gap
from .pareto import frontier
from .pipeline import plan_pipelines, pipeline_cost
from .prep import WEATHER_HEADER, process_region, read_weather_csv
from .report import residual_table, write_plan, write_report
from .scenarios import BUILTIN, builtin_scenario
from .solve import SolverError, SolverOptions, solve

CONFIG_PATH_ENV = "H2PLAN_CONFIG_PATH"
VALIDATION_MIP_GAP = 1e-5

log = logging.getLogger("h2plan")


class CommandError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# scenario lookup and manifests


def resolve_scenario(ref: str, seed: int | None = None, hours: int | None = None) -> ScenarioConfig:
    """A file path, a name found on $H2PLAN_CONFIG_PATH, or a built-in instance name."""
    p = Path(ref)
    if p.is_file():
        return load_scenario(p)
    for d in filter(None, os.environ.get(CONFIG_PATH_ENV, "").split(os.pathsep)):
        for name in (ref, f"{ref}.yaml", f"{ref}.yml", f"{ref}.json"):
            cand = Path(d) / name
            if cand.is_file():
                return load_scenario(cand)
    if ref in BUILTIN:
        kw = {}
        if seed is not None:
            kw["seed"] = seed
        if hours is not None:
            kw["hours"] = hours
        return builtin_scenario(ref, **kw)
    raise CommandError(f"scenario {ref!r} is neither a file, a name on ${CONFIG_PATH_ENV}, "
                       f"nor a built-in ({', '.join(sorted(BUILTIN))})")


def input_hash(scenario: ScenarioConfig) -> str:
    return scenario_fingerprint(scenario)


def write_manifest(out: Path, command: str, args: argparse.Namespace, scenario: ScenarioConfig | None,
                   options: SolverOptions | None = None, name: str = "manifest.json") -> Path:
    manifest = {
        "tool": "h2plan",
        "version": __version__,
        "command": command,
        "scenario": getattr(args, "scenario", None),
        "seed": getattr(args, "seed", None),
        "hours": getattr(args, "hours", None),
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k not in ("func", "command", "scenario", "seed", "hours", "out")},
        "solver_options": dataclasses.asdict(options or SolverOptions()),
        "output_dir": str(out),
        "input_hash": input_hash(scenario) if scenario is not None else None,
    }
    path = out / name
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(run_dir: Path) -> dict:
    path = run_dir / "manifest.json"
    if not path.exists():
        raise CommandError(f"{run_dir} has no manifest.json; is it a run directory?")
    return json.loads(path.read_text())


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _solve_plan(scenario: ScenarioConfig, mode: str | None, epsilon: float | None, options: SolverOptions):
    model = build_planning_lp(scenario, mode=mode, epsilon=epsilon)
    res = solve(model.lp, options)
    if not res.ok:
        raise SolverError(f"scenario {scenario.name!r} ({model.mode}) returned {res.status}: {res.message}")
    return extract_solution(model, res)


# --------------------------------------------------------------------------
# commands


def cmd_prep(args) -> int:
    src = Path(args.weather)
    files = sorted(src.glob("*.csv")) if src.is_dir() else []
    if not files:
        raise CommandError(f"no weather files in {src}: expected one <region>.csv per region "
                           f"with header {','.join(WEATHER_HEADER)}")
    out = _out(args)
    summary = []
    for f in files:
        region = f.stem
        series = process_region(read_weather_csv(f), args.space_slope, args.hot_water)
        for name, values in series.items():
            write_series_csv(out / f"{region}_{name}.csv", values)
        summary.append([region, len(series["wind_cf"]), repr(float(np.mean(series["wind_cf"]))),
                        repr(float(np.mean(series["solar_cf"]))), repr(float(np.mean(series["heat_demand"])))])
        print(f"{region}: mean wind CF {np.mean(series['wind_cf']):.4f}, "
              f"mean solar CF {np.mean(series['solar_cf']):.4f}")
    _write_rows(out / "prep_summary.csv", ["region", "hours", "mean_wind_cf", "mean_solar_cf", "mean_heat_mw"], summary)
    write_manifest(out, "prep", args, None)
    return 0


def cmd_plan(args) -> int:
    sc = resolve_scenario(args.scenario, args.seed, args.hours)
    out = _out(args)
    opts = SolverOptions()
    sol = _solve_plan(sc, args.mode, args.epsilon, opts)
    write_plan(sol, out)
    write_manifest(out, "plan", args, sc, opts)
    table = residual_table(sol)
    for b, r, worst, rel, ok in table:
        print(f"{b:9s} {r:8s} max residual {worst:.3e} (rel {rel:.3e}) {'pass' if ok else 'FAIL'}")
    print(f"objective {sol.objective:.2f}  co2 {sol.co2:.2f} t")
    return 0 if all(row[-1] for row in table) else 3


def cmd_pareto(args) -> int:
    sc = resolve_scenario(args.scenario, args.seed, args.hours)
    out = _out(args)
    opts = SolverOptions()
    f = frontier(sc, args.points, opts)
    f.write_csv(out / "frontier.csv")
    rows = []
    for i, p in enumerate(f.points):
        if p.solution is None:
            continue
        for (r, k), v in p.solution.total_capacity.items():
            rows.append([i, r, k, repr(float(v))])
    _write_rows(out / "frontier_capacity.csv", ["point", "region", "technology", "total"], rows)
    write_manifest(out, "pareto", args, sc, opts)
    for p in f.points:
        print(f"eps {p.epsilon:14.3f}  {p.status:10s} cost {p.cost:16.2f}  co2 {p.emissions:14.3f}")
    return 0 if not f.gaps else 3


def _read_injection(path: Path) -> dict[str, np.ndarray]:
    vals: dict[str, list[tuple[int, float]]] = {}
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            vals.setdefault(row["region"], []).append((int(row["hour"]), float(row["kg_per_h"])))
    return {r: np.array([v for _, v in sorted(pts)]) for r, pts in vals.items()}


def cmd_pipelines(args) -> int:
    run = Path(args.run)
    manifest = read_manifest(run)
    if manifest.get("command") != "plan":
        raise CommandError(f"{run} is a {manifest.get('command')!r} run, not a plan run")
    ref = args.scenario or manifest["scenario"]
    sc = resolve_scenario(ref, manifest.get("seed"), manifest.get("hours"))
    if input_hash(sc) != manifest["input_hash"]:
        raise CommandError(f"scenario {ref!r} no longer matches the plan in {run} (input hash differs); re-run plan")
    plan = plan_pipelines(_read_injection(run / "hydrogen_injection.csv"), sc.topology)
    out = Path(args.out) if args.out else run
    out.mkdir(parents=True, exist_ok=True)
    plan.write_flows_csv(out / "pipeline_flows.csv")
    plan.write_capacity_csv(out / "pipeline_capacity.csv")
    args.scenario = ref
    # a plan directory keeps its own manifest
    write_manifest(out, "pipelines", args, sc, name="manifest.json" if out != run else "pipelines_manifest.json")
    print(f"pipelines: objective {plan.objective:.3f} kg km, transport cost {pipeline_cost(plan):.2f} USD")
    return 0


def cmd_validate(args) -> int:
    sc = resolve_scenario(args.scenario, args.seed, args.hours)
    out = _out(args)
    lp_opts = SolverOptions()
    milp_opts = SolverOptions(mip_gap=VALIDATION_MIP_GAP)
    relaxed_model = build_planning_lp(sc, commitment="cluster")
    t0 = time.perf_counter()
    r = solve(relaxed_model.lp, lp_opts)
    t_lp = time.perf_counter() - t0
    exact_model = build_planning_lp(sc, commitment="milp", modules=args.modules)
    t0 = time.perf_counter()
    e = solve(exact_model.lp, milp_opts)
    t_milp = time.perf_counter() - t0
    if not (r.ok and e.ok):
        raise SolverError(f"validation solves returned {r.status} / {e.status}")
    gap = relaxation_gap(extract_solution(relaxed_model, r), extract_solution(exact_model, e))
    _write_rows(out / "relaxation_gap.csv", ["technology", "relaxed", "exact", "relative_gap"],
                [[k, repr(gap.totals_relaxed[k]), repr(gap.totals_exact[k]), repr(v)] for k, v in gap.relative.items()])
    _write_rows(out / "relaxation_summary.csv", ["key", "value"], [
        ["relaxed_objective", repr(float(r.objective))], ["exact_objective", repr(float(e.objective))],
        ["max_relative_gap", repr(gap.max_relative)], ["objective_gap", repr(gap.objective_gap)],
        ["modules", args.modules], ["mip_gap", repr(VALIDATION_MIP_GAP)]])
    write_manifest(out, "validate", args, sc, milp_opts)
    print(f"max per-technology gap {gap.max_relative:.4%}; relaxed {r.objective:.2f} <= exact {e.objective:.2f}")
    print(f"wall clock: relaxed {t_lp:.2f} s, exact {t_milp:.2f} s ({t_milp / max(t_lp, 1e-9):.1f}x)")
    return 0 if gap.max_relative <= 0.02 and r.objective <= e.objective * (1 + 1e-9) else 3


def scale_parameter(scenario: ScenarioConfig, param: str, factor: float) -> ScenarioConfig:
    """Scale a numeric parameter; ``param`` is ``<tech id or kind>.<field>`` or ``price_book.<field>``.

    Technology fields are looked up in the cost, storage and conversion groups, in that order.
    """
    target, _, name = param.partition(".")
    if not name:
        raise CommandError(f"--param {param!r}: expected <technology>.<field>")
    if target == "price_book":
        pb = scenario.price_book
        if not hasattr(pb, name):
            raise CommandError(f"price book has no field {name!r}")
        return scenario.with_changes(price_book=dataclasses.replace(pb, **{name: getattr(pb, name) * factor}))
    techs, hit = [], False
    for t in scenario.technologies:
        if target not in (t.id, t.kind):
            techs.append(t)
            continue
        for group in ("cost", "storage", "conversion"):
            g = getattr(t, group)
            if g is not None and hasattr(g, name) and isinstance(getattr(g, name), (int, float)):
                t = dataclasses.replace(t, **{group: dataclasses.replace(g, **{name: getattr(g, name) * factor})})
                hit = True
                break
        techs.append(t)
    if not hit:
        raise CommandError(f"--param {param!r}: no technology {target!r} with numeric field {name!r}")
    return scenario.with_changes(technologies=tuple(techs))


def cmd_sweep(args) -> int:
    sc = resolve_scenario(args.scenario, args.seed, args.hours)
    out = _out(args)
    opts = SolverOptions()
    summary, caps = [], []
    for factor in (1.0 - args.delta, 1.0, 1.0 + args.delta):
        sol = _solve_plan(scale_parameter(sc, args.param, factor), args.mode, None, opts)
        summary.append([repr(factor), repr(float(sol.objective)), repr(float(sol.total_cost)), repr(float(sol.co2))])
        caps += [[repr(factor), r, k, repr(float(v))] for (r, k), v in sol.total_capacity.items()]
        print(f"{args.param} x {factor:.3f}: objective {sol.objective:.2f}, co2 {sol.co2:.2f} t")
    _write_rows(out / "sweep_summary.csv", ["scale", "objective", "total_cost_usd", "co2_tons"], summary)
    _write_rows(out / "sweep_capacity.csv", ["scale", "region", "technology", "total"], caps)
    base = {(r, k): float(v) for s, r, k, v in caps if s == repr(1.0)}
    deltas = [[s, r, k, repr(float(v) - base[(r, k)])] for s, r, k, v in caps if s != repr(1.0)]
    _write_rows(out / "sweep_delta.csv", ["scale", "region", "technology", "capacity_change"], deltas)
    write_manifest(out, "sweep", args, sc, opts)
    return 0


def cmd_report(args) -> int:
    run = Path(args.run)
    read_manifest(run)
    for p in write_report(run):
        print(p)
    return 0


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h2plan", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def scenario_args(p, default="desk"):
        p.add_argument("--scenario", default=default, help="file, name on $%s, or built-in" % CONFIG_PATH_ENV)
        p.add_argument("--seed", type=int, default=None, help="weather seed for built-in instances")
        p.add_argument("--hours", type=int, default=None, help="horizon for built-in instances")
        p.add_argument("--out", required=True)

    p = sub.add_parser("prep", help="capacity factors and heat demand from weather CSVs")
    p.add_argument("--weather", required=True, help="directory of <region>.csv weather files")
    p.add_argument("--out", required=True)
    p.add_argument("--space-slope", type=float, default=10.0, help="MW per degC below the set point")
    p.add_argument("--hot-water", type=float, default=50.0, help="MW")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("plan", help="solve one planning problem")
    scenario_args(p)
    p.add_argument("--mode", choices=("min-cost", "min-co2", "cost-under-cap"), default=None)
    p.add_argument("--epsilon", type=float, default=None, help="CO2 cap (t) for cost-under-cap")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("pareto", help="cost-emission frontier")
    scenario_args(p)
    p.add_argument("--points", type=int, default=8)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("pipelines", help="size hydrogen pipelines for a plan run")
    p.add_argument("--run", required=True, help="plan output directory")
    p.add_argument("--scenario", default=None, help="override the scenario recorded in the run manifest")
    p.add_argument("--out", default=None, help="defaults to the run directory")
    p.set_defaults(func=cmd_pipelines)

    p = sub.add_parser("validate", help="relaxed commitment vs binary modules")
    scenario_args(p, default="validation")
    p.add_argument("--modules", type=int, default=2)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="re-solve with one parameter scaled by 1 -/+ delta")
    scenario_args(p)
    p.add_argument("--param", required=True, help="e.g. HT.capital, EC.electric_eff, price_book.hydrogen")
    p.add_argument("--delta", type=float, default=0.3)
    p.add_argument("--mode", choices=("min-cost", "min-co2"), default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="SVG heatmaps, SOC chart and cost table for a plan run")
    p.add_argument("--run", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (CommandError, ScenarioError, SolverError, FileNotFoundError, ValueError, KeyError) as exc:
        err = {"command": args.command, "error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        out = getattr(args, "out", None)
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            (Path(out) / "error.json").write_text(json.dumps(err, indent=2, sort_keys=True) + "\n")
        return 2 if isinstance(exc, (CommandError, ScenarioError, FileNotFoundError)) else 1


if __name__ == "__main__":
    sys.exit(main())
