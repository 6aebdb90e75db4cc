"""Acceptance criteria, one test each; every test records a PASS/FAIL line in the terminal summary."""

import functools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, desk, desk_solution, solve_plan
from oracles import as_inequalities, brute_force_min_cost_flow, crf_annuity, random_lp, vertex_enumeration
from test_pipeline import _random_instance, topo
from test_solve import build_random

from h2plan.assemble import build_planning_lp, cost_breakdown, extract_solution
from h2plan.chain import e2h_coefficient, ec_output
from h2plan.core import amortized_cost
from h2plan.flex import relaxation_gap
from h2plan.mps import export_model, read_model
from h2plan.pareto import frontier
from h2plan.pipeline import PipelinePlan, pipeline_cost, plan_pipelines
from h2plan.scenarios import builtin_scenario
from h2plan.solve import SolverOptions, solve

GAMMAS = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
ABLATIONS = ((), ("COP", "HS"), ("FC", "HT"))


def record(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
    return ok


def tu_generation(sol):
    return sum(float(np.sum(sol.get("P", rid, t.id))) for rid, t in sol.techs_of("TU", "CHP"))


@functools.lru_cache(maxsize=None)
def solved_instances():
    """Every cost-mode instance the acceptance suite solves, by label."""
    out = {f"desk gamma={g}": desk_solution(rps_gamma=g if g else None) for g in GAMMAS}
    for abl in ABLATIONS[1:]:
        out[f"desk gamma=1 without {'+'.join(abl)}"] = desk_solution(rps_gamma=1.0, ablation=abl)
    out["demo"] = solve_plan(builtin_scenario("demo"))
    out["validation"] = solve_plan(builtin_scenario("validation"))
    return out


def test_criterion_1_relaxation_validation():
    t_start = time.perf_counter()
    sc = builtin_scenario("validation")
    relaxed_model = build_planning_lp(sc, commitment="cluster")
    exact_model = build_planning_lp(sc, commitment="milp", modules=2)
    t0 = time.perf_counter()
    r = solve(relaxed_model.lp)
    t_lp = time.perf_counter() - t0
    t0 = time.perf_counter()
    e = solve(exact_model.lp, SolverOptions(mip_gap=1e-5))
    t_milp = time.perf_counter() - t0
    total = time.perf_counter() - t_start
    assert r.ok and e.ok
    gap = relaxation_gap(extract_solution(relaxed_model, r), extract_solution(exact_model, e))
    speedup = t_milp / t_lp
    ok = (gap.max_relative <= 0.02 and r.objective <= e.objective * (1 + 1e-9)
          and speedup >= 10 and total < 60)
    record(1, ok, f"max tech gap {gap.max_relative:.3%}, relaxed {r.objective:.1f} <= MILP {e.objective:.1f}, "
                  f"speedup {speedup:.1f}x, total {total:.1f}s")
    assert gap.max_relative <= 0.02
    assert r.objective <= e.objective * (1 + 1e-9)
    assert speedup >= 10
    assert total < 60


def test_criterion_2_balance_residuals():
    worst = 0.0
    cyc = 0.0
    failures = []
    for label, sol in solved_instances().items():
        sc = sol.scenario
        peaks = {
            "electric": max(float(np.max(r.electric_demand)) for r in sc.regions),
            "heat": max(float(np.max(r.heat_demand)) for r in sc.regions),
            "hydrogen": max(float(np.max(r.hydrogen_demand)) for r in sc.regions),
        }
        for name, res in sol.residuals.items():
            rel = float(np.max(np.abs(res))) / max(peaks[name], 1e-12)
            worst = max(worst, rel)
            if rel > 1e-6:
                failures.append(f"{label}/{name}")
        for (q, _, _), v in sol.series.items():
            if q == "Hc" and np.any(v < 0):
                failures.append(f"{label}/heat curtailment")
            if q == "soc":
                err = abs(v[-1] - v[0]) / max(1.0, float(np.max(v)))
                cyc = max(cyc, err)
                if err > 1e-9:
                    failures.append(f"{label}/soc cycle")
    record(2, not failures, f"{len(solved_instances())} instances, worst relative residual {worst:.2e}, "
                            f"worst soc cycle error {cyc:.2e}" + (f"; failing {failures}" if failures else ""))
    assert not failures


def test_criterion_3_accounting_identity():
    worst = 0.0
    for sol in solved_instances().values():
        bd = cost_breakdown(sol)
        worst = max(worst, abs(bd["total"] - sol.objective) / max(1.0, abs(sol.objective)))
    record(3, worst <= 1e-8, f"worst relative mismatch {worst:.2e}")
    assert worst <= 1e-8


def test_criterion_4_pareto_frontier():
    sc = desk()
    t0 = time.perf_counter()
    fr = frontier(sc, 8)
    elapsed = time.perf_counter() - t0
    direct_cost = solve(build_planning_lp(sc, mode="min-cost").lp).objective
    direct_co2 = solve(build_planning_lp(sc, mode="min-co2").lp).objective
    pts = fr.points
    cost_err = abs(pts[0].cost - direct_cost) / abs(direct_cost)
    co2_err = abs(pts[-1].emissions - direct_co2) / max(1.0, abs(direct_co2))
    dominated = fr.dominated()
    monotone = all(b.cost >= a.cost * (1 - 1e-9) for a, b in zip(pts, pts[1:]))
    ok = (len(pts) == 8 and all(p.ok for p in pts) and cost_err <= 1e-6 and co2_err <= 1e-6
          and not dominated and monotone and elapsed < 300)
    record(4, ok, f"8 points in {elapsed:.1f}s, anchor errors {cost_err:.1e}/{co2_err:.1e}, "
                  f"{len(dominated)} dominated, cost monotone {monotone}")
    assert ok


def test_criterion_5_pipeline_oracle():
    worst_obj = worst_res = 0.0
    for seed in range(100, 140):
        nodes, edges, lengths, inj = _random_instance(seed)
        plan = plan_pipelines(inj, topo([(a, b, l) for (a, b), l in zip(edges, lengths)]))
        expected = sum(brute_force_min_cost_flow(nodes, edges, lengths, {r: inj[r][t] for r in nodes})
                       for t in range(plan.T))
        worst_obj = max(worst_obj, abs(plan.objective - expected) / max(expected, 1e-12))
        worst_res = max(worst_res, max(float(np.max(np.abs(v))) for v in plan.residuals().values()))
    plan = PipelinePlan([("A", "B")], np.array([100.0]), np.array([[1_000_000.0]]), {})
    cost = pipeline_cost(plan)
    ok = worst_obj <= 1e-6 and worst_res <= 1e-9 and abs(cost - 8280.0) <= 1.0
    record(5, ok, f"40 instances, worst objective error {worst_obj:.1e}, worst residual {worst_res:.1e} kg, "
                  f"worked example ${cost:.2f}")
    assert ok


def test_criterion_6_chain_ablation():
    full = desk_solution(rps_gamma=1.0)
    parts = []
    ok = True
    for abl in ABLATIONS[1:]:
        sol = desk_solution(rps_gamma=1.0, ablation=abl)
        c_ok = sol.objective >= full.objective * (1 - 1e-9)
        k_ok = sol.renewable_curtailment >= full.renewable_curtailment * (1 - 1e-9)
        ok &= c_ok and k_ok
        parts.append(f"-{'+'.join(abl)}: cost {sol.objective / full.objective:.3f}x, "
                     f"curtailment {sol.renewable_curtailment:.0f} vs {full.renewable_curtailment:.0f} MWh")
    record(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_rps_sweep():
    tu = [tu_generation(desk_solution(rps_gamma=g if g else None)) for g in GAMMAS]
    last = desk_solution(rps_gamma=1.0)
    monotone = all(b <= a * (1 + 1e-9) + 1e-6 for a, b in zip(tu, tu[1:]))
    ok = monotone and tu[-1] <= 1e-6 and last.co2 <= 1e-6
    record(7, ok, "TU MWh by gamma " + ", ".join(f"{g}:{v:.0f}" for g, v in zip(GAMMAS, tu))
           + f"; CO2 at gamma=1 {last.co2:.2e} t")
    assert ok


def test_criterion_8_unit_anchors():
    a = amortized_cost(450, 25, 0.07)
    m, h = ec_output(1.0, 0.835, 0.8)
    ok = (abs(a - 38.61) <= 0.01 and math.isclose(a, crf_annuity(450, 25, 0.07), rel_tol=1e-12)
          and e2h_coefficient(120) == 30.0 and abs(m - 25.05) <= 1e-3 and abs(h - 0.132) <= 1e-3)
    record(8, ok, f"annuity {a:.4f}, beta {e2h_coefficient(120)}, SOEC 1 MW -> ({m:.4f} kg/h, {h:.4f} MW)")
    assert ok


def test_criterion_9_solver_trust(tmp_path):
    worst = 0.0
    mismatched = []
    for seed in range(100):
        lp, (c, A, senses, rhs, lb, ub) = build_random(seed)
        status, value = vertex_enumeration(c, *as_inequalities(A, senses, rhs, lb, ub))
        res = solve(lp)
        if res.status != status:
            mismatched.append(seed)
        elif value is not None:
            worst = max(worst, abs(res.objective - value) / max(1.0, abs(value)))
        back = read_model(export_model(lp, tmp_path / f"{seed}.mps"))
        same = (np.array_equal(back.c, lp.c) and np.array_equal(back.A.toarray(), lp.A.toarray())
                and np.array_equal(back.rhs, lp.rhs) and np.array_equal(back.lb, lp.lb)
                and np.array_equal(back.ub, lp.ub) and list(back.sense) == list(lp.sense)
                and back.var_names == lp.var_names and back.row_names == lp.row_names)
        if not same:
            mismatched.append(f"mps{seed}")
    ok = not mismatched and worst <= 1e-6
    record(9, ok, f"100 LPs (<= 8 vars), worst relative error {worst:.1e}, MPS round trips bit-identical"
           + (f"; mismatches {mismatched}" if mismatched else ""))
    assert ok
