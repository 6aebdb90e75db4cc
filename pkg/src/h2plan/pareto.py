"""Cost-emission frontier by the augmented epsilon-constraint method.

Both anchors are lexicographic optima: the min-cost anchor is the cheapest
plan with the least CO2 among cheapest plans, and the min-CO2 anchor is the
cheapest plan among the cleanest ones. Interior points cap emissions at a
uniform grid of levels and reward unused cap slack with a tiny weight so
that weakly dominated plans are never returned.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assemble import PlanSolution, build_planning_lp, extract_solution
from .core import ScenarioConfig
from .solve import SolveResult, SolverError, SolverOptions, solve

FRONTIER_HEADER = ["epsilon", "emissions_tons", "cost_usd", "reduction_cost_usd_per_ton"]
LEX_TOL = 1e-9  # relative slack when fixing the first objective of a lexicographic pair


@dataclass
class ParetoPoint:
    epsilon: float
    status: str
    emissions: float = math.nan
    cost: float = math.nan
    reduction_cost: float = math.nan
    solution: PlanSolution | None = None

    @property
    def ok(self) -> bool:
        return self.status == "OPTIMAL"


@dataclass
class ParetoFrontier:
    points: list[ParetoPoint]
    min_cost: PlanSolution
    min_co2: PlanSolution
    baseline: str = "min-cost"
    delta: float = 0.0
    gaps: list[float] = field(default_factory=list)  # epsilon levels that failed

    def feasible(self) -> list[ParetoPoint]:
        return [p for p in self.points if p.ok]

    def dominated(self, rel: float = 1e-6) -> list[tuple[int, int]]:
        """Pairs (i, j) where point j dominates point i beyond ``rel``."""
        pts = self.feasible()
        out = []
        for i, p in enumerate(pts):
            for j, q in enumerate(pts):
                if i == j:
                    continue
                tc = rel * max(1.0, abs(p.cost), abs(q.cost))
                te = rel * max(1.0, abs(p.emissions), abs(q.emissions))
                no_worse = q.cost <= p.cost + tc and q.emissions <= p.emissions + te
                better = q.cost < p.cost - tc or q.emissions < p.emissions - te
                if no_worse and better:
                    out.append((i, j))
        return out

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FRONTIER_HEADER)
            for p in self.points:
                w.writerow([_fmt(p.epsilon), _fmt(p.emissions), _fmt(p.cost), _fmt(p.reduction_cost)])
        return path


def _fmt(v: float) -> str:
    return "" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(float(v))


def _solve(scenario, options, **kw) -> tuple[SolveResult, object]:
    model = build_planning_lp(scenario, **kw)
    return solve(model.lp, options), model


def _require(res: SolveResult, what: str, scenario: ScenarioConfig) -> None:
    if not res.ok:
        raise SolverError(f"{what} for scenario {scenario.name!r} returned {res.status}: {res.message}")


def compute_anchors(scenario: ScenarioConfig, options: SolverOptions | None = None) -> tuple[PlanSolution, PlanSolution]:
    """(min-cost, min-CO2) plans, each refined lexicographically by the other objective."""
    res, model = _solve(scenario, options, mode="min-cost")
    _require(res, "min-cost solve", scenario)
    cost_star = res.objective
    res2, model2 = _solve(scenario, options, mode="min-co2",
                          cost_cap=cost_star + LEX_TOL * max(1.0, abs(cost_star)))
    _require(res2, "lexicographic CO2 refinement", scenario)
    min_cost = extract_solution(model2, res2)

    res, model = _solve(scenario, options, mode="min-co2")
    _require(res, "min-CO2 solve", scenario)
    e_star = res.objective
    res2, model2 = _solve(scenario, options, mode="cost-under-cap",
                          epsilon=e_star + LEX_TOL * max(1.0, abs(e_star)))
    _require(res2, "lexicographic cost refinement", scenario)
    min_co2 = extract_solution(model2, res2)
    return min_cost, min_co2


def _cost(sol: PlanSolution) -> float:
    from .assemble import cost_breakdown

    return cost_breakdown(sol)["total"]


def frontier(scenario: ScenarioConfig, n_points: int, options: SolverOptions | None = None,
             delta_rel: float = 1e-6, baseline: str = "min-cost") -> ParetoFrontier:
    """``n_points`` plans from the min-cost anchor down to the min-CO2 anchor.

    The augmentation weight is ``delta_rel`` times the cost range per ton of
    the emission range. ``baseline`` selects the anchor against which
    reduction costs ($/t) are measured.
    """
    if n_points < 2:
        raise ValueError("a frontier needs at least two points")
    if baseline not in ("min-cost", "min-co2"):
        raise ValueError("baseline must be 'min-cost' or 'min-co2'")
    hi_sol, lo_sol = compute_anchors(scenario, options)
    e_hi, e_lo = hi_sol.co2, lo_sol.co2
    c_hi, c_lo = _cost(hi_sol), _cost(lo_sol)
    span = e_hi - e_lo
    delta = delta_rel * abs(c_lo - c_hi) / span if span > 0 else 0.0

    points = [ParetoPoint(e_hi, "OPTIMAL", e_hi, c_hi, solution=hi_sol)]
    gaps = []
    if span > 1e-9 * max(1.0, e_hi):
        for eps in np.linspace(e_hi, e_lo, n_points)[1:-1]:
            res, model = _solve(scenario, options, mode="cost-under-cap", epsilon=float(eps), delta=delta)
            if not res.ok:
                points.append(ParetoPoint(float(eps), res.status))
                gaps.append(float(eps))
                continue
            sol = extract_solution(model, res)
            points.append(ParetoPoint(float(eps), "OPTIMAL", sol.co2, _cost(sol), solution=sol))
        points.append(ParetoPoint(e_lo, "OPTIMAL", e_lo, c_lo, solution=lo_sol))

    base = points[0] if baseline == "min-cost" else points[-1]
    for p in points:
        if p.ok:
            p.reduction_cost = _reduction_cost(base, p)
    return ParetoFrontier(points, hi_sol, lo_sol, baseline, delta, gaps)


def _reduction_cost(base: ParetoPoint, p: ParetoPoint) -> float:
    """Incremental cost per ton avoided relative to ``base``; NaN when nothing is avoided."""
    avoided = base.emissions - p.emissions
    if abs(avoided) <= 1e-9 * max(1.0, abs(base.emissions)):
        return math.nan
    return (p.cost - base.cost) / avoided
