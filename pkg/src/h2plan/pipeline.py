"""Regional hydrogen transport after the main solve.

The planning model pools hydrogen system-wide. Here each region's hourly net
injection is routed over the pipeline corridors at least total ``length x
|flow|`` (one stacked LP, flows split into positive and negative parts).
Optimal flows are then recomputed on their support forest so that nodal
balances close to rounding error.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import HOURS_PER_YEAR, LHV_H2, Topology
from .defaults import PIPELINE_RATE_USD_PER_KM_GWH
from .solve import EQ, LPBuilder, SolverError, solve

FLOW_HEADER = ["from", "to", "hour", "flow_kg"]
CAPACITY_HEADER = ["from", "to", "capacity_kg_per_h", "cost_usd_per_year"]


class ImbalanceError(ValueError):
    pass


@dataclass
class PipelinePlan:
    corridors: list[tuple[str, str]]
    lengths: np.ndarray  # km
    flows: np.ndarray  # (corridor, hour), kg/h, positive from first to second region
    injections: dict[str, np.ndarray]

    @property
    def T(self) -> int:
        return self.flows.shape[1]

    @property
    def capacities(self) -> np.ndarray:
        """kg/h per corridor: peak absolute hourly flow."""
        return np.abs(self.flows).max(axis=1) if self.flows.size else np.zeros(len(self.corridors))

    @property
    def objective(self) -> float:
        """Sum over hours and corridors of length x |flow| (kg km)."""
        return float(np.sum(self.lengths[:, None] * np.abs(self.flows)))

    def flow(self, a: str, b: str) -> np.ndarray:
        for i, (x, y) in enumerate(self.corridors):
            if (x, y) == (a, b):
                return self.flows[i]
            if (x, y) == (b, a):
                return -self.flows[i]
        raise KeyError((a, b))

    def residuals(self) -> dict[str, np.ndarray]:
        """Injection minus net outflow per region and hour."""
        out = {}
        for rid, inj in self.injections.items():
            net = np.zeros(self.T)
            for i, (a, b) in enumerate(self.corridors):
                if a == rid:
                    net += self.flows[i]
                elif b == rid:
                    net -= self.flows[i]
            out[rid] = inj - net
        return out

    def corridor_costs(self, rate: float = PIPELINE_RATE_USD_PER_KM_GWH, lhv: float = LHV_H2) -> np.ndarray:
        gwh = np.abs(self.flows).sum(axis=1) * lhv / 3600.0 / 1000.0
        return rate * self.lengths * gwh

    def write_flows_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(FLOW_HEADER)
            for i, (a, b) in enumerate(self.corridors):
                for t in range(self.T):
                    w.writerow([a, b, t + 1, repr(float(self.flows[i, t]))])
        return path

    def write_capacity_csv(self, path: str | Path, rate: float = PIPELINE_RATE_USD_PER_KM_GWH,
                           lhv: float = LHV_H2) -> Path:
        """Capacities and transport cost scaled from the horizon to a full year."""
        path = Path(path)
        per_year = self.corridor_costs(rate, lhv) * HOURS_PER_YEAR / max(self.T, 1)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CAPACITY_HEADER)
            for (a, b), cap, cost in zip(self.corridors, self.capacities, per_year):
                w.writerow([a, b, repr(float(cap)), repr(float(cost))])
        return path


def pipeline_cost(plan: PipelinePlan, rate: float = PIPELINE_RATE_USD_PER_KM_GWH, lhv: float = LHV_H2) -> float:
    """Transport cost ($) of the plan's flows at ``rate`` $ per km per GWh of hydrogen energy."""
    if rate <= 0:
        raise ValueError("rate must be positive")
    return float(plan.corridor_costs(rate, lhv).sum())


def _injections(source) -> dict[str, np.ndarray]:
    if hasattr(source, "regional_hydrogen_injection"):
        return source.regional_hydrogen_injection()
    return {str(k): np.asarray(v, dtype=float) for k, v in source.items()}


def _tree_flows(nodes: list[str], edges: list[int], corridors, inj: dict[str, float]) -> dict[int, float] | None:
    """Exact flows on a forest by leaf elimination; None if the support has a cycle."""
    adj: dict[str, list[int]] = {n: [] for n in nodes}
    for e in edges:
        a, b = corridors[e]
        adj[a].append(e)
        adj[b].append(e)
    if len(edges) >= len(nodes):
        return None
    rem = dict(inj)
    deg = {n: len(adj[n]) for n in nodes}
    used: set[int] = set()
    flows: dict[int, float] = {}
    leaves = [n for n in nodes if deg[n] == 1]
    while leaves:
        n = leaves.pop()
        if deg[n] != 1:
            continue
        e = next(e for e in adj[n] if e not in used)
        used.add(e)
        a, b = corridors[e]
        other = b if n == a else a
        # positive flow runs a -> b
        flows[e] = rem[n] if n == a else -rem[n]
        rem[other] += rem[n]
        rem[n] = 0.0
        deg[n] -= 1
        deg[other] -= 1
        if deg[other] == 1:
            leaves.append(other)
    if len(used) != len(edges):
        return None
    return flows


def plan_pipelines(source, topology: Topology, tolerance: float = 1e-6) -> PipelinePlan:
    """Route hourly regional hydrogen surpluses to deficits at least length-weighted flow.

    ``source`` is a PlanSolution or a mapping region -> hourly injection (kg/h).
    Raises :class:`ImbalanceError` when injections do not sum to zero in an hour.
    """
    inj = _injections(source)
    regions = list(inj)
    T = len(next(iter(inj.values()))) if inj else 0
    total = sum(inj.values(), np.zeros(T))
    scale = 1.0 + sum(np.abs(v) for v in inj.values())
    bad = np.flatnonzero(np.abs(total) > tolerance * scale)
    if bad.size:
        h = int(bad[0]) + 1
        raise ImbalanceError(f"hour {h}: regional hydrogen injections sum to {total[bad[0]]:.6g} kg/h, not 0")
    corridors = [(a, b) for a, b in topology.hydrogen_adjacency if a in inj and b in inj]
    lengths = np.array([topology.pipeline_length(a, b) for a, b in corridors], dtype=float)
    flows = np.zeros((len(corridors), T))
    if not corridors or T == 0:
        if any(np.any(np.abs(v) > tolerance * scale) for v in inj.values()):
            raise ImbalanceError("regions with nonzero net hydrogen injection but no pipeline corridors")
        return PipelinePlan(corridors, lengths, flows, inj)

    b = LPBuilder("pipelines")
    plus, minus = [], []
    for a, c in corridors:
        plus.append(b.add_vars([f"mp.{a}-{c}.{t}" for t in range(1, T + 1)]))
        minus.append(b.add_vars([f"mm.{a}-{c}.{t}" for t in range(1, T + 1)]))
    for i in range(len(corridors)):
        b.add_objective(plus[i], lengths[i])
        b.add_objective(minus[i], lengths[i])
    for rid in regions:
        terms = []
        for i, (a, c) in enumerate(corridors):
            if a == rid:
                terms += [(1.0, plus[i]), (-1.0, minus[i])]
            elif c == rid:
                terms += [(-1.0, plus[i]), (1.0, minus[i])]
        b.add_rows(terms, EQ, inj[rid], [f"node.{rid}.{t}" for t in range(1, T + 1)])
    res = solve(b.build())
    if not res.ok:
        raise SolverError(f"pipeline routing returned {res.status}: the corridor graph cannot balance the regions")
    for i in range(len(corridors)):
        flows[i] = res.x[plus[i]] - res.x[minus[i]]

    # exact recomputation on the support forest of each hour
    for t in range(T):
        floor = 1e-9 * (1.0 + max(abs(v[t]) for v in inj.values()))
        support = [i for i in range(len(corridors)) if abs(flows[i, t]) > floor]
        exact = _tree_flows(regions, support, corridors, {r: float(inj[r][t]) for r in regions})
        if exact is not None:
            flows[:, t] = 0.0
            for i, v in exact.items():
                flows[i, t] = v
    return PipelinePlan(corridors, lengths, flows, inj)
