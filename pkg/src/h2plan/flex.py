"""Clustered unit commitment for committed fleets, and its binary counterpart.

A fleet is tracked by its online capacity O, started capacity U and stopped
capacity S (all MW) instead of per-unit binaries. The exact per-module
formulation shares the same row generator with O, U, S replaced by
``size * binary``; summing its rows over modules yields the cluster rows, so
every binary schedule aggregates to a feasible cluster schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import Capacity
from .core import FlexParams
from .solve import EQ, LE, LPBuilder

__all__ = [
    "ClusterVariables", "ModuleFleet", "cluster_constraints", "cluster_row_count",
    "milp_constraints", "GapReport", "relaxation_gap",
]


@dataclass
class ClusterVariables:
    O: np.ndarray
    U: np.ndarray
    S: np.ndarray
    P: np.ndarray
    capacity: Capacity
    rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))


@dataclass
class ModuleFleet:
    module_size: float
    module_count: int
    v: list[np.ndarray]  # on
    y: list[np.ndarray]  # start
    z: list[np.ndarray]  # stop
    p: list[np.ndarray]


def cluster_row_count(T: int, wrap: bool) -> int:
    """Rows emitted by :func:`cluster_constraints` for one fleet."""
    return 11 * T if wrap else 11 * T - 4


def _commitment_rows(b: LPBuilder, prefix: str, T: int, wrap: bool, flex: FlexParams,
                     on, up, down, P, unit: float, cap: Capacity, initial_on: float,
                     capacity_rows: bool) -> list[np.ndarray]:
    """Rows over online/start/stop expressions ``unit * on`` etc. (ids are 0-based hours)."""
    hrs = np.arange(T)
    out = []
    lo, hi = flex.min_load, flex.max_load
    ru, rd = flex.ramp_up, flex.ramp_down
    su, sd = flex.startup_ramp, flex.shutdown_ramp
    names = lambda tag, ts: [f"{tag}.{prefix}.{t + 1}" for t in ts]  # noqa: E731

    # online balance
    if wrap:
        out.append(b.add_rows([(unit, on), (-unit, on[(hrs - 1) % T]), (-unit, up), (unit, down)],
                              EQ, 0.0, names("bal", hrs)))
    else:
        out.append(b.add_rows([(unit, on[:1]), (-unit, up[:1]), (unit, down[:1])],
                              EQ, initial_on, names("bal", hrs[:1])))
        out.append(b.add_rows([(unit, on[1:]), (-unit, on[:-1]), (-unit, up[1:]), (unit, down[1:])],
                              EQ, 0.0, names("bal", hrs[1:])))
    if capacity_rows:
        for tag, ids in (("oncap", on), ("upcap", up), ("dncap", down)):
            out.append(b.add_rows([(unit, ids), (-cap.scale, cap.var)], LE, cap.scale * cap.existing,
                                  names(tag, hrs)))
    # load range
    out.append(b.add_rows([(lo * unit, on), (-1.0, P)], LE, 0.0, names("minld", hrs)))
    out.append(b.add_rows([(1.0, P), (-hi * unit, on)], LE, 0.0, names("maxld", hrs)))

    # start/stop hour output cap
    nxt = hrs + 1
    has_next = nxt < T
    if wrap:
        nxt = nxt % T
        has_next[:] = True
    stop_next = np.where(has_next, down[np.minimum(nxt, T - 1)], -1)
    out.append(b.add_rows(
        [(1.0, P), (-hi * unit, on), ((hi - su) * unit, up), (hi * unit - sd * unit, stop_next)],
        LE, 0.0, names("ssout", hrs)))

    # ramps
    rt = hrs if wrap else hrs[1:]
    pv = (rt - 1) % T
    out.append(b.add_rows(
        [(1.0, P[rt]), (-1.0, P[pv]), (-ru * unit, on[rt]), ((ru - su) * unit, up[rt]), (lo * unit, down[rt])],
        LE, 0.0, names("rampup", rt)))
    out.append(b.add_rows(
        [(1.0, P[pv]), (-1.0, P[rt]), (-rd * unit, on[rt]), (rd * unit + lo * unit, up[rt]), (-sd * unit, down[rt])],
        LE, 0.0, names("rampdn", rt)))

    # minimum up / down time
    mt = hrs if wrap else hrs[:-1]
    for tag, min_time, stopper, history, sign_cap in (
        ("minup", flex.min_up, down, up, False),
        ("mindn", flex.min_down, up, down, True),
    ):
        terms: list[tuple] = [(unit, stopper[(mt + 1) % T])]
        terms.append(((unit if sign_cap else -unit), on[mt]))
        depth = max(0, min(int(min_time) - 1, T - 1))
        for tau in range(depth):
            idx = mt - tau
            ids = np.where(idx >= 0, history[idx % T], -1) if not wrap else history[idx % T]
            terms.append((unit, ids))
        if sign_cap:
            terms.append((-cap.scale, cap.var))
            rhs = cap.scale * cap.existing
        else:
            rhs = 0.0
        out.append(b.add_rows(terms, LE, rhs, names(tag, mt)))
    return out


def cluster_constraints(b: LPBuilder, prefix: str, flex: FlexParams, T: int, wrap: bool,
                        capacity: Capacity, initial_online: float = 0.0) -> ClusterVariables:
    """Create O/U/S/P series for one fleet and emit its commitment rows.

    ``initial_online`` is the online capacity before hour 1 and is used only
    when ``wrap`` is false.
    """
    if T < 2:
        raise ValueError("need at least two hours")
    hours = range(1, T + 1)
    O = b.add_vars([f"O.{prefix}.{t}" for t in hours])
    U = b.add_vars([f"U.{prefix}.{t}" for t in hours])
    S = b.add_vars([f"S.{prefix}.{t}" for t in hours])
    P = b.add_vars([f"P.{prefix}.{t}" for t in hours])
    rows = _commitment_rows(b, prefix, T, wrap, flex, O, U, S, P, 1.0, capacity, initial_online, True)
    return ClusterVariables(O, U, S, P, capacity, np.concatenate(rows))


def milp_constraints(b: LPBuilder, prefix: str, flex: FlexParams, module_size: float, module_count: int,
                     T: int, wrap: bool, cluster: ClusterVariables | None = None,
                     initial_on: np.ndarray | None = None) -> ModuleFleet:
    """Per-module on/start/stop binaries with the same operating rules.

    When ``cluster`` is given, its O/U/S/P are tied to the module aggregates.
    """
    if module_size <= 0 or module_count < 1:
        raise ValueError("module size must be positive and count >= 1")
    init = np.zeros(module_count) if initial_on is None else np.asarray(initial_on, dtype=float)
    hours = range(1, T + 1)
    fleet = ModuleFleet(module_size, module_count, [], [], [], [])
    unit_cap = Capacity(existing=module_size)
    for k in range(module_count):
        pk = f"{prefix}#{k}"
        v = b.add_vars([f"v.{pk}.{t}" for t in hours], 0.0, 1.0, integer=True)
        y = b.add_vars([f"y.{pk}.{t}" for t in hours], 0.0, 1.0, integer=True)
        z = b.add_vars([f"z.{pk}.{t}" for t in hours], 0.0, 1.0, integer=True)
        p = b.add_vars([f"p.{pk}.{t}" for t in hours])
        _commitment_rows(b, pk, T, wrap, flex, v, y, z, p, module_size, unit_cap,
                         module_size * init[k], capacity_rows=False)
        b.add_rows([(1.0, y), (1.0, z)], LE, 1.0, [f"yz.{pk}.{t}" for t in hours])
        fleet.v.append(v)
        fleet.y.append(y)
        fleet.z.append(z)
        fleet.p.append(p)
    if cluster is not None:
        s = module_size
        for tag, agg, parts, coef in (("lnkO", cluster.O, fleet.v, s), ("lnkU", cluster.U, fleet.y, s),
                                      ("lnkS", cluster.S, fleet.z, s), ("lnkP", cluster.P, fleet.p, 1.0)):
            terms = [(1.0, agg)] + [(-coef, ids) for ids in parts]
            b.add_rows(terms, EQ, 0.0, [f"{tag}.{prefix}.{t}" for t in hours])
    return fleet


# --------------------------------------------------------------------------
# relaxation quality


@dataclass
class GapReport:
    totals_relaxed: dict
    totals_exact: dict
    relative: dict
    max_relative: float
    objective_relaxed: float
    objective_exact: float

    @property
    def objective_gap(self) -> float:
        scale = max(abs(self.objective_exact), abs(self.objective_relaxed), 1e-12)
        return (self.objective_exact - self.objective_relaxed) / scale


def _rel(a: float, b: float, floor: float) -> float:
    scale = max(abs(a), abs(b))
    if scale <= floor:
        return 0.0
    return abs(a - b) / scale


def relaxation_gap(relaxed, exact, floor: float = 1e-6) -> GapReport:
    """Compare per-technology energy totals of two solutions of the same instance.

    Totals below ``floor`` MWh on both sides count as zero gap.
    """
    if relaxed.fingerprint_base != exact.fingerprint_base:
        raise ValueError("solutions come from different instances")
    a, b = relaxed.technology_totals(), exact.technology_totals()
    keys = sorted(set(a) | set(b))
    rel = {k: _rel(a.get(k, 0.0), b.get(k, 0.0), floor) for k in keys}
    return GapReport(a, b, rel, max(rel.values(), default=0.0), relaxed.objective, exact.objective)
