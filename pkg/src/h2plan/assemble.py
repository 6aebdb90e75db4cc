"""Planning LP assembly, solution extraction and cost accounting.

The model co-optimises capacity (new builds on top of existing fleets) and
hourly operation of every device in every region. Electricity and heat
balance per region and hour; hydrogen balances once per hour across the
whole system, leaving the regional allocation to :mod:`h2plan.pipeline`.

Objective coefficients are in $ for the simulated horizon: annualised
capital and fixed O&M are multiplied by the scenario's capital weight,
operating terms are not.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .chain import Capacity, StorageHandles, e2h_coefficient, hs_cop_block, storage_block
from .core import (
    COMMITTED, ELECTRIC_STORAGE, OBJECTIVE_MODES, THERMAL, RegionSpec, ScenarioConfig, ScenarioError,
    TechnologySpec, amortized_cost, scenario_to_dict,
)
from .flex import ClusterVariables, ModuleFleet, cluster_constraints, milp_constraints
from .solve import EQ, GE, LE, LinearProgram, LPBuilder, SolveResult

COMPONENTS = ("TU", "WT", "PV", "ES", "EC", "HT", "FC", "HS", "COP", "EB", "HES", "L", "R")
_COMPONENT = {"TU": "TU", "CHP": "TU", "WT": "WT", "PV": "PV", "BES": "ES", "HPS": "ES", "EC": "EC",
              "HT": "HT", "FC": "FC", "HS": "HS", "COP": "COP", "EB": "EB", "HST": "HES"}
HEAT_KINDS = ("CHP", "EC", "HT", "FC", "EB")
LINE_LIFETIME = 40
LINE_RATE = 0.07


class InfeasibleScenario(ScenarioError):
    """Raised before solving when no capacity choice can meet a demand."""


# --------------------------------------------------------------------------
# parameters shared by model building and accounting


@dataclass(frozen=True)
class Rates:
    invest: float  # $ per unit of new capacity over the horizon
    fixed: float  # $ per unit of total capacity over the horizon
    energy: float  # $ per MWh (or per kg/h-hour) of throughput
    startup: float  # $ per MW started
    invest2: float = 0.0  # second capacity (storage energy)
    fixed2: float = 0.0


def unit_rates(tech: TechnologySpec, region: RegionSpec | None, w: float) -> Rates:
    c = tech.cost
    per = 1.0 if tech.kind in ("HS", "COP") else 1000.0
    energy = c.variable_om * 1000.0
    if tech.kind in THERMAL and tech.fuel is not None and region is not None:
        energy += region.fuel_prices[tech.fuel] / (tech.fuel_heat_content * tech.electric_eff)
    if tech.kind in ELECTRIC_STORAGE:
        s = tech.storage
        return Rates(
            invest=amortized_cost(s.power_capital, c.lifetime_years, c.interest_rate) * 1000.0 * w,
            fixed=c.fixed_om_fraction * s.power_capital * 1000.0 * w,
            energy=energy, startup=0.0,
            invest2=amortized_cost(s.energy_capital, c.lifetime_years, c.interest_rate) * 1000.0 * w,
            fixed2=c.fixed_om_fraction * s.energy_capital * 1000.0 * w,
        )
    return Rates(c.annualized * per * w, c.fixed_om * per * w, energy, c.startup_cost * 1000.0)


def line_rate(scenario: ScenarioConfig, capital: float) -> float:
    """$ per MW of new corridor capacity over the horizon."""
    lifetime, rate = LINE_LIFETIME, LINE_RATE
    for t in scenario.technologies:
        if t.kind == "LINE":
            lifetime, rate = t.cost.lifetime_years, t.cost.interest_rate
    return amortized_cost(capital, lifetime, rate) * 1000.0 * scenario.capital_weight


def heat_per_mw(tech: TechnologySpec) -> float:
    """Recovered heat (MW) per MW of the device's electric variable."""
    conv = tech.conversion
    eta = tech.electric_eff
    if tech.kind == "CHP":
        return conv.chp_heat_eff / eta
    if tech.kind == "EC":
        return conv.waste_heat_eff * (1.0 - eta)
    if tech.kind in ("HT", "FC"):
        return conv.waste_heat_eff * (1.0 - eta) / eta
    if tech.kind == "EB":
        return eta
    return 0.0


def hydrogen_per_mw(tech: TechnologySpec, lhv: float) -> float:
    """kg/h produced (EC) or consumed (HT/FC) per MW of electric variable."""
    beta = e2h_coefficient(lhv)
    if tech.kind == "EC":
        return beta * tech.electric_eff
    if tech.kind in ("HT", "FC"):
        return beta / tech.electric_eff
    return 0.0


def hydrogen_demand(scenario: ScenarioConfig, region: RegionSpec) -> np.ndarray:
    if not scenario.hydrogen_demand_active:
        return np.zeros(scenario.T)
    return np.asarray(region.hydrogen_demand, dtype=float)


def _credit(policy_value, cf: np.ndarray) -> np.ndarray:
    if isinstance(policy_value, str):
        return np.asarray(cf, dtype=float)
    return np.asarray(policy_value, dtype=float)


def _tag(s: str) -> str:
    return "_".join(str(s).split())


# --------------------------------------------------------------------------
# model containers


@dataclass
class Unit:
    tech: TechnologySpec
    region: RegionSpec
    key: str
    cap: Capacity
    P: np.ndarray | None = None
    cluster: ClusterVariables | None = None
    store: StorageHandles | None = None
    key2: str | None = None
    cap2: Capacity | None = None
    cop: TechnologySpec | None = None
    cop_load: float = 0.0
    modules: ModuleFleet | None = None


@dataclass
class LineUnit:
    a: str
    b: str
    new: int  # variable id or -1
    existing: float
    flow: np.ndarray
    rate: float


@dataclass(eq=False)
class PlanningModel:
    lp: LinearProgram
    scenario: ScenarioConfig
    mode: str
    epsilon: float | None
    commitment: str
    fingerprint: str
    fingerprint_base: str
    keys: list[tuple]
    index: dict[tuple, int]
    units: list[Unit]
    lines: list[LineUnit]
    heat_curtail: dict[str, np.ndarray]
    cost_c: np.ndarray
    cost_offset: float
    co2_c: np.ndarray
    slack: int = -1
    delta: float = 0.0

    def cost(self, x: np.ndarray) -> float:
        return float(self.cost_c @ x) + self.cost_offset

    def co2(self, x: np.ndarray) -> float:
        return float(self.co2_c @ x)

    def var_id(self, quantity: str, region: str | None, tech: str | None, hour: int | None = None) -> int:
        return self.index[(quantity, region, tech, hour)]


def scenario_fingerprint(scenario: ScenarioConfig, **extra) -> str:
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (frozenset, set)):
            return sorted(o)
        raise TypeError(type(o).__name__)

    payload = {"scenario": scenario_to_dict(scenario), **extra}
    text = json.dumps(payload, sort_keys=True, default=default)
    return hashlib.sha256(text.encode()).hexdigest()


# --------------------------------------------------------------------------
# pre-solve checks


def _potential(region: RegionSpec, tech: TechnologySpec) -> float:
    return region.existing(tech.id) + region.new_build_bound(tech.id)


def _max_supply(scenario: ScenarioConfig, region: RegionSpec) -> np.ndarray | None:
    """Upper bound on electricity available to a region per hour; None when unbounded."""
    supply = np.zeros(scenario.T)
    for t in scenario.techs("TU", "CHP", "HT", "FC", "WT", "PV"):
        pot = _potential(region, t)
        if pot == 0:
            continue
        if math.isinf(pot):
            return None
        if t.kind == "WT":
            supply += pot * np.asarray(region.wind_cf)
        elif t.kind == "PV":
            supply += pot * np.asarray(region.solar_cf)
        else:
            supply += pot * t.flex.max_load
    for c in scenario.topology.corridors:
        if region.id in (c.a, c.b):
            supply += c.limit_mw
    return supply


def check_structural_feasibility(scenario: ScenarioConfig) -> None:
    """Reject inputs that no capacity choice can satisfy, naming the region and hour."""
    for r in scenario.regions:
        supply = _max_supply(scenario, r)
        need = np.asarray(r.electric_demand) + np.asarray(r.export_demand)
        if supply is not None:
            storage = any(_potential(r, t) > 0 for t in scenario.techs("BES", "HPS"))
            if storage and need.sum() > supply.sum() * (1 + 1e-9) + 1e-9:
                raise InfeasibleScenario(f"regions({r.id}).electric_demand",
                                         "demand energy exceeds every possible supply over the horizon")
            short = need - supply
            if not storage and np.any(short > 1e-9 * (1 + need)):
                h = int(np.argmax(short)) + 1
                raise InfeasibleScenario(
                    f"regions({r.id}).electric_demand",
                    f"hour {h}: demand {need[h - 1]:.6g} MW exceeds every possible supply {supply[h - 1]:.6g} MW",
                )
        if np.any(np.asarray(r.heat_demand) > 0):
            if not any(_potential(r, t) > 0 for t in scenario.techs(*HEAT_KINDS)):
                raise InfeasibleScenario(f"regions({r.id}).heat_demand",
                                         "heat demand but no heat-producing capacity can exist")
    if any(np.any(hydrogen_demand(scenario, r) > 0) for r in scenario.regions):
        if not any(_potential(r, t) > 0 for t in scenario.techs("EC") for r in scenario.regions):
            raise InfeasibleScenario("regions.hydrogen_demand", "hydrogen demand but no electrolysis can exist")


# --------------------------------------------------------------------------
# assembly


class _Assembler:
    def __init__(self, scenario: ScenarioConfig, commitment: str, modules):
        self.sc = scenario
        self.T = scenario.T
        self.w = scenario.capital_weight
        self.b = LPBuilder(_tag(scenario.name))
        self.keys: list[tuple] = []
        self.cost: list[tuple[np.ndarray, np.ndarray]] = []
        self.cost_offset = 0.0
        self.co2: list[tuple[np.ndarray, np.ndarray]] = []
        self.units: list[Unit] = []
        self.lines: list[LineUnit] = []
        self.heat_curtail: dict[str, np.ndarray] = {}
        self.commitment = commitment
        self.modules = modules

    # bookkeeping
    def reg(self, qty: str, region, tech, ids, hourly: bool = True) -> None:
        ids = np.atleast_1d(ids)
        assert ids.size == 0 or ids[0] == len(self.keys), "index out of sync with builder"
        for i in range(ids.size):
            self.keys.append((qty, region, tech, i + 1 if hourly else None))

    def add_cost(self, ids, coef) -> None:
        ids = np.atleast_1d(np.asarray(ids))
        coef = np.broadcast_to(np.asarray(coef, dtype=float), ids.shape)
        keep = ids >= 0
        self.cost.append((ids[keep], coef[keep]))

    def capacity(self, region: RegionSpec, key: str, tech_tag: str, scale: float = 1.0) -> Capacity | None:
        existing = region.existing(key)
        bound = region.new_build_bound(key)
        if existing + bound <= 0:
            return None
        if bound <= 0:
            return Capacity(-1, existing, scale)
        var = self.b.add_var(f"I.{_tag(key)}.{_tag(region.id)}", 0.0, bound)
        self.reg("I", region.id, key, var, hourly=False)
        return Capacity(var, existing, scale)

    def capital_terms(self, cap: Capacity, invest: float, fixed: float) -> None:
        if cap.var >= 0:
            self.add_cost(cap.var, invest + fixed)
        self.cost_offset += fixed * cap.existing

    # devices
    def build_units(self) -> None:
        sc, T = self.sc, self.T
        cop_techs = sc.techs("COP")
        for r in sc.regions:
            rid = r.id
            for tech in sc.technologies:
                kind = tech.kind
                if kind in sc.chain_ablation or kind in ("LINE", "COP"):
                    continue
                prefix = f"{_tag(tech.id)}.{_tag(rid)}"
                rates = unit_rates(tech, r, self.w)
                if kind in ("WT", "PV"):
                    cap = self.capacity(r, tech.id, prefix)
                    if cap is None:
                        continue
                    P = self.b.add_vars([f"P.{prefix}.{t}" for t in range(1, T + 1)])
                    self.reg("P", rid, tech.id, P)
                    cf = np.asarray(r.wind_cf if kind == "WT" else r.solar_cf)
                    self.b.add_rows([(1.0, P), (-cf, cap.var)], LE, cf * cap.existing,
                                    [f"avail.{prefix}.{t}" for t in range(1, T + 1)])
                    self.capital_terms(cap, rates.invest, rates.fixed)
                    self.units.append(Unit(tech, r, tech.id, cap, P=P))
                elif kind in COMMITTED:
                    cap = self.capacity(r, tech.id, prefix)
                    if cap is None:
                        continue
                    init = cap.existing if kind in THERMAL else 0.0
                    n0 = len(self.keys)
                    cl = cluster_constraints(self.b, prefix, tech.flex, T, sc.wrap, cap, init)
                    assert cl.O[0] == n0
                    for q, ids in (("O", cl.O), ("U", cl.U), ("S", cl.S), ("P", cl.P)):
                        self.reg(q, rid, tech.id, ids)
                    unit = Unit(tech, r, tech.id, cap, P=cl.P, cluster=cl)
                    if self.commitment == "milp" and cap.existing > 0:
                        unit.modules = self.module_fleet(unit, prefix)
                    self.capital_terms(cap, rates.invest, rates.fixed)
                    self.add_cost(cl.P, rates.energy)
                    self.add_cost(cl.U, rates.startup)
                    if kind == "EC":
                        m = hydrogen_per_mw(tech, sc.lhv)
                        pb, conv = sc.price_book, tech.conversion
                        self.add_cost(cl.P, m * (conv.water_per_kg_h2 * pb.water - conv.oxygen_per_kg_h2 * pb.oxygen))
                    if kind in THERMAL:
                        self.co2.append((cl.P, np.full(T, r.emission_factors.get(tech.id, 0.0))))
                    self.units.append(unit)
                elif kind == "EB":
                    cap = self.capacity(r, tech.id, prefix)
                    if cap is None:
                        continue
                    P = self.b.add_vars([f"P.{prefix}.{t}" for t in range(1, T + 1)])
                    self.reg("P", rid, tech.id, P)
                    cap.cap_rows(self.b, P, [f"ebcap.{prefix}.{t}" for t in range(1, T + 1)])
                    self.capital_terms(cap, rates.invest, rates.fixed)
                    self.add_cost(P, rates.energy)
                    self.units.append(Unit(tech, r, tech.id, cap, P=P))
                elif kind in ELECTRIC_STORAGE:
                    pcap = self.capacity(r, tech.id, prefix)
                    ekey = f"{tech.id}@energy"
                    ecap = self.capacity(r, ekey, prefix)
                    if pcap is None or ecap is None:
                        continue
                    st = storage_block(self.b, prefix, T, tech.storage, pcap, pcap, ecap)
                    self.reg_storage(rid, tech.id, st)
                    self.capital_terms(pcap, rates.invest, rates.fixed)
                    self.capital_terms(ecap, rates.invest2, rates.fixed2)
                    self.add_cost(st.charge, rates.energy)
                    self.add_cost(st.discharge, rates.energy)
                    self.units.append(Unit(tech, r, tech.id, pcap, store=st, key2=ekey, cap2=ecap))
                elif kind == "HS":
                    if not cop_techs:
                        continue
                    cop = cop_techs[0]
                    scap = self.capacity(r, tech.id, prefix)
                    ckey = f"{cop.id}@{tech.id}"
                    ccap = self.capacity(r, ckey, prefix)
                    if scap is None or ccap is None:
                        continue
                    st, load = hs_cop_block(self.b, prefix, T, tech.storage, scap, ccap,
                                            cop.conversion.cop_kwh_per_kg if cop.conversion else 1.5)
                    self.reg_storage(rid, tech.id, st)
                    self.capital_terms(scap, rates.invest, rates.fixed)
                    crates = unit_rates(cop, r, self.w)
                    self.capital_terms(ccap, crates.invest, crates.fixed)
                    self.units.append(Unit(tech, r, tech.id, scap, store=st, key2=ckey, cap2=ccap,
                                           cop=cop, cop_load=load))
                elif kind == "HST":
                    ecap = self.capacity(r, tech.id, prefix)
                    if ecap is None:
                        continue
                    dur = tech.storage.duration_hours or 1.0
                    pcap = Capacity(ecap.var, ecap.existing, 1.0 / dur)
                    st = storage_block(self.b, prefix, T, tech.storage, pcap, pcap, ecap)
                    self.reg_storage(rid, tech.id, st)
                    self.capital_terms(ecap, rates.invest, rates.fixed)
                    self.add_cost(st.charge, rates.energy)
                    self.add_cost(st.discharge, rates.energy)
                    self.units.append(Unit(tech, r, tech.id, ecap, store=st))

    def reg_storage(self, rid: str, tid: str, st: StorageHandles) -> None:
        self.reg("ch", rid, tid, st.charge)
        self.reg("dis", rid, tid, st.discharge)
        self.reg("soc", rid, tid, st.soc)

    def module_fleet(self, unit: Unit, prefix: str) -> ModuleFleet:
        if unit.cap.var >= 0:
            raise ValueError(f"{unit.tech.id} in {unit.region.id}: the binary oracle needs a fixed fleet "
                             "(set build_limit equal to existing capacity)")
        count = self.modules.get(unit.tech.id, 2) if isinstance(self.modules, dict) else int(self.modules)
        size = unit.cap.existing / count
        init = np.ones(count) if unit.tech.kind in THERMAL else np.zeros(count)
        n0 = len(self.keys)
        fleet = milp_constraints(self.b, prefix, unit.tech.flex, size, count, self.T, self.sc.wrap,
                                 unit.cluster, init)
        assert fleet.v[0][0] == n0
        for k in range(count):
            tag = f"{unit.tech.id}#{k}"
            for q, ids in (("v", fleet.v[k]), ("y", fleet.y[k]), ("z", fleet.z[k]), ("p", fleet.p[k])):
                self.reg(q, unit.region.id, tag, ids)
        return fleet

    def build_lines(self) -> None:
        T = self.T
        for c in self.sc.topology.corridors:
            tag = f"{_tag(c.a)}-{_tag(c.b)}"
            bound = c.limit_mw - c.existing_mw
            new = -1
            if bound > 0:
                new = self.b.add_var(f"L.{tag}", 0.0, bound)
                self.reg("L", f"{c.a}-{c.b}", "LINE", new, hourly=False)
            flow = self.b.add_vars([f"F.{tag}.{t}" for t in range(1, T + 1)], -np.inf, np.inf)
            self.reg("F", f"{c.a}-{c.b}", "LINE", flow)
            hours = range(1, T + 1)
            self.b.add_rows([(1.0, flow), (-1.0, new)], LE, c.existing_mw, [f"lnup.{tag}.{t}" for t in hours])
            self.b.add_rows([(-1.0, flow), (-1.0, new)], LE, c.existing_mw, [f"lndn.{tag}.{t}" for t in hours])
            rate = line_rate(self.sc, c.capital)
            self.add_cost(new, rate)
            self.lines.append(LineUnit(c.a, c.b, new, c.existing_mw, flow, rate))

    # balances and policies
    def units_in(self, rid: str, *kinds: str) -> list[Unit]:
        return [u for u in self.units if u.region.id == rid and u.tech.kind in kinds]

    def net_import_terms(self, rid: str) -> list[tuple]:
        terms = []
        for ln in self.lines:
            if ln.b == rid:
                terms.append((1.0, ln.flow))
            elif ln.a == rid:
                terms.append((-1.0, ln.flow))
        return terms

    def electric_loads(self, rid: str) -> list[tuple]:
        terms = [(-1.0, u.P) for u in self.units_in(rid, "EC", "EB")]
        for u in self.units_in(rid, "HS"):
            terms += [(-u.cop_load, u.store.charge), (-u.cop_load, u.store.discharge)]
        return terms

    def build_balances(self) -> None:
        sc, T = self.sc, self.T
        hours = range(1, T + 1)
        for r in sc.regions:
            rid, tag = r.id, _tag(r.id)
            terms = [(1.0, u.P) for u in self.units_in(rid, "TU", "CHP", "WT", "PV", "HT", "FC")]
            for u in self.units_in(rid, "BES", "HPS"):
                terms += [(1.0, u.store.discharge), (-1.0, u.store.charge)]
            terms += self.net_import_terms(rid) + self.electric_loads(rid)
            rhs = np.asarray(r.electric_demand) + np.asarray(r.export_demand)
            self.b.add_rows(terms, EQ, rhs, [f"elec.{tag}.{t}" for t in hours])

            heat_units = self.units_in(rid, *HEAT_KINDS)
            hst = self.units_in(rid, "HST")
            demand = np.asarray(r.heat_demand)
            if heat_units or hst or np.any(demand > 0):
                curt = self.b.add_vars([f"Hc.{tag}.{t}" for t in hours])
                self.reg("Hc", rid, None, curt)
                self.heat_curtail[rid] = curt
                hterms = [(heat_per_mw(u.tech), u.P) for u in heat_units]
                for u in hst:
                    hterms += [(1.0, u.store.discharge), (-1.0, u.store.charge)]
                hterms.append((-1.0, curt))
                self.b.add_rows(hterms, EQ, demand, [f"heat.{tag}.{t}" for t in hours])

            ec = self.units_in(rid, "EC")
            if ec:
                sterms = [(1.0, u.P) for u in ec]
                srhs = np.zeros(T)
                for u in self.units_in(rid, "WT", "PV"):
                    if sc.ec_surplus_rule == "as-printed":
                        # headroom left after the renewable dispatch
                        cf = np.asarray(r.wind_cf if u.tech.kind == "WT" else r.solar_cf)
                        sterms += [(1.0, u.P), (-cf, u.cap.var)]
                        srhs += cf * u.cap.existing
                    else:
                        # electrolysis draws on local renewable output only
                        sterms.append((-1.0, u.P))
                self.b.add_rows(sterms, LE, srhs, [f"ecsur.{tag}.{t}" for t in hours])

        h2_units = [u for u in self.units if u.tech.kind in ("EC", "HT", "FC", "HS")]
        demand = sum((hydrogen_demand(sc, r) for r in sc.regions), np.zeros(T))
        if h2_units or np.any(demand > 0):
            terms = []
            for u in h2_units:
                if u.tech.kind == "HS":
                    terms += [(1.0, u.store.discharge), (-1.0, u.store.charge)]
                else:
                    m = hydrogen_per_mw(u.tech, sc.lhv)
                    terms.append((m if u.tech.kind == "EC" else -m, u.P))
            self.b.add_rows(terms, EQ, demand, [f"h2.{t}" for t in hours])
        served = float(demand.sum())
        self.cost_offset -= sc.price_book.hydrogen * served

    def build_rps(self) -> None:
        sc = self.sc
        if sc.rps_gamma is None:
            return
        g = sc.rps_gamma
        ids, coefs = [], []

        def put(arr, c):
            ids.append(np.asarray(arr))
            coefs.append(np.broadcast_to(np.asarray(c, dtype=float), np.shape(arr)))

        for u in self.units:
            k = u.tech.kind
            if k in ("WT", "PV", "HT", "FC"):
                put(u.P, 1.0)
            elif k in ("EC", "EB"):
                put(u.P, -g)
            elif k == "HS":
                put(u.store.charge, -g * u.cop_load)
                put(u.store.discharge, -g * u.cop_load)
            elif k in ELECTRIC_STORAGE:
                put(u.store.charge, -g)
                put(u.store.discharge, g)
        rhs = g * sum(float(np.sum(r.electric_demand) + np.sum(r.export_demand)) for r in sc.regions)
        if ids:
            self.b.add_row(np.concatenate(ids), np.concatenate(coefs), GE, rhs, "rps")
        else:
            self.b.add_row([], [], GE, rhs, "rps")

    def build_reliability(self) -> None:
        sc, T = self.sc, self.T
        pol = sc.reserve_policy
        for r in sc.regions:
            rid, tag = r.id, _tag(r.id)
            terms = []
            rhs = np.asarray(r.electric_demand) * (1.0 + pol.demand_reserve_fraction) + np.asarray(r.export_demand)
            for u in self.units_in(rid, "TU", "CHP"):
                terms.append((u.tech.flex.max_load, u.cluster.O))
            for u in self.units_in(rid, "WT", "PV"):
                wind = u.tech.kind == "WT"
                credit = _credit(pol.wind_credit if wind else pol.solar_credit, r.wind_cf if wind else r.solar_cf)
                terms.append((credit, u.cap.var))
                rhs = rhs - credit * u.cap.existing
                terms.append((-(pol.wind_error if wind else pol.solar_error), u.P))
            for u in self.units_in(rid, "BES", "HPS"):
                terms.append((1.0, u.cap.var))
                rhs = rhs - u.cap.existing
            for u in self.units_in(rid, "HT", "FC"):
                terms.append((1.0, u.P))
            terms += self.net_import_terms(rid) + self.electric_loads(rid)
            self.b.add_rows(terms, GE, rhs, [f"rel.{tag}.{t}" for t in range(1, T + 1)])


def build_planning_lp(scenario: ScenarioConfig, mode: str | None = None, epsilon: float | None = None,
                      commitment: str = "cluster", modules: dict | int = 2, delta: float = 0.0,
                      cost_cap: float | None = None, precheck: bool = True) -> PlanningModel:
    """Assemble the planning model.

    ``mode`` defaults to the scenario's objective mode. In ``cost-under-cap``
    mode the emission row reads ``co2 + s = epsilon`` with slack ``s >= 0``
    rewarded by ``delta`` per ton in the objective. ``commitment="milp"``
    adds per-module binaries (``modules`` per fleet) under every committed
    fleet with existing capacity. ``cost_cap`` bounds total cost ($), which
    turns a CO2 objective into the second stage of a lexicographic solve.
    """
    mode = mode or scenario.objective_mode
    if mode not in OBJECTIVE_MODES:
        raise ValueError(f"unknown objective mode {mode!r}")
    if mode == "cost-under-cap":
        epsilon = scenario.emission_cap if epsilon is None else epsilon
        if epsilon is None:
            raise ValueError("cost-under-cap needs an emission cap")
        if epsilon < 0:
            raise ValueError("emission cap must be >= 0")
    if commitment not in ("cluster", "milp"):
        raise ValueError("commitment must be 'cluster' or 'milp'")
    if precheck:
        check_structural_feasibility(scenario)

    asm = _Assembler(scenario, commitment, modules)
    asm.build_units()
    asm.build_lines()
    asm.build_balances()
    asm.build_rps()
    asm.build_reliability()

    b = asm.b
    slack = -1
    if mode == "cost-under-cap":
        slack = b.add_var("eps_slack")
        asm.reg("eps_slack", None, None, slack, hourly=False)
        ids = [slack] + [i for ids, _ in asm.co2 for i in ids]
        coefs = [1.0] + [c for _, cs in asm.co2 for c in cs]
        b.add_row(ids, coefs, EQ, epsilon, "co2cap")

    n = b.n_vars
    assert len(asm.keys) == n, "every variable must be indexed"
    cost_c = np.zeros(n)
    for ids, coef in asm.cost:
        np.add.at(cost_c, ids, coef)
    co2_c = np.zeros(n)
    for ids, coef in asm.co2:
        np.add.at(co2_c, ids, coef)

    if cost_cap is not None:
        nz = np.flatnonzero(cost_c)
        b.add_row(nz, cost_c[nz], LE, cost_cap - asm.cost_offset, "costcap")
    if mode == "min-co2":
        b.add_objective(np.arange(n), co2_c)
        b.offset = 0.0
    else:
        b.add_objective(np.arange(n), cost_c)
        b.offset = asm.cost_offset
        if slack >= 0 and delta:
            b.add_objective(slack, -delta)
    lp = b.build()

    fp = scenario_fingerprint(scenario, commitment=commitment, mode=mode, epsilon=epsilon, delta=delta,
                              cost_cap=cost_cap,
                              modules=modules if commitment == "milp" else None)
    index = {k: i for i, k in enumerate(asm.keys)}
    assert len(index) == n, "index keys must be unique"
    return PlanningModel(
        lp=lp, scenario=scenario, mode=mode, epsilon=epsilon, commitment=commitment,
        fingerprint=fp, fingerprint_base=scenario_fingerprint(scenario), keys=asm.keys, index=index,
        units=asm.units, lines=asm.lines, heat_curtail=asm.heat_curtail,
        cost_c=cost_c, cost_offset=asm.cost_offset, co2_c=co2_c, slack=slack, delta=delta,
    )


# --------------------------------------------------------------------------
# solutions


@dataclass(eq=False)
class PlanSolution:
    scenario: ScenarioConfig
    mode: str
    epsilon: float | None
    objective: float  # value of the solved objective
    fingerprint: str
    fingerprint_base: str
    new_capacity: dict[tuple[str, str], float]  # (region, capacity key)
    total_capacity: dict[tuple[str, str], float]
    line_new: dict[tuple[str, str], float]
    line_total: dict[tuple[str, str], float]
    series: dict[tuple[str, str, str | None], np.ndarray]  # (quantity, region, tech)
    flows: dict[tuple[str, str], np.ndarray]
    residuals: dict[str, np.ndarray] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)
    x: np.ndarray | None = None

    def get(self, quantity: str, region: str, tech: str | None) -> np.ndarray:
        return self.series.get((quantity, region, tech), np.zeros(self.scenario.T))

    def techs_of(self, *kinds: str) -> list[tuple[str, TechnologySpec]]:
        """(region, tech) pairs with a capacity entry, for the given kinds."""
        out = []
        for r in self.scenario.regions:
            for t in self.scenario.technologies:
                if t.kind in kinds and (r.id, t.id) in self.total_capacity:
                    out.append((r.id, t))
        return out

    @property
    def co2(self) -> float:
        return co2_total(self)

    @property
    def total_cost(self) -> float:
        return cost_breakdown(self)["total"]

    @property
    def renewable_curtailment(self) -> float:
        """MWh of available wind and solar energy left unused."""
        total = 0.0
        for rid, t in self.techs_of("WT", "PV"):
            r = self.scenario.region(rid)
            cf = np.asarray(r.wind_cf if t.kind == "WT" else r.solar_cf)
            total += float(np.sum(cf * self.total_capacity[(rid, t.id)] - self.get("P", rid, t.id)))
        return max(total, 0.0)

    @property
    def heat_curtailment(self) -> float:
        return float(sum(np.sum(v) for (q, _, _), v in self.series.items() if q == "Hc"))

    def technology_totals(self) -> dict[str, float]:
        """Energy through each technology summed over regions and hours (MWh)."""
        out: dict[str, float] = {}
        for (q, _, tech), v in self.series.items():
            if q == "P" and tech is not None:
                out[tech] = out.get(tech, 0.0) + float(np.sum(v))
        return out

    def regional_hydrogen_injection(self) -> dict[str, np.ndarray]:
        """Net hydrogen supplied to the network per region and hour (kg/h)."""
        sc = self.scenario
        out = {}
        for r in sc.regions:
            net = -hydrogen_demand(sc, r).copy()
            for rid, t in self.techs_of("EC", "HT", "FC", "HS"):
                if rid != r.id:
                    continue
                if t.kind == "HS":
                    net += self.get("dis", rid, t.id) - self.get("ch", rid, t.id)
                else:
                    m = hydrogen_per_mw(t, sc.lhv) * self.get("P", rid, t.id)
                    net += m if t.kind == "EC" else -m
            out[r.id] = net
        return out


def _as_primal(model: PlanningModel, values) -> np.ndarray:
    x = values.x if isinstance(values, SolveResult) else values
    if x is None:
        raise ValueError("no primal values (solve did not return OPTIMAL)")
    x = np.asarray(x, dtype=float)
    if x.shape != (model.lp.n_vars,):
        raise ValueError(f"missing variable values: got {x.size}, model has {model.lp.n_vars}")
    if np.any(np.isnan(x)):
        j = int(np.flatnonzero(np.isnan(x))[0])
        raise ValueError(f"missing variable value for {model.lp.var_names[j]}")
    return x


def extract_solution(model: PlanningModel, values, fingerprint: str | None = None) -> PlanSolution:
    """Map primal values onto named capacity and dispatch fields and attach balance residuals."""
    if fingerprint is not None and fingerprint != model.fingerprint:
        raise ValueError("fingerprint mismatch: values belong to a different model")
    x = _as_primal(model, values)
    sc = model.scenario
    new_cap, total_cap, series, flows, line_new, line_total = {}, {}, {}, {}, {}, {}
    seen = np.zeros(x.size, dtype=bool)

    def take(ids) -> np.ndarray:
        ids = np.asarray(ids)
        seen[ids] = True
        return np.maximum(x[ids], 0.0)

    for u in model.units:
        rid, tid = u.region.id, u.tech.id
        for key, cap in ((u.key, u.cap), (u.key2, u.cap2)):
            if key is None:
                continue
            new = float(take(cap.var)) if cap.var >= 0 else 0.0
            new_cap[(rid, key)] = new
            total_cap[(rid, key)] = new + cap.existing
        if u.cluster is not None:
            for q in ("O", "U", "S", "P"):
                series[(q, rid, tid)] = take(getattr(u.cluster, q))
        elif u.P is not None:
            series[("P", rid, tid)] = take(u.P)
        if u.store is not None:
            series[("ch", rid, tid)] = take(u.store.charge)
            series[("dis", rid, tid)] = take(u.store.discharge)
            series[("soc", rid, tid)] = take(u.store.soc)
            if u.cop is not None:
                series[("Pcop", rid, u.key2)] = u.cop_load * (series[("ch", rid, tid)] + series[("dis", rid, tid)])
        k = u.tech.kind
        if k in HEAT_KINDS:
            series[("H", rid, tid)] = heat_per_mw(u.tech) * series[("P", rid, tid)]
        if k in ("EC", "HT", "FC"):
            series[("m", rid, tid)] = hydrogen_per_mw(u.tech, sc.lhv) * series[("P", rid, tid)]
        if u.modules is not None:
            for k_, ids in enumerate(u.modules.v):
                series[("v", rid, f"{tid}#{k_}")] = take(ids)
                take(u.modules.y[k_])
                take(u.modules.z[k_])
                take(u.modules.p[k_])
    for ln in model.lines:
        key = (ln.a, ln.b)
        new = float(take(ln.new)) if ln.new >= 0 else 0.0
        line_new[key] = new
        line_total[key] = new + ln.existing
        seen[ln.flow] = True
        flows[key] = x[ln.flow].copy()
    for rid, ids in model.heat_curtail.items():
        series[("Hc", rid, None)] = take(ids)
    if model.slack >= 0:
        seen[model.slack] = True
    if not seen.all():
        j = int(np.flatnonzero(~seen)[0])
        raise AssertionError(f"variable {model.lp.var_names[j]} was not mapped to a solution field")

    sol = PlanSolution(
        scenario=sc, mode=model.mode, epsilon=model.epsilon, objective=model.lp.objective(x),
        fingerprint=model.fingerprint, fingerprint_base=model.fingerprint_base,
        new_capacity=new_cap, total_capacity=total_cap, line_new=line_new, line_total=line_total,
        series=series, flows=flows, x=x,
    )
    sol.residuals = balance_residuals(sol)
    sol.flags = _post_checks(sol)
    return sol


def balance_residuals(sol: PlanSolution) -> dict[str, np.ndarray]:
    """Electric and heat residual per (region, hour), hydrogen per hour, from extracted series."""
    sc = sol.scenario
    T = sc.T
    elec = np.zeros((len(sc.regions), T))
    heat = np.zeros((len(sc.regions), T))
    for i, r in enumerate(sc.regions):
        rid = r.id
        e = -np.asarray(r.electric_demand) - np.asarray(r.export_demand)
        for _, t in [p for p in sol.techs_of("TU", "CHP", "WT", "PV", "HT", "FC") if p[0] == rid]:
            e = e + sol.get("P", rid, t.id)
        for _, t in [p for p in sol.techs_of("EC", "EB") if p[0] == rid]:
            e = e - sol.get("P", rid, t.id)
        for _, t in [p for p in sol.techs_of("BES", "HPS") if p[0] == rid]:
            e = e + sol.get("dis", rid, t.id) - sol.get("ch", rid, t.id)
        for (q, rr, _), v in sol.series.items():
            if q == "Pcop" and rr == rid:
                e = e - v
        for (a, b), f in sol.flows.items():
            if b == rid:
                e = e + f
            elif a == rid:
                e = e - f
        elec[i] = e
        h = -np.asarray(r.heat_demand) - sol.get("Hc", rid, None)
        for (q, rr, _), v in sol.series.items():
            if q == "H" and rr == rid:
                h = h + v
        for _, t in [p for p in sol.techs_of("HST") if p[0] == rid]:
            h = h + sol.get("dis", rid, t.id) - sol.get("ch", rid, t.id)
        heat[i] = h
    hyd = np.zeros(T)
    for net in sol.regional_hydrogen_injection().values():
        hyd += net
    return {"electric": elec, "heat": heat, "hydrogen": hyd}


def _post_checks(sol: PlanSolution) -> list[str]:
    flags = []
    for rid, t in sol.techs_of("BES", "HPS", "HS", "HST"):
        both = np.minimum(sol.get("ch", rid, t.id), sol.get("dis", rid, t.id))
        if np.any(both > 1e-6 * (1.0 + sol.total_capacity[(rid, t.id)])):
            flags.append(f"{t.id}@{rid}: simultaneous charge and discharge in {int(np.sum(both > 1e-6))} hours")
    return flags


# --------------------------------------------------------------------------
# accounting


def cost_breakdown(sol: PlanSolution) -> dict[str, float]:
    """Component costs ($) recomputed from capacities and dispatch; ``total`` nets out revenue."""
    sc = sol.scenario
    w = sc.capital_weight
    out = {c: 0.0 for c in COMPONENTS}
    extra = {"water": 0.0, "oxygen": 0.0, "hydrogen_sales": 0.0}
    for r in sc.regions:
        rid = r.id
        for t in sc.technologies:
            if (rid, t.id) not in sol.total_capacity:
                continue
            comp = _COMPONENT[t.kind]
            rates = unit_rates(t, r, w)
            new, total = sol.new_capacity[(rid, t.id)], sol.total_capacity[(rid, t.id)]
            cost = rates.invest * new + rates.fixed * total
            if t.kind in COMMITTED:
                cost += rates.energy * float(np.sum(sol.get("P", rid, t.id)))
                cost += rates.startup * float(np.sum(sol.get("U", rid, t.id)))
            elif t.kind == "EB":
                cost += rates.energy * float(np.sum(sol.get("P", rid, t.id)))
            elif t.kind in ELECTRIC_STORAGE:
                ekey = f"{t.id}@energy"
                cost += rates.invest2 * sol.new_capacity[(rid, ekey)] + rates.fixed2 * sol.total_capacity[(rid, ekey)]
            if t.kind in ELECTRIC_STORAGE or t.kind == "HST":
                cost += rates.energy * float(np.sum(sol.get("ch", rid, t.id) + sol.get("dis", rid, t.id)))
            if t.kind == "EC":
                produced = float(np.sum(sol.get("m", rid, t.id)))
                conv = t.conversion
                water = conv.water_per_kg_h2 * sc.price_book.water * produced
                oxygen = conv.oxygen_per_kg_h2 * sc.price_book.oxygen * produced
                cost += water
                extra["water"] += water
                extra["oxygen"] += oxygen
                out["R"] += oxygen
            if t.kind == "HS":
                for (rr, key), tot in sol.total_capacity.items():
                    if rr == rid and key.endswith(f"@{t.id}") and "@" in key:
                        cop = sc.tech(key.split("@", 1)[0])
                        crates = unit_rates(cop, r, w)
                        out["COP"] += crates.invest * sol.new_capacity[(rr, key)] + crates.fixed * tot
            out[comp] += cost
        sales = sc.price_book.hydrogen * float(np.sum(hydrogen_demand(sc, r)))
        extra["hydrogen_sales"] += sales
        out["R"] += sales
    for (a, b), new in sol.line_new.items():
        c = next(c for c in sc.topology.corridors if (c.a, c.b) == (a, b))
        out["L"] += line_rate(sc, c.capital) * new
    out["total"] = sum(v for k, v in out.items() if k != "R") - out["R"]
    out.update(extra)
    return out


def co2_total(sol: PlanSolution, emission_factors: dict | None = None) -> float:
    """Tons of CO2 from thermal dispatch.

    ``emission_factors`` maps tech id (or ``(region, tech id)``) to t/MWh and
    defaults to the scenario's regional factors.
    """
    total = 0.0
    for rid, t in sol.techs_of("TU", "CHP"):
        p = sol.get("P", rid, t.id)
        if emission_factors is None:
            factor = sol.scenario.region(rid).emission_factors.get(t.id)
        else:
            factor = emission_factors.get((rid, t.id), emission_factors.get(t.id))
        if factor is None:
            if np.any(p > 0):
                raise KeyError(f"no emission factor for dispatched {t.id} in {rid}")
            continue
        total += factor * float(np.sum(p))
    return total
