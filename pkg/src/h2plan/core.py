"""Domain types, unit handling and scenario validation.

Every other module works on a validated :class:`ScenarioConfig`. Internal
units are fixed: power MW, energy MWh, hydrogen mass kg (flows kg/h), money
USD, time as a 1-based hour index. Cost parameters keep the units of the
technology tables ($/kW, $/kWh, $/kg) and are converted during assembly.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

SCHEMA_VERSION = 1
LHV_H2 = 120.0  # MJ/kg
HOURS_PER_YEAR = 8760
CNY_PER_USD = 6.8

KINDS = ("TU", "CHP", "WT", "PV", "BES", "HPS", "EC", "HT", "FC", "HS", "COP", "EB", "HST", "LINE")
COMMITTED = frozenset({"TU", "CHP", "EC", "HT", "FC"})
THERMAL = frozenset({"TU", "CHP"})
RENEWABLE = frozenset({"WT", "PV"})
ELECTRIC_STORAGE = frozenset({"BES", "HPS"})
STORAGE_KINDS = frozenset({"BES", "HPS", "HS", "HST"})
CONVERSION_KINDS = frozenset({"CHP", "EC", "HT", "FC", "EB", "COP"})
EC_SURPLUS_RULES = ("renewable-cover", "as-printed")
OBJECTIVE_MODES = ("min-cost", "min-co2", "cost-under-cap")
# links that a scenario may switch off; H2_DEMAND drops the hydrogen load
ABLATION_LINKS = frozenset(KINDS) | {"H2_DEMAND"}


class ScenarioError(ValueError):
    """Invalid scenario input; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


# --------------------------------------------------------------------------
# units

_UNITS = {
    # power
    "W": ("power", 1e-6), "kW": ("power", 1e-3), "MW": ("power", 1.0), "GW": ("power", 1e3),
    # energy
    "kWh": ("energy", 1e-3), "MWh": ("energy", 1.0), "GWh": ("energy", 1e3), "TWh": ("energy", 1e6),
    # hydrogen mass / flow
    "kg": ("mass", 1.0), "t": ("mass", 1e3), "kt": ("mass", 1e6), "Mt": ("mass", 1e9),
    "kg/h": ("flow", 1.0), "t/h": ("flow", 1e3),
    # distance
    "m": ("length", 1e-3), "km": ("length", 1.0),
}
_QTY = re.compile(r"^\s*([-+0-9.eE]+)\s*([A-Za-z/]+)\s*$")


def to_canonical(value: Any, dims: tuple[str, ...] | str, path: str = "") -> float:
    """Convert ``value`` (number or ``"<number> <unit>"``) to canonical units."""
    if isinstance(dims, str):
        dims = (dims,)
    if isinstance(value, bool):
        raise ScenarioError(path, "expected a number")
    if isinstance(value, (int, float, np.floating, np.integer)):
        return float(value)
    if isinstance(value, str):
        m = _QTY.match(value)
        if m is None:
            raise ScenarioError(path, f"cannot parse quantity {value!r}")
        unit = m.group(2)
        if unit not in _UNITS:
            raise ScenarioError(path, f"unknown unit {unit!r}")
        dim, factor = _UNITS[unit]
        if dim not in dims:
            raise ScenarioError(path, f"unit {unit!r} is not a {'/'.join(dims)} unit")
        return float(m.group(1)) * factor
    raise ScenarioError(path, f"expected a number, got {type(value).__name__}")


def amortized_cost(capital: float, lifetime: float, rate: float) -> float:
    """Equal annual payment that recovers ``capital`` over ``lifetime`` years."""
    if capital < 0 or lifetime < 1 or rate < 0:
        raise ValueError("need capital >= 0, lifetime >= 1, rate >= 0")
    if rate == 0:
        return capital / lifetime
    growth = (1.0 + rate) ** lifetime
    return capital * rate * growth / (growth - 1.0)


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class CostParams:
    capital: float = 0.0  # $/kW ($/kg for HS, $/(kg/h) for COP)
    fixed_om_fraction: float = 0.0  # of capital, per year
    variable_om: float = 0.0  # $/kWh
    startup_cost: float = 0.0  # $/kW started
    lifetime_years: int = 20
    interest_rate: float = 0.07

    @property
    def annualized(self) -> float:
        return amortized_cost(self.capital, self.lifetime_years, self.interest_rate)

    @property
    def fixed_om(self) -> float:
        return self.fixed_om_fraction * self.capital


@dataclass(frozen=True)
class FlexParams:
    min_load: float = 0.0
    max_load: float = 1.0
    ramp_up: float = 1.0  # fraction of online capacity per hour
    ramp_down: float = 1.0
    startup_ramp: float = 1.0
    shutdown_ramp: float = 1.0
    min_up: int = 1  # hours
    min_down: int = 1


@dataclass(frozen=True)
class ConversionParams:
    electric_eff: float = 1.0
    waste_heat_eff: float = 0.0
    water_per_kg_h2: float = 9.0
    oxygen_per_kg_h2: float = 8.0
    cop_kwh_per_kg: float = 1.5
    chp_heat_eff: float = 0.0


@dataclass(frozen=True)
class StorageParams:
    charge_eff: float = 1.0
    discharge_eff: float = 1.0
    loss_rate: float = 0.0  # fraction of inventory per hour
    energy_capital: float = 0.0  # $/kWh (BES/HPS/HST) or $/kg (HS)
    power_capital: float = 0.0  # $/kW
    duration_hours: float | None = None  # fixed energy/power ratio (single-capacity devices)


@dataclass(frozen=True)
class TechnologySpec:
    id: str
    kind: str
    cost: CostParams = field(default_factory=CostParams)
    flex: FlexParams | None = None
    conversion: ConversionParams | None = None
    storage: StorageParams | None = None
    fuel: str | None = None
    fuel_heat_content: float | None = None  # MWh (thermal) per fuel unit
    emission_factor: float | None = None  # t CO2 / MWh, default when a region gives none

    @property
    def electric_eff(self) -> float:
        return self.conversion.electric_eff if self.conversion else 1.0


@dataclass(frozen=True)
class PriceBook:
    water: float = 0.01  # $/kg
    oxygen: float = 0.04  # $/kg
    hydrogen: float = 2.0  # $/kg
    currency_rate: float = CNY_PER_USD  # CNY per USD


@dataclass(frozen=True)
class ReservePolicy:
    demand_reserve_fraction: float = 0.05
    wind_error: float = 0.10
    solar_error: float = 0.05
    wind_credit: str | tuple[float, ...] = "equal-to-CF"
    solar_credit: str | tuple[float, ...] = "equal-to-CF"
    es_reserve_rule: str = "power-headroom"


@dataclass(frozen=True)
class Corridor:
    a: str
    b: str
    length_km: float
    existing_mw: float = 0.0
    limit_mw: float = 0.0
    capital: float = 0.0  # $/kW

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b)


@dataclass(frozen=True)
class Topology:
    corridors: tuple[Corridor, ...] = ()
    hydrogen_adjacency: tuple[tuple[str, str], ...] = ()
    hydrogen_lengths: tuple[float, ...] = ()  # km, aligned with hydrogen_adjacency

    def pipeline_length(self, a: str, b: str) -> float:
        for (x, y), length in zip(self.hydrogen_adjacency, self.hydrogen_lengths):
            if {x, y} == {a, b}:
                return length
        raise KeyError((a, b))


def _frozen_series(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RegionSpec:
    id: str
    electric_demand: np.ndarray
    export_demand: np.ndarray
    heat_demand: np.ndarray
    hydrogen_demand: np.ndarray
    wind_cf: np.ndarray
    solar_cf: np.ndarray
    existing_capacity: Mapping[str, float] = field(default_factory=dict)
    build_limit: Mapping[str, float] = field(default_factory=dict)
    fuel_prices: Mapping[str, float] = field(default_factory=dict)
    emission_factors: Mapping[str, float] = field(default_factory=dict)

    def existing(self, tech_id: str) -> float:
        return float(self.existing_capacity.get(tech_id, 0.0))

    def new_build_bound(self, tech_id: str) -> float:
        """Upper bound on new capacity (inf when the region sets no limit)."""
        if tech_id not in self.build_limit:
            return math.inf
        return max(0.0, float(self.build_limit[tech_id]) - self.existing(tech_id))


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    regions: tuple[RegionSpec, ...]
    technologies: tuple[TechnologySpec, ...]
    topology: Topology
    horizon_hours: int
    rps_gamma: float | None = None
    emission_cap: float | None = None
    objective_mode: str = "min-cost"
    price_book: PriceBook = field(default_factory=PriceBook)
    reserve_policy: ReservePolicy = field(default_factory=ReservePolicy)
    chain_ablation: frozenset[str] = frozenset()
    lhv: float = LHV_H2
    period_weight: float | None = None  # scales annual capital/fixed costs
    wrap: bool = True  # couple hour T to hour 1 in commitment constraints
    ec_surplus_rule: str = "renewable-cover"  # or "as-printed"
    name: str = "scenario"

    @property
    def T(self) -> int:
        return self.horizon_hours

    @property
    def capital_weight(self) -> float:
        if self.period_weight is not None:
            return self.period_weight
        return self.horizon_hours / HOURS_PER_YEAR

    def tech(self, tech_id: str) -> TechnologySpec:
        for t in self.technologies:
            if t.id == tech_id:
                return t
        raise KeyError(tech_id)

    def region(self, region_id: str) -> RegionSpec:
        for r in self.regions:
            if r.id == region_id:
                return r
        raise KeyError(region_id)

    def techs(self, *kinds: str) -> list[TechnologySpec]:
        """Active technologies of the given kinds (ablated kinds are dropped)."""
        return [t for t in self.technologies if t.kind in kinds and t.kind not in self.chain_ablation]

    @property
    def hydrogen_demand_active(self) -> bool:
        return "H2_DEMAND" not in self.chain_ablation

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return scenario_to_dict(self) == scenario_to_dict(other)

    def with_changes(self, **changes) -> "ScenarioConfig":
        return validate_scenario(replace(self, **changes))


# --------------------------------------------------------------------------
# series I/O


def read_series_csv(path: str | Path) -> np.ndarray:
    """Read a ``hour,value`` CSV with 1-based consecutive hours."""
    path = Path(path)
    values = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["hour", "value"]:
            raise ScenarioError(str(path), "expected header 'hour,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                hour, value = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ScenarioError(f"{path}:{lineno}", f"malformed row {row!r}") from None
            if hour != len(values) + 1:
                raise ScenarioError(f"{path}:{lineno}", f"expected hour {len(values) + 1}, got {hour}")
            values.append(value)
    return np.array(values)


def write_series_csv(path: str | Path, values) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hour", "value"])
        for i, v in enumerate(values, start=1):
            w.writerow([i, repr(float(v))])


# --------------------------------------------------------------------------
# validation

_SERIES = ("electric_demand", "export_demand", "heat_demand", "hydrogen_demand", "wind_cf", "solar_cf")
_SERIES_DIMS = {
    "electric_demand": ("power",), "export_demand": ("power",), "heat_demand": ("power",),
    "hydrogen_demand": ("flow",), "wind_cf": (), "solar_cf": (),
}


def _series(raw, T: int, dims, path: str, base_dir: Path | None) -> np.ndarray:
    factor = 1.0
    if raw is None:
        values = np.zeros(T)
    elif isinstance(raw, np.ndarray):
        values = raw.astype(float)
    elif isinstance(raw, (list, tuple)):
        values = np.array([to_canonical(v, dims or ("none",), f"{path}[{i}]") for i, v in enumerate(raw)])
    elif isinstance(raw, Mapping):
        if "unit" in raw:
            unit = raw["unit"]
            if unit not in _UNITS or _UNITS[unit][0] not in dims:
                raise ScenarioError(path, f"unit {unit!r} not valid here")
            factor = _UNITS[unit][1]
        if "csv" in raw:
            csv_path = Path(raw["csv"])
            if not csv_path.is_absolute() and base_dir is not None:
                csv_path = base_dir / csv_path
            values = read_series_csv(csv_path)
        elif "constant" in raw:
            values = np.full(T, float(raw["constant"]))
        elif "values" in raw:
            values = np.array([float(v) for v in raw["values"]])
        else:
            raise ScenarioError(path, "series mapping needs 'csv', 'constant' or 'values'")
        values = values * factor
    elif isinstance(raw, (int, float)):
        values = np.full(T, float(raw))
    else:
        raise ScenarioError(path, f"cannot interpret series of type {type(raw).__name__}")
    if values.ndim != 1 or len(values) != T:
        raise ScenarioError(path, f"series length {len(values)} != horizon_hours {T}")
    if not np.all(np.isfinite(values)):
        raise ScenarioError(path, "series contains non-finite values")
    return values


def _params(cls, raw, path: str):
    if raw is None:
        return None
    if isinstance(raw, cls):
        raw = {f.name: getattr(raw, f.name) for f in fields(cls)}
    if not isinstance(raw, Mapping):
        raise ScenarioError(path, f"expected a mapping for {cls.__name__}")
    names = {f.name for f in fields(cls)}
    unknown = set(raw) - names
    if unknown:
        raise ScenarioError(path, f"unknown field(s) {sorted(unknown)}")
    kwargs = {}
    for f in fields(cls):
        if f.name not in raw:
            continue
        v = raw[f.name]
        if f.name in ("min_up", "min_down", "lifetime_years"):
            if isinstance(v, float) and not v.is_integer():
                raise ScenarioError(f"{path}.{f.name}", "expected an integer")
            v = int(v)
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            v = float(v)
        elif f.name in ("wind_credit", "solar_credit") and isinstance(v, (list, tuple, np.ndarray)):
            v = tuple(float(x) for x in v)
        kwargs[f.name] = v
    return cls(**kwargs)


def _check(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ScenarioError(path, message)


def _technology(raw, path: str, bundled: Mapping[str, Mapping] | None) -> TechnologySpec:
    if isinstance(raw, TechnologySpec):
        raw = technology_to_dict(raw)
    raw = dict(raw)
    if "use" in raw:
        if bundled is None:
            from .defaults import bundled_technology_dicts

            bundled = bundled_technology_dicts()
        base_id = raw.pop("use")
        _check(base_id in bundled, f"{path}.use", f"unknown bundled technology {base_id!r}")
        merged = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in bundled[base_id].items()}
        for k, v in raw.items():
            if isinstance(v, Mapping) and isinstance(merged.get(k), Mapping):
                merged[k] = {**merged[k], **v}
            else:
                merged[k] = v
        raw = merged
    _check("id" in raw and "kind" in raw, path, "technology needs 'id' and 'kind'")
    kind = raw["kind"]
    _check(kind in KINDS, f"{path}.kind", f"unknown technology kind {kind!r}")
    allowed = {f.name for f in fields(TechnologySpec)}
    unknown = set(raw) - allowed
    _check(not unknown, path, f"unknown field(s) {sorted(unknown)}")
    tech = TechnologySpec(
        id=str(raw["id"]),
        kind=kind,
        cost=_params(CostParams, raw.get("cost", {}), f"{path}.cost"),
        flex=_params(FlexParams, raw.get("flex"), f"{path}.flex"),
        conversion=_params(ConversionParams, raw.get("conversion"), f"{path}.conversion"),
        storage=_params(StorageParams, raw.get("storage"), f"{path}.storage"),
        fuel=raw.get("fuel"),
        fuel_heat_content=None if raw.get("fuel_heat_content") is None else float(raw["fuel_heat_content"]),
        emission_factor=None if raw.get("emission_factor") is None else float(raw["emission_factor"]),
    )
    _validate_technology(tech, path)
    return tech


def _validate_technology(t: TechnologySpec, path: str) -> None:
    c = t.cost
    for name in ("capital", "fixed_om_fraction", "variable_om", "startup_cost", "interest_rate"):
        _check(getattr(c, name) >= 0, f"{path}.cost.{name}", "must be >= 0")
    _check(c.lifetime_years >= 1, f"{path}.cost.lifetime_years", "lifetime must be >= 1 year")
    if t.kind in COMMITTED:
        _check(t.flex is not None, f"{path}.flex", f"{t.kind} requires flexibility parameters")
    if t.flex is not None:
        f = t.flex
        _check(0 <= f.min_load <= f.max_load <= 1, f"{path}.flex", "need 0 <= min_load <= max_load <= 1")
        for name in ("ramp_up", "ramp_down", "startup_ramp", "shutdown_ramp"):
            v = getattr(f, name)
            _check(0 < v <= 1, f"{path}.flex.{name}", "ramp must lie in (0, 1]")
        _check(f.min_up >= 1 and f.min_down >= 1, f"{path}.flex", "min up/down times must be >= 1 h")
    if t.kind in CONVERSION_KINDS:
        _check(t.conversion is not None, f"{path}.conversion", f"{t.kind} requires conversion parameters")
    if t.conversion is not None:
        cv = t.conversion
        _check(0 < cv.electric_eff <= 1, f"{path}.conversion.electric_eff", "efficiency must lie in (0, 1]")
        _check(0 <= cv.waste_heat_eff <= 1, f"{path}.conversion.waste_heat_eff", "efficiency must lie in [0, 1]")
        _check(0 <= cv.chp_heat_eff <= 1, f"{path}.conversion.chp_heat_eff", "efficiency must lie in [0, 1]")
        for name in ("water_per_kg_h2", "oxygen_per_kg_h2", "cop_kwh_per_kg"):
            _check(getattr(cv, name) >= 0, f"{path}.conversion.{name}", "must be >= 0")
    if t.kind in STORAGE_KINDS:
        _check(t.storage is not None, f"{path}.storage", f"{t.kind} requires storage parameters")
    if t.storage is not None:
        s = t.storage
        _check(0 < s.charge_eff <= 1 and 0 < s.discharge_eff <= 1, f"{path}.storage", "efficiencies must lie in (0, 1]")
        _check(0 <= s.loss_rate < 1, f"{path}.storage.loss_rate", "loss rate must lie in [0, 1)")
        _check(s.energy_capital >= 0 and s.power_capital >= 0, f"{path}.storage", "capital costs must be >= 0")
        if s.duration_hours is not None:
            _check(s.duration_hours > 0, f"{path}.storage.duration_hours", "must be > 0")
    if t.kind in THERMAL and t.fuel is not None:
        _check(t.fuel_heat_content is not None and t.fuel_heat_content > 0,
               f"{path}.fuel_heat_content", "fuelled units need a positive heat content")
    if t.emission_factor is not None:
        _check(t.emission_factor >= 0, f"{path}.emission_factor", "must be >= 0")


def _capacity_map(raw, path: str, techs: Mapping[str, TechnologySpec], cop_ids: set[str]) -> dict[str, float]:
    out = {}
    for key, value in (raw or {}).items():
        key = str(key)
        base = key.split("@", 1)[0]
        _check(base in techs, f"{path}.{key}", f"unknown technology id {base!r}")
        kind = techs[base].kind
        dims = ("mass",) if kind == "HS" else ("flow",) if kind == "COP" else ("power",)
        if "@" in key:
            suffix = key.split("@", 1)[1]
            if kind in ELECTRIC_STORAGE:
                _check(suffix == "energy", f"{path}.{key}", "storage keys must read '<id>@energy'")
                dims = ("energy",)
            else:
                _check(base in cop_ids and suffix in techs and techs[suffix].kind == "HS",
                       f"{path}.{key}", "compound keys must read '<COP id>@<HS id>' or '<ES id>@energy'")
        elif kind == "HST":
            dims = ("energy",)
        v = to_canonical(value, dims, f"{path}.{key}")
        _check(v >= 0, f"{path}.{key}", "capacity must be >= 0")
        out[key] = v
    return out


def validate_scenario(raw, base_dir: str | Path | None = None) -> ScenarioConfig:
    """Check a parsed scenario document (or an existing config) and return it in canonical form."""
    if isinstance(raw, ScenarioConfig):
        raw = scenario_to_dict(raw)
    _check(isinstance(raw, Mapping), "<root>", "scenario must be a mapping")
    base = Path(base_dir) if base_dir is not None else None
    version = raw.get("schema_version", SCHEMA_VERSION)
    _check(version == SCHEMA_VERSION, "schema_version", f"unsupported schema version {version!r}")

    T = raw.get("horizon_hours")
    _check(isinstance(T, int) and not isinstance(T, bool) and T >= 2, "horizon_hours", "need an integer >= 2")

    techs: dict[str, TechnologySpec] = {}
    raw_techs = raw.get("technologies") or []
    bundled = None
    if isinstance(raw_techs, str):
        _check(raw_techs == "bundled", "technologies", "only the string 'bundled' is accepted")
        from .defaults import bundled_technology_dicts

        bundled = bundled_technology_dicts()
        raw_techs = [{"use": k} for k in bundled]
    for i, rt in enumerate(raw_techs):
        tech = _technology(rt, f"technologies[{i}]", bundled)
        _check(tech.id not in techs, f"technologies[{i}].id", f"duplicate technology id {tech.id!r}")
        techs[tech.id] = tech
    cop_ids = {t.id for t in techs.values() if t.kind == "COP"}
    _check(len(cop_ids) <= 1, "technologies", "at most one COP technology is supported")

    raw_regions = raw.get("regions") or []
    _check(len(raw_regions) >= 1, "regions", "at least one region is required")
    regions = []
    seen = set()
    for i, rr in enumerate(raw_regions):
        p = f"regions[{i}]"
        if isinstance(rr, RegionSpec):
            rr = region_to_dict(rr)
        _check("id" in rr, p, "region needs an 'id'")
        rid = str(rr["id"])
        _check(rid not in seen, f"{p}.id", f"duplicate region id {rid!r}")
        seen.add(rid)
        allowed = {f.name for f in fields(RegionSpec)}
        unknown = set(rr) - allowed
        _check(not unknown, p, f"unknown field(s) {sorted(unknown)}")
        series = {}
        for name in _SERIES:
            s = _series(rr.get(name), T, _SERIES_DIMS[name], f"{p}({rid}).{name}", base)
            if name.endswith("_cf"):
                _check(bool(np.all((s >= 0) & (s <= 1))), f"{p}({rid}).{name}", "capacity factor out of [0,1]")
            else:
                _check(bool(np.all(s >= 0)), f"{p}({rid}).{name}", "demand must be >= 0")
            series[name] = _frozen_series(s)
        existing = _capacity_map(rr.get("existing_capacity"), f"{p}.existing_capacity", techs, cop_ids)
        limits = _capacity_map(rr.get("build_limit"), f"{p}.build_limit", techs, cop_ids)
        for k, v in existing.items():
            if k in limits:
                _check(v <= limits[k] + 1e-9, f"{p}.existing_capacity.{k}", "existing capacity exceeds build limit")
        fuel_prices = {str(k): float(v) for k, v in (rr.get("fuel_prices") or {}).items()}
        for k, v in fuel_prices.items():
            _check(v >= 0, f"{p}.fuel_prices.{k}", "price must be >= 0")
        factors = {}
        for k, v in (rr.get("emission_factors") or {}).items():
            _check(k in techs, f"{p}.emission_factors.{k}", f"unknown technology id {k!r}")
            _check(techs[k].kind in THERMAL, f"{p}.emission_factors.{k}", "only TU/CHP carry emission factors")
            _check(float(v) >= 0, f"{p}.emission_factors.{k}", "emission factor must be >= 0")
            factors[str(k)] = float(v)
        for t in techs.values():
            if t.kind in THERMAL and t.id not in factors and t.emission_factor is not None:
                factors[t.id] = t.emission_factor
        for t in techs.values():
            if t.kind in THERMAL and t.fuel is not None:
                _check(t.fuel in fuel_prices, f"{p}.fuel_prices", f"missing price for fuel {t.fuel!r} ({t.id})")
        regions.append(RegionSpec(
            id=rid, existing_capacity=existing, build_limit=limits,
            fuel_prices=fuel_prices, emission_factors=factors, **series,
        ))

    topo_raw = raw.get("topology") or {}
    if isinstance(topo_raw, Topology):
        topo_raw = topology_to_dict(topo_raw)
    corridors = []
    for i, c in enumerate(topo_raw.get("corridors") or []):
        p = f"topology.corridors[{i}]"
        a, b = str(c["from"]), str(c["to"])
        _check(a in seen and b in seen, p, f"corridor references unknown region ({a!r}, {b!r})")
        _check(a != b, p, "corridor endpoints must differ")
        length = to_canonical(c.get("length_km", 0.0), "length", f"{p}.length_km")
        _check(length > 0, f"{p}.length_km", "length must be > 0")
        existing = to_canonical(c.get("existing_mw", 0.0), "power", f"{p}.existing_mw")
        limit = to_canonical(c.get("limit_mw", existing), "power", f"{p}.limit_mw")
        _check(0 <= existing <= limit, p, "need 0 <= existing capacity <= capacity limit")
        capital = float(c.get("capital_usd_per_kw", 0.0))
        _check(capital >= 0, f"{p}.capital_usd_per_kw", "must be >= 0")
        corridors.append(Corridor(a, b, length, existing, limit, capital))
    _check(len({frozenset(c.key) for c in corridors}) == len(corridors), "topology.corridors", "duplicate corridor")
    adjacency, lengths = [], []
    for i, pair in enumerate(topo_raw.get("hydrogen_adjacency") or []):
        p = f"topology.hydrogen_adjacency[{i}]"
        if isinstance(pair, Mapping):
            a, b, length = str(pair["from"]), str(pair["to"]), pair.get("length_km")
        else:
            a, b = str(pair[0]), str(pair[1])
            length = pair[2] if len(pair) > 2 else None
        _check(a in seen and b in seen and a != b, p, f"invalid hydrogen corridor ({a!r}, {b!r})")
        if length is None:
            match = [c.length_km for c in corridors if {c.a, c.b} == {a, b}]
            _check(bool(match), p, "pipeline length missing and no electric corridor to copy it from")
            length = match[0]
        length = to_canonical(length, "length", f"{p}.length_km")
        _check(length > 0, p, "length must be > 0")
        adjacency.append((a, b))
        lengths.append(length)
    _check(len({frozenset(x) for x in adjacency}) == len(adjacency), "topology.hydrogen_adjacency", "duplicate pair")
    topology = Topology(tuple(corridors), tuple(adjacency), tuple(lengths))

    gamma = raw.get("rps_gamma")
    if gamma is not None:
        gamma = float(gamma)
        _check(0 <= gamma <= 1, "rps_gamma", "RPS fraction must lie in [0,1]")
    cap = raw.get("emission_cap")
    if cap is not None:
        cap = float(cap)
        _check(cap >= 0, "emission_cap", "must be >= 0")
    mode = raw.get("objective_mode", "min-cost")
    _check(mode in OBJECTIVE_MODES, "objective_mode", f"must be one of {OBJECTIVE_MODES}")
    _check(mode != "cost-under-cap" or cap is not None, "emission_cap", "cost-under-cap needs an emission cap")

    prices = _params(PriceBook, raw.get("price_book") or {}, "price_book")
    for f in fields(PriceBook):
        _check(getattr(prices, f.name) > 0, f"price_book.{f.name}", "prices must be > 0")
    reserve = _params(ReservePolicy, raw.get("reserve_policy") or {}, "reserve_policy")
    for name in ("demand_reserve_fraction", "wind_error", "solar_error"):
        _check(0 <= getattr(reserve, name) <= 1, f"reserve_policy.{name}", "fraction must lie in [0,1]")
    for name in ("wind_credit", "solar_credit"):
        v = getattr(reserve, name)
        if isinstance(v, str):
            _check(v == "equal-to-CF", f"reserve_policy.{name}", "only 'equal-to-CF' or a series is supported")
        else:
            _check(len(v) == T and all(0 <= x <= 1 for x in v), f"reserve_policy.{name}",
                   "credit series must have length T and values in [0,1]")
    _check(reserve.es_reserve_rule == "power-headroom", "reserve_policy.es_reserve_rule",
           "only 'power-headroom' is supported")

    ablation = frozenset(str(x) for x in (raw.get("chain_ablation") or ()))
    bad = ablation - ABLATION_LINKS
    _check(not bad, "chain_ablation", f"unknown link(s) {sorted(bad)}")

    lhv = float(raw.get("lhv_mj_per_kg", raw.get("lhv", LHV_H2)))
    _check(lhv > 0, "lhv_mj_per_kg", "must be > 0")
    weight = raw.get("period_weight")
    if weight is not None:
        weight = float(weight)
        _check(weight > 0, "period_weight", "must be > 0")

    surplus_rule = raw.get("ec_surplus_rule", "renewable-cover")
    _check(surplus_rule in EC_SURPLUS_RULES, "ec_surplus_rule", f"must be one of {EC_SURPLUS_RULES}")

    return ScenarioConfig(
        regions=tuple(regions),
        technologies=tuple(techs.values()),
        topology=topology,
        horizon_hours=T,
        rps_gamma=gamma,
        emission_cap=cap,
        objective_mode=mode,
        price_book=prices,
        reserve_policy=reserve,
        chain_ablation=ablation,
        lhv=lhv,
        period_weight=weight,
        wrap=bool(raw.get("wrap", True)),
        ec_surplus_rule=surplus_rule,
        name=str(raw.get("name", "scenario")),
    )


# --------------------------------------------------------------------------
# serialization


def _plain(obj) -> dict:
    out = {}
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, tuple):
            v = list(v)
        out[f.name] = v
    return out


def technology_to_dict(t: TechnologySpec) -> dict:
    d: dict[str, Any] = {"id": t.id, "kind": t.kind, "cost": _plain(t.cost)}
    for name in ("flex", "conversion", "storage"):
        v = getattr(t, name)
        if v is not None:
            d[name] = _plain(v)
    for name in ("fuel", "fuel_heat_content", "emission_factor"):
        v = getattr(t, name)
        if v is not None:
            d[name] = v
    return d


def region_to_dict(r: RegionSpec) -> dict:
    d: dict[str, Any] = {"id": r.id}
    for name in _SERIES:
        d[name] = [float(x) for x in getattr(r, name)]
    for name in ("existing_capacity", "build_limit", "fuel_prices", "emission_factors"):
        d[name] = {k: float(v) for k, v in getattr(r, name).items()}
    return d


def topology_to_dict(t: Topology) -> dict:
    return {
        "corridors": [
            {"from": c.a, "to": c.b, "length_km": c.length_km, "existing_mw": c.existing_mw,
             "limit_mw": c.limit_mw, "capital_usd_per_kw": c.capital}
            for c in t.corridors
        ],
        "hydrogen_adjacency": [[a, b, l] for (a, b), l in zip(t.hydrogen_adjacency, t.hydrogen_lengths)],
    }


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Canonical plain-data form; validating it reproduces ``cfg`` exactly."""
    return {
        "schema_version": SCHEMA_VERSION,
        "name": cfg.name,
        "horizon_hours": cfg.horizon_hours,
        "rps_gamma": cfg.rps_gamma,
        "emission_cap": cfg.emission_cap,
        "objective_mode": cfg.objective_mode,
        "chain_ablation": sorted(cfg.chain_ablation),
        "lhv_mj_per_kg": cfg.lhv,
        "period_weight": cfg.period_weight,
        "wrap": cfg.wrap,
        "ec_surplus_rule": cfg.ec_surplus_rule,
        "price_book": _plain(cfg.price_book),
        "reserve_policy": _plain(cfg.reserve_policy),
        "technologies": [technology_to_dict(t) for t in cfg.technologies],
        "regions": [region_to_dict(r) for r in cfg.regions],
        "topology": topology_to_dict(cfg.topology),
    }


def dump_scenario(cfg: ScenarioConfig, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        yaml.safe_dump(scenario_to_dict(cfg), fh, sort_keys=False, default_flow_style=None, width=120)


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read a YAML/JSON scenario document; relative CSV paths resolve against its folder."""
    path = Path(path)
    with path.open() as fh:
        raw = yaml.safe_load(fh)
    return validate_scenario(raw, base_dir=path.parent)
