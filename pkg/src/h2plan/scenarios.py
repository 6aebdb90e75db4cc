"""Bundled desk-scale instances built from seeded synthetic weather.

``desk`` is a two-region system with the full electricity-heat-hydrogen
chain; ``validation`` fixes every committed fleet so that the binary
commitment oracle applies; ``demo`` is the desk instance over a shorter
window. All are returned as raw scenario documents (plain dicts) so they can
be dumped to YAML, edited and re-validated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ScenarioConfig, validate_scenario
from .prep import WeatherSample, process_region


@dataclass(frozen=True)
class RegionClimate:
    id: str
    mean_wind: float  # m/s at 50 m
    wind_amplitude: float
    peak_irradiance: float  # W/m2
    mean_temp: float  # degC
    temp_swing: float
    electric_peak: float  # MW
    heat_slope: float  # MW per degC below the set point
    hot_water: float  # MW
    hydrogen: float  # kg/h
    export: float = 0.0  # MW


DESK_CLIMATES = (
    RegionClimate("N", 7.5, 3.0, 520.0, -12.0, 6.0, 900.0, 12.0, 60.0, 300.0, 50.0),
    RegionClimate("S", 5.5, 2.0, 700.0, -4.0, 7.0, 1400.0, 10.0, 80.0, 500.0),
)


def synthetic_weather(climate: RegionClimate, hours: int, seed: int, start_hour: int = 0) -> list[WeatherSample]:
    """Hourly wind, irradiance and temperature with diurnal cycles and AR(1) noise."""
    rng = np.random.default_rng(seed)
    h = np.arange(start_hour, start_hour + hours)
    hod = h % 24
    ar = np.zeros(hours)
    shocks = rng.normal(0.0, 0.35, hours)
    for t in range(1, hours):
        ar[t] = 0.93 * ar[t - 1] + shocks[t]
    wind = climate.mean_wind + climate.wind_amplitude * ar + 0.8 * np.cos(2 * np.pi * (hod - 3) / 24)
    wind = np.clip(wind, 0.0, 30.0)
    clouds = np.clip(0.5 + 0.25 * rng.normal(size=hours // 24 + 1).repeat(24)[:hours], 0.0, 0.9)
    sun = np.clip(np.sin(np.pi * (hod - 7) / 10), 0.0, None)
    irr = climate.peak_irradiance * sun * (1.0 - clouds)
    temp = (climate.mean_temp + climate.temp_swing * np.sin(2 * np.pi * (hod - 9) / 24)
            + 2.0 * rng.normal(size=hours // 24 + 1).repeat(24)[:hours])
    return [WeatherSample(int(i + 1), float(w), float(g), float(tc))
            for i, (w, g, tc) in enumerate(zip(wind, irr, temp))]


def _electric_profile(hours: int, start_hour: int) -> np.ndarray:
    hod = np.arange(start_hour, start_hour + hours) % 24
    morning = np.exp(-0.5 * ((hod - 9) / 2.5) ** 2)
    evening = np.exp(-0.5 * ((hod - 19) / 2.0) ** 2)
    return 0.7 + 0.18 * morning + 0.3 * evening


def _region_doc(c: RegionClimate, hours: int, seed: int, start_hour: int) -> dict:
    weather = synthetic_weather(c, hours, seed, start_hour)
    series = process_region(weather, c.heat_slope, c.hot_water)
    profile = _electric_profile(hours, start_hour)
    return {
        "id": c.id,
        "electric_demand": [round(float(v), 6) for v in c.electric_peak * profile / profile.max()],
        "export_demand": [float(c.export)] * hours,
        "heat_demand": [round(float(v), 6) for v in series["heat_demand"]],
        "hydrogen_demand": [float(c.hydrogen)] * hours,
        "wind_cf": [round(float(v), 6) for v in series["wind_cf"]],
        "solar_cf": [round(float(v), 6) for v in series["solar_cf"]],
        "fuel_prices": {"coal": 90.0, "gas": 0.35},  # $/t standard coal, $/m3
    }


DESK_TECHS = ("coal_L", "chp", "gas", "WT", "PV", "BES", "SOEC", "AEC", "HT_M", "PEMFC", "SOFC",
              "HS_cavern", "COP", "EB", "HST", "LINE")


def desk_document(hours: int = 96, seed: int = 7, start_hour: int = 0, rps_gamma: float | None = None) -> dict:
    """Two-region desk instance with the full technology set."""
    regions = []
    for i, c in enumerate(DESK_CLIMATES):
        doc = _region_doc(c, hours, seed + 101 * i, start_hour)
        scale = c.electric_peak / 900.0
        doc["existing_capacity"] = {"coal_L": round(500 * scale, 3), "chp": round(300 * scale, 3),
                                    "WT": round(200 * scale, 3), "BES": 50.0, "BES@energy": 200.0}
        doc["build_limit"] = {"coal_L": round(500 * scale, 3), "chp": round(300 * scale, 3),
                              "WT": 8000.0, "PV": 8000.0}
        regions.append(doc)
    return {
        "name": "desk",
        "schema_version": 1,
        "horizon_hours": hours,
        "technologies": [{"use": t} for t in DESK_TECHS],
        "regions": regions,
        "topology": {
            "corridors": [{"from": "N", "to": "S", "length_km": 420.0, "existing_mw": 300.0,
                           "limit_mw": 2000.0, "capital_usd_per_kw": 120.0}],
            "hydrogen_adjacency": [["N", "S"]],
        },
        "rps_gamma": rps_gamma,
        "objective_mode": "min-cost",
    }


def validation_document(hours: int = 96, seed: int = 11) -> dict:
    """Desk variant whose committed fleets are fixed so the binary oracle applies."""
    doc = desk_document(hours, seed)
    doc["name"] = "validation"
    doc["technologies"] = [{"use": t} for t in ("coal_L", "gas", "WT", "PV", "BES", "AEC",
                                                 "HS_cavern", "COP", "EB", "HST", "LINE")]
    fleets = {"N": {"coal_L": 600.0, "gas": 300.0, "AEC": 200.0},
              "S": {"coal_L": 800.0, "gas": 400.0, "AEC": 250.0}}
    for r in doc["regions"]:
        fixed = fleets[r["id"]]
        r["existing_capacity"] = {**fixed, "WT": 1500.0 if r["id"] == "N" else 900.0,
                                  "PV": 300.0 if r["id"] == "N" else 900.0}
        r["build_limit"] = {**fixed, "WT": 1500.0 if r["id"] == "N" else 900.0,
                            "PV": 300.0 if r["id"] == "N" else 900.0}
        r.pop("export_demand")
    return doc


def demo_document(hours: int = 48, seed: int = 3) -> dict:
    doc = desk_document(hours, seed)
    doc["name"] = "demo"
    return doc


BUILTIN = {"desk": desk_document, "validation": validation_document, "demo": demo_document}


def builtin_scenario(name: str, **kwargs) -> ScenarioConfig:
    if name not in BUILTIN:
        raise KeyError(f"unknown built-in scenario {name!r}; choose from {sorted(BUILTIN)}")
    return validate_scenario(BUILTIN[name](**kwargs))
