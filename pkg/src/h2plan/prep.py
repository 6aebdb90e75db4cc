"""Capacity factors and heat demand from hourly weather samples.

The turbine curve and PV temperature model are generic stand-ins with
explicit constants (1.5 MW class turbine, 100 m hub; crystalline PV).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ScenarioError

INDOOR_TEMP_C = 18.0
REFERENCE_HEIGHT_M = 50.0


@dataclass(frozen=True)
class PowerCurve:
    cut_in: float = 3.0
    rated: float = 11.0
    cut_out: float = 25.0
    hub_height: float = 100.0
    shear_exponent: float = 1.0 / 7.0


@dataclass(frozen=True)
class PVModel:
    temp_coefficient: float = -0.0045  # per degC
    noct: float = 45.0  # degC
    stc_irradiance: float = 1000.0  # W/m2
    stc_temp: float = 25.0


@dataclass(frozen=True)
class SiteRules:
    max_slope: dict = field(default_factory=lambda: {"wind": 20.0, "solar": 5.0})
    excluded: frozenset = frozenset({"water", "urban", "protected"})
    classes: frozenset = frozenset({
        "water", "urban", "protected", "grassland", "cropland", "shrubland",
        "forest", "barren", "wetland", "snow",
    })


@dataclass(frozen=True)
class WeatherSample:
    hour: int
    wind_speed_50m: float
    irradiance: float
    ambient_temp: float


def extrapolate_wind_speed(v50, hub_height: float, alpha: float = 1.0 / 7.0):
    """Power-law shear from the 50 m reference height to ``hub_height``."""
    if hub_height <= 0:
        raise ValueError("hub height must be positive")
    return np.asarray(v50, dtype=float) * (hub_height / REFERENCE_HEIGHT_M) ** alpha


def wind_capacity_factor(v_hub, curve: PowerCurve = PowerCurve()):
    """Three-segment turbine curve with cubic rise between cut-in and rated speed."""
    v = np.asarray(v_hub, dtype=float)
    vi, vr = curve.cut_in, curve.rated
    rising = (v**3 - vi**3) / (vr**3 - vi**3)
    cf = np.where(v < vi, 0.0, np.where(v < vr, rising, np.where(v <= curve.cut_out, 1.0, 0.0)))
    return cf if cf.ndim else float(cf)


def solar_capacity_factor(irradiance, ambient_temp, model: PVModel = PVModel()):
    g = np.asarray(irradiance, dtype=float)
    t_cell = np.asarray(ambient_temp, dtype=float) + g * (model.noct - 20.0) / 800.0
    cf = (g / model.stc_irradiance) * (1.0 + model.temp_coefficient * (t_cell - model.stc_temp))
    cf = np.clip(cf, 0.0, 1.0)
    return cf if cf.ndim else float(cf)


def heat_demand_series(temps, space_slope: float, hot_water_base: float):
    """Space heating above the 18 degC indoor set point plus a flat hot-water load (MW)."""
    if space_slope < 0 or hot_water_base < 0:
        raise ValueError("slope and base must be nonnegative")
    t = np.asarray(temps, dtype=float)
    return space_slope * np.maximum(0.0, INDOOR_TEMP_C - t) + hot_water_base


def site_mask(slope: float, land_class: str, resource: str = "wind", rules: SiteRules = SiteRules()) -> bool:
    if land_class not in rules.classes:
        raise ValueError(f"unknown land class {land_class!r}")
    if resource not in rules.max_slope:
        raise ValueError(f"unknown resource {resource!r}")
    return slope <= rules.max_slope[resource] and land_class not in rules.excluded


# --------------------------------------------------------------------------
# CSV plumbing

WEATHER_HEADER = ["hour", "wind_speed_50m", "irradiance", "ambient_temp"]


def read_weather_csv(path: str | Path) -> list[WeatherSample]:
    path = Path(path)
    samples = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != WEATHER_HEADER:
            raise ScenarioError(str(path), f"expected header {','.join(WEATHER_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                s = WeatherSample(int(row[0]), float(row[1]), float(row[2]), float(row[3]))
            except (ValueError, IndexError):
                raise ScenarioError(f"{path}:{lineno}", f"malformed row {row!r}") from None
            if s.wind_speed_50m < 0 or s.irradiance < 0:
                raise ScenarioError(f"{path}:{lineno}", "wind speed and irradiance must be >= 0")
            if s.hour != len(samples) + 1:
                raise ScenarioError(f"{path}:{lineno}", f"expected hour {len(samples) + 1}, got {s.hour}")
            samples.append(s)
    if not samples:
        raise ScenarioError(str(path), "no data rows")
    return samples


def process_region(samples: list[WeatherSample], space_slope: float, hot_water_base: float,
                   curve: PowerCurve = PowerCurve(), pv: PVModel = PVModel()) -> dict[str, np.ndarray]:
    v50 = np.array([s.wind_speed_50m for s in samples])
    g = np.array([s.irradiance for s in samples])
    temp = np.array([s.ambient_temp for s in samples])
    v_hub = extrapolate_wind_speed(v50, curve.hub_height, curve.shear_exponent)
    return {
        "wind_cf": np.asarray(wind_capacity_factor(v_hub, curve)),
        "solar_cf": np.asarray(solar_capacity_factor(g, temp, pv)),
        "heat_demand": np.asarray(heat_demand_series(temp, space_slope, hot_water_base)),
    }
