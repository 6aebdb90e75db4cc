"""Hydrogen-chain device models and their LP fragments.

Electrolysis (EC) turns power into hydrogen and recoverable heat, turbines
(HT) and fuel cells (FC) turn hydrogen back into power and heat, and storage
(HS) exchanges hydrogen through a compressor (COP) whose rating caps both
charge and discharge flow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LHV_H2, ConversionParams, PriceBook, StorageParams
from .solve import EQ, GE, LE, LPBuilder

__all__ = [
    "ChainCoefficients", "StorageParams", "Capacity", "StorageHandles",
    "e2h_coefficient", "ec_output", "ec_surplus_bound", "ht_output", "fc_output",
    "storage_block", "hs_cop_block", "chain_economics",
]


def e2h_coefficient(lhv: float = LHV_H2) -> float:
    """Hydrogen mass per unit energy, kg/MWh, for a heating value in MJ/kg."""
    if lhv <= 0:
        raise ValueError("heating value must be positive")
    return 3600.0 / lhv


@dataclass(frozen=True)
class ChainCoefficients:
    beta_e2h: float  # kg per MWh of hydrogen energy

    @classmethod
    def from_lhv(cls, lhv: float = LHV_H2) -> "ChainCoefficients":
        return cls(e2h_coefficient(lhv))

    def ec(self, conv: ConversionParams) -> tuple[float, float]:
        """(kg/h, MW heat) produced per MW of electrolyser input."""
        return self.beta_e2h * conv.electric_eff, conv.waste_heat_eff * (1.0 - conv.electric_eff)

    def h2_to_power(self, conv: ConversionParams) -> tuple[float, float]:
        """(kg/h consumed, MW heat) per MW of electric output for HT/FC."""
        eta = conv.electric_eff
        return self.beta_e2h / eta, conv.waste_heat_eff * (1.0 - eta) / eta


def ec_output(power, electric_eff: float, heat_eff: float, lhv: float = LHV_H2):
    """Hydrogen (kg/h) and waste heat (MW) for electrolyser input ``power`` (MW)."""
    p = np.asarray(power, dtype=float)
    m = e2h_coefficient(lhv) * electric_eff * p
    h = heat_eff * (1.0 - electric_eff) * p
    return (float(m), float(h)) if p.ndim == 0 else (m, h)


def _h2_to_power(m, electric_eff, heat_eff, lhv):
    m = np.asarray(m, dtype=float)
    energy = m / e2h_coefficient(lhv)
    p = electric_eff * energy
    h = heat_eff * (1.0 - electric_eff) * energy
    return (float(p), float(h)) if m.ndim == 0 else (p, h)


def ht_output(m, electric_eff: float, heat_eff: float, lhv: float = LHV_H2):
    """Power and heat (MW) from burning ``m`` kg/h in a hydrogen turbine."""
    return _h2_to_power(m, electric_eff, heat_eff, lhv)


def fc_output(m, electric_eff: float, heat_eff: float, lhv: float = LHV_H2):
    """Power and heat (MW) from ``m`` kg/h through a fuel cell."""
    return _h2_to_power(m, electric_eff, heat_eff, lhv)


def ec_surplus_bound(wind_cf, wind_capacity, wind_dispatch, solar_cf, solar_capacity, solar_dispatch):
    """Renewable headroom (MW) left for electrolysis in one region and hour."""
    wind_avail = np.asarray(wind_cf) * wind_capacity
    solar_avail = np.asarray(solar_cf) * solar_capacity
    tol = 1e-9 * (1.0 + np.abs(wind_avail) + np.abs(solar_avail))
    if np.any(np.asarray(wind_dispatch) > wind_avail + tol) or np.any(np.asarray(solar_dispatch) > solar_avail + tol):
        raise ValueError("dispatch exceeds available renewable generation")
    bound = np.maximum(0.0, (wind_avail - wind_dispatch) + (solar_avail - solar_dispatch))
    return float(bound) if np.ndim(bound) == 0 else bound


def chain_economics(produced_kg: float, served_kg: float, prices: PriceBook,
                    water_per_kg: float = 9.0, oxygen_per_kg: float = 8.0) -> tuple[float, float, float]:
    """(water cost, oxygen revenue, hydrogen revenue) in $."""
    if produced_kg < 0 or served_kg < 0:
        raise ValueError("hydrogen quantities must be nonnegative")
    return (water_per_kg * prices.water * produced_kg,
            oxygen_per_kg * prices.oxygen * produced_kg,
            prices.hydrogen * served_kg)


# --------------------------------------------------------------------------
# LP fragments


@dataclass(frozen=True)
class Capacity:
    """Capacity expression ``scale * (x[var] + existing)``; ``var < 0`` means fixed."""

    var: int = -1
    existing: float = 0.0
    scale: float = 1.0

    @property
    def fixed(self) -> bool:
        return self.var < 0

    def value(self, x: np.ndarray | None = None) -> float:
        extra = x[self.var] if (x is not None and self.var >= 0) else 0.0
        return self.scale * (extra + self.existing)

    def cap_rows(self, b: LPBuilder, flow_ids: np.ndarray, names: list[str]) -> None:
        """Rows ``flow_t <= capacity``."""
        b.add_rows([(1.0, flow_ids), (-self.scale, self.var)], LE, self.scale * self.existing, names)


@dataclass
class StorageHandles:
    charge: np.ndarray  # T
    discharge: np.ndarray  # T
    soc: np.ndarray  # T + 1 hour-boundary inventories


def storage_block(b: LPBuilder, prefix: str, T: int, params: StorageParams,
                  charge_cap: Capacity, discharge_cap: Capacity, energy_cap: Capacity) -> StorageHandles:
    """Inventory recursion with cyclic boundary condition.

    ``soc[t]`` is the inventory at the start of hour ``t``; ``soc[T]`` closes
    the cycle and is tied to ``soc[0]``. Discharge in an hour is drawn from
    start-of-hour inventory.
    """
    hours = range(1, T + 1)
    ch = b.add_vars([f"ch.{prefix}.{t}" for t in hours])
    dis = b.add_vars([f"dis.{prefix}.{t}" for t in hours])
    soc = b.add_vars([f"soc.{prefix}.{t}" for t in range(1, T + 2)])
    charge_cap.cap_rows(b, ch, [f"chcap.{prefix}.{t}" for t in hours])
    discharge_cap.cap_rows(b, dis, [f"discap.{prefix}.{t}" for t in hours])
    energy_cap.cap_rows(b, soc[:T], [f"soccap.{prefix}.{t}" for t in hours])
    b.add_rows([(1.0, soc[:T]), (-1.0, dis)], GE, 0.0, [f"socdraw.{prefix}.{t}" for t in hours])
    b.add_rows(
        [(1.0, soc[1:]), (-(1.0 - params.loss_rate), soc[:T]), (-params.charge_eff, ch),
         (1.0 / params.discharge_eff, dis)],
        EQ, 0.0, [f"socdyn.{prefix}.{t}" for t in hours],
    )
    b.add_rows([(1.0, soc[T]), (-1.0, soc[0])], EQ, 0.0, [f"soccyc.{prefix}"])
    return StorageHandles(ch, dis, soc)


def hs_cop_block(b: LPBuilder, prefix: str, T: int, params: StorageParams,
                 storage_cap: Capacity, compressor_cap: Capacity, cop_kwh_per_kg: float):
    """Hydrogen storage behind a compressor.

    Returns the storage handles and the per-unit compressor load in MW per
    kg/h of charge or discharge flow.
    """
    handles = storage_block(b, prefix, T, params, compressor_cap, compressor_cap, storage_cap)
    return handles, cop_kwh_per_kg / 1000.0
