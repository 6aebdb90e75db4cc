"""Bundled parameter sets: technology table, Northeast corridors, pipeline rate."""

from __future__ import annotations

import copy
from functools import lru_cache
from importlib import resources

import yaml

from .core import TechnologySpec, _technology

PIPELINE_RATE_USD_PER_KM_GWH = 2.484

# (from, to, existing GW, expansion limit GW, capital $/kW, length km); 40-year lifetime
NORTHEAST_CORRIDORS = (
    ("EIM", "JL", 3.6, 9.6, 167.30, 587.26),
    ("HLJ", "JL", 4.8, 9.6, 60.18, 115.57),
    ("LN", "JL", 4.8, 9.6, 65.91, 140.78),
    ("EIM", "HLJ", 2.4, 9.6, 184.74, 663.99),
    ("EIM", "LN", 7.2, 9.6, 145.79, 492.50),
)


@lru_cache(maxsize=1)
def _load() -> tuple[dict, ...]:
    text = resources.files("h2plan.data").joinpath("technologies.yaml").read_text()
    return tuple(yaml.safe_load(text))


def bundled_technology_dicts() -> dict[str, dict]:
    """Raw bundled technology entries keyed by id (fresh copies)."""
    return {d["id"]: copy.deepcopy(d) for d in _load()}


def bundled_technologies(*ids: str) -> list[TechnologySpec]:
    table = bundled_technology_dicts()
    ids = ids or tuple(table)
    return [_technology(table[i], f"bundled[{i}]", table) for i in ids]


def northeast_topology_dict() -> dict:
    """Topology section for the four-region Northeast grid (MW, km)."""
    corridors = [
        {"from": a, "to": b, "length_km": length, "existing_mw": ex * 1e3, "limit_mw": lim * 1e3,
         "capital_usd_per_kw": cap}
        for a, b, ex, lim, cap, length in NORTHEAST_CORRIDORS
    ]
    adjacency = [[a, b, length] for a, b, *_, length in NORTHEAST_CORRIDORS]
    return {"corridors": corridors, "hydrogen_adjacency": adjacency}
