import functools

import pytest
from hypothesis import HealthCheck, settings

from h2plan.assemble import build_planning_lp, extract_solution
from h2plan.core import validate_scenario
from h2plan.scenarios import builtin_scenario, desk_document
from h2plan.solve import solve

settings.register_profile("suite", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tiny_doc(T=2, techs=("coal_L",), demand=100.0, **region):
    """One-region document with flat demand and no renewables."""
    r = {"id": "A", "electric_demand": [demand] * T, "heat_demand": [0.0] * T,
         "hydrogen_demand": [0.0] * T, "wind_cf": [0.0] * T, "solar_cf": [0.0] * T,
         "fuel_prices": {"coal": 90.0, "gas": 0.35}}
    r.update(region)
    return {"name": "tiny", "horizon_hours": T, "technologies": [{"use": t} for t in techs],
            "regions": [r], "topology": {}}


def solve_plan(scenario, **kw):
    model = build_planning_lp(scenario, **kw)
    res = solve(model.lp)
    assert res.ok, res.status
    return extract_solution(model, res)


@functools.lru_cache(maxsize=None)
def desk(rps_gamma=None, ablation=()):
    doc = desk_document(rps_gamma=rps_gamma)
    doc["chain_ablation"] = list(ablation)
    return validate_scenario(doc)


@functools.lru_cache(maxsize=None)
def desk_solution(rps_gamma=None, ablation=()):
    return solve_plan(desk(rps_gamma, ablation))


@pytest.fixture(scope="session")
def desk_min_cost():
    return desk_solution()


@pytest.fixture(scope="session")
def demo_scenario():
    return builtin_scenario("demo")
