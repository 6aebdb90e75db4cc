import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import tiny_doc
from oracles import crf_annuity

from h2plan.core import (
    ScenarioError, amortized_cost, dump_scenario, load_scenario, scenario_to_dict, to_canonical,
    validate_scenario,
)
from h2plan.scenarios import desk_document


def test_amortized_cost_zero_rate_single_year():
    assert amortized_cost(100, 1, 0) == 100


@pytest.mark.parametrize("capital,life,expected", [(450, 25, 38.61), (750, 20, 70.79)])
def test_amortized_cost_against_annuity_table(capital, life, expected):
    assert amortized_cost(capital, life, 0.07) == pytest.approx(expected, abs=0.01)
    assert amortized_cost(capital, life, 0.07) == pytest.approx(crf_annuity(capital, life, 0.07), rel=1e-12)


@given(st.floats(1.0, 1e5), st.integers(1, 60), st.floats(0.001, 0.2))
def test_annuity_recovers_capital(capital, life, rate):
    a = amortized_cost(capital, life, rate)
    pv = sum(a / (1 + rate) ** k for k in range(1, life + 1))
    assert pv == pytest.approx(capital, rel=1e-9)


def test_amortized_cost_rejects_bad_inputs():
    with pytest.raises(ValueError):
        amortized_cost(-1, 10, 0.07)
    with pytest.raises(ValueError):
        amortized_cost(100, 0, 0.07)


def test_cf_out_of_range_is_rejected():
    doc = tiny_doc(T=3, wind_cf=[0.2, 1.3, 0.1])
    with pytest.raises(ScenarioError, match=r"capacity factor out of \[0,1\]"):
        validate_scenario(doc)


def test_short_series_names_region_and_series():
    doc = tiny_doc(T=4, heat_demand=[1.0, 2.0, 3.0])
    with pytest.raises(ScenarioError) as err:
        validate_scenario(doc)
    assert "A" in err.value.path and "heat_demand" in err.value.path


def test_unknown_technology_and_bad_efficiency():
    doc = tiny_doc()
    doc["technologies"] = [{"use": "no_such_tech"}]
    with pytest.raises(ScenarioError, match="unknown bundled technology"):
        validate_scenario(doc)
    doc["technologies"] = [{"use": "AEC", "conversion": {"electric_eff": -0.2}}]
    with pytest.raises(ScenarioError, match="electric_eff"):
        validate_scenario(doc)


def test_existing_above_limit_and_horizon_checks():
    doc = tiny_doc(existing_capacity={"coal_L": 200.0}, build_limit={"coal_L": 100.0})
    with pytest.raises(ScenarioError, match="exceeds build limit"):
        validate_scenario(doc)
    doc = tiny_doc(T=1)
    with pytest.raises(ScenarioError, match="horizon_hours"):
        validate_scenario(doc)


def test_rps_gamma_bounds():
    doc = tiny_doc()
    doc["rps_gamma"] = 1.5
    with pytest.raises(ScenarioError):
        validate_scenario(doc)


def test_valid_config_echoes_and_is_idempotent():
    cfg = validate_scenario(desk_document(hours=24))
    again = validate_scenario(cfg)
    assert again == cfg
    assert scenario_to_dict(validate_scenario(scenario_to_dict(cfg))) == scenario_to_dict(cfg)


def test_yaml_round_trip_is_bit_identical(tmp_path):
    cfg = validate_scenario(desk_document(hours=24))
    dump_scenario(cfg, tmp_path / "s.yaml")
    back = load_scenario(tmp_path / "s.yaml")
    for a, b in zip(cfg.regions, back.regions):
        for name in ("electric_demand", "heat_demand", "wind_cf", "solar_cf", "hydrogen_demand"):
            assert np.array_equal(getattr(a, name), getattr(b, name))
    assert back == cfg


def test_unit_annotations_normalise():
    assert to_canonical("2 GW", "power") == 2000.0
    assert to_canonical("500 kWh", "energy") == 0.5
    assert to_canonical("3 t/h", "flow") == 3000.0
    with pytest.raises(ScenarioError, match="not a power unit"):
        to_canonical("5 km", "power")
    doc = tiny_doc(T=2, electric_demand=["0.1 GW", "100 MW"])
    cfg = validate_scenario(doc)
    assert list(cfg.regions[0].electric_demand) == [100.0, 100.0]


def test_series_from_csv(tmp_path):
    (tmp_path / "d.csv").write_text("hour,value\n1,5\n2,6\n")
    doc = tiny_doc(T=2, electric_demand={"csv": "d.csv"})
    cfg = validate_scenario(doc, base_dir=tmp_path)
    assert list(cfg.regions[0].electric_demand) == [5.0, 6.0]
    (tmp_path / "bad.csv").write_text("hour,value\n1,5\n3,6\n")
    with pytest.raises(ScenarioError, match="expected hour 2"):
        validate_scenario(tiny_doc(T=2, electric_demand={"csv": "bad.csv"}), base_dir=tmp_path)


def test_capital_weight_defaults_to_horizon_share():
    cfg = validate_scenario(tiny_doc(T=24))
    assert cfg.capital_weight == pytest.approx(24 / 8760)
    assert math.isclose(cfg.lhv, 120.0)
