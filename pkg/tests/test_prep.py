import numpy as np
import pytest
from hypothesis import given, strategies as st

from h2plan.core import ScenarioError
from h2plan.prep import (
    PVModel, extrapolate_wind_speed, heat_demand_series, process_region, read_weather_csv, site_mask,
    solar_capacity_factor, wind_capacity_factor,
)


def test_wind_extrapolation():
    assert extrapolate_wind_speed(6.0, 50) == pytest.approx(6.0)
    assert extrapolate_wind_speed(0.0, 100) == 0.0
    assert extrapolate_wind_speed(6.0, 100) == pytest.approx(6.0 * 2 ** (1 / 7), abs=1e-12)
    assert extrapolate_wind_speed(6.0, 100) == pytest.approx(6.625, abs=0.001)


@pytest.mark.parametrize("v,cf", [(2.0, 0.0), (15.0, 1.0), (7.0, (343 - 27) / (1331 - 27)), (26.0, 0.0), (11.0, 1.0)])
def test_wind_power_curve(v, cf):
    assert wind_capacity_factor(v) == pytest.approx(cf, abs=1e-12)


def test_wind_cf_at_seven():
    assert wind_capacity_factor(7.0) == pytest.approx(0.2423, abs=0.0005)


@given(st.lists(st.floats(0, 40), min_size=2, max_size=50))
def test_wind_curve_shape(speeds):
    v = np.sort(np.array(speeds))
    cf = wind_capacity_factor(v)
    assert np.all((cf >= 0) & (cf <= 1))
    rising = v <= 11.0
    assert np.all(np.diff(cf[rising]) >= -1e-15)
    assert np.all(cf[v > 25.0] == 0.0)


def test_solar_cf_examples():
    assert solar_capacity_factor(0, 20) == 0.0
    assert solar_capacity_factor(1000, -6.25) == pytest.approx(1.0, abs=1e-12)
    assert solar_capacity_factor(800, 20) == pytest.approx(0.8 * (1 - 0.0045 * 20), abs=1e-12)
    assert solar_capacity_factor(800, 20) == pytest.approx(0.728, abs=0.001)


@given(st.floats(0, 2000), st.floats(-40, 50))
def test_solar_cf_bounded(g, t):
    assert 0.0 <= solar_capacity_factor(g, t) <= 1.0


def test_solar_model_configurable():
    flat = PVModel(temp_coefficient=0.0)
    assert solar_capacity_factor(500, 30, flat) == pytest.approx(0.5)


def test_heat_demand_examples():
    assert heat_demand_series([18.0], 3.0, 7.0)[0] == 7.0
    assert heat_demand_series([25.0], 3.0, 7.0)[0] == 7.0
    assert heat_demand_series([8.0], 2.0, 5.0)[0] == 25.0


@given(st.lists(st.floats(-40, 40), min_size=1, max_size=30), st.floats(0, 50), st.floats(0, 50))
def test_heat_demand_monotone_in_temperature(temps, slope, base):
    t = np.array(temps)
    hd = heat_demand_series(t, slope, base)
    hotter = heat_demand_series(t + 1.0, slope, base)
    assert np.all(hotter <= hd + 1e-12)
    assert np.all(hd[t >= 18] == base)


def test_site_mask():
    assert site_mask(30, "grassland", "wind") is False
    assert site_mask(2, "water") is False
    assert site_mask(10, "grassland", "wind") is True
    assert site_mask(10, "grassland", "solar") is False
    with pytest.raises(ValueError):
        site_mask(1, "lava")


def test_weather_csv_reading(tmp_path):
    p = tmp_path / "A.csv"
    p.write_text("hour,wind_speed_50m,irradiance,ambient_temp\n1,6,0,-5\n2,6,800,20\n")
    samples = read_weather_csv(p)
    out = process_region(samples, 2.0, 5.0)
    assert len(out["wind_cf"]) == 2
    assert out["solar_cf"][1] == pytest.approx(0.728, abs=1e-3)
    assert out["heat_demand"][0] == pytest.approx(2.0 * 23 + 5.0)
    bad = tmp_path / "B.csv"
    bad.write_text("hour,wind_speed_50m,irradiance,ambient_temp\n1,6,0,-5\n2,x,1,1\n")
    with pytest.raises(ScenarioError, match=":3"):
        read_weather_csv(bad)
