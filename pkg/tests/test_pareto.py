import csv
import functools
import math

import pytest

from conftest import solve_plan, tiny_doc

from h2plan.core import validate_scenario
from h2plan.pareto import FRONTIER_HEADER, compute_anchors, frontier
from h2plan.scenarios import desk_document


@functools.lru_cache(maxsize=None)
def small_desk():
    return validate_scenario(desk_document(hours=24))


@functools.lru_cache(maxsize=None)
def small_frontier(n):
    return frontier(small_desk(), n)


def test_two_points_are_the_anchors():
    fr = small_frontier(2)
    assert len(fr.points) == 2
    lo, hi = fr.points
    assert lo.emissions == pytest.approx(fr.min_cost.co2) and lo.cost == pytest.approx(fr.min_cost.total_cost)
    assert hi.emissions == pytest.approx(fr.min_co2.co2) and hi.cost == pytest.approx(fr.min_co2.total_cost)


def test_anchor_ordering_and_direct_solves():
    sc = small_desk()
    min_cost, min_co2 = compute_anchors(sc)
    assert min_cost.total_cost <= min_co2.total_cost * (1 + 1e-9)
    assert min_cost.co2 >= min_co2.co2 - 1e-6
    direct_cost = solve_plan(sc, mode="min-cost").objective
    direct_co2 = solve_plan(sc, mode="min-co2").objective
    assert min_cost.total_cost == pytest.approx(direct_cost, rel=1e-7)
    assert min_co2.co2 == pytest.approx(direct_co2, rel=1e-7, abs=1e-6)


def test_zero_emission_factors_collapse_frontier():
    doc = tiny_doc(T=4, techs=("coal_L", "gas"), emission_factors={"coal_L": 0.0, "gas": 0.0})
    fr = frontier(validate_scenario(doc), 5)
    assert fr.min_cost.co2 == 0.0 and fr.min_co2.co2 == 0.0
    assert len(fr.points) == 1


def test_frontier_properties():
    fr = small_frontier(5)
    pts = fr.points
    assert len(pts) == 5 and all(p.ok for p in pts)
    assert [p.emissions for p in pts] == sorted((p.emissions for p in pts), reverse=True)
    for p in pts:
        assert p.emissions <= p.epsilon * (1 + 1e-7) + 1e-7
    # allowed emissions fall along the list, so cost must not fall
    for a, b in zip(pts, pts[1:]):
        assert b.cost >= a.cost * (1 - 1e-9)
    for p in pts:
        for q in pts:
            tol_c = 1e-6 * max(1.0, abs(p.cost))
            tol_e = 1e-6 * max(1.0, abs(p.emissions))
            dominates = (q.cost <= p.cost + tol_c and q.emissions <= p.emissions + tol_e
                         and (q.cost < p.cost - tol_c or q.emissions < p.emissions - tol_e))
            assert not dominates
    assert pts[0].emissions == pytest.approx(fr.min_cost.co2)
    assert pts[-1].emissions == pytest.approx(fr.min_co2.co2, abs=1e-6)


def test_reduction_costs_against_min_cost_baseline():
    fr = small_frontier(5)
    base = fr.points[0]
    assert math.isnan(base.reduction_cost)
    for p in fr.points[1:]:
        assert p.reduction_cost == pytest.approx((p.cost - base.cost) / (base.emissions - p.emissions))
        assert p.reduction_cost >= 0


def test_frontier_csv(tmp_path):
    fr = small_frontier(2)
    path = fr.write_csv(tmp_path / "f.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == FRONTIER_HEADER
    assert len(rows) == 3 and rows[1][3] == ""


def test_needs_two_points():
    with pytest.raises(ValueError):
        frontier(small_desk(), 1)
    with pytest.raises(ValueError, match="baseline"):
        frontier(small_desk(), 3, baseline="median")
