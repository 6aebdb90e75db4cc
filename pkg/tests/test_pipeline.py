import csv

import numpy as np
import pytest

from oracles import brute_force_min_cost_flow

from h2plan.core import Topology
from h2plan.pipeline import (
    CAPACITY_HEADER, FLOW_HEADER, ImbalanceError, PipelinePlan, pipeline_cost, plan_pipelines,
)


def topo(edges):
    return Topology(hydrogen_adjacency=tuple((a, b) for a, b, _ in edges),
                    hydrogen_lengths=tuple(float(l) for _, _, l in edges))


def test_single_region_has_no_flows():
    plan = plan_pipelines({"A": np.zeros(3)}, Topology())
    assert plan.objective == 0.0 and plan.flows.size == 0


def test_two_regions_only_feasible_flow():
    plan = plan_pipelines({"A": np.array([10.0]), "B": np.array([-10.0])}, topo([("A", "B", 100)]))
    assert plan.flow("A", "B")[0] == pytest.approx(10.0)
    assert plan.flow("B", "A")[0] == pytest.approx(-10.0)
    assert plan.objective == pytest.approx(1000.0)
    assert plan.capacities[0] == pytest.approx(10.0)


def test_triangle_prefers_direct_route():
    t = topo([("A", "B", 100), ("A", "C", 100), ("C", "B", 50)])
    inj = {"A": np.array([10.0]), "B": np.array([-10.0]), "C": np.array([0.0])}
    plan = plan_pipelines(inj, t)
    assert plan.objective == pytest.approx(1000.0)
    assert plan.flow("A", "B")[0] == pytest.approx(10.0)
    oracle = brute_force_min_cost_flow(["A", "B", "C"], [("A", "B"), ("A", "C"), ("C", "B")], [100, 100, 50],
                                       {"A": 10.0, "B": -10.0, "C": 0.0})
    assert plan.objective == pytest.approx(oracle)


def _random_instance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 5))
    T = int(rng.integers(1, 25))
    nodes = [f"R{i}" for i in range(n)]
    pairs = [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)]
    # random spanning path keeps the graph connected, then extra edges at random
    order = rng.permutation(n)
    edges = {tuple(sorted((nodes[order[i]], nodes[order[i + 1]]))) for i in range(n - 1)}
    edges |= {p for p in pairs if rng.random() < 0.5}
    edges = sorted(edges)
    lengths = [float(rng.integers(20, 400)) for _ in edges]
    inj = rng.normal(0, 50, size=(n, T))
    inj[-1] = -inj[:-1].sum(axis=0)
    return nodes, edges, lengths, {r: inj[i] for i, r in enumerate(nodes)}


@pytest.mark.parametrize("seed", range(25))
def test_matches_brute_force_min_cost_flow(seed):
    nodes, edges, lengths, inj = _random_instance(seed)
    plan = plan_pipelines(inj, topo([(a, b, l) for (a, b), l in zip(edges, lengths)]))
    expected = sum(brute_force_min_cost_flow(nodes, edges, lengths, {r: inj[r][t] for r in nodes})
                   for t in range(plan.T))
    assert plan.objective == pytest.approx(expected, rel=1e-6)
    for r in plan.residuals().values():
        assert np.max(np.abs(r)) <= 1e-9
    for i in range(len(plan.corridors)):
        assert np.all(plan.capacities[i] >= np.abs(plan.flows[i]))


def test_imbalance_names_hour():
    inj = {"A": np.array([5.0, 5.0, 1.0]), "B": np.array([-5.0, -4.0, -1.0])}
    with pytest.raises(ImbalanceError, match="hour 2"):
        plan_pipelines(inj, topo([("A", "B", 10)]))


def test_isolated_surplus_is_rejected():
    with pytest.raises(ImbalanceError):
        plan_pipelines({"A": np.array([1.0]), "B": np.array([-1.0])}, Topology())


def _plan(flows, length=100.0):
    flows = np.atleast_2d(np.asarray(flows, dtype=float))
    return PipelinePlan([("A", "B")], np.array([length]), flows, {})


def test_pipeline_cost_examples():
    assert pipeline_cost(_plan([0.0, 0.0])) == 0.0
    assert pipeline_cost(_plan([1_000_000.0])) == pytest.approx(8280.0, abs=1.0)
    assert pipeline_cost(_plan([600_000.0, -400_000.0])) == pytest.approx(8280.0, abs=1.0)
    base = pipeline_cost(_plan([3.0, -7.0, 11.0]))
    assert pipeline_cost(_plan([6.0, -14.0, 22.0])) == pytest.approx(2 * base)
    with pytest.raises(ValueError):
        pipeline_cost(_plan([1.0]), rate=0.0)


def test_csv_outputs(tmp_path):
    plan = plan_pipelines({"A": np.array([10.0, -4.0]), "B": np.array([-10.0, 4.0])}, topo([("A", "B", 100)]))
    rows = list(csv.reader(plan.write_flows_csv(tmp_path / "f.csv").open()))
    assert rows[0] == FLOW_HEADER and len(rows) == 3
    assert rows[2] == ["A", "B", "2", repr(-4.0)]
    rows = list(csv.reader(plan.write_capacity_csv(tmp_path / "c.csv").open()))
    assert rows[0] == CAPACITY_HEADER
    assert float(rows[1][2]) == 10.0
    assert float(rows[1][3]) == pytest.approx(pipeline_cost(plan) * 8760 / 2)


def test_desk_injections_route(desk_min_cost):
    plan = plan_pipelines(desk_min_cost, desk_min_cost.scenario.topology)
    scale = 1 + max(np.max(np.abs(v)) for v in plan.injections.values())
    for r in plan.residuals().values():
        assert np.max(np.abs(r)) <= 1e-9 * scale
