"""Independent reference computations used by the tests.

None of these import the package's solver or pipeline code.
"""

import itertools

import networkx as nx
import numpy as np


def crf_annuity(capital, lifetime, rate):
    if rate == 0:
        return capital / lifetime
    growth = 1.0
    for _ in range(lifetime):
        growth *= 1.0 + rate
    return capital * rate * growth / (growth - 1.0)


def vertex_enumeration(c, G, h):
    """min c.x over the polytope {G x <= h} by solving every n-subset of rows as equalities.

    Returns ("OPTIMAL", value) or ("INFEASIBLE", None). The caller includes
    finite variable bounds in ``G`` so the region is bounded.
    """
    G = np.asarray(G, float)
    h = np.asarray(h, float)
    n = G.shape[1]
    combos = np.array(list(itertools.combinations(range(len(G)), n)))
    M = G[combos]  # (k, n, n)
    rhs = h[combos]
    ok = np.abs(np.linalg.det(M)) > 1e-9
    if not ok.any():
        return "INFEASIBLE", None
    x = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
    slack = x @ G.T - h
    feasible = np.all(slack <= 1e-8 * (1 + np.abs(h)), axis=1)
    if not feasible.any():
        return "INFEASIBLE", None
    return "OPTIMAL", float(np.min(x[feasible] @ np.asarray(c, float)))


def random_lp(seed, max_vars=8, max_rows=5):
    """Random bounded LP as plain arrays: c, rows (coef), senses, rhs, lb, ub."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_vars + 1))
    m = int(rng.integers(1, max_rows + 1))
    lb = rng.uniform(-5, 0, n).round(3)
    ub = (lb + rng.uniform(0.5, 6, n)).round(3)
    A = rng.normal(size=(m, n)).round(3)
    x0 = rng.uniform(lb, ub)
    senses = rng.choice(["L", "G", "E"], size=m, p=[0.5, 0.35, 0.15])
    act = A @ x0
    rhs = np.where(senses == "L", act + rng.uniform(0, 2, m), np.where(senses == "G", act - rng.uniform(0, 2, m), act))
    if seed % 10 == 9:  # make some instances infeasible
        i = int(rng.integers(m))
        senses[i] = "G"
        rhs[i] = np.abs(A[i]) @ np.maximum(np.abs(lb), np.abs(ub)) + 1.0
    return rng.normal(size=n).round(3), A, senses, rhs, lb, ub


def as_inequalities(A, senses, rhs, lb, ub):
    rows, h = [], []
    for a, s, r in zip(A, senses, rhs):
        if s in ("L", "E"):
            rows.append(a)
            h.append(r)
        if s in ("G", "E"):
            rows.append(-a)
            h.append(-r)
    n = A.shape[1]
    eye = np.eye(n)
    rows += list(-eye) + list(eye)
    h += list(-lb) + list(ub)
    return np.array(rows), np.array(h)


def tree_flow_cost(nodes, edges, lengths, supply):
    """Unique flows on a spanning tree meeting ``supply``; returns total length x |flow|."""
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for (a, b), length in zip(edges, lengths):
        g.add_edge(a, b, length=length)
    cost = 0.0
    for a, b in g.edges:
        h = g.copy()
        h.remove_edge(a, b)
        side = nx.node_connected_component(h, a)
        f = sum(supply[v] for v in side)  # net amount that must leave a's side
        cost += g.edges[a, b]["length"] * abs(f)
    return cost


def brute_force_min_cost_flow(nodes, edges, lengths, supply):
    """Minimum of length x |flow| over all spanning trees of a connected graph.

    An uncapacitated min-cost flow has an optimal basic solution supported on a
    spanning tree, so the minimum over trees is the optimum.
    """
    g = nx.Graph()
    for (a, b), length in zip(edges, lengths):
        g.add_edge(a, b, length=length)
    g.add_nodes_from(nodes)
    best = None
    for tree_edges in itertools.combinations(range(len(edges)), len(nodes) - 1):
        t = nx.Graph()
        t.add_nodes_from(nodes)
        t.add_edges_from(edges[i] for i in tree_edges)
        if not nx.is_tree(t):
            continue
        cost = tree_flow_cost(nodes, [edges[i] for i in tree_edges], [lengths[i] for i in tree_edges], supply)
        best = cost if best is None else min(best, cost)
    return best
