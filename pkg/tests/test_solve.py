import numpy as np
import pytest

from oracles import as_inequalities, random_lp, vertex_enumeration

from h2plan.mps import MPSError, SolutionImportError, export_model, import_solution, read_model, write_solution
from h2plan.solve import (
    EQ, GE, INFEASIBLE, LE, OPTIMAL, LPBuilder, SizeCapExceeded, SolverOptions, geometric_scaling, solve,
)


def build_random(seed):
    c, A, senses, rhs, lb, ub = random_lp(seed)
    b = LPBuilder(f"rand{seed}")
    x = b.add_vars([f"x{j}" for j in range(len(c))], lb, ub)
    b.add_objective(x, c)
    for i, (row, s, r) in enumerate(zip(A, senses, rhs)):
        b.add_row(x, row, s, r, f"r{i}")
    return b.build(), (c, A, senses, rhs, lb, ub)


def test_simple_examples():
    b = LPBuilder()
    x = b.add_var("x", lb=-np.inf)
    b.add_row([x], [1.0], GE, 3.0, "c")
    b.add_objective(x, 1.0)
    res = solve(b.build())
    assert res.status == OPTIMAL and res.objective == pytest.approx(3.0)

    b = LPBuilder()
    x, y = b.add_vars(["x", "y"], 0.0, 3.0)
    b.add_row([x, y], [1, 1], LE, 4.0, "sum")
    b.add_objective([x, y], -1.0)
    assert solve(b.build()).objective == pytest.approx(-4.0)

    b = LPBuilder()
    x = b.add_var("x", lb=-np.inf)
    b.add_row([x], [1.0], GE, 1.0, "lo")
    b.add_row([x], [1.0], LE, 0.0, "hi")
    assert solve(b.build()).status == INFEASIBLE


@pytest.mark.parametrize("seed", range(100))
def test_random_lp_matches_vertex_enumeration(seed):
    lp, (c, A, senses, rhs, lb, ub) = build_random(seed)
    G, h = as_inequalities(A, senses, rhs, lb, ub)
    status, value = vertex_enumeration(c, G, h)
    res = solve(lp)
    assert res.status == status
    if status == OPTIMAL:
        assert res.objective == pytest.approx(value, rel=1e-6, abs=1e-6)


def test_optimal_results_reverify():
    for seed in range(20):
        lp, _ = build_random(seed)
        res = solve(lp)
        if res.ok:
            viol = lp.row_violation(res.x) / (1 + np.abs(lp.rhs))
            assert viol.max(initial=0.0) <= 1e-7
            assert lp.objective(res.x) == pytest.approx(res.objective, rel=1e-9)


def test_determinism_bit_identical():
    lp, _ = build_random(3)
    a, b = solve(lp), solve(lp)
    assert a.status == b.status and a.objective == b.objective
    assert np.array_equal(a.x, b.x)


def test_scaling_factors_are_powers_of_two():
    lp, _ = build_random(4)
    r, s = geometric_scaling(lp.A)
    assert np.all(np.log2(r) == np.round(np.log2(r)))
    assert np.all(np.log2(s) == np.round(np.log2(s)))


def test_integer_size_cap():
    b = LPBuilder()
    x = b.add_vars(["a", "b", "c"], 0.0, 1.0, integer=True)
    b.add_row(x, 1.0, GE, 1.5, "cover")
    b.add_objective(x, 1.0)
    lp = b.build()
    assert solve(lp).objective == pytest.approx(2.0)
    with pytest.raises(SizeCapExceeded, match="export"):
        solve(lp, SolverOptions(integer_cap=2))


def test_lower_bound_above_upper_rejected():
    b = LPBuilder()
    b.add_var("x", lb=2.0, ub=1.0)
    with pytest.raises(ValueError, match="lower bound"):
        b.build()


# --------------------------------------------------------------------------
# MPS


def _same_lp(a, b):
    assert a.var_names == b.var_names and a.row_names == b.row_names
    assert np.array_equal(a.c, b.c)
    assert np.array_equal(a.A.toarray(), b.A.toarray())
    assert list(a.sense) == list(b.sense)
    assert np.array_equal(a.rhs, b.rhs)
    assert np.array_equal(a.lb, b.lb) and np.array_equal(a.ub, b.ub)


@pytest.mark.parametrize("seed", range(10))
def test_mps_round_trip_bit_faithful(tmp_path, seed):
    lp, _ = build_random(seed)
    lp.c[0] = 0.1 + 0.2  # awkward binary fraction
    back = read_model(export_model(lp, tmp_path / "m.mps"))
    _same_lp(lp, back)


def test_mps_round_trip_with_integers_and_offset(tmp_path):
    b = LPBuilder("mixed")
    x = b.add_vars(["a", "b"], 0.0, 1.0, integer=True)
    y = b.add_var("y", lb=-np.inf, ub=7.5)
    b.add_row([*x, y], [1.0, 2.0, -1.0 / 3.0], EQ, 1.0, "e")
    b.add_objective([*x, y], [1.0, 1.0, 1e-17])
    lp = b.build()
    back = read_model(export_model(lp, tmp_path / "m.mps"))
    _same_lp(lp, back)
    assert np.array_equal(lp.integrality, back.integrality)


def test_mps_counts_parse_independently(tmp_path):
    b = LPBuilder()
    x, y = b.add_vars(["x", "y"], 0.0, 3.0)
    b.add_row([x, y], [1, 1], LE, 4.0, "sum")
    b.add_objective([x, y], -1.0)
    text = export_model(b.build(), tmp_path / "m.mps").read_text().splitlines()
    rows = text[text.index("ROWS") + 1:text.index("COLUMNS")]
    cols = text[text.index("COLUMNS") + 1:text.index("RHS")]
    assert len(rows) == 2  # objective + one constraint
    assert {ln.split()[0] for ln in cols} == {"x", "y"}


def test_mps_name_collision(tmp_path):
    b = LPBuilder()
    b.add_vars(["x", "x"])
    with pytest.raises(MPSError, match="duplicate"):
        export_model(b.build(), tmp_path / "m.mps")
    assert not (tmp_path / "m.mps").exists()


def test_solution_import(tmp_path):
    b = LPBuilder()
    x, y = b.add_vars(["x", "y"], 0.0, 3.0)
    b.add_row([x, y], [1, 1], LE, 4.0, "sum")
    b.add_objective([x, y], -1.0)
    lp = b.build()
    res = solve(lp)
    back = import_solution(write_solution(tmp_path / "s.txt", lp, res.x), lp)
    assert back.objective == res.objective

    (tmp_path / "m.txt").write_text("x 1\n")
    with pytest.raises(SolutionImportError, match="y"):
        import_solution(tmp_path / "m.txt", lp)
    (tmp_path / "u.txt").write_text("x 1\ny 1\nz 0\n")
    with pytest.raises(SolutionImportError, match="unknown variable 'z'"):
        import_solution(tmp_path / "u.txt", lp)
    (tmp_path / "v.txt").write_text(f"x 3\ny {1 + 1e-3}\n")
    with pytest.raises(SolutionImportError, match="sum"):
        import_solution(tmp_path / "v.txt", lp)
