import csv
import json
import re

import numpy as np
import pytest

from h2plan.cli import main, resolve_scenario, scale_parameter
from h2plan.pareto import compute_anchors


def _rows(path):
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def demo_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    code = main(["plan", "--scenario", "demo", "--out", str(out)])
    return code, out


def test_demo_plan_passes_residual_report(demo_run):
    code, out = demo_run
    assert code == 0
    rows = _rows(out / "residuals.csv")
    assert rows and all(r["pass"] == "pass" for r in rows)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "plan" and manifest["input_hash"]
    for name in ("capacity.csv", "dispatch.csv", "costs.csv", "hydrogen_injection.csv", "summary.csv"):
        assert (out / name).exists()


def test_outputs_are_byte_identical(demo_run, tmp_path):
    _, first = demo_run
    assert main(["plan", "--scenario", "demo", "--out", str(tmp_path)]) == 0
    for p in sorted(first.glob("*.csv")):
        assert (tmp_path / p.name).read_bytes() == p.read_bytes(), p.name
    a = json.loads((first / "manifest.json").read_text())
    b = json.loads((tmp_path / "manifest.json").read_text())
    a.pop("output_dir"), b.pop("output_dir")
    assert a == b


def test_pipelines_and_report(demo_run, tmp_path):
    _, run = demo_run
    assert main(["pipelines", "--run", str(run), "--out", str(tmp_path / "p")]) == 0
    assert _rows(tmp_path / "p" / "pipeline_capacity.csv")
    assert main(["report", "--run", str(run)]) == 0
    rep = run / "report"
    assert (rep / "heatmap_TU.svg").exists() and (rep / "costs.md").exists()
    svg = (rep / "soc_HS.svg").read_text()
    kinds = {r["id"]: r["kind"] for r in _rows(run / "technologies.csv")}
    soc = [float(r["value"]) for r in _rows(run / "dispatch.csv")
           if r["quantity"] == "soc" and kinds[r["technology"]] == "HS"]
    assert float(re.search(r'data-ymax="([^"]+)"', svg).group(1)) == max(soc)
    first = svg
    assert main(["report", "--run", str(run)]) == 0
    assert (rep / "soc_HS.svg").read_text() == first


def test_pipelines_refuse_changed_inputs(demo_run, tmp_path, capsys):
    _, run = demo_run
    copy = tmp_path / "run"
    copy.mkdir()
    for p in run.glob("*.*"):
        (copy / p.name).write_bytes(p.read_bytes())
    m = json.loads((copy / "manifest.json").read_text())
    m["input_hash"] = "0" * 64
    (copy / "manifest.json").write_text(json.dumps(m))
    assert main(["pipelines", "--run", str(copy)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "input hash" in err["message"]


def test_unknown_scenario_reports_json_error(tmp_path, capsys):
    assert main(["plan", "--scenario", "no-such-thing", "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert err["command"] == "plan" and "no-such-thing" in err["message"]
    assert json.loads((tmp_path / "error.json").read_text()) == err


def test_pareto_two_points_equal_anchors(tmp_path):
    assert main(["pareto", "--scenario", "demo", "--hours", "24", "--points", "2", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "frontier.csv")
    assert len(rows) == 2
    hi, lo = compute_anchors(resolve_scenario("demo", hours=24))
    assert float(rows[0]["cost_usd"]) == pytest.approx(hi.total_cost, rel=1e-9)
    assert float(rows[1]["emissions_tons"]) == pytest.approx(lo.co2, rel=1e-9, abs=1e-6)


def test_sweep_ht_capital_moves_capacity_down(tmp_path):
    args = ["sweep", "--scenario", "desk", "--hours", "24", "--param", "HT.capital", "--delta", "0.3",
            "--out", str(tmp_path)]
    assert main(args) == 0
    sc = resolve_scenario("desk", hours=24)
    ht = {t.id for t in sc.technologies if t.kind == "HT"}
    totals = {}
    for r in _rows(tmp_path / "sweep_capacity.csv"):
        if r["technology"] in ht:
            totals[r["scale"]] = totals.get(r["scale"], 0.0) + float(r["total"])
    assert totals[repr(1.3)] <= totals[repr(1.0)] * (1 + 1e-9)
    assert len(_rows(tmp_path / "sweep_summary.csv")) == 3


def test_scale_parameter_rejects_unknown_field():
    sc = resolve_scenario("desk", hours=24)
    scaled = scale_parameter(sc, "price_book.hydrogen", 2.0)
    assert scaled.price_book.hydrogen == 2 * sc.price_book.hydrogen
    with pytest.raises(Exception, match="no technology"):
        scale_parameter(sc, "HT.colour", 1.1)


def test_prep_empty_dir(tmp_path, capsys):
    (tmp_path / "w").mkdir()
    assert main(["prep", "--weather", str(tmp_path / "w"), "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err.strip())
    assert "<region>.csv" in err["message"] and "wind_speed_50m" in err["message"]


def test_prep_constant_wind_year(tmp_path, capsys):
    w = tmp_path / "w"
    w.mkdir()
    lines = ["hour,wind_speed_50m,irradiance,ambient_temp"] + [f"{h},6,0,10" for h in range(1, 8761)]
    (w / "R.csv").write_text("\n".join(lines) + "\n")
    assert main(["prep", "--weather", str(w), "--out", str(tmp_path / "o")]) == 0
    rows = _rows(tmp_path / "o" / "R_wind_cf.csv")
    assert len(rows) == 8760
    values = np.array([float(r["value"]) for r in rows])
    v = 6.0 * 2 ** (1 / 7)  # 50 m -> 100 m hub, 1/7 shear
    expected = (v**3 - 3**3) / (11**3 - 3**3)  # cubic rise between cut-in 3 and rated 11 m/s
    assert np.all(values == values[0]) and values[0] == pytest.approx(expected, rel=1e-12)
    assert f"{expected:.4f}" in capsys.readouterr().out
    summary = _rows(tmp_path / "o" / "prep_summary.csv")
    assert float(summary[0]["mean_wind_cf"]) == pytest.approx(expected)
    assert len(_rows(tmp_path / "o" / "R_heat_demand.csv")) == 8760
