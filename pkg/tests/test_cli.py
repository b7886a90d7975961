import json
import os

import pytest

from firegrid.cli import main
from firegrid.lp import OPTIMAL, solve_lp
from firegrid.mpsio import parse_mps

SCENARIOS = os.path.join(os.path.dirname(__file__), os.pardir, "scenarios")


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def explicit_doc(**overrides):
    doc = {
        "family": "explicit",
        "k": 2,
        "P_default": 0.05,
        "Q_default": 0.8,
        "teams": 1,
        "rewards": [-1.0, -2.0, -2.0, -4.0],
        "fuel": [2, 2, 2, 2],
        "burning": [1, 0, 0, 0],
        "seed": 1,
        "reps": 3,
    }
    doc.update(overrides)
    return doc


def test_simulate_smoke(tmp_path, capsys):
    scenario = write_scenario(tmp_path, explicit_doc())
    out = tmp_path / "episode.csv"
    code = main(["simulate", "--scenario", scenario, "--policy", "random",
                 "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# firegrid results v1\n")
    assert "random" in text
    assert "policy=random" in capsys.readouterr().out


def test_benchmark_writes_both_csvs(tmp_path):
    scenario = write_scenario(tmp_path, explicit_doc())
    out = tmp_path / "results.csv"
    summary = tmp_path / "summary.csv"
    code = main(["benchmark", "--scenario", scenario,
                 "--policies", "random,fw", "--reps", "4",
                 "--out", str(out), "--summary-out", str(summary)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len([l for l in lines if l.startswith("random,")]) == 4
    assert len([l for l in lines if l.startswith("fw,")]) == 4
    assert "improvement_vs_random_pct" in summary.read_text()


def test_benchmark_deterministic_bytes(tmp_path):
    scenario = write_scenario(tmp_path, explicit_doc())
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"results_{tag}.csv"
        summary = tmp_path / f"summary_{tag}.csv"
        assert main(["benchmark", "--scenario", scenario,
                     "--policies", "fw,random", "--reps", "3",
                     "--out", str(out), "--summary-out", str(summary)]) == 0
        outs.append(out.read_bytes() + summary.read_bytes())
    assert outs[0] == outs[1]


def test_stats_output(tmp_path):
    scenario = write_scenario(tmp_path, {
        "family": "grid1", "k": 4, "P_default": 0.06, "Q_default": 0.8,
        "teams": 1, "seed": 0, "reps": 4})
    out = tmp_path / "stats.csv"
    code = main(["stats", "--scenario", scenario, "--reps", "4",
                 "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.startswith("# firegrid initial-fire-stats v1\n")
    assert "mean_cells_burning" in text
    assert "fuel_non_burnt_cells" in text


def test_export_lp_non_burning_solves_to_zero(tmp_path):
    doc = explicit_doc(burning=[0, 0, 0, 0])
    scenario = write_scenario(tmp_path, doc)
    out = tmp_path / "model.mps"
    code = main(["export-lp", "--scenario", scenario, "--out", str(out),
                 "--horizon", "3"])
    assert code == 0
    problem, mask, _ = parse_mps(out.read_text())
    sol = solve_lp(problem)
    assert sol.status == OPTIMAL
    assert abs(sol.objective) <= 1e-9
    assert mask.sum() > 0


def test_weights_csv(tmp_path, capsys):
    scenario = write_scenario(tmp_path, explicit_doc())
    code = main(["weights", "--scenario", scenario])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "row,col,w,priority"
    assert len(lines) == 5


def test_malformed_scenario_names_field(tmp_path, capsys):
    scenario = write_scenario(tmp_path, explicit_doc(teams=-2))
    code = main(["simulate", "--scenario", scenario, "--policy", "random"])
    assert code != 0
    assert "teams" in capsys.readouterr().err


def test_unknown_flag_rejected(tmp_path):
    scenario = write_scenario(tmp_path, explicit_doc())
    with pytest.raises(SystemExit):
        main(["simulate", "--scenario", scenario, "--frobnicate"])


def test_unknown_policy_rejected(tmp_path, capsys):
    scenario = write_scenario(tmp_path, explicit_doc())
    code = main(["benchmark", "--scenario", scenario, "--policies", "zen",
                 "--out", str(tmp_path / "r.csv"),
                 "--summary-out", str(tmp_path / "s.csv")])
    assert code != 0
    assert "zen" in capsys.readouterr().err


def test_shipped_scenarios_load():
    for name in ("grid1_k8.json", "grid1_k20.json", "grid2_k9.json",
                 "tiny_explicit.json"):
        path = os.path.join(SCENARIOS, name)
        code = main(["weights", "--scenario", path, "--out", os.devnull])
        assert code == 0


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0
    text = capsys.readouterr().out
    for sub in ("simulate", "benchmark", "stats", "export-lp", "weights"):
        assert sub in text
