import json

import pytest

from nettrack.cli import main

BASE_TOML = """\
[graph]
family = "cycle"
n = 6

[model]
a = 1.0
sigma_r2 = 1.0
sigma_w2 = 1.0
noise = "uniform"

[estimator]
kind = "hat"
alpha = 0.5

[sim]
horizon = 200
trials = 8
seed = 42
record = "full"

[regret]
horizons = [32, 64]
trials = 6
delta = 0.1

[design]
top_k = 3

[sweep]
points = 16
"""


@pytest.fixture()
def scenario_file(tmp_path):
    f = tmp_path / "scenario.toml"
    f.write_text(BASE_TOML)
    return f


def run(cmd, scenario, out, *extra):
    return main([cmd, "--scenario", str(scenario), "--out", str(out), *extra])


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    preamble = [l for l in lines if l.startswith("# ")]
    data = [l.split(",") for l in lines if not l.startswith("# ")]
    return preamble, data[0], data[1:]


def test_analyze_artifacts(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert run("analyze", scenario_file, out) == 0
    doc = json.loads((out / "analyze.json").read_text())
    assert doc["seed"] == 42
    assert doc["scenario"]["graph"] == {"family": "cycle", "n": 6}
    assert doc["scenario"]["sim"]["horizon"] == 200
    rep = doc["report"]
    assert rep["kind"] == "hat" and rep["alpha"] == 0.5
    assert rep["total"] == pytest.approx(rep["r_msd"] + rep["w_msd"], abs=1e-12)
    assert len(rep["per_mode"]) == 6
    assert sum(rep["per_mode"]) == pytest.approx(rep["w_msd"], rel=1e-12)
    assert 0.0 < rep["rho"] < 1.0
    assert rep["unbiasedness_bound"] == pytest.approx(1.5, abs=1e-9)

    preamble, header, rows = read_csv(out / "analyze_modes.csv")
    assert len(preamble) == 2
    assert preamble[0].startswith("# scenario: {")
    assert preamble[1] == "# seed: 42"
    assert header == ["mode", "lambda_p", "w_term"]
    assert len(rows) == 6
    assert [r[0] for r in rows] == [str(k) for k in range(6)]
    assert float(rows[0][1]) == pytest.approx(1.0, abs=1e-9)
    # embedded scenario is itself valid JSON
    embedded = json.loads(preamble[0][len("# scenario: "):])
    assert embedded["estimator"]["alpha"] == 0.5


def test_simulate_artifacts(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert run("simulate", scenario_file, out) == 0
    doc = json.loads((out / "simulate.json").read_text())
    assert doc["n"] == 6 and doc["T"] == 200 and doc["trials"] == 8
    assert doc["stable"] is True
    assert doc["closed_form_msd"] == pytest.approx(
        doc["empirical_msd"], abs=6 * doc["stderr"] + 1e-12
    )
    assert 0 <= doc["burn_in"] < 200
    _, header, rows = read_csv(out / "simulate_steps.csv")
    assert header == ["trial", "t", "msd_instant"]
    assert len(rows) == 8 * 201
    assert rows[0][:2] == ["0", "0"]
    assert rows[-1][:2] == ["7", "200"]
    assert all(float(r[2]) >= 0.0 for r in rows[:50])


def test_simulate_aggregate_has_no_steps_file(scenario_file, tmp_path):
    out = tmp_path / "out"
    patched = tmp_path / "agg.toml"
    patched.write_text(BASE_TOML.replace('record = "full"', 'record = "aggregate"'))
    assert run("simulate", patched, out) == 0
    assert (out / "simulate.json").exists()
    assert not (out / "simulate_steps.csv").exists()


def test_regret_artifacts(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert run("regret", scenario_file, out) == 0
    doc = json.loads((out / "regret.json").read_text())
    assert doc["t_grid"] == [32, 64]
    assert doc["trials"] == 6 and doc["delta"] == 0.1
    assert doc["s_bound"] > 0
    assert [s["T"] for s in doc["summaries"]] == [32, 64]
    for s in doc["summaries"]:
        assert 0.0 <= s["violation_rate"] <= 1.0
        assert s["median_bound"] > 0
    _, header, rows = read_csv(out / "regret.csv")
    assert header == ["T", "trial", "regret_trace", "regret_specnorm", "bound_total", "violated"]
    assert len(rows) == 12
    assert [r[0] for r in rows] == ["32"] * 6 + ["64"] * 6
    assert all(r[5] in ("0", "1") for r in rows)


def test_design_edge_artifacts(scenario_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert run("design-edge", scenario_file, out) == 0
    err = capsys.readouterr().err
    # metropolis cycle-6 has a -1/3 eigenvalue, so the PSD guarantee is off
    assert "not positive semidefinite" in err
    _, header, rows = read_csv(out / "design_edges.csv")
    assert header == ["i", "j", "score_first_order", "lower_bound", "delta_msd_exact"]
    assert len(rows) == 9  # 15 pairs on 6 nodes minus 6 ring edges
    scores = [float(r[2]) for r in rows]
    assert scores == sorted(scores)
    assert all(r[4] != "nan" for r in rows[:3])
    assert all(r[4] == "nan" for r in rows[3:])
    assert all(float(r[3]) <= float(r[2]) + 1e-12 for r in rows)


def test_sweep_alpha_artifacts(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert run("sweep-alpha", scenario_file, out) == 0
    _, header, rows = read_csv(out / "sweep_alpha.csv")
    assert header == ["alpha", "rho", "msd_hat", "msd_tilde"]
    assert len(rows) == 16
    assert float(rows[0][0]) == pytest.approx(1.0 / 16.0)
    assert float(rows[-1][0]) == 1.0
    # alpha = 1 pushes the -1/3 mode to rho = 4/3: closed form unavailable
    assert float(rows[-1][1]) == pytest.approx(4.0 / 3.0, rel=1e-12)
    assert rows[-1][2] == "nan" and rows[-1][3] == "nan"
    mid = rows[7]  # safely inside the stable band
    assert float(mid[2]) > 0 and float(mid[3]) > 0


def test_artifacts_are_byte_identical_across_runs(scenario_file, tmp_path):
    outs = []
    for tag in ("one", "two"):
        out = tmp_path / tag
        for cmd in ("analyze", "simulate", "regret", "design-edge", "sweep-alpha"):
            assert run(cmd, scenario_file, out) == 0
        outs.append(out)
    names = sorted(p.name for p in outs[0].iterdir())
    assert names == sorted(p.name for p in outs[1].iterdir())
    for name in names:
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


def test_seed_and_size_overrides(scenario_file, tmp_path):
    out = tmp_path / "out"
    assert run("analyze", scenario_file, out, "--seed", "7") == 0
    doc = json.loads((out / "analyze.json").read_text())
    assert doc["seed"] == 7
    assert doc["scenario"]["sim"]["seed"] == 7
    out2 = tmp_path / "out2"
    assert run("simulate", scenario_file, out2, "--trials", "3", "--horizon", "50") == 0
    doc = json.loads((out2 / "simulate.json").read_text())
    assert doc["trials"] == 3 and doc["T"] == 50
    _, _, rows = read_csv(out2 / "simulate_steps.csv")
    assert len(rows) == 3 * 51


def test_exit_code_validation_errors(tmp_path, capsys):
    out = tmp_path / "out"
    broken = tmp_path / "broken.toml"
    broken.write_text("[graph\nfamily =")
    assert main(["analyze", "--scenario", str(broken), "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err

    unknown = tmp_path / "unknown.toml"
    unknown.write_text('[graph]\nfamily = "cycle"\nn = 6\nhub = 2\n')
    assert main(["analyze", "--scenario", str(unknown), "--out", str(out)]) == 2
    assert "unknown key" in capsys.readouterr().err

    missing = tmp_path / "nope.toml"
    assert main(["analyze", "--scenario", str(missing), "--out", str(out)]) == 2
    assert "error:" in capsys.readouterr().err


def test_exit_code_unstable(tmp_path, capsys):
    out = tmp_path / "out"
    hot = tmp_path / "hot.toml"
    hot.write_text(BASE_TOML.replace("a = 1.0", "a = 3.0"))
    assert main(["simulate", "--scenario", str(hot), "--out", str(out)]) == 3
    err = capsys.readouterr().err
    assert "error:" in err
    # |a| = 3 also trips the unbiasedness warning on the way
    assert "warning:" in err and "unbiasedness" in err


def test_exit_code_regret_needs_bounded_noise(tmp_path, capsys):
    out = tmp_path / "out"
    gauss = tmp_path / "gauss.toml"
    gauss.write_text(BASE_TOML.replace('noise = "uniform"', 'noise = "gaussian"'))
    assert main(["regret", "--scenario", str(gauss), "--out", str(out)]) == 2
    assert "bounded noise family" in capsys.readouterr().err
    withs = tmp_path / "withs.toml"
    withs.write_text(
        BASE_TOML.replace('noise = "uniform"', 'noise = "gaussian"').replace(
            "[regret]", "[regret]\ns_override = 20.0"
        )
    )
    assert main(["regret", "--scenario", str(withs), "--out", str(out)]) == 0
    doc = json.loads((out / "regret.json").read_text())
    assert doc["s_bound"] == 20.0


def test_design_edge_complete_graph_notice(tmp_path, capsys):
    out = tmp_path / "out"
    comp = tmp_path / "complete.toml"
    comp.write_text('[graph]\nfamily = "complete"\nn = 5\n')
    assert main(["design-edge", "--scenario", str(comp), "--out", str(out)]) == 0
    assert "graph is complete" in capsys.readouterr().err
    _, header, rows = read_csv(out / "design_edges.csv")
    assert header == ["i", "j", "score_first_order", "lower_bound", "delta_msd_exact"]
    assert rows == []


def test_unbiasedness_warning_on_sweep(tmp_path, capsys):
    out = tmp_path / "out"
    hot = tmp_path / "hot.toml"
    hot.write_text(BASE_TOML.replace("a = 1.0", "a = 2.0"))
    assert main(["sweep-alpha", "--scenario", str(hot), "--out", str(out)]) == 0
    err = capsys.readouterr().err
    assert "warning:" in err and "unbiasedness" in err
    _, _, rows = read_csv(out / "sweep_alpha.csv")
    # no alpha can hold both the 1 and -1/3 modes inside the unit circle
    assert all(r[2] == "nan" and r[3] == "nan" for r in rows)