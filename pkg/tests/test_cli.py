import json

import pytest

from squeezer import __version__
from squeezer.cli.commands import main
from squeezer.cli.recipes import figure_recipes
from squeezer.storage.repository import ScenarioRepository
from squeezer.storage.writer import read_csv

CLOSED = {"delta": 1.0, "omega": 0.01, "g": 0.2}


def write_scenario(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def header_lines(path):
    return [line for line in path.read_text(encoding="utf-8").splitlines() if line.startswith("#")]


def test_simulate_reaches_lossless_asymptote(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate",
        "params": CLOSED,
        "n_b_values": [0.0, 10.0, 100.0],
        "time": {"t_max": 210.0, "samples": 211},
    })
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--config", config_path, "--out", str(out)]) == 0

    header = header_lines(out)
    assert any(f'"{__version__}"' in line for line in header)
    assert any(line.startswith("# scenario:") for line in header)
    assert any(line.startswith("# asymptotic_var:") for line in header)

    table = read_csv(out)
    assert len(table) == 3 * 211
    final = {}
    for n_b, group in table.groupby("n_b"):
        assert group["var_min"].iloc[0] == pytest.approx(0.5 + n_b)
        final[n_b] = group["var_min"].iloc[-1]
    assert final[0.0] == pytest.approx(0.005, rel=0.03)
    assert final[0.0] < final[10.0] < final[100.0]


def test_simulate_is_reproducible(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate", "params": CLOSED, "time": {"t_max": 50.0, "samples": 26},
    })
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--config", config_path, "--out", str(first)]) == 0
    assert main(["simulate", "--config", config_path, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_simulate_reduced(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate",
        "params": dict(CLOSED, kappa=1e-3, gamma_disp=1e-7),
        "time": {"points": [50.0, 100.0, 200.0]},
    })
    out = tmp_path / "reduced.json"
    assert main(["simulate", "--reduced", "--config", config_path, "--out", str(out), "--format", "json"]) == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    rows = document["result"]["rows"]
    assert [row["t"] for row in rows] == [50.0, 100.0, 200.0]
    assert rows[0]["var_min"] > rows[-1]["var_min"]
    assert rows[-1]["var_min"] < 0.01
    assert document["metadata"]["r"] == pytest.approx(0.038699, rel=1e-4)


def test_reduced_model_rejects_stable_parameters(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate", "params": {"delta": 1.0, "omega": 0.01, "g": 0.04}, "time": {"t_max": 10.0},
    })
    assert main(["simulate", "--reduced", "--config", config_path, "--out", str(tmp_path / "x.csv")]) == 3


def test_overflow_writes_partial_trajectory(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate", "params": CLOSED, "time": {"t_max": 1000.0, "samples": 101},
    })
    out = tmp_path / "halted.csv"
    assert main(["simulate", "--config", config_path, "--out", str(out)]) == 4

    assert any(line.startswith("# halted:") for line in header_lines(out))
    table = read_csv(out)
    assert 0 < len(table) < 101
    assert table["t"].iloc[-1] < 1000.0


@pytest.mark.parametrize(
    "text",
    [
        json.dumps({"kind": "simulate", "params": CLOSED, "time": {"points": []}}),
        '{"kind": "simulate", "params": ',
        json.dumps({"kind": "simulate", "params": CLOSED, "time": {"t_max": 1.0}, "colour": "red"}),
        json.dumps({"kind": "simulate", "params": dict(CLOSED, g=-1.0), "time": {"t_max": 1.0}}),
        json.dumps({"kind": "simulate", "params": CLOSED}),
        json.dumps({"kind": "rates", "setup": {"P_t": 1.0}}),
    ],
)
def test_bad_scenarios_exit_with_config_error(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text, encoding="utf-8")
    assert main(["simulate", "--config", str(path), "--out", str(tmp_path / "x.csv")]) == 2


def test_missing_scenario_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 2


def test_subcommand_kind_mismatch(tmp_path):
    config_path = write_scenario(tmp_path, {"kind": "normalform", "params": CLOSED})
    assert main(["simulate", "--config", config_path]) == 2


def test_thermal_flag_needs_thermal_block(tmp_path):
    config_path = write_scenario(tmp_path, {"kind": "simulate", "params": CLOSED, "time": {"t_max": 10.0}})
    assert main(["simulate", "--thermal-bath", "--config", config_path]) == 2


def test_thermal_block_ignored_without_flag(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate",
        "params": CLOSED,
        "thermal": {"gamma_thermal": 1e-3, "n_bar": 10.0},
        "time": {"t_max": 10.0, "samples": 3},
    })
    out = tmp_path / "plain.csv"
    assert main(["simulate", "--config", config_path, "--out", str(out)]) == 0
    assert not any('"thermal"' in line for line in header_lines(out))

    heated = tmp_path / "heated.csv"
    assert main(["simulate", "--thermal-bath", "--config", config_path, "--out", str(heated)]) == 0
    assert any('"thermal"' in line for line in header_lines(heated))


def test_dump_config_round_trip(tmp_path, capsys):
    config_path = write_scenario(tmp_path, {
        "kind": "simulate", "params": CLOSED, "n_b_values": [0.0, 10.0], "time": {"t_max": 20.0},
    })
    assert main(["simulate", "--config", config_path, "--dump-config"]) == 0
    dumped = capsys.readouterr().out
    assert ScenarioRepository.loads(dumped) == ScenarioRepository.load(config_path)


def test_normalform_report(tmp_path):
    config_path = write_scenario(tmp_path, {"kind": "normalform", "params": CLOSED})
    out = tmp_path / "nf.json"
    assert main(["normalform", "--config", config_path, "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))["result"]
    assert result["unstable"]
    assert result["r"] == pytest.approx(0.038699, rel=1e-4)


def test_optimize_report(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "optimize", "params": {"delta": 1.0, "omega": 1.0, "g": 100.0, "kappa": 1e3, "gamma_disp": 0.01},
    })
    out = tmp_path / "opt.json"
    assert main(["optimize", "--config", config_path, "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))["result"]
    assert result["delta_opt"] == pytest.approx(result["delta_opt_approx"], rel=0.05)
    assert result["at_bound"] is False


def test_optimize_refined_by_simulation(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "optimize",
        "params": {"delta": 1.0, "omega": 1.0, "g": 100.0, "kappa": 1.0, "gamma_disp": 1e-3},
        "optimize": {"refine": True, "refine_points": 3},
    })
    out = tmp_path / "opt.json"
    assert main(["optimize", "--config", config_path, "--out", str(out)]) == 0
    result = json.loads(out.read_text(encoding="utf-8"))["result"]
    refined = result["refined"]
    assert len(refined["scan"]) == 3
    assert refined["s_db"] == pytest.approx(result["s_db"], abs=1.0)


def test_refinement_rejects_thermal_objective(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "optimize", "params": CLOSED, "optimize": {"refine": True, "objective": "thermal"},
    })
    assert main(["optimize", "--config", config_path, "--out", str(tmp_path / "x.json")]) == 2


def test_optimize_table_reports_approximation_range(tmp_path, caplog):
    config_path = write_scenario(tmp_path, {
        "kind": "optimize",
        "lab_units": True,
        "setup": {
            "P_t": 29.0, "W_t": 0.7, "A_x": 0.9, "A_y": 0.8, "lambda_t": 1064.0,
            "lambda_c": 1064.0, "R": 100.0, "L_c": 300.0, "finesse": 1e5,
        },
        "sweep": {"L_c": [2e-5, 1e-2]},
    })
    out = tmp_path / "opt.csv"
    assert main(["optimize", "--config", config_path, "--out", str(out)]) == 0
    header = header_lines(out)
    assert any(line.startswith("# max_relative_difference:") for line in header)
    assert any(line.startswith("# L_c_within_5pct:") for line in header)
    table = read_csv(out)
    assert table["relative_difference"].iloc[0] < 0.05
    assert table["relative_difference"].iloc[-1] > 0.05
    assert "approximate optimal detuning off by" in caplog.text


def test_rates_in_lab_units(tmp_path):
    config_path = write_scenario(tmp_path, {
        "kind": "rates",
        "lab_units": True,
        "setup": {
            "P_t": 29.0, "W_t": 0.7, "A_x": 0.9, "A_y": 0.8, "lambda_t": 1064.0,
            "lambda_c": 1064.0, "R": 100.0, "L_c": 300.0, "finesse": 1e5,
        },
    })
    out = tmp_path / "rates.json"
    assert main(["rates", "--config", config_path, "--out", str(out)]) == 0
    document = json.loads(out.read_text(encoding="utf-8"))
    assert document["result"]["derived"]["kappa"] == pytest.approx(3.1395e7, rel=1e-3)
    assert document["result"]["system_params"]["omega"] == 1.0
    assert document["metadata"]["scenario"]["setup"]["L_c"] == pytest.approx(3e-4)
    assert document["metadata"]["scenario"]["lab_units"] is False


def test_recipes_list(capsys):
    assert main(["recipes", "--list"]) == 0
    names = [line.split("\t")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == list(figure_recipes())
    assert {
        "wigner-snapshot", "lossless-trajectories", "stability-map", "squeezing-map",
        "feasibility", "optimal-detuning", "extension-time", "thermal-squeezing-map",
    } <= set(names)


def test_recipe_stability_map(tmp_path):
    assert main(["recipes", "stability-map", "--out-dir", str(tmp_path)]) == 0
    out = tmp_path / "stability-map.csv"
    assert any(line.startswith("# marker:") for line in header_lines(out))
    table = read_csv(out)
    assert len(table) == 31 * 41
    assert table["unstable"].any() and not table["unstable"].all()


def test_recipe_dump_config(tmp_path):
    names = ["lossless-trajectories", "extension-time"]
    assert main(["recipes", *names, "--dump-config", "--out-dir", str(tmp_path)]) == 0
    recipes = figure_recipes()
    for name in names:
        assert ScenarioRepository.load(tmp_path / f"{name}.json") == recipes[name]


def test_unknown_recipe(tmp_path):
    assert main(["recipes", "no-such-recipe", "--out-dir", str(tmp_path)]) == 2
