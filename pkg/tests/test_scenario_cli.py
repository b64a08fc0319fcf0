import json
import math
import shutil
from pathlib import Path

import numpy as np
import pytest

from pursuit_rf import cli
from pursuit_rf.errors import ParseError, ValidationError
from pursuit_rf.simulate import monitor_invariants
from pursuit_rf.scenario import (config_from_dict, load_summary, parse_scenario, read_trajectory_csv,
                                 run_batch, run_scenario, serialize_config, thread_count, write_outputs)

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
MINIMAL = {"game": "simple_motion", "rho": 2, "sigma": 1, "l": 0, "z0": [3, 0], "evader": {"kind": "zero"}}


def write_json(path, doc):
    path.write_text(json.dumps(doc, indent=2))
    return path


class TestParse:
    def test_minimal(self, tmp_path):
        cfg = parse_scenario(write_json(tmp_path / "m.json", MINIMAL))
        assert cfg.bound() == pytest.approx(9.0)
        assert cfg.step() == pytest.approx(9.0 / 5000)
        assert cfg.emit == ("trajectory_csv", "summary_json", "plot_data")
        assert cfg.name == "m"

    def test_rho_equals_sigma(self):
        with pytest.raises(ValidationError, match="rho must exceed sigma: 1.0 <= 1.0") as err:
            config_from_dict({**MINIMAL, "rho": 1.0, "sigma": 1.0})
        assert err.value.field == "rho"

    def test_inside_terminal(self):
        with pytest.raises(ValidationError, match="initial state inside terminal set"):
            config_from_dict({**MINIMAL, "l": 3.0})

    def test_pontryagin_gate(self):
        doc = {"game": "pontryagin", "alpha": 2, "beta": 1, "b": 1, "c": 1, "rho": 2, "sigma": 1,
               "z0": {"z1": [1], "z2": [0], "z3": [0]}}
        with pytest.raises(ValidationError, match="sigma \\* nu"):
            config_from_dict(doc)

    @pytest.mark.parametrize("patch,field", [
        ({"game": "chess"}, "game"),
        ({"z0": [3, "x"]}, "z0"),
        ({"evader": {"kind": "teleport"}}, "evader"),
        ({"dt": -1}, "dt"),
        ({"emit": ["movie"]}, "emit"),
        ({"seed": 1.5}, "seed"),
    ])
    def test_field_errors(self, patch, field):
        with pytest.raises(ValidationError) as err:
            config_from_dict({**MINIMAL, **patch})
        assert err.value.field.startswith(field)

    def test_malformed_json_location(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text('{\n  "game": "simple_motion",\n  "rho": 2,,\n}')
        with pytest.raises(ParseError) as err:
            parse_scenario(p)
        assert err.value.line == 3 and err.value.column is not None

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            parse_scenario(tmp_path / "nope.json")

    @pytest.mark.parametrize("path", sorted(SCENARIOS.rglob("*.json")), ids=lambda p: p.name)
    def test_round_trip(self, path):
        cfg = parse_scenario(path)
        again = config_from_dict(json.loads(serialize_config(cfg)))
        assert serialize_config(again) == serialize_config(cfg)


class TestOutputs:
    def test_csv_rows_and_columns(self, tmp_path):
        cfg = config_from_dict(MINIMAL)
        traj, rep = run_scenario(cfg)
        write_outputs(traj, rep, cfg, tmp_path)
        header, data = read_trajectory_csv(tmp_path / "scenario_trajectory.csv")
        assert header == ["t", "z0", "z1", "|z|", "u0", "u1", "v0", "v1", "lambda", "r", "u_spent", "v_spent"]
        assert data.shape == (math.ceil(rep.capture_time / cfg.step()) + 1, 6 + 3 * 2)
        last = dict(zip(header, data[-1]))
        assert last["r"] <= 0 or last["|z|"] <= cfg.params["l"]
        np.testing.assert_array_equal(data[:, 1:3], traj.z)  # repr() round-trips floats exactly

    def test_plot_series(self, tmp_path):
        cfg = config_from_dict(MINIMAL)
        traj, rep = run_scenario(cfg)
        write_outputs(traj, rep, cfg, tmp_path)
        for suffix in ("miss", "resource", "u_budget", "v_budget"):
            xy = np.loadtxt(tmp_path / f"scenario_{suffix}.dat")
            assert xy.shape == (len(traj), 2)
        np.testing.assert_array_equal(np.loadtxt(tmp_path / "scenario_resource.dat")[:, 1], traj.r)

    def test_emit_subset(self, tmp_path):
        cfg = config_from_dict({**MINIMAL, "emit": ["summary_json"]})
        traj, rep = run_scenario(cfg)
        paths = write_outputs(traj, rep, cfg, tmp_path)
        assert [p.name for p in paths] == ["scenario_summary.json"]

    def test_summary_round_trip(self, tmp_path):
        cfg = parse_scenario(SCENARIOS / "pontryagin_base.json")
        traj, rep = run_scenario(cfg)
        write_outputs(traj, rep, cfg, tmp_path)
        rep2, cfg2 = load_summary(tmp_path / "pontryagin_base_summary.json")
        assert rep2 == rep
        assert serialize_config(cfg2) == serialize_config(cfg)
        doc = json.loads((tmp_path / "pontryagin_base_summary.json").read_text())
        assert doc["version"] and any(tag == "mode_switch" for _, tag in doc["events"])

    def test_runs_are_bitwise_repeatable(self, tmp_path):
        cfg = parse_scenario(SCENARIOS / "simple_random_3d.json")
        for sub in ("a", "b"):
            traj, rep = run_scenario(cfg)
            write_outputs(traj, rep, cfg, tmp_path / sub)
        for name in ("simple_random_3d_trajectory.csv", "simple_random_3d_summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_batch(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PURSUIT_RF_THREADS", "2")
        assert thread_count() == 2
        src = tmp_path / "in"
        src.mkdir()
        for name in ("simple_zero.json", "simple_flee_l1.json", "pontryagin_base.json"):
            shutil.copy(SCENARIOS / name, src / name)
        agg = run_batch(src, tmp_path / "out")
        assert len(list((tmp_path / "out").glob("*_summary.json"))) == 3
        report = json.loads((tmp_path / "out" / "batch_report.json").read_text())
        assert report == agg
        for run in agg["runs"]:
            assert run["captured"] and run["capture_time"] <= run["bound"] + 1e-9


class TestCli:
    def test_run(self, tmp_path, capsys):
        code = cli.main(["run", str(SCENARIOS / "simple_zero.json"), "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "capture_time: 2.99999" in out or "capture_time: 3.0" in out
        assert "bound: 9.0" in out

    def test_verify_pontryagin(self, capsys):
        assert cli.main(["verify", str(SCENARIOS / "pontryagin_base.json")]) == 0
        assert "0 violations" in capsys.readouterr().out

    def test_verify_general(self, capsys):
        assert cli.main(["verify", str(SCENARIOS / "general" / "double_integrator_check.json")]) == 0

    def test_lambda(self, capsys):
        code = cli.main(["lambda", "simple_motion", "--z0", "3,0", "--v", "1,0",
                         "--rho", "2", "--sigma", "1", "--l", "1"])
        out = capsys.readouterr().out
        assert code == 0
        assert "lambda closed = 1.75\n" in out
        oracle = float(out.split("lambda oracle = ")[1].split()[0])
        assert oracle == pytest.approx(1.75, abs=1e-4)

    def test_lambda_pontryagin(self, capsys):
        code = cli.main(["lambda", "pontryagin", "--z1", "1,0", "--z2", "0,0", "--z3", "0,0",
                         "--v", "0.2,0.1", "--rho", "2", "--sigma", "1", "--t", "2", "--tau", "1"])
        assert code == 0

    def test_nu(self, capsys):
        assert cli.main(["nu", "--alpha", "2", "--beta", "1", "--b", "1", "--c", "1"]) == 0
        assert "nu closed  = 2\n" in capsys.readouterr().out

    def test_config_errors(self, tmp_path, capsys):
        bad = write_json(tmp_path / "bad.json", {**MINIMAL, "rho": 1})
        assert cli.main(["run", str(bad)]) == 2
        assert cli.main(["verify", str(bad)]) == 2
        assert cli.main(["run", str(SCENARIOS / "general" / "double_integrator_check.json")]) == 2
        assert cli.main(["--bogus"]) == 2
        assert cli.main(["lambda", "simple_motion", "--v", "1,0", "--rho", "2", "--sigma", "1"]) == 2
        assert "rho must exceed sigma" in capsys.readouterr().err

    def test_forged_violation_exit_codes(self, tmp_path, monkeypatch):
        real = cli.run_scenario

        def forged(cfg):
            traj, rep = real(cfg)
            traj.u = 2 * traj.u
            rep.invariant_violations.extend(monitor_invariants(traj, cfg.game))
            return traj, rep

        monkeypatch.setattr(cli, "run_scenario", forged)
        path = str(SCENARIOS / "simple_zero.json")
        assert cli.main(["run", path, "--out", str(tmp_path)]) == 1
        assert cli.main(["verify", path]) == 1

    def test_batch_exit(self, tmp_path):
        src = tmp_path / "in"
        src.mkdir()
        shutil.copy(SCENARIOS / "simple_zero.json", src)
        assert cli.main(["batch", str(src), "--out", str(tmp_path / "out")]) == 0
        write_json(src / "broken.json", {**MINIMAL, "dt": 1.0})  # dt above bound/1000
        assert cli.main(["batch", str(src), "--out", str(tmp_path / "out")]) == 2
