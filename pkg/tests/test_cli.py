import json
import math

import numpy as np
import pytest

from growthdiff.cli import main

PI = "3.141592653589793"


@pytest.fixture(autouse=True)
def run_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


class TestEigenCommand:
    def test_free_interval_modes(self, tmp_path):
        rc = main(["eigen", "--D", "1", "--L0", PI, "--gamma0", "0",
                   "--gamma1", "0", "--modes", "4"])
        assert rc == 0
        assert (tmp_path / "eigen.csv").exists()
        header = json.loads((tmp_path / "eigen.json").read_text())
        assert header["kind"] == "interval"
        assert header["num_modes"] == 4
        assert np.allclose(header["sigmas"], [-1.0, -4.0, -9.0, -16.0],
                           atol=1e-6)

    def test_radial_modes(self, tmp_path):
        rc = main(["eigen", "--D", "1", "--L0", "2", "--gamma0", "0",
                   "--gamma1", "0", "--n-dim", "3", "--modes", "2"])
        assert rc == 0
        header = json.loads((tmp_path / "eigen.json").read_text())
        assert header["kind"] == "radial"
        assert header["sigmas"][0] == pytest.approx(-math.pi ** 2, rel=1e-6)

    def test_missing_field(self, capsys):
        assert main(["eigen", "--D", "1"]) == 2
        assert "missing required field: L0" in capsys.readouterr().err

    def test_radial_rejects_tilt(self, capsys):
        rc = main(["eigen", "--D", "1", "--L0", "2", "--gamma0", "0",
                   "--gamma1", "0.5", "--n-dim", "2"])
        assert rc == 2
        assert "gamma1 does not apply" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        cfg = tmp_path / "eigen.json.in"
        cfg.write_text(json.dumps({"D": 1.0, "L0": 1.0, "gamma0": 0.0,
                                   "gamma1": 0.0, "bogus": 5}))
        assert main(["eigen", "--config", str(cfg)]) == 2
        assert "unknown config keys: bogus" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["eigen", "--config", "nope.json"]) == 2
        assert "cannot read config file" in capsys.readouterr().err

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"D": 1.0, "L0": float(PI), "gamma0": 0.0,
                                   "gamma1": 0.0, "modes": 2, "grid": 256}))
        rc = main(["eigen", "--config", str(cfg), "--modes", "4"])
        assert rc == 0
        header = json.loads((tmp_path / "eigen.json").read_text())
        assert header["num_modes"] == 4      # flag wins
        assert header["grid_size"] == 256    # config fills the rest


class TestExactCommand:
    def test_field_drains_before_collapse(self, tmp_path):
        rc = main(["exact", "--family", "sqrt", "--D", "1", "--f0", "1",
                   "--L0", "1", "--rho", "-0.5", "--times", "0.9999",
                   "--out", "collapse"])
        assert rc == 0
        lines = (tmp_path / "collapse.csv").read_text().splitlines()
        assert lines[0] == "x,xi,t,psi,u,w"
        psi = [abs(float(row.split(",")[3])) for row in lines[1:]]
        assert len(psi) == 101
        assert max(psi) < 1e-6

    def test_past_horizon_is_a_numeric_failure(self, capsys):
        rc = main(["exact", "--family", "sqrt", "--D", "1", "--f0", "1",
                   "--L0", "1", "--rho", "-0.5", "--times", "1.5"])
        assert rc == 3
        assert "numeric failure" in capsys.readouterr().err

    def test_rejects_unknown_initial_condition(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "fixed", "D": 1.0, "f0": 1.0,
                                   "L0": 1.0, "ic": "bump"}))
        assert main(["exact", "--config", str(cfg)]) == 2
        assert "unknown initial condition" in capsys.readouterr().err

    def test_reruns_are_byte_identical(self, tmp_path):
        argv = ["exact", "--family", "linear", "--D", "0.5", "--f0", "1.2",
                "--L0", "1", "--slope", "0.7", "--gamma1", "0.3",
                "--times", "0.2,0.8"]
        assert main(argv + ["--out", "one"]) == 0
        assert main(argv + ["--out", "two"]) == 0
        assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()
        assert (tmp_path / "one.json").read_bytes() == (tmp_path / "two.json").read_bytes()


class TestNumericCommand:
    def test_potential_form_run(self, tmp_path):
        rc = main(["numeric", "--family", "symmetric", "--D", "1", "--f0", "1",
                   "--L0", "1", "--a", "0", "--b", "0", "--form", "w",
                   "--grid", "64", "--dt", "1e-3", "--t-final", "0.1"])
        assert rc == 0
        manifest = json.loads((tmp_path / "numeric.json").read_text())
        assert manifest["kind"] == "w"
        assert manifest["motion"]["family"] == "separable"
        lines = (tmp_path / "numeric.csv").read_text().splitlines()
        assert lines[0] == "t,xi,value"

    def test_peclet_breach_is_a_numeric_failure(self, capsys):
        rc = main(["numeric", "--family", "fixed", "--D", "1", "--f0", "1",
                   "--L0", "1", "--c", "50", "--grid", "8", "--dt", "1e-3",
                   "--t-final", "0.01"])
        assert rc == 3
        assert "Peclet" in capsys.readouterr().err

    def test_bad_form_in_config(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"family": "fixed", "D": 1.0, "f0": 1.0,
                                   "L0": 1.0, "form": "x"}))
        assert main(["numeric", "--config", str(cfg)]) == 2
        assert "form must be" in capsys.readouterr().err


class TestCompareCommand:
    def test_matched_grids_agree(self, tmp_path):
        rc = main(["compare", "--family", "fixed", "--D", "1", "--f0", "1",
                   "--L0", PI, "--t-final", "1.0"])
        assert rc == 0
        lines = (tmp_path / "compare.csv").read_text().splitlines()
        assert lines[0] == "t,abs_linf,rel_linf,worst_xi"
        doc = json.loads((tmp_path / "compare.json").read_text())
        assert doc["worst_rel_linf"] < 1e-9

    def test_coarse_grid_breaches_tolerance(self, tmp_path, capsys):
        rc = main(["compare", "--family", "fixed", "--D", "1", "--f0", "1",
                   "--L0", PI, "--t-final", "1.0", "--grid", "32"])
        assert rc == 4
        err = capsys.readouterr().err
        assert "tolerance breach" in err
        assert "xi=" in err
        doc = json.loads((tmp_path / "compare.json").read_text())
        assert doc["worst_rel_linf"] == pytest.approx(8.0011e-4, rel=1e-3)


class TestCriticalCommand:
    def test_breach_still_writes_the_report(self, tmp_path, capsys):
        # Short horizon: the logarithmic transient keeps the fitted exponent
        # about half a unit below the prediction, so the fit tolerance trips
        # even though the envelope holds.
        rc = main(["critical", "--D", "1", "--f0", "1", "--alpha", "1.5",
                   "--t-final", "80", "--window", "2.5,80", "--grid", "256",
                   "--dt", "5e-3", "--num-outputs", "61", "--out", "crit"])
        assert rc == 4
        assert "fit breach" in capsys.readouterr().err
        doc = json.loads((tmp_path / "crit_report.json").read_text())
        assert doc["route"] == "numeric"
        assert doc["fitted_exponent"] == pytest.approx(-0.504667, abs=1e-3)
        assert doc["predicted_exponent"] == 0.0
        env = doc["envelope"]
        assert env["onset"] == pytest.approx(3.870427, abs=1e-3)
        assert env["C2"] == pytest.approx(0.685295, rel=1e-3)
        assert env["worst_slack"] >= -1e-8
        lines = (tmp_path / "crit_envelope.csv").read_text().splitlines()
        assert lines[0] == "t,coordinate,lower,field,upper,slack"
        assert len(lines) == 1 + 25 * 257

    def test_impossible_slack_is_a_numeric_failure(self, capsys):
        rc = main(["critical", "--D", "1", "--f0", "1", "--alpha", "1.5",
                   "--t-final", "80", "--grid", "256", "--dt", "5e-3",
                   "--num-outputs", "61", "--slack-tol", "-1.0"])
        assert rc == 3
        assert "envelope violated" in capsys.readouterr().err

    def test_window_must_span_decades(self, capsys):
        rc = main(["critical", "--D", "1", "--f0", "1", "--alpha", "1.5",
                   "--t-final", "80", "--window", "20,80"])
        assert rc == 2
        assert "1.5 decades" in capsys.readouterr().err

    def test_missing_alpha(self, capsys):
        assert main(["critical", "--D", "1", "--f0", "1"]) == 2
        assert "missing required field: alpha" in capsys.readouterr().err
