"""Command-line surface: exit codes, key=value stdout, override precedence."""

import json

import pytest

from angiosim.cli import main
from angiosim.oracles import ConvergenceReport


def _kv(capsys):
    """Parse the machine-readable stdout lines into a dict."""
    out = {}
    captured = capsys.readouterr()
    for line in captured.out.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key] = value
    return out, captured.err


class TestTopLevel:
    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert "angiosim 0.1.0" in capsys.readouterr().out

    def test_missing_subcommand_is_usage_error(self, capsys):
        assert main([]) == 2

    def test_negative_steps_rejected(self, capsys):
        assert main(["run", "--steps", "-5"]) == 2

    def test_bad_reaction_mode_rejected(self, capsys):
        assert main(["run", "--reaction-mode", "sideways"]) == 2


class TestRunCommand:
    def test_zero_step_run(self, capsys, tmp_path):
        out_dir = tmp_path / "zero"
        code = main(["run", "--steps", "0", "--seed", "42",
                     "--output-dir", str(out_dir)])
        kv, _ = _kv(capsys)
        assert code == 0
        assert kv["steps"] == "0" and kv["seed"] == "42"
        assert kv["snapshots"] == "1"
        assert float(kv["final_max_c_V"]) > 0.0
        assert float(kv["final_max_c_D"]) == 0.0
        assert (out_dir / "step_0" / "meta.json").exists()
        assert (out_dir / "summary.json").exists()

    def test_flag_beats_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text(json.dumps({"seed": 7, "n_steps": 0,
                                   "output_dir": str(tmp_path / "a")}))
        code = main(["run", "--config", str(cfg), "--seed", "9",
                     "--output-dir", str(tmp_path / "b")])
        kv, _ = _kv(capsys)
        assert code == 0
        assert kv["seed"] == "9"
        assert (tmp_path / "b").exists() and not (tmp_path / "a").exists()

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text('{"n_stepz": 5}')
        assert main(["run", "--config", str(cfg)]) == 1
        _, err = _kv(capsys)
        assert "n_stepz" in err

    def test_incompatible_grid_spacing(self, capsys, tmp_path):
        cfg = tmp_path / "config.json"
        cfg.write_text('{"h": 7.0, "n_steps": 0}')
        assert main(["run", "--config", str(cfg)]) == 1
        _, err = _kv(capsys)
        assert "error:" in err

    def test_missing_config_file(self, capsys, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1


class TestValidateCommand:
    def test_short_run_all_checks_pass(self, capsys, tmp_path):
        code = main(["validate", "--steps", "5", "--seed", "1",
                     "--output-dir", str(tmp_path / "v")])
        kv, _ = _kv(capsys)
        assert code == 0
        want = {"containment", "fraction_partition_exact", "fraction_bounds",
                "fraction_monotone_decay", "concentrations_nonnegative",
                "growth_factor_max_nonincreasing"}
        assert set(kv) == want
        assert all(v == "pass" for v in kv.values())


class TestConvergenceCommand:
    def test_reports_orders_and_writes_json(self, capsys, tmp_path, monkeypatch):
        spatial = ConvergenceReport([20.0, 10.0, 5.0], [4e-3, 1e-3, 2.5e-4], 2.0)
        temporal = ConvergenceReport([4.0, 2.0, 1.0], [4e-2, 2e-2, 1e-2], 1.0)
        trapezoid = ConvergenceReport([0.25, 0.125], [1e-4, 2.5e-5], 2.0)
        monkeypatch.setattr("angiosim.cli.diffusion_spatial_study",
                            lambda *a, **k: spatial)
        monkeypatch.setattr("angiosim.cli.diffusion_temporal_study",
                            lambda *a, **k: temporal)
        monkeypatch.setattr("angiosim.cli.ode_trapezoid_oracle",
                            lambda *a, **k: trapezoid)
        report_path = tmp_path / "conv.json"
        code = main(["convergence", "--output", str(report_path)])
        kv, err = _kv(capsys)
        assert code == 0
        assert kv["spatial_order"] == "2.0000"
        assert kv["temporal_order"] == "1.0000"
        assert kv["trapezoid_order"] == "2.0000"
        assert kv["report"] == str(report_path)
        doc = json.loads(report_path.read_text())
        assert set(doc) == {"spatial", "temporal", "trapezoid"}
        assert doc["spatial"]["errors"] == [4e-3, 1e-3, 2.5e-4]
        assert "h ladder" in err and "tau ladder" in err


class TestNormalizeCheckCommand:
    def test_default_ladder_converges(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code = main(["normalize-check"])
        kv, _ = _kv(capsys)
        assert code == 0
        assert kv["I"].startswith("0.4665123931")
        assert float(kv["I_refinement_delta"]) <= 1e-10
        assert kv["monotone"] == "true"
        assert float(kv["error_h1"]) < 0.01

    def test_coarsening_ladder_fails(self, capsys):
        code = main(["normalize-check", "--h-values", "1,10"])
        kv, _ = _kv(capsys)
        assert code == 1
        assert kv["monotone"] == "false"

    def test_bad_h_values(self, capsys):
        assert main(["normalize-check", "--h-values", "10,bogus"]) == 2
