import json
import logging

import pytest
from pydantic import ValidationError as SchemaError

from radarkit.cli import build_parser, main
from radarkit.models.config import ExperimentConfig, ExperimentKind
from radarkit.presets import PRESETS, list_presets, load_preset
from radarkit.utils.errors import ConfigurationError

WAVEFORM_CONFIG = {"kind": "waveform_opt", "params": {"r": 5.0}, "seed": 11}


def _write_config(path, payload) -> str:
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


class TestExperimentConfig:
    """Esquemas estritos e padrões resolvidos"""

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.model_validate({"kind": "crb", "bogus": 1})

    def test_unknown_param_rejected(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.model_validate({"kind": "waveform_opt", "params": {"radius": 1.0}})

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.model_validate({"kind": "fig9"})

    def test_defaults_are_resolved(self):
        config = ExperimentConfig.model_validate({"kind": "interference_design"})
        assert config.params["deltas"] == [2.8, 3.0, 3.2]
        assert config.params["lag"] == "simultaneous"
        assert config.params["mc_samples"] == 10_000
        assert config.params["channel"]["H_t"] == [[7.0, 7.0]]

    def test_mle_grid_validated(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.model_validate({"kind": "mle_gain", "params": {"grid": [0.0, 10.0, 100]}})

    def test_crb_ensemble_floor(self):
        with pytest.raises(SchemaError):
            ExperimentConfig.model_validate({"kind": "crb", "params": {"ensemble_size": 50}})

    def test_complex_channel(self):
        config = ExperimentConfig.model_validate({
            "kind": "waveform_opt",
            "params": {"channel": {"H_c": {"re": [[1.0, 1.0]], "im": [[0.5, 0.0]]}}},
        })
        assert config.typed_params().channel.H_c.im == [[0.5, 0.0]]


class TestPresets:
    """Presets distribuídos"""

    def test_listed_in_order(self):
        names = [entry["name"] for entry in list_presets()]
        assert names == list(PRESETS)
        assert names[0] == "fig3"
        assert "fig5" in names

    def test_every_preset_validates(self):
        for name in PRESETS:
            config = load_preset(name, seed=3)
            assert config.seed == 3
            assert config.name == name

    def test_fig5_settings(self):
        params = load_preset("fig5").params
        assert params["epsilons"] == [0.2, 0.3]
        assert params["lag"] == "simultaneous"

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            load_preset("fig99")


class TestCommandLine:
    """`radarkit run` e `radarkit presets`"""

    def test_config_and_preset_are_exclusive(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run", "--config", "a.json", "--preset", "fig3"])

    def test_presets_command(self, capsys):
        assert main(["presets"]) == 0
        assert "fig5" in capsys.readouterr().out

    def test_malformed_config_writes_only_errors(self, tmp_path):
        config = _write_config(tmp_path / "bad.json", {"kind": "waveform_opt", "params": {"bogus": 1}})
        out = tmp_path / "out"
        assert main(["run", "--config", config, "--out", str(out)]) == 2
        assert sorted(p.name for p in out.iterdir()) == ["errors.json"]
        errors = json.loads((out / "errors.json").read_text(encoding="utf-8"))
        assert errors["error"] == "validation_error"
        assert errors["details"]

    def test_missing_config_file(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--config", str(tmp_path / "absent.json"), "--out", str(out)]) == 2
        errors = json.loads((out / "errors.json").read_text(encoding="utf-8"))
        assert errors["error"] == "configuration_error"

    def test_waveform_run_writes_artifacts(self, tmp_path):
        config = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        out = tmp_path / "run"
        assert main(["run", "--config", config, "--out", str(out), "--threads", "2"]) == 0
        names = {p.name for p in out.iterdir()}
        assert {"manifest.json", "pulses.csv", "summary.md", "report.json"} <= names
        assert "errors.json" not in names
        assert not any(name.startswith(".radarkit-staging-") for name in {p.name for p in tmp_path.iterdir()})

        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["kind"] == "waveform_opt"
        assert manifest["seed"] == 11
        assert manifest["params"]["lag"] == "one_step"
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["flags"]["eigenvalue_matches_scnr"] is True
        assert "waveform_opt" in (out / "summary.md").read_text(encoding="utf-8")

    def test_manifest_replay_is_byte_identical(self, tmp_path):
        config = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(["run", "--config", config, "--out", str(first)]) == 0
        assert main(["run", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
        assert (first / "pulses.csv").read_bytes() == (second / "pulses.csv").read_bytes()

    def test_seed_override(self, tmp_path):
        config = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        out = tmp_path / "seeded"
        assert main(["run", "--config", config, "--out", str(out), "--seed", "99"]) == 0
        assert json.loads((out / "manifest.json").read_text(encoding="utf-8"))["seed"] == 99

    def test_rp_linear_run(self, tmp_path):
        config = _write_config(tmp_path / "rp.json", {"kind": "rp_linear", "params": {"observations": 6}})
        out = tmp_path / "rp"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        garp = json.loads((out / "garp.json").read_text(encoding="utf-8"))
        afriat = json.loads((out / "afriat.json").read_text(encoding="utf-8"))
        assert garp["verdict"] == "pass"
        assert afriat["verdict"] == "rational"
        assert (out / "dataset.csv").read_text(encoding="utf-8").splitlines()[0] == (
            "n,alpha_1,alpha_2,alpha_3,beta_1,beta_2,beta_3"
        )

    def test_infeasible_design_exits_4_with_artifacts(self, tmp_path):
        config = _write_config(tmp_path / "design.json", {
            "kind": "interference_design",
            "params": {"deltas": [0.01], "mc_samples": 200, "r_grid": [0.0, 1.0, 2]},
        })
        out = tmp_path / "design"
        assert main(["run", "--config", config, "--out", str(out)]) == 4
        names = {p.name for p in out.iterdir()}
        assert {"interference_sweep.csv", "designs.csv", "manifest.json", "summary.md"} <= names
        assert "errors.json" not in names
        header = (out / "interference_sweep.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("r,delta,p_hat,ci")

    def test_mle_gain_curves_header(self, tmp_path):
        config = _write_config(tmp_path / "mle.json", {
            "kind": "mle_gain",
            "params": {"horizon": 30, "ensemble_size": 2, "grid": [0.5, 5.0, 20]},
        })
        out = tmp_path / "mle"
        assert main(["run", "--config", config, "--out", str(out)]) == 0
        lines = (out / "likelihood_curves.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "theta,loglik_classic,loglik_inverse"
        assert len(lines) == 21

    def test_rerun_replaces_previous_artifacts(self, tmp_path):
        out = tmp_path / "shared"
        rp = _write_config(tmp_path / "rp.json", {"kind": "rp_linear", "params": {"observations": 4}})
        assert main(["run", "--config", rp, "--out", str(out)]) == 0
        assert (out / "garp.json").exists()

        waveform = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        assert main(["run", "--config", waveform, "--out", str(out)]) == 0
        names = {p.name for p in out.iterdir()}
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert names == set(report["artifacts"])
        assert "garp.json" not in names and "dataset.budget.json" not in names

    def test_failed_rerun_leaves_only_errors(self, tmp_path):
        out = tmp_path / "shared"
        waveform = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        assert main(["run", "--config", waveform, "--out", str(out)]) == 0
        bad = _write_config(tmp_path / "bad.json", {"kind": "waveform_opt", "params": {"bogus": 1}})
        assert main(["run", "--config", bad, "--out", str(out)]) == 2
        assert sorted(p.name for p in out.iterdir()) == ["errors.json"]

    def test_run_logs_ensemble_status(self, tmp_path, caplog):
        caplog.set_level(logging.INFO, logger="radarkit.cli")
        config = _write_config(tmp_path / "waveform.json", WAVEFORM_CONFIG)
        assert main(["run", "--config", config, "--out", str(tmp_path / "run")]) == 0
        assert any("ensemble items:" in record.getMessage() for record in caplog.records)

    def test_kind_enum_round_trip(self):
        assert ExperimentKind("rp_sinr") is ExperimentKind.RP_SINR
