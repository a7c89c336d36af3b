import os

import numpy as np
import pytest

from hamsim.cli import main
from hamsim.config import (ConfigError, ExperimentConfig, build_config,
                           config_metadata, load_config, parse_assignments,
                           parse_value)


class TestConfigParsing:
    def test_basic_assignments(self):
        values = parse_assignments([
            "experiment = lcu-propagation",
            "n_instances = 4  # comment",
            "",
            "# full-line comment",
            "thresholds = 0.3, 0.9",
            "record_wall_time = true",
        ])
        assert values["experiment"] == "lcu-propagation"
        assert values["n_instances"] == 4
        assert values["thresholds"] == [0.3, 0.9]
        assert values["record_wall_time"] is True

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            parse_assignments(["no_such_key = 3"])

    def test_missing_equals_sign(self):
        with pytest.raises(ConfigError, match="expected 'key = value'"):
            parse_assignments(["just some text"])

    def test_bad_int(self):
        with pytest.raises(ConfigError):
            parse_assignments(["n_instances = many"])

    def test_parse_value_lists(self):
        assert parse_value("r_grid", "1, 2, 4") == [1, 2, 4]
        assert parse_value("distributions", "pareto:0.9") == ["pareto:0.9"]


class TestBuildConfig:
    def test_experiment_overlay_applies(self):
        config = build_config({"experiment": "lcu-propagation"})
        assert config.n_qubits == 4
        assert config.n_instances == 200

    def test_file_value_beats_overlay(self):
        config = build_config({"experiment": "lcu-propagation",
                               "n_instances": 7})
        assert config.n_instances == 7

    def test_override_beats_file(self):
        config = build_config({"experiment": "lcu-propagation",
                               "n_instances": 7},
                              {"n_instances": 3})
        assert config.n_instances == 3

    def test_validation_failures_collected(self):
        with pytest.raises(ConfigError):
            build_config({"experiment": "bogus"})
        with pytest.raises(ConfigError):
            build_config({"thresholds": [1.5]})
        with pytest.raises(ConfigError):
            build_config({"weight_k": 12, "n_qubits": 8})

    def test_metadata_is_sorted_and_omits_output(self):
        config = ExperimentConfig(output="/tmp/some.csv")
        meta = config_metadata(config)
        keys = [k for k, _ in meta]
        assert keys == sorted(keys)
        assert "output" not in keys

    def test_output_path_env_default(self, monkeypatch, tmp_path):
        monkeypatch.setenv("HAMSIM_OUT_DIR", str(tmp_path))
        config = ExperimentConfig()
        assert config.output_path() == str(
            tmp_path / "trotter-vs-sparsto.csv")


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        path = tmp_path / "ok.cfg"
        path.write_text("experiment = lcu-propagation\n")
        assert main(["validate", str(path)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_validate_bad_config_exits_1(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("experiment = nonsense\n")
        assert main(["validate", str(path)]) == 1

    def test_missing_config_exits_1(self, tmp_path):
        assert main(["validate", str(tmp_path / "absent.cfg")]) == 1

    def test_run_tiny_experiment(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("experiment = lcu-propagation\n")
        out = tmp_path / "out.csv"
        rc = main(["run", str(path), "--set", "n_instances=2",
                   "--out", str(out)])
        assert rc == 0
        text = out.read_text()
        assert text.count("\n") > 10
        assert "eps_oracle" in text

    def test_bad_override_exits_1(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("experiment = lcu-propagation\n")
        assert main(["run", str(path), "--set", "bogus=1"]) == 1

    def test_fit_command(self, tmp_path, capsys):
        term_file = tmp_path / "mol.txt"
        rng = np.random.default_rng(0)
        lines = []
        words = set()
        while len(lines) < 50:
            word = "".join(rng.choice(list("IXYZ"), 4))
            if word == "IIII" or word in words:
                continue
            words.add(word)
            lines.append(f"{rng.lognormal(0.0, 1.4):.8e} {word}")
        term_file.write_text("\n".join(lines) + "\n")
        assert main(["fit", str(term_file)]) == 0
        out = capsys.readouterr().out
        assert "sigma2=" in out and "pareto_a=" in out

    def test_fit_parse_error_exits_2(self, tmp_path):
        term_file = tmp_path / "broken.txt"
        term_file.write_text("0.5 XQ\n")
        assert main(["fit", str(term_file)]) == 2
