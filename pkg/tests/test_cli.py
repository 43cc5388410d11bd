"""Command-line interface: schemas, outputs, exit codes, determinism."""

import json

import pytest

from fourierqml.cli import main


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def quantum_train_config(out_dir, **overrides):
    doc = {
        "version": "train-v1",
        "seed": 0,
        "output_dir": str(out_dir),
        "family": "quantum",
        "n_qubits": 2,
        "n_layers": 1,
        "target": {"kind": "random_fourier", "kappa": 9, "split": 6, "r": 1.0,
                   "target_seed": 3},
        "n_points": 20,
        "steps": 5,
    }
    doc.update(overrides)
    return doc


class TestSpectrumCommand:
    def test_exponential(self, capsys):
        assert main(["spectrum", "--exp", "3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["d_f"] == 13
        assert doc["distinct_count"] == 27
        assert doc["dense"] and doc["maximally_nondegenerate"]

    def test_naive_weights(self, capsys):
        assert main(["spectrum", "--weights", "1,1,1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["distinct_count"] == 7

    def test_invalid_weight(self, capsys):
        assert main(["spectrum", "--weights", "0,1"]) == 2
        assert "invalid weights" in capsys.readouterr().err

    def test_flag_exclusivity(self, capsys):
        assert main(["spectrum"]) == 2
        assert main(["spectrum", "--weights", "1", "--exp", "2"]) == 2

    def test_output_file(self, tmp_path):
        target = tmp_path / "spectrum.json"
        assert main(["spectrum", "--exp", "2", "--output", str(target)]) == 0
        assert json.loads(target.read_text())["distinct_count"] == 9


class TestTrainCommand:
    def test_quantum_run_writes_outputs(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, quantum_train_config(out))
        assert main(["train", "--config", config]) == 0
        result = json.loads((out / "result.json").read_text())
        assert len(result["loss_trace"]) == 6
        assert "wall_ms" not in result
        trace = (out / "trace.csv").read_text().strip().split("\n")
        assert trace[0] == "step,train_loss,test_loss"
        assert len(trace) == 7
        assert (out / "config.json").exists()
        assert (out / "run.log").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, quantum_train_config(out))
        assert main(["train", "--config", config]) == 0
        first = ((out / "result.json").read_bytes(), (out / "trace.csv").read_bytes())
        assert main(["train", "--config", config]) == 0
        second = ((out / "result.json").read_bytes(), (out / "trace.csv").read_bytes())
        assert first == second

    def test_classical_projected_run(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, {
            "version": "train-v1", "seed": 1, "output_dir": str(out),
            "family": "classical", "degree": 4, "dimension": 6,
            "target": {"kind": "step"}, "n_points": 30, "steps": 10,
            "learning_rate": 0.1,
        })
        assert main(["train", "--config", config]) == 0
        result = json.loads((out / "result.json").read_text())
        assert result["resource_counters"]["parameter_dimension"] == 6

    def test_divergence_exit_code_and_partial_trace(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, {
            "version": "train-v1", "seed": 0, "output_dir": str(out),
            "family": "classical", "degree": 3,
            "target": {"kind": "step"}, "n_points": 20, "steps": 50,
            "learning_rate": 1e8,
        })
        assert main(["train", "--config", config]) == 3
        result = json.loads((out / "result.json").read_text())
        assert result["config"]["aborted"] == "divergence"
        assert (out / "trace.csv").exists()

    def test_unknown_field_rejected(self, tmp_path, capsys):
        doc = quantum_train_config(tmp_path / "run", typo_field=1)
        assert main(["train", "--config", write_config(tmp_path, doc)]) == 2
        assert "typo_field" in capsys.readouterr().err

    def test_wrong_version_rejected(self, tmp_path):
        doc = quantum_train_config(tmp_path / "run", version="train-v2")
        assert main(["train", "--config", write_config(tmp_path, doc)]) == 2

    def test_missing_target_rejected(self, tmp_path):
        doc = quantum_train_config(tmp_path / "run")
        del doc["target"]
        assert main(["train", "--config", write_config(tmp_path, doc)]) == 2

    def test_incomplete_target_rejected(self, tmp_path, capsys):
        doc = quantum_train_config(
            tmp_path / "run", target={"kind": "random_fourier", "kappa": 9}
        )
        assert main(["train", "--config", write_config(tmp_path, doc)]) == 2
        assert "needs" in capsys.readouterr().err

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        assert main(["train", "--config", str(path)]) == 2

    def test_missing_file_rejected(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "absent.json")]) == 2

    def test_capacity_exit_code(self, tmp_path):
        doc = quantum_train_config(tmp_path / "run", n_qubits=30)
        assert main(["train", "--config", write_config(tmp_path, doc)]) == 4

    def test_coefficient_target(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, quantum_train_config(
            out, target={"kind": "coefficients", "values": [0.0, 0.5, 0.0]}
        ))
        assert main(["train", "--config", config]) == 0


class TestCompareCommand:
    def _config(self, out):
        return {
            "version": "compare-v1", "seed": 2, "output_dir": str(out),
            "r_values": [1.0], "runs": 1, "kappa": 9, "split": 6,
            "n_points": 20, "steps": 5, "classical_dimension": 6, "n_qubits": 2,
        }

    def test_outputs_and_determinism(self, tmp_path):
        out = tmp_path / "cmp"
        config = write_config(tmp_path, self._config(out))
        assert main(["compare", "--config", config]) == 0
        losses = (out / "losses.csv").read_text().strip().split("\n")
        assert losses[0] == "r,model,run,step,loss"
        # two families x one run x (5 steps + 1 final)
        assert len(losses) == 1 + 2 * 6
        summary = json.loads((out / "summary.json").read_text())
        assert summary["per_r"][0]["r"] == 1.0
        first = (out / "losses.csv").read_bytes()
        assert main(["compare", "--config", config]) == 0
        assert (out / "losses.csv").read_bytes() == first

    def test_thread_cap_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FOURIER_QML_THREADS", "1")
        out = tmp_path / "cmp"
        doc = self._config(out)
        doc["threads"] = 8
        assert main(["compare", "--config", write_config(tmp_path, doc)]) == 0

    def test_bad_thread_cap(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FOURIER_QML_THREADS", "lots")
        out = tmp_path / "cmp"
        doc = self._config(out)
        doc["threads"] = 2
        assert main(["compare", "--config", write_config(tmp_path, doc)]) == 2

    def test_zero_runs_rejected(self, tmp_path):
        doc = self._config(tmp_path / "cmp")
        doc["runs"] = 0
        assert main(["compare", "--config", write_config(tmp_path, doc)]) == 2


class TestPlateauCommand:
    def test_sweep_outputs(self, tmp_path):
        out = tmp_path / "plateau"
        config = write_config(tmp_path, {
            "version": "plateau-v1", "seed": 5, "output_dir": str(out),
            "qubit_counts": [1, 2], "trials": 150,
        })
        assert main(["plateau", "--config", config]) == 0
        lines = (out / "plateau.csv").read_text().strip().split("\n")
        assert len(lines) == 3
        doc = json.loads((out / "plateau.json").read_text())
        assert doc["fit"]["alpha"] > 0
        assert doc["reports"][0]["d"] == 2

    def test_trials_floor(self, tmp_path):
        config = write_config(tmp_path, {
            "version": "plateau-v1", "seed": 5, "output_dir": str(tmp_path / "p"),
            "qubit_counts": [1], "trials": 50,
        })
        assert main(["plateau", "--config", config]) == 2


class TestResourcesCommand:
    def test_crossing_table(self, tmp_path):
        out = tmp_path / "res"
        config = write_config(tmp_path, {
            "version": "resources-v1", "seed": 0, "output_dir": str(out),
            "K": 81, "M": 1, "eps": 0.5, "N_tp": 16, "gate_counts": [4, 100],
        })
        assert main(["resources", "--config", config]) == 0
        lines = (out / "resources.csv").read_text().strip().split("\n")
        assert lines[0].startswith("N_gt,resrc_q,resrc_c")
        assert len(lines) == 3
        doc = json.loads((out / "resources.json").read_text())
        assert doc["reports"][0]["resrc_c"] == 244


class TestBiconeCommand:
    def test_agreement_summary(self, tmp_path):
        out = tmp_path / "bicone"
        config = write_config(tmp_path, {
            "version": "bicone-v1", "seed": 7, "output_dir": str(out),
            "n_samples": 500, "grid_points": 64,
        })
        assert main(["bicone", "--config", config]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["agreement_rate"] >= 0.99
        header = (out / "disagreements.csv").read_text().split("\n")[0]
        assert header == "c1,c2,c3,boundary_margin,analytic,numeric"


class TestHelpText:
    """Subcommand --help must document every config field by name."""

    @pytest.mark.parametrize("command", ["train", "compare", "plateau",
                                         "resources", "bicone"])
    def test_help_lists_all_config_fields(self, command, capsys):
        from fourierqml.cli import _CONFIG_COMMANDS

        with pytest.raises(SystemExit) as excinfo:
            main([command, "--help"])
        assert excinfo.value.code == 0
        text = capsys.readouterr().out
        schema, _ = _CONFIG_COMMANDS[command]
        for field_name in schema["properties"]:
            assert field_name in text
