"""Command-line interface tests: exit codes, artifacts, determinism."""

import json

import pytest

from pldlab.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_TRAINING,
    EXIT_USAGE,
    EXIT_VERIFICATION,
    main,
)

TINY_DATASET = {
    "n_classes": 4,
    "dim": 4,
    "train_per_class": 30,
    "test_per_class": 15,
    "spread": 1.0,
    "noise_rate": 0.1,
    "seed": 0,
}


def write_config(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(argv):
    return main(argv)


class TestLosscheck:
    def test_default_identities_pass(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"instances": 10})
        code = run(["losscheck", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == EXIT_OK
        table = (tmp_path / "o" / "losscheck.csv").read_text()
        assert "pld-onehot-equals-ce" in table
        assert "FAIL" not in table
        assert "enumeration-total-probability" in table

    def test_malformed_config_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        out = tmp_path / "o"
        code = run(["losscheck", "--config", str(bad), "--out", str(out)])
        assert code == EXIT_USAGE
        assert not (out / "losscheck.csv").exists()

    def test_unknown_field_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"instancez": 10})
        assert run(["losscheck", "--config", cfg, "--out", str(tmp_path)]) == EXIT_USAGE

    def test_command_mismatch_rejected(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {"command": "bench"})
        assert run(["losscheck", "--config", cfg, "--out", str(tmp_path)]) == EXIT_USAGE


class TestGradcheck:
    BASE = {
        "trials": 6,
        "class_counts": [2, 5],
        "batch_sizes": [1, 3],
        "losses": ["ce", "kd", "pld"],
        "teacher_temperatures": [1.0],
    }

    def test_passes_and_writes_csv(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.BASE)
        out = tmp_path / "o"
        assert run(["gradcheck", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "gradcheck.csv").read_text().strip().split("\n")
        assert lines[0] == "loss_kind,n_classes,batch,max_rel_error"
        assert len(lines) > 1

    def test_impossible_threshold_fails_verification(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {**self.BASE, "floor": 0.0, "threshold": 1e-300}
        )
        code = run(["gradcheck", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == EXIT_VERIFICATION
        # the full report is still written
        assert (tmp_path / "o" / "gradcheck.csv").exists()

    def test_zero_step_is_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {**self.BASE, "step": 0.0})
        assert run(["gradcheck", "--config", cfg, "--out", str(tmp_path)]) == EXIT_USAGE


@pytest.fixture(scope="module")
def teacher_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("teacher")
    doc = {
        "dataset": TINY_DATASET,
        "layer_sizes": [4, 16, 4],
        "epochs": 4,
        "batch_size": 32,
    }
    cfg = out / "in.json"
    cfg.write_text(json.dumps(doc))
    assert main(["train-teacher", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    return out


class TestTrainTeacher:
    def test_artifacts_written(self, teacher_dir):
        assert (teacher_dir / "teacher.json").exists()
        assert (teacher_dir / "metrics.csv").exists()
        echoed = json.loads((teacher_dir / "config.json").read_text())
        assert echoed["command"] == "train-teacher"
        assert echoed["format_version"] == 1
        assert echoed["epochs"] == 4
        assert echoed["optimizer"]["learning_rate"] == 1e-3  # default made explicit

    def test_metrics_header(self, teacher_dir):
        lines = (teacher_dir / "metrics.csv").read_text().strip().split("\n")
        assert lines[0] == "epoch,train_loss,test_top1,teacher_kl"
        assert len(lines) == 5

    def test_rerun_from_echoed_config_is_byte_identical(self, teacher_dir, tmp_path):
        out2 = tmp_path / "again"
        code = main(
            [
                "train-teacher",
                "--config",
                str(teacher_dir / "config.json"),
                "--out",
                str(out2),
            ]
        )
        assert code == EXIT_OK
        for name in ("teacher.json", "metrics.csv", "config.json"):
            assert (out2 / name).read_bytes() == (teacher_dir / name).read_bytes()

    def test_divergent_run_exits_training_failure(self, tmp_path):
        doc = {
            "dataset": TINY_DATASET,
            "layer_sizes": [4, 8, 4],
            "epochs": 3,
            "batch_size": 32,
            "optimizer": {"learning_rate": 1e30},
        }
        cfg = write_config(tmp_path, "c.json", doc)
        out = tmp_path / "o"
        assert run(["train-teacher", "--config", cfg, "--out", str(out)]) == EXIT_TRAINING
        assert not (out / "teacher.json").exists()
        assert not (out / "metrics.csv").exists()


class TestDistill:
    def distill_doc(self, teacher_dir, **loss):
        return {
            "teacher": str(teacher_dir / "teacher.json"),
            "dataset": TINY_DATASET,
            "layer_sizes": [4, 8, 4],
            "loss": loss,
            "epochs": 3,
            "batch_size": 32,
        }

    def test_end_to_end_and_frozen_teacher(self, teacher_dir, tmp_path):
        teacher_bytes = (teacher_dir / "teacher.json").read_bytes()
        cfg = write_config(tmp_path, "c.json", self.distill_doc(teacher_dir, kind="pld"))
        out = tmp_path / "o"
        assert run(["distill", "--config", cfg, "--out", str(out)]) == EXIT_OK
        assert (out / "student.json").exists()
        assert (out / "metrics.csv").exists()
        assert (teacher_dir / "teacher.json").read_bytes() == teacher_bytes

    def test_kd_table_defaults_complete(self, teacher_dir, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            self.distill_doc(teacher_dir, kind="kd", ce_mix=0.1, kd_temperature=2.0),
        )
        out = tmp_path / "o"
        assert run(["distill", "--config", cfg, "--out", str(out)]) == EXIT_OK
        metrics = (out / "metrics.csv").read_text().strip().split("\n")
        assert len(metrics) == 4
        for line in metrics[1:]:
            fields = line.split(",")
            assert all(f not in ("nan", "inf") for f in fields)

    def test_same_seed_byte_identical_metrics(self, teacher_dir, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.distill_doc(teacher_dir, kind="dist"))
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["distill", "--config", cfg, "--out", str(out1)]) == EXIT_OK
        assert run(["distill", "--config", cfg, "--out", str(out2)]) == EXIT_OK
        assert (out1 / "metrics.csv").read_bytes() == (out2 / "metrics.csv").read_bytes()
        assert (out1 / "student.json").read_bytes() == (out2 / "student.json").read_bytes()

    def test_missing_teacher_is_io_error(self, teacher_dir, tmp_path):
        doc = self.distill_doc(teacher_dir, kind="pld")
        doc["teacher"] = str(tmp_path / "nowhere.json")
        cfg = write_config(tmp_path, "c.json", doc)
        assert run(["distill", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_IO

    def test_dimension_mismatch_is_usage_error(self, teacher_dir, tmp_path):
        doc = self.distill_doc(teacher_dir, kind="pld")
        doc["layer_sizes"] = [4, 8, 5]
        cfg = write_config(tmp_path, "c.json", doc)
        assert run(["distill", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_USAGE


class TestLandscape:
    DOC = {
        "n_classes": 12,
        "resolution": 5,
        "temperatures": [2.0, 1.0],
        "loss_kinds": ["pld", "kd"],
    }

    def test_row_count_contract(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.DOC)
        out = tmp_path / "o"
        assert run(["landscape", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "landscape.csv").read_text().strip().split("\n")
        assert lines[0] == "alpha,beta,loss_kind,temperature,value"
        assert len(lines) == 1 + 5 * 5 * 2 * 2

    def test_seeded_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", self.DOC)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["landscape", "--config", cfg, "--out", str(out1)]) == EXIT_OK
        assert run(["landscape", "--config", str(out1 / "config.json"), "--out", str(out2)]) == EXIT_OK
        assert (out1 / "landscape.csv").read_bytes() == (out2 / "landscape.csv").read_bytes()

    def test_invalid_spec_is_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, "c.json", {**self.DOC, "resolution": 2})
        assert run(["landscape", "--config", cfg, "--out", str(tmp_path)]) == EXIT_USAGE


class TestBench:
    def test_tiny_run_produces_finite_report(self, tmp_path):
        doc = {"sizes": [[4, 8], [4, 16]], "kinds": ["ce", "pld"], "trials": 2, "warmup": 1}
        cfg = write_config(tmp_path, "c.json", doc)
        out = tmp_path / "o"
        assert run(["bench", "--config", cfg, "--out", str(out)]) == EXIT_OK
        lines = (out / "bench.csv").read_text().strip().split("\n")
        assert lines[0] == "loss_kind,batch,n_classes,trials,median_seconds"
        assert len(lines) == 5
        for line in lines[1:]:
            assert float(line.split(",")[-1]) > 0

    def test_echoed_config_is_stable(self, tmp_path):
        doc = {"sizes": [[4, 8]], "kinds": ["ce"], "trials": 1, "warmup": 0}
        cfg = write_config(tmp_path, "c.json", doc)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["bench", "--config", cfg, "--out", str(out1)]) == EXIT_OK
        assert run(["bench", "--config", str(out1 / "config.json"), "--out", str(out2)]) == EXIT_OK
        assert (out1 / "config.json").read_bytes() == (out2 / "config.json").read_bytes()


class TestSeedFlag:
    def test_seed_flag_overrides_config(self, tmp_path):
        doc = {
            "dataset": TINY_DATASET,
            "layer_sizes": [4, 8, 4],
            "epochs": 1,
            "batch_size": 32,
        }
        cfg = write_config(tmp_path, "c.json", doc)
        out = tmp_path / "o"
        assert run(["train-teacher", "--config", cfg, "--seed", "77", "--out", str(out)]) == EXIT_OK
        echoed = json.loads((out / "config.json").read_text())
        assert echoed["seed"] == 77
