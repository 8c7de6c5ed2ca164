import json

import pytest

from skdlab.capacity import bac_capacity, qsc_capacity
from skdlab.cli import main

TINY_INI = """\
[data]
task = SL22
samples_per_subclass = 12,12,26,26
difficulty = 0.2,0.8,0.2,0.8
seed = 77

[teacher]
epochs = 4

[student]
epochs = 3

[experiment]
n_seeds = 2
"""


@pytest.fixture()
def tiny_config(tmp_path):
    p = tmp_path / "tiny.ini"
    p.write_text(TINY_INI)
    return p


@pytest.fixture()
def data_dir(tmp_path, tiny_config):
    out = tmp_path / "data"
    assert main(["generate", "-c", str(tiny_config), "-o", str(out)]) == 0
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCapacityCommand:
    def test_symmetric_channel(self, capsys):
        code, out, _ = run(capsys, "capacity", "--qsc", "4", "0.7")
        assert code == 0 and out == "0.643220\n"

    def test_binary_asymmetric(self, capsys):
        code, out, _ = run(capsys, "capacity", "--bac", "0.9", "0.9")
        assert code == 0 and out == "0.531004\n"

    def test_z_channel(self, capsys):
        code, out, _ = run(capsys, "capacity", "--z", "0.5")
        assert code == 0 and out == "0.321928\n"

    def test_explicit_matrix(self, capsys, tmp_path):
        m = tmp_path / "chan.csv"
        m.write_text("0.9,0.1\n0.2,0.8\n")
        code, out, _ = run(capsys, "capacity", "--matrix", str(m))
        assert code == 0 and out == "0.397754\n"  # equals the (0.9, 0.8) closed form

    def test_non_integer_size_rejected(self, capsys):
        code, _, err = run(capsys, "capacity", "--qsc", "4.5", "0.7")
        assert code == 2 and "error:" in err

    def test_missing_matrix_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "capacity", "--matrix", str(tmp_path / "nope.csv"))
        assert code == 2 and "not found" in err

    def test_ragged_matrix(self, capsys, tmp_path):
        m = tmp_path / "bad.csv"
        m.write_text("0.9,0.1\n1.0\n")
        code, _, err = run(capsys, "capacity", "--matrix", str(m))
        assert code == 2 and "ragged" in err

    def test_channel_selection_is_required(self, capsys):
        with pytest.raises(SystemExit):
            main(["capacity"])


class TestBitsCommand:
    FLAGS = [
        "--p-h0", "0.9", "--p-h1", "0.9", "--n-s", "2", "--p-s", "0.85",
        "--n-h0", "2162", "--n-h1", "990",
    ]

    def test_parameter_route(self, capsys):
        code, out, _ = run(capsys, "bits", *self.FLAGS)
        assert code == 0
        assert out.splitlines() == [
            "class_bits=0.531004",
            "subclass_bits=0.122544",
            "total_bits=0.653548",
        ]

    def test_parameter_route_writes_reports(self, capsys, tmp_path):
        out_dir = tmp_path / "bits"
        code, _, _ = run(capsys, "bits", *self.FLAGS, "--task", "demo", "-o", str(out_dir))
        assert code == 0
        lines = (out_dir / "bits.csv").read_text().splitlines()
        assert lines[0] == "task,class_bits,subclass_bits,total_bits"
        assert lines[1] == "demo,0.531004,0.122544,0.653548"
        payload = json.loads((out_dir / "bits.json").read_text())
        assert payload[0]["task"] == "demo"
        assert payload[0]["counts"] == {"n_h0": 2162, "n_h1": 990}

    def test_missing_parameters_listed(self, capsys):
        code, _, err = run(capsys, "bits", "--p-h0", "0.9")
        assert code == 2
        assert "--p-h1" in err and "--n-h1" in err

    def test_confusion_route(self, capsys, tmp_path):
        hier = tmp_path / "hierarchy.json"
        hier.write_text(json.dumps({"subclasses_per_class": [1, 2]}))
        class_csv = tmp_path / "class.csv"
        class_csv.write_text("90,10\n20,80\n")
        sub_csv = tmp_path / "sub.csv"
        sub_csv.write_text("40,10\n10,40\n")
        code, out, _ = run(
            capsys, "bits", "--from-confusion", str(class_csv),
            "--subclass-confusion", str(sub_csv), "--hierarchy", str(hier),
        )
        assert code == 0
        expected = bac_capacity(0.9, 0.8) + 0.5 * qsc_capacity(2, 0.8)
        assert f"total_bits={expected:.6f}" in out.splitlines()

    def test_confusion_route_needs_hierarchy(self, capsys, tmp_path):
        class_csv = tmp_path / "class.csv"
        class_csv.write_text("90,10\n20,80\n")
        code, _, err = run(capsys, "bits", "--from-confusion", str(class_csv))
        assert code == 2 and "--hierarchy" in err

    def test_confusion_route_counts_subclass_files(self, capsys, tmp_path):
        hier = tmp_path / "hierarchy.json"
        hier.write_text(json.dumps({"subclasses_per_class": [1, 2]}))
        class_csv = tmp_path / "class.csv"
        class_csv.write_text("90,10\n20,80\n")
        code, _, err = run(
            capsys, "bits", "--from-confusion", str(class_csv), "--hierarchy", str(hier)
        )
        assert code == 2 and "1 --subclass-confusion" in err


class TestGenerateCommand:
    def test_writes_three_files(self, capsys, tiny_config, tmp_path):
        out = tmp_path / "gen"
        code, stdout, _ = run(capsys, "generate", "-c", str(tiny_config), "-o", str(out))
        assert code == 0
        for name in ("hierarchy.json", "train.csv", "test.csv"):
            assert (out / name).is_file()
        assert "(38 samples)" in stdout  # 76 total at the 0.5 default fraction

    def test_byte_identical_reruns(self, capsys, tiny_config, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        run(capsys, "generate", "-c", str(tiny_config), "-o", str(a))
        run(capsys, "generate", "-c", str(tiny_config), "-o", str(b))
        for name in ("hierarchy.json", "train.csv", "test.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_missing_config(self, capsys, tmp_path):
        code, _, err = run(capsys, "generate", "-c", str(tmp_path / "no.ini"), "-o", str(tmp_path))
        assert code == 2 and "config not found" in err

    def test_unknown_task(self, capsys, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[data]\ntask = SL99\n")
        code, _, err = run(capsys, "generate", "-c", str(bad), "-o", str(tmp_path / "x"))
        assert code == 2 and "unknown task" in err

    def test_bad_value_names_section_and_key(self, capsys, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[teacher]\nepochs = pony\n")
        code, _, err = run(capsys, "generate", "-c", str(bad), "-o", str(tmp_path / "x"))
        assert code == 2 and "[teacher] epochs" in err

    def test_count_arity_checked(self, capsys, tmp_path):
        bad = tmp_path / "bad.ini"
        bad.write_text("[data]\ntask = SL22\nsamples_per_subclass = 10,10\n")
        code, _, err = run(capsys, "generate", "-c", str(bad), "-o", str(tmp_path / "x"))
        assert code == 2 and "needs 4" in err


class TestTrainCommand:
    def test_teacher_then_students(self, capsys, tiny_config, data_dir, tmp_path):
        tdir = tmp_path / "teacher"
        code, stdout, _ = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "-o", str(tdir),
        )
        assert code == 0
        assert (tdir / "checkpoint.json").is_file()
        report = json.loads((tdir / "metrics.json").read_text())
        assert report["config_ini"] == TINY_INI
        assert report["label_level"] == "subclass"
        assert len(report["loss_per_epoch"]) == 4
        assert "binary_f1=" in stdout

        sdir = tmp_path / "student"
        code, stdout, _ = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "student", "--mode", "skd",
            "--teacher", str(tdir / "checkpoint.json"), "-o", str(sdir),
        )
        assert code == 0
        meta = json.loads((sdir / "metrics.json").read_text())
        assert meta["mode"] == "skd" and meta["label_level"] == "subclass"
        assert len(meta["loss_per_epoch"]) == 3

    def test_train_outputs_deterministic(self, capsys, tiny_config, data_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            code, _, _ = run(
                capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
                "--role", "teacher", "--labels", "class", "-o", str(out),
            )
            assert code == 0
        assert (a / "checkpoint.json").read_bytes() == (b / "checkpoint.json").read_bytes()
        assert (a / "metrics.json").read_bytes() == (b / "metrics.json").read_bytes()

    def test_student_needs_mode(self, capsys, tiny_config, data_dir, tmp_path):
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "student", "-o", str(tmp_path / "s"),
        )
        assert code == 2 and "requires --mode" in err

    def test_teacher_rejects_student_flags(self, capsys, tiny_config, data_dir, tmp_path):
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "--mode", "skd", "-o", str(tmp_path / "t"),
        )
        assert code == 2 and "only to --role student" in err

    def test_skd_needs_teacher_flag(self, capsys, tiny_config, data_dir, tmp_path):
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "student", "--mode", "skd", "-o", str(tmp_path / "s"),
        )
        assert code == 2 and "requires --teacher" in err

    def test_baseline_rejects_teacher_flag(self, capsys, tiny_config, data_dir, tmp_path):
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "student", "--mode", "baseline",
            "--teacher", "whatever.json", "-o", str(tmp_path / "s"),
        )
        assert code == 2 and "takes no --teacher" in err

    def test_kd_rejects_subclass_teacher(self, capsys, tiny_config, data_dir, tmp_path):
        tdir = tmp_path / "teacher"
        run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "--labels", "subclass", "-o", str(tdir),
        )
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "student", "--mode", "kd",
            "--teacher", str(tdir / "checkpoint.json"), "-o", str(tmp_path / "s"),
        )
        assert code == 2
        assert "teacher level mismatch" in err and "'subclass'" in err

    def test_missing_data_dir_file(self, capsys, tiny_config, data_dir, tmp_path):
        (data_dir / "test.csv").unlink()
        code, _, err = run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "-o", str(tmp_path / "t"),
        )
        assert code == 2 and "missing" in err


class TestEvaluateCommand:
    def test_matches_training_metrics(self, capsys, tiny_config, data_dir, tmp_path):
        tdir = tmp_path / "teacher"
        run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "-o", str(tdir),
        )
        trained = json.loads((tdir / "metrics.json").read_text())["metrics"]
        out_json = tmp_path / "eval.json"
        code, stdout, _ = run(
            capsys, "evaluate", "--checkpoint", str(tdir / "checkpoint.json"),
            "--data", str(data_dir), "-o", str(out_json),
        )
        assert code == 0
        assert f"binary_f1={trained['binary_f1']:.6f}" in stdout
        payload = json.loads(out_json.read_text())
        assert payload["split"] == "test"
        assert payload["metrics"]["binary_f1"] == trained["binary_f1"]

    def test_train_split_selectable(self, capsys, tiny_config, data_dir, tmp_path):
        tdir = tmp_path / "teacher"
        run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "-o", str(tdir),
        )
        code, stdout, _ = run(
            capsys, "evaluate", "--checkpoint", str(tdir / "checkpoint.json"),
            "--data", str(data_dir), "--split", "train",
        )
        assert code == 0 and stdout.startswith("binary_f1=")

    def test_level_override_width_mismatch(self, capsys, tiny_config, data_dir, tmp_path):
        tdir = tmp_path / "teacher"
        run(
            capsys, "train", "-c", str(tiny_config), "--data", str(data_dir),
            "--role", "teacher", "--labels", "subclass", "-o", str(tdir),
        )
        code, _, err = run(
            capsys, "evaluate", "--checkpoint", str(tdir / "checkpoint.json"),
            "--data", str(data_dir), "--level", "class",
        )
        assert code == 2 and "width" in err

    def test_missing_checkpoint(self, capsys, data_dir):
        code, _, err = run(
            capsys, "evaluate", "--checkpoint", "missing.json", "--data", str(data_dir)
        )
        assert code == 2 and "checkpoint not found" in err


class TestExperimentCommand:
    def test_end_to_end_and_determinism(self, capsys, tiny_config, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        code, stdout, _ = run(
            capsys, "experiment", "-c", str(tiny_config), "-o", str(a)
        )
        assert code == 0
        variant_lines = [l for l in stdout.splitlines() if "binary_f1" in l]
        assert len(variant_lines) == 6
        for name in ("report.json", "summary.csv", "per_seed.csv", "run.log"):
            assert (a / name).is_file()
        report = json.loads((a / "report.json").read_text())
        assert report["config_ini"] == TINY_INI
        assert len(report["per_seed"]) == 2

        code, _, _ = run(
            capsys, "experiment", "-c", str(tiny_config), "-o", str(b), "--jobs", "2"
        )
        assert code == 0
        # reports carry no timestamps, so parallel reruns match byte for byte
        for name in ("report.json", "summary.csv", "per_seed.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_bad_jobs_value(self, capsys, tiny_config, tmp_path):
        code, _, err = run(
            capsys, "experiment", "-c", str(tiny_config), "-o", str(tmp_path / "x"),
            "--jobs", "0",
        )
        assert code == 2 and "--jobs" in err
