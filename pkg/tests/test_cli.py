import json
import subprocess
import sys

import pytest

from mvmetric.cli import main


def run_cli(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)


@pytest.fixture()
def dataset_dir(tmp_path):
    out = tmp_path / "data"
    code = run_cli(
        [
            "generate",
            "--classes",
            "2",
            "--per-class",
            "10",
            "--view-dims",
            "4,6",
            "--noise-views",
            "2",
            "--seed",
            "1",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    return out


def test_generate_writes_expected_files(dataset_dir):
    names = {p.name for p in dataset_dir.iterdir()}
    assert names == {"view1.csv", "view2.csv", "labels.txt", "manifest.json"}
    manifest = json.loads((dataset_dir / "manifest.json").read_text())
    assert manifest["format_version"] == "1"
    assert manifest["config"]["classes"] == 2


def test_generate_same_seed_identical_files(tmp_path, dataset_dir):
    other = tmp_path / "data2"
    assert (
        run_cli(
            [
                "generate",
                "--classes",
                "2",
                "--per-class",
                "10",
                "--view-dims",
                "4,6",
                "--noise-views",
                "2",
                "--seed",
                "1",
                "--out",
                str(other),
            ]
        )
        == 0
    )
    for name in ("view1.csv", "view2.csv", "labels.txt"):
        assert (dataset_dir / name).read_bytes() == (other / name).read_bytes()


def test_generate_malformed_dims(tmp_path, capsys):
    code = run_cli(
        ["generate", "--classes", "2", "--per-class", "5", "--view-dims", "4,x", "--out", str(tmp_path / "d")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err
    code = run_cli(
        ["generate", "--classes", "2", "--per-class", "5", "--view-dims", "4", "--out", str(tmp_path / "d")]
    )
    assert code == 2
    assert "at least 2" in capsys.readouterr().err


def test_train_writes_model_and_echoes_weights(dataset_dir, tmp_path, capsys):
    model_path = tmp_path / "model.json"
    code = run_cli(
        [
            "train",
            "--manifest",
            str(dataset_dir / "manifest.json"),
            "--train-count",
            "12",
            "--seed",
            "7",
            "--d",
            "2",
            "--out",
            str(model_path),
        ]
    )
    assert code == 0
    assert "view weights" in capsys.readouterr().err
    doc = json.loads(model_path.read_text())
    assert doc["format_version"] == "1"
    assert doc["num_views"] == 2
    assert doc["embed_dim"] == 2
    assert doc["config"]["train_count"] == 12
    assert len(doc["trace"]) >= 1


def test_train_missing_labels_file(dataset_dir, tmp_path, capsys):
    (dataset_dir / "labels.txt").unlink()
    code = run_cli(
        [
            "train",
            "--manifest",
            str(dataset_dir / "manifest.json"),
            "--train-count",
            "12",
            "--out",
            str(tmp_path / "m.json"),
        ]
    )
    assert code == 2
    assert "labels file not found" in capsys.readouterr().err


def test_train_rejects_r_of_one(dataset_dir, tmp_path, capsys):
    code = run_cli(
        [
            "train",
            "--manifest",
            str(dataset_dir / "manifest.json"),
            "--train-count",
            "12",
            "--r",
            "1.0",
            "--out",
            str(tmp_path / "m.json"),
        ]
    )
    assert code == 2
    assert "r must be > 1" in capsys.readouterr().err


def test_config_file_merging(dataset_dir, tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"train_count": 12, "seed": 3, "d": 2}))
    model_a = tmp_path / "a.json"
    model_b = tmp_path / "b.json"
    assert (
        run_cli(
            ["train", "--manifest", str(dataset_dir / "manifest.json"), "--config", str(config), "--out", str(model_a)]
        )
        == 0
    )
    # the explicit flag overrides the config value
    assert (
        run_cli(
            [
                "train",
                "--manifest",
                str(dataset_dir / "manifest.json"),
                "--config",
                str(config),
                "--d",
                "1",
                "--out",
                str(model_b),
            ]
        )
        == 0
    )
    assert json.loads(model_a.read_text())["embed_dim"] == 2
    assert json.loads(model_b.read_text())["embed_dim"] == 1


def test_config_file_unknown_key(dataset_dir, tmp_path, capsys):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"train_count": 12, "bogus": 1}))
    code = run_cli(
        ["train", "--manifest", str(dataset_dir / "manifest.json"), "--config", str(config), "--out", str(tmp_path / "m.json")]
    )
    assert code == 2
    assert "unknown keys" in capsys.readouterr().err


def test_eval_report_and_repeatability(dataset_dir, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    argv = [
        "eval",
        "--manifest",
        str(dataset_dir / "manifest.json"),
        "--train-count",
        "12",
        "--trials",
        "3",
        "--seed",
        "7",
        "--d",
        "2",
        "--baseline",
        "euclidean",
        "--csv",
        str(tmp_path / "report.csv"),
        "--out",
        str(report_path),
    ]
    assert run_cli(argv) == 0
    first = report_path.read_bytes()
    doc = json.loads(first)
    assert doc["format_version"] == "1"
    assert len(doc["per_trial_accuracy"]) == 3
    assert "baseline_mean" in doc
    assert (tmp_path / "report.csv").read_text().splitlines()[1] == "trial,accuracy,baseline_accuracy"
    capsys.readouterr()
    assert run_cli(argv) == 0
    assert report_path.read_bytes() == first


def test_eval_rejects_zero_trials(dataset_dir, tmp_path, capsys):
    code = run_cli(
        [
            "eval",
            "--manifest",
            str(dataset_dir / "manifest.json"),
            "--train-count",
            "12",
            "--trials",
            "0",
            "--out",
            str(tmp_path / "r.json"),
        ]
    )
    assert code == 2


def test_check_reports_pseudometric_caveat(dataset_dir, tmp_path):
    model_path = tmp_path / "model.json"
    assert (
        run_cli(
            [
                "train",
                "--manifest",
                str(dataset_dir / "manifest.json"),
                "--train-count",
                "12",
                "--d",
                "2",
                "--out",
                str(model_path),
            ]
        )
        == 0
    )
    report_path = tmp_path / "axioms.json"
    code = run_cli(
        [
            "check",
            "--model",
            str(model_path),
            "--manifest",
            str(dataset_dir / "manifest.json"),
            "--trials",
            "200",
            "--out",
            str(report_path),
        ]
    )
    assert code == 0  # rank deficiency is a caveat, not a violation
    doc = json.loads(report_path.read_text())
    assert doc["violations"] == 0
    assert [v["distinguishable"] for v in doc["views"]] == [False, False]
    assert all(v["rank"] == 2 for v in doc["views"])


def test_check_prints_to_stdout_without_out(dataset_dir, tmp_path, capsys):
    model_path = tmp_path / "model.json"
    assert (
        run_cli(
            [
                "train",
                "--manifest",
                str(dataset_dir / "manifest.json"),
                "--train-count",
                "12",
                "--d",
                "2",
                "--out",
                str(model_path),
            ]
        )
        == 0
    )
    capsys.readouterr()
    code = run_cli(
        ["check", "--model", str(model_path), "--manifest", str(dataset_dir / "manifest.json"), "--trials", "50"]
    )
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["format_version"] == "1"
    assert doc["violations"] == 0


def test_check_rejects_corrupted_model(dataset_dir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    code = run_cli(
        ["check", "--model", str(bad), "--manifest", str(dataset_dir / "manifest.json")]
    )
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_missing_required_options(capsys):
    assert run_cli(["train"]) == 2
    assert "missing required" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "d"
    proc = subprocess.run(
        [
            sys.executable,
            "-m",
            "mvmetric",
            "generate",
            "--classes",
            "2",
            "--per-class",
            "5",
            "--view-dims",
            "3,3",
            "--out",
            str(out),
        ],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (out / "manifest.json").is_file()
