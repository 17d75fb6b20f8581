import json
import subprocess
import sys

import numpy as np
import pytest

from hierlogic import ancestor_closure, formats, load_fixture
from hierlogic.cli import RunConfig, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_json(out):
    return json.loads(out)


def test_validate_six_node(capsys):
    code, out, _ = run_cli(capsys, "validate", "--hierarchy", "six_node")
    assert code == 0
    doc = parse_json(out)
    assert doc["name"] == "six_node"
    assert doc["num_nodes"] == 6
    assert doc["num_levels"] == 3
    assert doc["level_sizes_root_to_leaf"] == [1, 2, 3]
    assert doc["num_leaf_paths"] == 3
    assert doc["backend"] in ("numpy", "native")


@pytest.mark.parametrize(
    "name,sizes",
    [
        ("mapillary_vistas_2", [4, 16, 124]),
        ("ade20k", [3, 14, 150]),
        ("cityscapes", [6, 19]),
        ("pascal_part_108", [20, 108]),
    ],
)
def test_validate_fixture_sizes(capsys, name, sizes):
    code, out, _ = run_cli(capsys, "validate", "--hierarchy", name)
    assert code == 0
    doc = parse_json(out)
    assert doc["level_sizes_root_to_leaf"] == sizes


def test_validate_hierarchy_file(capsys, tmp_path):
    spec = {
        "name": "tiny",
        "levels": 3,
        "nodes": [
            {"name": "root", "level": 3, "parent": None},
            {"name": "kid", "level": 2, "parent": "root"},
            {"name": "leaf", "level": 1, "parent": "kid"},
        ],
    }
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(spec))
    code, out, _ = run_cli(capsys, "validate", "--hierarchy", str(path))
    assert code == 0
    assert parse_json(out)["num_nodes"] == 3


def test_validate_level_gap_rejected(capsys, tmp_path):
    spec = {
        "name": "gapped",
        "levels": 3,
        "nodes": [
            {"name": "root", "level": 3, "parent": None},
            {"name": "mid", "level": 2, "parent": "root"},
            {"name": "leaf_a", "level": 1, "parent": "mid"},
            {"name": "leaf_b", "level": 1, "parent": "root"},
        ],
    }
    path = tmp_path / "gap.json"
    path.write_text(json.dumps(spec))
    code, out, err = run_cli(capsys, "validate", "--hierarchy", str(path))
    assert code == 1
    assert out == ""
    assert "level gap" in err


def test_validate_missing_file(capsys):
    code, _, err = run_cli(capsys, "validate", "--hierarchy", "/no/such/file.json")
    assert code == 1
    assert err.startswith("error:")


def _write_one_hot_case(tmp_path, fmt="binary"):
    h = load_fixture("six_node")
    leaf_ids = np.array([0, 1, 2, 0], dtype=np.uint32)
    cols = np.stack([ancestor_closure(h, int(i)) for i in leaf_ids], axis=1)
    scores_path = str(tmp_path / f"scores.{fmt}")
    labels_path = str(tmp_path / f"labels.{fmt}")
    formats.save_scores(scores_path, cols, 2, 2, fmt)
    formats.save_labels(labels_path, leaf_ids, 2, 2, fmt)
    return scores_path, labels_path


def test_loss_consistent_one_hot(capsys, tmp_path):
    scores_path, labels_path = _write_one_hot_case(tmp_path)
    code, out, _ = run_cli(
        capsys,
        "loss",
        "--hierarchy", "six_node",
        "--scores", scores_path,
        "--labels", labels_path,
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["l_c"] == 0.0
    assert doc["l_d"] == 0.0
    assert doc["l_e"] == 0.0
    assert doc["pixel_count"] == 4
    assert doc["include"] == ["c", "d", "e"]
    assert doc["satisfaction"] == {
        "c": [1.0] * 6, "d": [1.0] * 6, "e": [1.0] * 6
    }
    assert doc["total"] == doc["l_bce"]


def test_loss_csv_format(capsys, tmp_path):
    scores_path, labels_path = _write_one_hot_case(tmp_path, fmt="csv")
    code, out, _ = run_cli(
        capsys,
        "loss",
        "--hierarchy", "six_node",
        "--scores", scores_path,
        "--labels", labels_path,
        "--format", "csv",
        "--losses", "c",
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["include"] == ["c"]
    assert doc["l_d"] == 0.0 and doc["l_e"] == 0.0


def test_loss_wrong_hierarchy_for_scores(capsys, tmp_path):
    scores_path, labels_path = _write_one_hot_case(tmp_path)
    code, _, err = run_cli(
        capsys,
        "loss",
        "--hierarchy", "cityscapes",
        "--scores", scores_path,
        "--labels", labels_path,
    )
    assert code == 1
    assert "error: FormatError" in err


def test_infer_reports_and_writes_labels(capsys, tmp_path):
    h = load_fixture("six_node")
    rng = np.random.default_rng(5)
    values = rng.uniform(0.01, 0.99, size=(6, 9))
    scores_path = str(tmp_path / "s.bin")
    formats.save_scores(scores_path, values, 3, 3, "binary")
    out_labels = str(tmp_path / "decoded.bin")
    report_path = str(tmp_path / "report.json")
    code, out, _ = run_cli(
        capsys,
        "infer",
        "--hierarchy", "six_node",
        "--scores", scores_path,
        "--iters", "2",
        "--out", out_labels,
        "--report", report_path,
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["iterations"] == 2
    assert doc["engine"] == "matrix"
    assert doc["e_variant"] == "eq17"
    assert doc["pixel_count"] == 9
    assert 0.0 <= doc["violation_rate_pre_decode"] <= 1.0
    assert doc["miou_per_level"] is None
    assert doc["leaf_accuracy"] is None
    decoded, height, width = formats.load_labels(out_labels, "binary")
    assert (height, width) == (3, 3)
    assert decoded.shape == (9,)
    assert (decoded < h.num_leaves).all()
    on_disk = json.loads(open(report_path).read())
    assert on_disk["pixel_count"] == 9


def test_infer_with_labels_scores_metrics(capsys, tmp_path):
    scores_path, labels_path = _write_one_hot_case(tmp_path)
    code, out, _ = run_cli(
        capsys,
        "infer",
        "--hierarchy", "six_node",
        "--scores", scores_path,
        "--labels", labels_path,
        "--iters", "0",
    )
    assert code == 0
    doc = parse_json(out)
    # One-hot closures survive decode untouched at zero iterations.
    assert doc["leaf_accuracy"] == 1.0
    assert doc["miou_per_level"] == [100.0, 100.0, 100.0]
    assert doc["violation_rate_pre_decode"] == 0.0


def test_gen_data_round_trip(capsys, tmp_path):
    out_scores = str(tmp_path / "scores.bin")
    out_labels = str(tmp_path / "labels.bin")
    code, out, _ = run_cli(
        capsys,
        "gen-data",
        "--hierarchy", "six_node",
        "--out-scores", out_scores,
        "--out-labels", out_labels,
        "--height", "8",
        "--width", "8",
        "--blobs", "6",
        "--flip-rate", "0.3",
        "--seed", "11",
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["violation_rate"] > 0.0
    values, height, width = formats.load_scores(out_scores, "binary")
    assert values.shape == (6, 64) and (height, width) == (8, 8)
    assert set(np.unique(values)) <= {0.0, 1.0}
    leaf_ids, _, _ = formats.load_labels(out_labels, "binary")
    assert leaf_ids.shape == (64,)


def test_gen_data_feeds_loss_and_infer(capsys, tmp_path):
    out_scores = str(tmp_path / "scores.bin")
    out_labels = str(tmp_path / "labels.bin")
    run_cli(
        capsys,
        "gen-data",
        "--hierarchy", "six_node",
        "--out-scores", out_scores,
        "--out-labels", out_labels,
        "--height", "6",
        "--width", "6",
        "--blobs", "4",
    )
    code, out, _ = run_cli(
        capsys,
        "loss",
        "--hierarchy", "six_node",
        "--scores", out_scores,
        "--labels", out_labels,
    )
    assert code == 0
    assert parse_json(out)["total"] > 0.0
    code, out, _ = run_cli(
        capsys,
        "infer",
        "--hierarchy", "six_node",
        "--scores", out_scores,
        "--labels", out_labels,
        "--iters", "2",
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["leaf_accuracy"] is not None


def test_train_demo_tiny(capsys, tmp_path):
    history_path = str(tmp_path / "history.jsonl")
    code, out, _ = run_cli(
        capsys,
        "train-demo",
        "--hierarchy", "six_node",
        "--height", "8",
        "--width", "8",
        "--feature-dim", "8",
        "--sigma", "0.5",
        "--blobs", "5",
        "--epochs", "2",
        "--batch-size", "16",
        "--lr", "1.0",
        "--seed", "3",
        "--history-out", history_path,
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["hierarchy"] == "six_node"
    assert doc["epochs"] == 2
    assert doc["losses"] == "cde"
    assert doc["final_epoch"]["epoch"] == 1
    lines = [json.loads(line) for line in open(history_path)]
    assert len(lines) == 2
    assert {"l_c", "l_d", "l_e", "l_bce", "total", "violation_rate"} <= set(lines[0])


def test_train_demo_losses_none(capsys):
    code, out, _ = run_cli(
        capsys,
        "train-demo",
        "--hierarchy", "six_node",
        "--height", "6",
        "--width", "6",
        "--feature-dim", "4",
        "--sigma", "0.5",
        "--blobs", "4",
        "--epochs", "1",
        "--batch-size", "12",
        "--losses", "none",
    )
    assert code == 0
    doc = parse_json(out)
    assert doc["losses"] == "none"
    assert doc["final_epoch"]["l_c"] == 0.0


def test_train_demo_config_file(capsys, tmp_path):
    cfg = RunConfig()
    doc = cfg.to_dict()
    doc["hierarchy"] = "six_node"
    doc["dataset"].update(
        {"height": 6, "width": 6, "feature_dim": 4, "num_blobs": 4, "noise_sigma": 0.5}
    )
    doc["train"].update({"epochs": 1, "batch_size": 12})
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "train-demo", "--config", str(path))
    assert code == 0
    parsed = parse_json(out)
    assert parsed["hierarchy"] == "six_node"
    assert parsed["epochs"] == 1


def test_run_config_round_trip():
    cfg = RunConfig(seed=9, fmt="csv")
    clone = RunConfig.from_dict(cfg.to_dict())
    assert clone.seed == 9
    assert clone.fmt == "csv"
    assert clone.fuzzy == cfg.fuzzy
    assert clone.inference == cfg.inference
    assert clone.train == cfg.train
    assert clone.dataset == cfg.dataset
    with pytest.raises(ValueError):
        RunConfig.from_dict({"bogus_key": 1})


def test_unknown_losses_flag(capsys, tmp_path):
    scores_path, labels_path = _write_one_hot_case(tmp_path)
    code, _, err = run_cli(
        capsys,
        "loss",
        "--hierarchy", "six_node",
        "--scores", scores_path,
        "--labels", labels_path,
        "--losses", "c,x",
    )
    assert code == 1
    assert "error: ValueError" in err


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hierlogic.cli", "validate", "--hierarchy", "six_node"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["num_nodes"] == 6
