"""Shared test utilities: random tree generation, score sampling, FD oracle."""

from __future__ import annotations

import contextlib
import io
import json
import os

import numpy as np

from hierlogic import ScoreMap, ancestor_closure, build_hierarchy


def make_random_hierarchy(rng, max_levels=4, max_nodes=50, name="random"):
    """Random proper tree: every non-leaf has at least one child.

    Record order is shuffled so canonical reordering gets exercised.
    """
    levels = int(rng.integers(1, max_levels + 1))
    # Sizes from the root level down; each level at least as wide as the one
    # above so every parent can receive a child.
    sizes = [int(rng.integers(1, 3))]
    budget = max_nodes - sizes[0]
    for _ in range(levels - 1):
        prev = sizes[-1]
        hi = min(3 * prev, budget)
        if hi < prev:
            break
        nxt = int(rng.integers(prev, hi + 1))
        sizes.append(nxt)
        budget -= nxt
    levels = len(sizes)

    records = []
    prev_names: list[str] = []
    for depth, n in enumerate(sizes):
        level = levels - depth
        names = [f"L{level}N{i}" for i in range(n)]
        if depth == 0:
            records.extend({"name": nm, "level": level, "parent": None} for nm in names)
        else:
            # First len(prev_names) nodes map one-to-one onto parents, the
            # rest pick a random parent.
            for i, nm in enumerate(names):
                if i < len(prev_names):
                    parent = prev_names[i]
                else:
                    parent = prev_names[int(rng.integers(len(prev_names)))]
                records.append({"name": nm, "level": level, "parent": parent})
        prev_names = names
    rng.shuffle(records)
    return build_hierarchy(records, name=name)


def random_scores(rng, h, k, lo=0.01, hi=0.99) -> ScoreMap:
    return ScoreMap(rng.uniform(lo, hi, size=(h.size, k)), h)


def closure_scores(h, leaf_ids) -> ScoreMap:
    """Exact one-hot ancestor-closure columns for the given leaves."""
    cols = np.stack([ancestor_closure(h, int(l)) for l in leaf_ids], axis=1)
    return ScoreMap(cols, h)


def smooth_scores(rng, h, k, min_gap=1e-3, max_tries=100) -> ScoreMap:
    """Scores safe for finite differencing the losses.

    Values stay in [0.05, 0.95] (far from the BCE clamp) and, for every
    node with two or more children, the top two child scores differ by at
    least ``min_gap`` at every pixel so the decomposition max has a locally
    unique argmax.
    """
    for _ in range(max_tries):
        vals = rng.uniform(0.05, 0.95, size=(h.size, k))
        ok = True
        for node in h.nodes:
            if len(node.children) < 2:
                continue
            blk = np.sort(vals[list(node.children)], axis=0)
            if (blk[-1] - blk[-2] < min_gap).any():
                ok = False
                break
        if ok:
            return ScoreMap(vals, h)
    raise RuntimeError("could not sample tie-free scores")


def fd_gradient(fn, values: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central finite differences of a scalar function of the score tensor."""
    vals = np.array(values, dtype=np.float64)
    grad = np.zeros_like(vals)
    it = np.nditer(vals, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = vals[idx]
        vals[idx] = orig + step
        f_plus = fn(vals.copy())
        vals[idx] = orig - step
        f_minus = fn(vals.copy())
        vals[idx] = orig
        grad[idx] = (f_plus - f_minus) / (2.0 * step)
    return grad


def rel_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    """Max absolute difference scaled by the reference gradient magnitude."""
    denom = max(float(np.max(np.abs(reference))), 1e-8)
    return float(np.max(np.abs(analytic - reference))) / denom


def json_skeleton(obj):
    """Structural schema of a JSON document: types, not values.

    Dicts recurse per key; lists collapse to the element schema of their
    first entry (empty lists stay empty).  Scalars map to their JSON type
    name, so two reports with identical layout produce identical skeletons.
    """
    if isinstance(obj, dict):
        return {key: json_skeleton(val) for key, val in sorted(obj.items())}
    if isinstance(obj, list):
        return ["*", json_skeleton(obj[0])] if obj else []
    if isinstance(obj, bool):
        return "bool"
    if isinstance(obj, int):
        return "int"
    if isinstance(obj, float):
        return "float"
    if isinstance(obj, str):
        return "str"
    if obj is None:
        return "null"
    raise TypeError(f"not a JSON value: {type(obj)!r}")


def run_cli_json(argv) -> dict:
    """Run the CLI in-process and parse its JSON report from stdout."""
    from hierlogic.cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(list(argv))
    if code != 0:
        raise AssertionError(f"CLI exited {code} for argv {argv!r}")
    return json.loads(buf.getvalue())


def golden_cli_runs(work_dir):
    """The pinned CLI invocations whose JSON report schemas are golden.

    Materializes the input files under ``work_dir`` and returns a list of
    (report_name, argv) pairs, one per subcommand.
    """
    from hierlogic import formats, load_fixture

    h = load_fixture("six_node")
    leaf_ids = np.array([0, 1, 2, 0], dtype=np.uint32)
    cols = np.stack([ancestor_closure(h, int(i)) for i in leaf_ids], axis=1)
    scores_path = os.path.join(str(work_dir), "golden_scores.bin")
    labels_path = os.path.join(str(work_dir), "golden_labels.bin")
    formats.save_scores(scores_path, cols, 2, 2, "binary")
    formats.save_labels(labels_path, leaf_ids, 2, 2, "binary")
    gen_scores = os.path.join(str(work_dir), "gen_scores.bin")
    gen_labels = os.path.join(str(work_dir), "gen_labels.bin")
    return [
        ("validate", ["validate", "--hierarchy", "six_node"]),
        ("loss", ["loss", "--hierarchy", "six_node",
                  "--scores", scores_path, "--labels", labels_path]),
        ("infer", ["infer", "--hierarchy", "six_node",
                   "--scores", scores_path, "--labels", labels_path,
                   "--iters", "2"]),
        ("gen_data", ["gen-data", "--hierarchy", "six_node",
                      "--out-scores", gen_scores, "--out-labels", gen_labels,
                      "--height", "6", "--width", "6", "--blobs", "4",
                      "--seed", "0"]),
        ("train_demo", ["train-demo", "--hierarchy", "six_node",
                        "--height", "6", "--width", "6", "--feature-dim", "4",
                        "--sigma", "0.5", "--blobs", "4", "--epochs", "1",
                        "--batch-size", "12", "--lr", "1.0", "--seed", "0"]),
    ]
