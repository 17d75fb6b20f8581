"""Benchmark the inference hot paths across engines and kernel backends.

Compares three ways of running the same message-passing update:

* the per-node reference engine (readable oracle, pure Python loops),
* the matrix engine on the NumPy kernel backend,
* the matrix engine on the compiled kernel backend (when importable).

Each row reports per-iteration wall time for the raw update + per-level
softmax, plus the decode pass, at a fixed pixel count.  Run from the repo
root:

    python3 benchmarks/bench_backends.py --pixels 65536 --iters 2
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hierlogic import InferenceConfig, load_fixture, run_inference
from hierlogic._kernels import available_backends, get_backend
from hierlogic.rules import ScoreMap


def time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_matrix(backend_name: str, s: ScoreMap, h, iters: int, repeats: int):
    backend = get_backend(backend_name)

    def step_once():
        vals = s.values
        for _ in range(iters):
            raw = backend.raw_update(
                vals,
                h.parent_index,
                h.nonleaf_ids,
                h.child_order,
                h.child_starts,
                h.child_counts,
                h.parent_rank,
                h.level_starts,
                h.level_sizes,
                0,
            )
            vals = backend.level_softmax(raw, h.level_starts, h.level_sizes)
        return vals

    t_steps = time_call(step_once, repeats)
    final = step_once()

    def decode_once():
        backend.decode(final, h.parent_index, h.level_starts, h.level_sizes)

    t_decode = time_call(decode_once, repeats)
    return t_steps, t_decode


def bench_reference(s: ScoreMap, h, iters: int, repeats: int):
    cfg = InferenceConfig(iterations=iters, engine="reference")

    def run():
        run_inference(s, h, cfg)

    return time_call(run, repeats)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--hierarchy", default="mapillary_vistas_2")
    parser.add_argument("--pixels", type=int, default=65536)
    parser.add_argument("--ref-pixels", type=int, default=4096,
                        help="pixel count for the slow reference engine row")
    parser.add_argument("--iters", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    h = load_fixture(args.hierarchy)
    rng = np.random.default_rng(args.seed)
    s_big = ScoreMap(rng.uniform(0.01, 0.99, size=(h.size, args.pixels)), h)
    s_small = ScoreMap(s_big.values[:, : args.ref_pixels].copy(), h)

    print(f"hierarchy={h.name} nodes={h.size} iters={args.iters} "
          f"repeats={args.repeats} (best-of)")

    t_ref = bench_reference(s_small, h, args.iters, args.repeats)
    per_px_ref = t_ref / args.ref_pixels
    print(f"{'engine/backend':<22} {'pixels':>8} {'steps+softmax':>14} "
          f"{'decode':>9} {'us/pixel':>9}")
    print(f"{'reference (loops)':<22} {args.ref_pixels:>8} {t_ref*1e3:>11.1f} ms "
          f"{'-':>9} {per_px_ref*1e6:>9.2f}")

    rows = {}
    for name in available_backends():
        t_steps, t_decode = bench_matrix(name, s_big, h, args.iters, args.repeats)
        rows[name] = t_steps + t_decode
        per_px = (t_steps + t_decode) / args.pixels
        print(f"{'matrix/' + name:<22} {args.pixels:>8} {t_steps*1e3:>11.1f} ms "
              f"{t_decode*1e3:>6.1f} ms {per_px*1e6:>9.2f}")

    if "native" in rows:
        print(f"\nnative speedup over numpy: {rows['numpy'] / rows['native']:.2f}x")
    print(f"matrix/numpy speedup over reference (per pixel): "
          f"{per_px_ref / (rows['numpy'] / args.pixels):.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
