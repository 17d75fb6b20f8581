"""Pure-NumPy kernels for the inference hot paths.

Mirrors the compiled backend's interface exactly; used whenever the
extension is unavailable or deselected.  All functions take the flat index
arrays a Hierarchy precomputes and operate on float64 ``[|V|, K]`` score
tensors.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"

E_PER_SOURCE = 0  # each received message weighted by its sender's score
E_POOLED = 1  # receiver's own message scaled by the mean peer score


def raw_update(
    values: np.ndarray,
    parent_index: np.ndarray,
    nonleaf_ids: np.ndarray,
    child_order: np.ndarray,
    child_starts: np.ndarray,
    child_counts: np.ndarray,
    parent_rank: np.ndarray,
    level_starts: np.ndarray,
    level_sizes: np.ndarray,
    e_variant: int,
) -> np.ndarray:
    """Additive message update, before the level softmax.

    Every node receives: from each child c, ``s[c] * (1 - s[c] + s[c]s[v])``
    averaged over children; from its parent p, ``s[p] * (1 - s[p] +
    s[p] * max of p's children)``; and from its level peers the exclusion
    term, aggregated per-source or pooled depending on ``e_variant``.
    """
    raw = values.copy()
    if nonleaf_ids.size:
        sc = values[child_order]
        sp = values[parent_index[child_order]]
        contrib = sc * (1.0 - sc + sc * sp)
        sums = np.add.reduceat(contrib, child_starts[:-1], axis=0)
        raw[nonleaf_ids] += sums / child_counts[:, None]

        maxc = np.maximum.reduceat(sc, child_starts[:-1], axis=0)
        sv = values[nonleaf_ids]
        down = sv * (1.0 - sv + sv * maxc)
        raw[child_order] += down[parent_rank]

    for lv in range(level_starts.size):
        start = int(level_starts[lv])
        n = int(level_sizes[lv])
        if n < 2:
            continue
        blk = values[start : start + n]
        m = float(n - 1)
        peer_sum = blk.sum(axis=0) - blk
        msg = -(1.0 - blk * peer_sum / m)
        if e_variant == E_PER_SOURCE:
            total = (blk * msg).sum(axis=0)
            raw[start : start + n] += (total - blk * msg) / m
        else:
            raw[start : start + n] += msg * (peer_sum / m)
    return raw


def level_softmax(
    values: np.ndarray, level_starts: np.ndarray, level_sizes: np.ndarray
) -> np.ndarray:
    """Softmax over each level block, per pixel (max-subtracted)."""
    out = np.empty_like(values)
    for lv in range(level_starts.size):
        start = int(level_starts[lv])
        n = int(level_sizes[lv])
        blk = values[start : start + n]
        e = np.exp(blk - blk.max(axis=0))
        out[start : start + n] = e / e.sum(axis=0)
    return out


def decode(
    values: np.ndarray,
    parent_index: np.ndarray,
    level_starts: np.ndarray,
    level_sizes: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Best root-to-leaf path per pixel.

    Accumulates top-down path sums (each node's cumulative score is its own
    plus its parent's cumulative), then argmaxes over leaves; a path is
    uniquely identified by its leaf.  Ties resolve to the lowest leaf id.
    Returns ``(leaf_ids [K] int64, path_scores [K] float64)``.
    """
    num_levels = level_starts.size
    cum = np.empty_like(values)
    top = int(level_starts[num_levels - 1])
    cum[top:] = values[top:]
    for lv in range(num_levels - 2, -1, -1):
        start = int(level_starts[lv])
        end = start + int(level_sizes[lv])
        cum[start:end] = values[start:end] + cum[parent_index[start:end]]
    n1 = int(level_sizes[0])
    leaf = np.argmax(cum[:n1], axis=0).astype(np.int64)
    score = cum[leaf, np.arange(values.shape[1])]
    return leaf, score
