"""Logic-induced inference: message passing over the tree, then decoding.

Each iteration, every node exchanges rule-satisfaction messages with its
tree neighbors — upward with its parent (composition), downward with its
children (decomposition), sideways with its level peers (exclusion) — and
adds the received messages, each weighted by the sender's score, to its own.
Scores are then softmax-normalized within each level.  All messages in an
iteration are computed from the previous iteration's scores (synchronous
update).  After the configured number of iterations, the top-scoring
root-to-leaf path per pixel is decoded, which is hierarchy-consistent by
construction.

Two engines implement the same semantics: ``reference`` is a direct
per-node transcription used as the test oracle, ``matrix`` is the
vectorized fast path running on the active kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hierarchy import Hierarchy
from .rules import ScoreMap

ENGINES = ("reference", "matrix")

# The exclusion term has two published aggregation styles that disagree:
# "eq17" weights each received message by its sender's score; "pseudocode"
# scales the receiver's own outgoing message by the mean peer score.
E_VARIANTS = ("eq17", "pseudocode")
_E_CODES = {"eq17": 0, "pseudocode": 1}


@dataclass(frozen=True)
class InferenceConfig:
    """Iteration count and implementation choices for message passing."""

    iterations: int = 2
    engine: str = "matrix"
    e_variant: str = "eq17"

    def __post_init__(self):
        if not isinstance(self.iterations, int) or self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {self.engine!r}")
        if self.e_variant not in E_VARIANTS:
            raise ValueError(
                f"e_variant must be one of {E_VARIANTS}, got {self.e_variant!r}"
            )


@dataclass(frozen=True)
class PathPrediction:
    """Decoded root-to-leaf path per pixel.

    ``nodes`` is int64 ``[L, K]``: row ``l`` holds the level-(l+1) node of
    each pixel's path (leaves in row 0).  ``score`` is the summed node
    score along the path.
    """

    nodes: np.ndarray
    score: np.ndarray
    hierarchy: Hierarchy

    @property
    def leaf_ids(self) -> np.ndarray:
        return self.nodes[0]

    @property
    def num_pixels(self) -> int:
        return self.nodes.shape[1]


def c_message(s: ScoreMap, v: int) -> np.ndarray | None:
    """Upward message from node v about its parent, per pixel.

    ``1 - s[v] + s[v] * s[parent]``: the satisfaction of "v implies its
    parent", in [0, 1].  Returns None for roots (no parent to speak of).
    """
    node = s.hierarchy.nodes[v]
    if node.parent is None:
        return None
    vals = s.values
    return 1.0 - vals[v] + vals[v] * vals[node.parent]


def d_message(s: ScoreMap, v: int) -> np.ndarray | None:
    """Downward message from node v about its children, per pixel.

    ``1 - s[v] + s[v] * max over children``: the satisfaction of "v implies
    some child", in [0, 1].  Returns None for leaves.
    """
    node = s.hierarchy.nodes[v]
    if not node.children:
        return None
    vals = s.values
    best = vals[list(node.children)].max(axis=0)
    return 1.0 - vals[v] + vals[v] * best


def e_message(s: ScoreMap, v: int) -> np.ndarray | None:
    """Sideways message from node v about its level peers, per pixel.

    ``-(1 - mean over peers of s[v] * s[peer])``: the negated degree to
    which "v excludes its peers" fails, in [-1, 0].  Returns None when v
    has no peers.
    """
    node = s.hierarchy.nodes[v]
    if not node.peers:
        return None
    vals = s.values
    co = vals[v] * vals[list(node.peers)]
    return -(1.0 - co.mean(axis=0))


def _step_reference(values: np.ndarray, h: Hierarchy, e_variant: str) -> np.ndarray:
    """One message-passing step, written as the naive per-node loops."""
    s = ScoreMap(values, h)
    size, k = values.shape
    e_msgs = [e_message(s, v) for v in range(size)]
    raw = values.copy()
    for v in range(size):
        node = h.nodes[v]
        if node.children:
            csum = np.zeros(k)
            for c in node.children:
                csum += values[c] * c_message(s, c)
            raw[v] += csum / len(node.children)
        if node.parent is not None:
            raw[v] += values[node.parent] * d_message(s, node.parent)
        if node.peers:
            m = len(node.peers)
            if e_variant == "eq17":
                esum = np.zeros(k)
                for a in node.peers:
                    esum += values[a] * e_msgs[a]
                raw[v] += esum / m
            else:
                mean_peer = np.zeros(k)
                for a in node.peers:
                    mean_peer += values[a]
                raw[v] += e_msgs[v] * mean_peer / m
    out = np.empty_like(raw)
    for lv in range(1, h.num_levels + 1):
        ids = h.level_ids(lv)
        blk = raw[ids]
        e = np.exp(blk - blk.max(axis=0))
        out[ids] = e / e.sum(axis=0)
    return out


def _step_matrix(values: np.ndarray, h: Hierarchy, e_variant: str, backend) -> np.ndarray:
    raw = backend.raw_update(
        values,
        h.parent_index,
        h.nonleaf_ids,
        h.child_order,
        h.child_starts,
        h.child_counts,
        h.parent_rank,
        h.level_starts,
        h.level_sizes,
        _E_CODES[e_variant],
    )
    return backend.level_softmax(raw, h.level_starts, h.level_sizes)


def message_passing_step(
    s: ScoreMap, h: Hierarchy, cfg: InferenceConfig = InferenceConfig()
) -> ScoreMap:
    """One synchronous message exchange plus per-level softmax."""
    if s.hierarchy is not h and s.hierarchy.size != h.size:
        raise ValueError("score map does not match the hierarchy")
    if cfg.engine == "reference":
        out = _step_reference(s.values, h, cfg.e_variant)
    else:
        out = _step_matrix(s.values, h, cfg.e_variant, _kernels.get_backend())
    return ScoreMap(out, h)


def run_inference(
    s: ScoreMap, h: Hierarchy, cfg: InferenceConfig = InferenceConfig()
) -> ScoreMap:
    """Apply ``cfg.iterations`` message-passing steps.

    With zero iterations the scores are only level-softmaxed, so the output
    is always level-stochastic regardless of R.
    """
    if cfg.iterations == 0:
        backend = _kernels.get_backend()
        if cfg.engine == "reference":
            out = np.empty_like(s.values)
            for lv in range(1, h.num_levels + 1):
                ids = h.level_ids(lv)
                blk = s.values[ids]
                e = np.exp(blk - blk.max(axis=0))
                out[ids] = e / e.sum(axis=0)
            return ScoreMap(out, h)
        return ScoreMap(
            backend.level_softmax(s.values, h.level_starts, h.level_sizes), h
        )
    cur = s
    for _ in range(cfg.iterations):
        cur = message_passing_step(cur, h, cfg)
    return cur


def decode_path(s: ScoreMap, h: Hierarchy) -> PathPrediction:
    """Top-scoring root-to-leaf path per pixel, ties to the lowest leaf id.

    Dynamic programming over cumulative top-down sums, O(|V|) per pixel: a
    path is uniquely determined by its leaf, and each node's best-path sum
    is its own score plus its parent's.
    """
    backend = _kernels.get_backend()
    leaf, score = backend.decode(
        s.values, h.parent_index, h.level_starts, h.level_sizes
    )
    nodes = np.empty((h.num_levels, s.num_pixels), dtype=np.int64)
    cur = leaf
    for lv in range(h.num_levels):
        nodes[lv] = cur
        cur = h.parent_index[cur]
    return PathPrediction(nodes=nodes, score=score, hierarchy=h)
