"""Relational rules over a hierarchy, their relaxed losses, and gradients.

Three rule families are grounded from the tree:

- composition (C): an active node implies its parent;
- decomposition (D): an active non-leaf implies at least one child;
- exclusion (E): an active node suppresses its peers.

Each family's violation is scored per node with a soft EXISTS over pixels of
a per-pixel residual in [0, 1], then averaged over the family.  The total
training objective is ``alpha * (L_C + L_D + L_E) + BCE``.  All losses return
analytic gradients with respect to the scores; the gradient of the soft
EXISTS ``A = (mean_k r_k^q)^(1/q)`` with respect to one residual is
``S^(1/q - 1) * r_k^(q-1) / K`` with ``S`` the mean power, clamped away from
zero so the fractional power stays finite.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fuzzy import FuzzyConfig
from .hierarchy import Hierarchy

PEER_SCOPES = ("level", "siblings")
LOSS_NAMES = ("c", "d", "e")


@dataclass(frozen=True)
class RuleSet:
    """Grounded rules over node ids.

    ``c_rules``: (child, parent) pairs, one per non-root node.
    ``d_rules``: (parent, children) pairs, one per non-leaf node.
    ``e_rules``: (node, peers) pairs for every node that has peers under the
    chosen scope.  Peer groups always form disjoint cliques.
    """

    c_rules: tuple[tuple[int, int], ...]
    d_rules: tuple[tuple[int, tuple[int, ...]], ...]
    e_rules: tuple[tuple[int, tuple[int, ...]], ...]
    peer_scope: str = "level"


def derive_rules(h: Hierarchy, peer_scope: str = "level") -> RuleSet:
    """Ground the three rule families from the tree structure.

    ``peer_scope`` picks who counts as a peer for exclusion: every other
    node on the same level (``"level"``), or only nodes sharing the same
    parent (``"siblings"``, where roots count as mutual siblings).
    """
    if peer_scope not in PEER_SCOPES:
        raise ValueError(f"peer_scope must be one of {PEER_SCOPES}, got {peer_scope!r}")
    c_rules = tuple((n.id, n.parent) for n in h.nodes if n.parent is not None)
    d_rules = tuple((n.id, n.children) for n in h.nodes if n.children)
    e_rules = []
    if peer_scope == "level":
        for n in h.nodes:
            if n.peers:
                e_rules.append((n.id, n.peers))
    else:
        roots = tuple(int(r) for r in h.root_ids())
        for n in h.nodes:
            group = roots if n.parent is None else h.nodes[n.parent].children
            sibs = tuple(s for s in group if s != n.id)
            if sibs:
                e_rules.append((n.id, sibs))
    return RuleSet(c_rules, d_rules, tuple(e_rules), peer_scope)


class ScoreMap:
    """Per-node, per-pixel truth values: float64 ``[|V|, K]`` in [0, 1]."""

    __slots__ = ("hierarchy", "values")

    def __init__(self, values, hierarchy: Hierarchy):
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"scores must be 2-D, got shape {arr.shape}")
        if arr.shape[0] != hierarchy.size:
            raise ValueError(
                f"score rows ({arr.shape[0]}) != hierarchy size ({hierarchy.size})"
            )
        if arr.shape[1] < 1:
            raise ValueError("empty pixel set")
        if not np.isfinite(arr).all():
            raise ValueError("scores contain non-finite values")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(f"scores outside [0, 1]: range [{lo}, {hi}]")
        self.values = arr
        self.hierarchy = hierarchy

    @property
    def num_pixels(self) -> int:
        return self.values.shape[1]


class LabelMap:
    """Ground-truth leaf id per pixel, with the derived ancestor closure.

    ``y`` is the multi-hot float tensor ``[|V|, K]``: for each pixel, the
    ground-truth leaf and all its ancestors are 1, everything else 0.
    """

    __slots__ = ("hierarchy", "leaf_ids", "_y")

    def __init__(self, leaf_ids, hierarchy: Hierarchy):
        ids = np.ascontiguousarray(leaf_ids, dtype=np.int64).ravel()
        if ids.size < 1:
            raise ValueError("empty label set")
        lo, hi = int(ids.min()), int(ids.max())
        if lo < 0 or hi >= hierarchy.num_leaves:
            raise ValueError(
                f"leaf id outside 0..{hierarchy.num_leaves - 1}: range [{lo}, {hi}]"
            )
        self.leaf_ids = ids
        self.hierarchy = hierarchy
        self._y = None

    @property
    def num_pixels(self) -> int:
        return self.leaf_ids.size

    @property
    def y(self) -> np.ndarray:
        if self._y is None:
            h = self.hierarchy
            k = self.leaf_ids.size
            y = np.zeros((h.size, k), dtype=np.float64)
            pix = np.arange(k)
            cur = self.leaf_ids
            for _ in range(h.num_levels):
                y[cur, pix] = 1.0
                cur = h.parent_index[cur]
            self._y = y
        return self._y

    def path_nodes(self) -> np.ndarray:
        """Ground-truth node id per level: int64 ``[L, K]``, leaves first."""
        h = self.hierarchy
        out = np.empty((h.num_levels, self.leaf_ids.size), dtype=np.int64)
        cur = self.leaf_ids
        for lv in range(h.num_levels):
            out[lv] = cur
            cur = h.parent_index[cur]
        return out

    def take(self, indices) -> "LabelMap":
        return LabelMap(self.leaf_ids[indices], self.hierarchy)


@dataclass
class LossReport:
    """All loss components, per-node satisfaction degrees, and the gradient.

    ``total = alpha * (l_c + l_d + l_e) + l_bce``.  The satisfaction arrays
    hold, per node, how well the node honors its rule over the whole pixel
    set (1 = fully satisfied; nodes without a rule report 1).  ``grad`` is
    d(total)/d(scores), shape ``[|V|, K]``.
    """

    l_c: float
    l_d: float
    l_e: float
    l_bce: float
    total: float
    g_c: np.ndarray
    g_d: np.ndarray
    g_e: np.ndarray
    grad: np.ndarray
    alpha: float

    def to_dict(self) -> dict:
        return {
            "l_c": self.l_c,
            "l_d": self.l_d,
            "l_e": self.l_e,
            "l_bce": self.l_bce,
            "alpha": self.alpha,
            "total": self.total,
            "satisfaction": {
                "c": [float(x) for x in self.g_c],
                "d": [float(x) for x in self.g_d],
                "e": [float(x) for x in self.g_e],
            },
            "grad_max_abs": float(np.max(np.abs(self.grad))),
            "grad_norm": float(np.linalg.norm(self.grad)),
        }


# -- soft-EXISTS machinery shared by the three relational losses ----------
#
# Every family reduces a per-rule residual tensor r [n_rules, K] the same
# way: S = mean_k r^q, A = S^(1/q), loss = mean over rules of A.  The chunk
# helpers compute partial power sums and gradient slices over a pixel range
# [lo, hi) so the total loss can split the pixel axis across threads and
# combine partials in fixed order.  ``out`` passed to a grad helper is the
# gradient slice for that range (width hi - lo).


def _exists_from_powsum(powsum: np.ndarray, num_pixels: int, q: int) -> np.ndarray:
    return (powsum / num_pixels) ** (1.0 / q)


def _grad_coef(powsum: np.ndarray, num_pixels: int, cfg: FuzzyConfig) -> np.ndarray:
    """Per-rule factor of dA/dr: ``S^(1/q - 1) / K``, with S clamped."""
    s_mean = np.maximum(powsum / num_pixels, cfg.eps**cfg.q)
    return s_mean ** (1.0 / cfg.q - 1.0) / num_pixels


class _CPlan:
    def __init__(self, rules: RuleSet):
        self.ids = np.array([v for v, _ in rules.c_rules], dtype=np.int64)
        self.parents = np.array([p for _, p in rules.c_rules], dtype=np.int64)


def _c_residual(vals, plan, lo, hi):
    sv = vals[plan.ids, lo:hi]
    sp = vals[plan.parents, lo:hi]
    return sv, sp, sv * (1.0 - sp)


def _c_powsum(vals, plan, lo, hi, q):
    _, _, r = _c_residual(vals, plan, lo, hi)
    return (r**q).sum(axis=1)


def _c_grad_slice(out, vals, plan, lo, hi, q, coef):
    sv, sp, r = _c_residual(vals, plan, lo, hi)
    dr = coef[:, None] * r ** (q - 1)
    out[plan.ids] += dr * (1.0 - sp)
    np.add.at(out, plan.parents, -dr * sv)


class _DPlan:
    def __init__(self, rules: RuleSet):
        self.ids = np.array([v for v, _ in rules.d_rules], dtype=np.int64)
        self.children = [np.array(ch, dtype=np.int64) for _, ch in rules.d_rules]


def _d_residual(vals, plan, lo, hi):
    """Residuals plus the argmax child per (rule, pixel); ties go low-id."""
    k = hi - lo
    n = plan.ids.size
    sv = vals[plan.ids, lo:hi]
    m = np.empty((n, k))
    amax = np.empty((n, k), dtype=np.int64)
    pix = np.arange(k)
    for i, ch in enumerate(plan.children):
        sub = vals[ch, lo:hi]
        j = np.argmax(sub, axis=0)
        m[i] = sub[j, pix]
        amax[i] = ch[j]
    return sv, m, amax, sv * (1.0 - m)


def _d_powsum(vals, plan, lo, hi, q):
    _, _, _, r = _d_residual(vals, plan, lo, hi)
    return (r**q).sum(axis=1)


def _d_grad_slice(out, vals, plan, lo, hi, q, coef):
    sv, m, amax, r = _d_residual(vals, plan, lo, hi)
    dr = coef[:, None] * r ** (q - 1)
    pix = np.arange(hi - lo)
    # The max is locally the argmax child's score; a child belongs to
    # exactly one rule, so these scatters never collide across rows.
    for i in range(plan.ids.size):
        out[amax[i], pix] += -dr[i] * sv[i]
    out[plan.ids] += dr * (1.0 - m)


class _EPlan:
    """Exclusion cliques; every member must carry the same peer group."""

    def __init__(self, rules: RuleSet):
        cliques: dict[tuple[int, ...], list[int]] = {}
        for v, peers in rules.e_rules:
            key = tuple(sorted((v, *peers)))
            cliques.setdefault(key, []).append(v)
        for key, members in cliques.items():
            if sorted(members) != list(key):
                raise ValueError("exclusion rules do not form disjoint cliques")
        self.groups = [np.array(key, dtype=np.int64) for key in cliques]


def _e_pair_powsums(vals, plan, lo, hi, q):
    """Per clique, the matrix of pairwise power sums sum_k (s[v]s[a])^q."""
    out = []
    for idx in plan.groups:
        sq = vals[idx, lo:hi] ** q
        out.append(sq @ sq.T)
    return out


def _e_grad_slice(out, vals, plan, lo, hi, q, e1_mats, total_size):
    for idx, e1 in zip(plan.groups, e1_mats):
        m = idx.size - 1
        sg = vals[idx, lo:hi]
        w = 2.0 / (total_size * m)
        out[idx] += w * sg ** (q - 1) * (e1 @ sg**q)


def c_loss(
    s: ScoreMap, rules: RuleSet, cfg: FuzzyConfig
) -> tuple[float, np.ndarray, np.ndarray]:
    """Composition loss: every active node should activate its parent.

    The per-pixel residual of rule (v, p) is ``s[v] * (1 - s[p])``, i.e. the
    degree to which v holds while p does not.  Returns ``(value,
    satisfaction[|V|], grad[|V|, K])``; satisfaction is 1 minus the soft
    EXISTS of the residual over pixels, and roots report 1.
    """
    vals = s.values
    size, k = vals.shape
    g = np.ones(size)
    grad = np.zeros_like(vals)
    if not rules.c_rules:
        return 0.0, g, grad
    plan = _CPlan(rules)
    powsum = _c_powsum(vals, plan, 0, k, cfg.q)
    a = _exists_from_powsum(powsum, k, cfg.q)
    g[plan.ids] = 1.0 - a
    coef = _grad_coef(powsum, k, cfg) / plan.ids.size
    _c_grad_slice(grad, vals, plan, 0, k, cfg.q, coef)
    return float(a.mean()), g, grad


def d_loss(
    s: ScoreMap, rules: RuleSet, cfg: FuzzyConfig
) -> tuple[float, np.ndarray, np.ndarray]:
    """Decomposition loss: every active non-leaf should activate a child.

    Residual of rule (v, children) is ``s[v] * (1 - max_c s[c])``.  The max
    is subdifferentiated through the argmax child, lowest id on ties.
    Returns ``(value, satisfaction, grad)``; leaves report satisfaction 1.
    """
    vals = s.values
    size, k = vals.shape
    g = np.ones(size)
    grad = np.zeros_like(vals)
    if not rules.d_rules:
        return 0.0, g, grad
    plan = _DPlan(rules)
    powsum = _d_powsum(vals, plan, 0, k, cfg.q)
    a = _exists_from_powsum(powsum, k, cfg.q)
    g[plan.ids] = 1.0 - a
    coef = _grad_coef(powsum, k, cfg) / plan.ids.size
    _d_grad_slice(grad, vals, plan, 0, k, cfg.q, coef)
    return float(a.mean()), g, grad


def e_loss(
    s: ScoreMap, rules: RuleSet, cfg: FuzzyConfig
) -> tuple[float, np.ndarray, np.ndarray]:
    """Exclusion loss: an active node should suppress each of its peers.

    For node v with peers A_v, the violation is the mean over peers of the
    soft EXISTS of ``s[v] * s[a]`` over pixels.  The value is normalized by
    the full node count, so peerless nodes contribute zero violation but
    still dilute; they report satisfaction 1.
    """
    vals = s.values
    size, k = vals.shape
    g = np.ones(size)
    grad = np.zeros_like(vals)
    if not rules.e_rules:
        return 0.0, g, grad
    plan = _EPlan(rules)
    pair_pow = _e_pair_powsums(vals, plan, 0, k, cfg.q)
    loss_sum, e1_mats = _e_finalize(plan, pair_pow, k, cfg, g)
    _e_grad_slice(grad, vals, plan, 0, k, cfg.q, e1_mats, size)
    return loss_sum / size, g, grad


def _e_finalize(plan, pair_pow, num_pixels, cfg, g_out):
    """Turn combined pair power sums into violations and gradient factors.

    Returns the summed violation and, per clique, the matrix
    ``E1[v, a] = S_va^(1/q - 1) / K`` (clamped, zero diagonal) that scales
    the gradient of each pairwise soft EXISTS.
    """
    loss_sum = 0.0
    e1_mats = []
    for idx, p2 in zip(plan.groups, pair_pow):
        m = idx.size - 1
        b = (p2 / num_pixels) ** (1.0 / cfg.q)
        np.fill_diagonal(b, 0.0)
        viol = b.sum(axis=1) / m
        g_out[idx] = 1.0 - viol
        loss_sum += float(viol.sum())
        e1 = (
            np.maximum(p2 / num_pixels, cfg.eps**cfg.q) ** (1.0 / cfg.q - 1.0)
            / num_pixels
        )
        np.fill_diagonal(e1, 0.0)
        e1_mats.append(e1)
    return loss_sum, e1_mats


def bce_loss(
    s: ScoreMap, labels: LabelMap, eps: float = 1e-7, reduction: str = "mean"
) -> tuple[float, np.ndarray]:
    """Binary cross-entropy against the label closure tensor.

    ``reduction="mean"`` averages over all ``|V| * K`` entries;
    ``reduction="sum"`` sums the node terms per pixel before averaging over
    pixels.  Scores are clamped to ``[eps, 1 - eps]`` inside the logs, and
    the gradient is zeroed where the clamp is active.
    """
    if reduction not in ("mean", "sum"):
        raise ValueError(f"reduction must be 'mean' or 'sum', got {reduction!r}")
    vals = s.values
    y = labels.y
    if y.shape != vals.shape:
        raise ValueError(f"label shape {y.shape} != score shape {vals.shape}")
    size, k = vals.shape
    st = np.clip(vals, eps, 1.0 - eps)
    ent = -(y * np.log(st) + (1.0 - y) * np.log1p(-st))
    scale = 1.0 / (size * k) if reduction == "mean" else 1.0 / k
    grad = scale * (st - y) / (st * (1.0 - st))
    clamped = (vals < eps) | (vals > 1.0 - eps)
    if clamped.any():
        grad[clamped] = 0.0
    return float(ent.sum() * scale), grad


def total_loss(
    s: ScoreMap,
    labels: LabelMap,
    rules: RuleSet,
    cfg: FuzzyConfig,
    alpha: float = 0.2,
    include: tuple[str, ...] = LOSS_NAMES,
    bce_reduction: str = "mean",
    threads: int = 1,
) -> LossReport:
    """Weighted total loss ``alpha * (L_C + L_D + L_E) + BCE`` with gradient.

    ``include`` selects which relational losses participate; an excluded
    loss reports value 0, satisfaction 1, contributes no gradient, and is
    not computed at all.  ``threads > 1`` splits the pixel axis into
    contiguous chunks evaluated on a worker pool; partial sums combine in
    fixed chunk order, so results are deterministic for a given thread
    count.
    """
    unknown = set(include) - set(LOSS_NAMES)
    if unknown:
        raise ValueError(f"unknown loss toggles: {sorted(unknown)}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if labels.num_pixels != s.num_pixels:
        raise ValueError(
            f"label pixels ({labels.num_pixels}) != score pixels ({s.num_pixels})"
        )
    if threads > 1:
        return _total_loss_chunked(
            s, labels, rules, cfg, alpha, include, bce_reduction, threads
        )

    size = s.hierarchy.size
    ones = np.ones(size)
    l_c, g_c, gr_c = (
        c_loss(s, rules, cfg) if "c" in include else (0.0, ones.copy(), None)
    )
    l_d, g_d, gr_d = (
        d_loss(s, rules, cfg) if "d" in include else (0.0, ones.copy(), None)
    )
    l_e, g_e, gr_e = (
        e_loss(s, rules, cfg) if "e" in include else (0.0, ones.copy(), None)
    )
    l_bce, grad = bce_loss(s, labels, cfg.eps, bce_reduction)
    for gr in (gr_c, gr_d, gr_e):
        if gr is not None:
            grad += alpha * gr
    total = alpha * (l_c + l_d + l_e) + l_bce
    return LossReport(l_c, l_d, l_e, l_bce, total, g_c, g_d, g_e, grad, alpha)


def _chunk_bounds(num_pixels: int, threads: int) -> np.ndarray:
    n = min(threads, num_pixels)
    return np.unique(np.linspace(0, num_pixels, n + 1).astype(np.int64))


def _total_loss_chunked(s, labels, rules, cfg, alpha, include, bce_reduction, threads):
    vals = s.values
    y = labels.y
    size, k = vals.shape
    q = cfg.q
    eps = cfg.eps
    bounds = _chunk_bounds(k, threads)
    spans = list(zip(bounds[:-1], bounds[1:]))

    c_plan = _CPlan(rules) if ("c" in include and rules.c_rules) else None
    d_plan = _DPlan(rules) if ("d" in include and rules.d_rules) else None
    e_plan = _EPlan(rules) if ("e" in include and rules.e_rules) else None

    st = np.clip(vals, eps, 1.0 - eps)

    def stats(span):
        lo, hi = span
        part = {}
        if c_plan is not None:
            part["c"] = _c_powsum(vals, c_plan, lo, hi, q)
        if d_plan is not None:
            part["d"] = _d_powsum(vals, d_plan, lo, hi, q)
        if e_plan is not None:
            part["e"] = _e_pair_powsums(vals, e_plan, lo, hi, q)
        sl = st[:, lo:hi]
        yl = y[:, lo:hi]
        part["bce"] = float(-(yl * np.log(sl) + (1.0 - yl) * np.log1p(-sl)).sum())
        return part

    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(stats, spans))

    ones = np.ones(size)
    g_c, g_d, g_e = ones.copy(), ones.copy(), ones.copy()
    l_c = l_d = l_e = 0.0
    c_coef = d_coef = None
    e1_mats = None

    if c_plan is not None:
        powsum = np.sum([p["c"] for p in parts], axis=0)
        a = _exists_from_powsum(powsum, k, q)
        g_c[c_plan.ids] = 1.0 - a
        l_c = float(a.mean())
        c_coef = _grad_coef(powsum, k, cfg) / c_plan.ids.size
    if d_plan is not None:
        powsum = np.sum([p["d"] for p in parts], axis=0)
        a = _exists_from_powsum(powsum, k, q)
        g_d[d_plan.ids] = 1.0 - a
        l_d = float(a.mean())
        d_coef = _grad_coef(powsum, k, cfg) / d_plan.ids.size
    if e_plan is not None:
        pair_pow = [
            np.sum([p["e"][gi] for p in parts], axis=0)
            for gi in range(len(e_plan.groups))
        ]
        loss_sum, e1_mats = _e_finalize(e_plan, pair_pow, k, cfg, g_e)
        l_e = loss_sum / size

    bce_scale = 1.0 / (size * k) if bce_reduction == "mean" else 1.0 / k
    l_bce = sum(p["bce"] for p in parts) * bce_scale

    grad = np.empty_like(vals)

    def grads(span):
        lo, hi = span
        logic = np.zeros((size, hi - lo))
        if c_plan is not None:
            _c_grad_slice(logic, vals, c_plan, lo, hi, q, c_coef)
        if d_plan is not None:
            _d_grad_slice(logic, vals, d_plan, lo, hi, q, d_coef)
        if e_plan is not None:
            _e_grad_slice(logic, vals, e_plan, lo, hi, q, e1_mats, size)
        sl = st[:, lo:hi]
        gb = bce_scale * (sl - y[:, lo:hi]) / (sl * (1.0 - sl))
        clamped = (vals[:, lo:hi] < eps) | (vals[:, lo:hi] > 1.0 - eps)
        if clamped.any():
            gb[clamped] = 0.0
        grad[:, lo:hi] = alpha * logic + gb

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(grads, spans))

    total = alpha * (l_c + l_d + l_e) + l_bce
    return LossReport(l_c, l_d, l_e, l_bce, total, g_c, g_d, g_e, grad, alpha)
