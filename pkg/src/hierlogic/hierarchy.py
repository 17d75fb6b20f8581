"""Tree-shaped class hierarchies: parsing, validation, and index structures.

A hierarchy is a forest of class trees with ``L`` levels, numbered 1 (leaves)
to ``L`` (roots).  Every node except a root has exactly one parent, which must
sit exactly one level above it.  Nodes are assigned contiguous integer ids in
canonical order: level blocks from leaves upward, file order within a level.
Leaf ids therefore occupy ``0 .. |V_1|-1``, which is what label files store.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class HierarchyError(ValueError):
    """Base class for hierarchy file problems."""


class HierarchyParseError(HierarchyError):
    """The input could not be decoded or is structurally malformed."""


class HierarchyValidationError(HierarchyError):
    """The input decoded fine but violates a tree constraint."""


@dataclass(frozen=True)
class Node:
    """One class in the hierarchy, with resolved neighbor ids."""

    id: int
    name: str
    level: int
    parent: int | None
    children: tuple[int, ...]
    peers: tuple[int, ...]  # other nodes on the same level


class Hierarchy:
    """Validated hierarchy plus the index arrays the numeric code needs.

    Attributes of interest:

    - ``nodes``: list of :class:`Node` in canonical id order.
    - ``parent_index``: int64 ``[|V|]``, parent id per node, -1 for roots.
    - ``level_starts`` / ``level_sizes``: int64 ``[L]``, the id block of each
      level, indexed by ``level - 1`` (leaves first).
    - ``nonleaf_ids``: ids of nodes with children, ascending.
    - ``child_order``: all non-root ids grouped by parent (parents in
      ``nonleaf_ids`` order, children ascending within a group).
    - ``child_starts``: int64 ``[len(nonleaf_ids) + 1]`` offsets into
      ``child_order``.
    - ``parent_rank``: for each row of ``child_order``, the position of that
      child's parent within ``nonleaf_ids``.
    """

    def __init__(self, name: str, records: list[dict]):
        self.name = name
        self._build(records)

    # -- construction ---------------------------------------------------

    def _build(self, records: list[dict]) -> None:
        if not records:
            raise HierarchyValidationError("hierarchy has no nodes")

        seen: set[str] = set()
        for rec in records:
            node_name = rec["name"]
            if node_name in seen:
                raise HierarchyValidationError(f"duplicate name: {node_name!r}")
            seen.add(node_name)
            level = rec["level"]
            if not isinstance(level, int) or level < 1:
                raise HierarchyValidationError(
                    f"node {node_name!r} has invalid level {level!r}"
                )

        top = max(rec["level"] for rec in records)
        counts = {lv: 0 for lv in range(1, top + 1)}
        for rec in records:
            counts[rec["level"]] += 1
        for lv, n in counts.items():
            if n == 0:
                raise HierarchyValidationError(f"empty level {lv}")

        # Canonical order: leaves-first level blocks, input order within.
        ordered = sorted(records, key=lambda rec: rec["level"])
        name_to_id = {rec["name"]: i for i, rec in enumerate(ordered)}
        level_of = {rec["name"]: rec["level"] for rec in ordered}

        parents: list[int | None] = []
        for i, rec in enumerate(ordered):
            node_name, level, parent = rec["name"], rec["level"], rec["parent"]
            if level == top:
                if parent is not None:
                    raise HierarchyValidationError(
                        f"node {node_name!r} at top level {top} must not have a parent"
                    )
                parents.append(None)
                continue
            if parent is None:
                raise HierarchyValidationError(
                    f"orphan non-root: node {node_name!r} at level {level} has no parent"
                )
            if parent not in name_to_id:
                raise HierarchyValidationError(
                    f"unknown parent {parent!r} of node {node_name!r}"
                )
            if level_of[parent] != level + 1:
                raise HierarchyValidationError(
                    f"level gap: node {node_name!r} at level {level} has parent "
                    f"{parent!r} at level {level_of[parent]}"
                )
            parents.append(name_to_id[parent])

        size = len(ordered)
        children: list[list[int]] = [[] for _ in range(size)]
        for i, p in enumerate(parents):
            if p is not None:
                children[p].append(i)

        self.num_levels = top
        self.size = size
        self.names = [rec["name"] for rec in ordered]
        self.name_to_id = name_to_id

        levels = np.array([rec["level"] for rec in ordered], dtype=np.int64)
        self.levels = levels
        self.level_sizes = np.array(
            [counts[lv] for lv in range(1, top + 1)], dtype=np.int64
        )
        self.level_starts = np.concatenate(
            ([0], np.cumsum(self.level_sizes)[:-1])
        ).astype(np.int64)

        self.parent_index = np.array(
            [-1 if p is None else p for p in parents], dtype=np.int64
        )

        self.nodes: list[Node] = []
        for i, rec in enumerate(ordered):
            lv = rec["level"]
            start = int(self.level_starts[lv - 1])
            block = range(start, start + int(self.level_sizes[lv - 1]))
            peers = tuple(j for j in block if j != i)
            self.nodes.append(
                Node(
                    id=i,
                    name=rec["name"],
                    level=lv,
                    parent=parents[i],
                    children=tuple(sorted(children[i])),
                    peers=peers,
                )
            )

        self.nonleaf_ids = np.array(
            [n.id for n in self.nodes if n.children], dtype=np.int64
        )
        order: list[int] = []
        starts = [0]
        for p in self.nonleaf_ids:
            order.extend(self.nodes[p].children)
            starts.append(len(order))
        self.child_order = np.array(order, dtype=np.int64)
        self.child_starts = np.array(starts, dtype=np.int64)
        self.child_counts = np.diff(self.child_starts)
        rank = np.empty(len(order), dtype=np.int64)
        for r in range(len(self.nonleaf_ids)):
            rank[self.child_starts[r] : self.child_starts[r + 1]] = r
        self.parent_rank = rank

    # -- relation matrices ----------------------------------------------

    @property
    def T_matrix(self) -> np.ndarray:
        """Boolean ``[|V|, |V|]``; entry (u, v) set iff u is v's parent."""
        mat = np.zeros((self.size, self.size), dtype=bool)
        nonroot = self.parent_index >= 0
        mat[self.parent_index[nonroot], np.flatnonzero(nonroot)] = True
        return mat

    @property
    def P_matrix(self) -> np.ndarray:
        """Boolean ``[|V|, |V|]``; entry (u, v) set iff u and v share a level."""
        mat = self.levels[:, None] == self.levels[None, :]
        np.fill_diagonal(mat, False)
        return mat

    # -- conveniences ----------------------------------------------------

    @property
    def num_leaves(self) -> int:
        return int(self.level_sizes[0])

    def level_ids(self, level: int) -> np.ndarray:
        """Ids of all nodes at ``level`` (1-based), ascending."""
        if not 1 <= level <= self.num_levels:
            raise ValueError(f"level {level} out of range 1..{self.num_levels}")
        start = int(self.level_starts[level - 1])
        return np.arange(start, start + int(self.level_sizes[level - 1]))

    def root_ids(self) -> np.ndarray:
        return self.level_ids(self.num_levels)

    def __repr__(self) -> str:  # pragma: no cover
        sizes = "/".join(str(int(s)) for s in self.level_sizes[::-1])
        return f"Hierarchy({self.name!r}, levels={self.num_levels}, sizes={sizes})"


def build_hierarchy(records: list[dict], name: str = "hierarchy") -> Hierarchy:
    """Build a validated :class:`Hierarchy` from node records.

    Each record is a mapping with keys ``name`` (str), ``level`` (int, 1 =
    leaves) and ``parent`` (parent's name, or None for roots).
    """
    return Hierarchy(name, records)


def parse_hierarchy(text: str) -> Hierarchy:
    """Parse the JSON hierarchy format.

    Expected shape::

        {"name": str, "levels": int,
         "nodes": [{"name": str, "level": int, "parent": str | null}, ...]}

    Raises :class:`HierarchyParseError` for malformed input and
    :class:`HierarchyValidationError` for tree-constraint violations.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HierarchyParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise HierarchyParseError("top-level value must be an object")
    for key in ("name", "levels", "nodes"):
        if key not in doc:
            raise HierarchyParseError(f"missing key {key!r}")
    if not isinstance(doc["nodes"], list):
        raise HierarchyParseError("'nodes' must be a list")
    records = []
    for i, rec in enumerate(doc["nodes"]):
        if not isinstance(rec, dict):
            raise HierarchyParseError(f"node #{i} is not an object")
        for key in ("name", "level", "parent"):
            if key not in rec:
                raise HierarchyParseError(f"node #{i} missing key {key!r}")
        records.append(
            {"name": rec["name"], "level": rec["level"], "parent": rec["parent"]}
        )
    h = build_hierarchy(records, name=doc["name"])
    declared = doc["levels"]
    if declared != h.num_levels:
        raise HierarchyValidationError(
            f"level count mismatch: file declares {declared}, nodes span {h.num_levels}"
        )
    return h


def load_hierarchy(path) -> Hierarchy:
    """Read and parse a hierarchy JSON file."""
    with open(path, encoding="utf-8") as fh:
        return parse_hierarchy(fh.read())


def ancestor_closure(h: Hierarchy, leaf_id: int) -> np.ndarray:
    """Multi-hot float vector over all nodes: the leaf and its ancestors."""
    if not 0 <= leaf_id < h.num_leaves:
        raise ValueError(f"leaf id {leaf_id} out of range 0..{h.num_leaves - 1}")
    vec = np.zeros(h.size, dtype=np.float64)
    v = leaf_id
    while v >= 0:
        vec[v] = 1.0
        v = int(h.parent_index[v])
    return vec


def enumerate_paths(h: Hierarchy) -> list[tuple[int, ...]]:
    """All root-to-leaf paths, one per leaf, ordered by leaf id."""
    paths = []
    for leaf in range(h.num_leaves):
        chain = []
        v = leaf
        while v >= 0:
            chain.append(v)
            v = int(h.parent_index[v])
        paths.append(tuple(reversed(chain)))
    return paths
