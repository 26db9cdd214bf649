"""Student prescriptive trees: greedy recursive partitioning that maximizes
teacher-predicted revenue.

The node criterion is the revenue-maximization score
``R(S) = max_k sum_{i in S} r[i, k]`` over the precomputed revenue matrix.
A split (j, s) sends ``x_j <= s`` left and is chosen to maximize
``R(S_left) + R(S_right)`` by exhaustive search over all features and all
distinct observed thresholds; a node is only split when the criterion
strictly improves. Ties break to the lowest feature index, then the lowest
threshold, then the lowest price, so fits are deterministic and invariant
to row order.

The same engine drives the baseline trees (different node criteria plugged
into ``grow_tree``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .teacher import RevenueMatrix


@dataclass(frozen=True)
class FitConfig:
    """Termination rules: depth cap (None = unbounded), minsplit, min_leaf."""

    max_depth: int | None = 3
    minsplit: int = 2
    min_leaf: int = 1

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")
        if self.minsplit < 2 * self.min_leaf:
            raise ValueError("minsplit must be >= 2 * min_leaf")


@dataclass(frozen=True)
class SplitNode:
    feature: int
    threshold: float
    left: int
    right: int


@dataclass(frozen=True)
class LeafNode:
    price: float
    revenue_sum: float
    n_train: int


@dataclass(frozen=True)
class SplitCandidate:
    feature_index: int
    threshold: float
    combined_revenue: float
    left_count: int
    right_count: int


class EmptyLeafError(RuntimeError):
    """Routing reached a leaf that could not be priced (no supporting rows)."""


@dataclass
class PolicyTree:
    """Axis-aligned binary pricing policy; leaves carry a single price."""

    nodes: list
    root: int
    feature_names: tuple[str, ...]
    grid_prices: np.ndarray
    max_depth_used: int

    def predict_price(self, x) -> float:
        x = np.asarray(x, dtype=np.float64).ravel()
        nid = self.root
        while isinstance(self.nodes[nid], SplitNode):
            node = self.nodes[nid]
            if node.feature >= x.size:
                raise ValueError(
                    f"feature vector of dim {x.size} too short for split on "
                    f"feature {node.feature}")
            nid = node.left if x[node.feature] <= node.threshold else node.right
        leaf = self.nodes[nid]
        if np.isnan(leaf.price):
            raise EmptyLeafError("routed to an unpriced (empty) leaf")
        return float(leaf.price)

    def prescribe(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0])
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            nid, idx = stack.pop()
            if idx.size == 0:
                continue
            node = self.nodes[nid]
            if isinstance(node, LeafNode):
                if np.isnan(node.price):
                    raise EmptyLeafError("routed to an unpriced (empty) leaf")
                out[idx] = node.price
                continue
            if node.feature >= X.shape[1]:
                raise ValueError(
                    f"feature matrix of dim {X.shape[1]} too narrow for split on "
                    f"feature {node.feature}")
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    @property
    def n_leaves(self) -> int:
        return sum(isinstance(n, LeafNode) for n in self.nodes)

    def leaf_rows(self, X: np.ndarray) -> np.ndarray:
        """Leaf node id reached by each row of X."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.empty(X.shape[0], dtype=np.int64)
        stack = [(self.root, np.arange(X.shape[0]))]
        while stack:
            nid, idx = stack.pop()
            if idx.size == 0:
                continue
            node = self.nodes[nid]
            if isinstance(node, LeafNode):
                out[idx] = nid
                continue
            go_left = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[go_left]))
            stack.append((node.right, idx[~go_left]))
        return out

    def validate(self) -> None:
        """Check proper binary structure: acyclic, all nodes reachable once."""
        seen = set()
        stack = [self.root]
        while stack:
            nid = stack.pop()
            if nid in seen:
                raise ValueError("tree has a repeated/reachable-twice node")
            seen.add(nid)
            node = self.nodes[nid]
            if isinstance(node, SplitNode):
                stack.extend((node.left, node.right))
        if len(seen) != len(self.nodes):
            raise ValueError("tree has unreachable nodes")


class _RevenueCriterion:
    """max-over-prices column-sum score for the student prescriptive tree."""

    def __init__(self, revmat: RevenueMatrix):
        self.stats = revmat.values
        self.grid = revmat.grid

    def node_sums(self, rows):
        return self.stats[rows].sum(axis=0)

    def node_score(self, sums, count):
        return float(sums.max())

    def scores_batch(self, sums, counts):
        return sums.max(axis=1)

    def leaf_payload(self, sums, count):
        k = int(np.argmax(sums))  # first max = lowest price
        return float(self.grid.prices[k]), float(sums[k])


def _sweep_feature(x, stats_rows, min_leaf, scores_batch):
    """Best boundary for one feature: (combined, threshold, left_count) or None."""
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]
    bnd = np.nonzero(xs[:-1] < xs[1:])[0]
    if bnd.size == 0:
        return None
    n_left = bnd + 1
    ok = (n_left >= min_leaf) & (n - n_left >= min_leaf)
    bnd = bnd[ok]
    if bnd.size == 0:
        return None
    csum = np.cumsum(stats_rows[order], axis=0)
    left = csum[bnd]
    right = csum[-1] - left
    combined = scores_batch(left, bnd + 1) + scores_batch(right, n - bnd - 1)
    i = int(np.argmax(combined))  # first max = lowest threshold
    return float(combined[i]), float(xs[bnd[i]]), int(bnd[i] + 1)


def best_split_generic(features, rows, config: FitConfig, crit):
    """Best strict-improvement split at a node under any node criterion."""
    rows = np.asarray(rows, dtype=np.int64)
    stats_rows = crit.stats[rows]
    node = crit.node_score(stats_rows.sum(axis=0), rows.size)
    best = None
    for j in range(features.shape[1]):
        got = _sweep_feature(features[rows, j], stats_rows, config.min_leaf,
                             crit.scores_batch)
        if got is None:
            continue
        combined, threshold, left_count = got
        if combined > node and (best is None or combined > best.combined_revenue):
            best = SplitCandidate(j, threshold, combined,
                                  left_count, rows.size - left_count)
    return best


def grow_tree(features, crit, config: FitConfig,
              feature_names=None, grid_prices=None) -> PolicyTree:
    """Greedy top-down recursion shared by SPT and the baseline trees."""
    features = np.ascontiguousarray(features, dtype=np.float64)
    n, d = features.shape
    names = tuple(feature_names) if feature_names is not None \
        else tuple(f"x{i}" for i in range(d))
    nodes: list = []
    max_depth_seen = 0

    def rec(rows, depth):
        nonlocal max_depth_seen
        max_depth_seen = max(max_depth_seen, depth)
        cand = None
        depth_ok = config.max_depth is None or depth < config.max_depth
        if depth_ok and rows.size >= config.minsplit:
            cand = best_split_generic(features, rows, config, crit)
        if cand is None:
            price, revsum = crit.leaf_payload(crit.node_sums(rows), rows.size)
            nodes.append(LeafNode(price, revsum, int(rows.size)))
            return len(nodes) - 1
        go_left = features[rows, cand.feature_index] <= cand.threshold
        nid = len(nodes)
        nodes.append(None)  # placeholder until children exist
        left = rec(rows[go_left], depth + 1)
        right = rec(rows[~go_left], depth + 1)
        nodes[nid] = SplitNode(cand.feature_index, cand.threshold, left, right)
        return nid

    root = rec(np.arange(n), 0)
    grid = np.asarray(grid_prices, dtype=np.float64) if grid_prices is not None \
        else np.unique([nd.price for nd in nodes if isinstance(nd, LeafNode)])
    tree = PolicyTree(nodes, root, names, grid, max_depth_seen)
    tree.validate()
    return tree


def leaf_revenue(revmat: RevenueMatrix, rows) -> tuple[int, float]:
    """Best grid column (index) and its revenue sum over the given rows."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        raise ValueError("leaf_revenue needs a nonempty row set")
    sums = revmat.values[rows].sum(axis=0)
    k = int(np.argmax(sums))
    return k, float(sums[k])


def best_split(revmat: RevenueMatrix, features, rows,
               config: FitConfig) -> SplitCandidate | None:
    """Public SPT split search; None when no strict improvement exists."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    return best_split_generic(features, rows, config, _RevenueCriterion(revmat))


def fit_spt(features, revmat: RevenueMatrix, config: FitConfig,
            feature_names=None) -> PolicyTree:
    """Fit the student prescriptive tree on a revenue matrix."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if features.shape[0] != revmat.n:
        raise ValueError("features and revenue matrix row counts differ")
    return grow_tree(features, _RevenueCriterion(revmat), config,
                     feature_names, revmat.grid.prices)


def predict_price(tree: PolicyTree, x) -> float:
    return tree.predict_price(x)


def training_revenue(tree: PolicyTree) -> float:
    """Total predicted revenue sum over all leaves (training objective)."""
    return float(sum(n.revenue_sum for n in tree.nodes if isinstance(n, LeafNode)))


def export_tree(tree: PolicyTree, format: str = "json") -> str:
    """Serialize to the documented JSON schema or to Graphviz DOT."""
    if format == "json":
        nodes = []
        for i, node in enumerate(tree.nodes):
            if isinstance(node, SplitNode):
                nodes.append({"id": i, "kind": "split", "feature": node.feature,
                              "threshold": node.threshold,
                              "left": node.left, "right": node.right})
            else:
                nodes.append({"id": i, "kind": "leaf", "price": node.price,
                              "revenue_sum": node.revenue_sum,
                              "n_train": node.n_train})
        doc = {"feature_names": list(tree.feature_names),
               "price_grid": [float(p) for p in tree.grid_prices],
               "nodes": nodes, "root": tree.root}
        return json.dumps(doc, indent=2)
    if format == "dot":
        lines = ["digraph policy_tree {"]
        for i, node in enumerate(tree.nodes):
            if isinstance(node, SplitNode):
                name = tree.feature_names[node.feature] \
                    if node.feature < len(tree.feature_names) else f"x{node.feature}"
                lines.append(f'  n{i} [shape=box, label="{name} ≤ {node.threshold:g}"];')
            else:
                per_item = node.revenue_sum / node.n_train if node.n_train else float("nan")
                lines.append(f'  n{i} [shape=oval, label="price {node.price:g}\\n'
                             f'rev/item {per_item:.4g}"];')
        for i, node in enumerate(tree.nodes):
            if isinstance(node, SplitNode):
                lines.append(f'  n{i} -> n{node.left} [label="yes"];')
                lines.append(f'  n{i} -> n{node.right} [label="no"];')
        lines.append("}")
        return "\n".join(lines)
    raise ValueError(f"unknown export format {format!r}")


def tree_from_json(text: str) -> PolicyTree:
    """Inverse of export_tree(..., 'json')."""
    doc = json.loads(text)
    nodes: list = [None] * len(doc["nodes"])
    for nd in doc["nodes"]:
        if nd["kind"] == "split":
            nodes[nd["id"]] = SplitNode(int(nd["feature"]), float(nd["threshold"]),
                                        int(nd["left"]), int(nd["right"]))
        elif nd["kind"] == "leaf":
            nodes[nd["id"]] = LeafNode(float(nd["price"]), float(nd["revenue_sum"]),
                                       int(nd["n_train"]))
        else:
            raise ValueError(f"unknown node kind {nd['kind']!r}")
    depth = _tree_depth(nodes, int(doc["root"]))
    tree = PolicyTree(nodes, int(doc["root"]), tuple(doc["feature_names"]),
                      np.asarray(doc["price_grid"], dtype=np.float64), depth)
    tree.validate()
    return tree


def _tree_depth(nodes, root) -> int:
    depth = 0
    stack = [(root, 0)]
    while stack:
        nid, lvl = stack.pop()
        depth = max(depth, lvl)
        node = nodes[nid]
        if isinstance(node, SplitNode):
            stack.append((node.left, lvl + 1))
            stack.append((node.right, lvl + 1))
    return depth


def single_leaf_tree(price: float, revenue_sum: float = 0.0, n_train: int = 0,
                     grid_prices=None) -> PolicyTree:
    """Constant policy as a one-leaf tree."""
    grid = np.asarray(grid_prices, dtype=np.float64) if grid_prices is not None \
        else np.asarray([price])
    return PolicyTree([LeafNode(float(price), float(revenue_sum), int(n_train))],
                      0, (), grid, 0)
