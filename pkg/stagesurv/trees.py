"""Decision tree cores shared by the forest, boosted stumps and the symmetric gradient booster.

Split candidates are midpoints between consecutive distinct sorted values. Ties in split quality go to the lowest
feature index, then the lowest threshold.
"""

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np

from stagesurv.utils import FloatArray, IntArray

log = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True, eq=False)
class DecisionTree:
    """Binary tree in flattened arrays. Rows go left when x[feature] <= threshold.

    `value` holds the class-probability payload (p0, p1) of every node; only leaf rows are read at prediction.
    """

    feature: IntArray
    threshold: FloatArray
    left: IntArray
    right: IntArray
    value: FloatArray
    depth: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return bool(self.feature[node] == LEAF)

    def apply(self, rows: FloatArray) -> IntArray:
        node = np.zeros(rows.shape[0], dtype=np.int64)
        for _ in range(self.depth):
            f = self.feature[node]
            idx = np.nonzero(f != LEAF)[0]
            if len(idx) == 0:
                break
            at = node[idx]
            go_left = rows[idx, f[idx]] <= self.threshold[at]
            node[idx] = np.where(go_left, self.left[at], self.right[at])
        return node

    def predict_value(self, rows: FloatArray) -> FloatArray:
        return self.value[self.apply(rows)]

    def leaf_sizes(self, rows: FloatArray) -> dict[int, int]:
        leaves, counts = np.unique(self.apply(rows), return_counts=True)
        return {int(leaf): int(count) for leaf, count in zip(leaves, counts)}

    def state(self) -> dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "depth": self.depth,
        }

    @staticmethod
    def from_state(state: dict[str, Any]) -> "DecisionTree":
        return DecisionTree(
            feature=np.array(state["feature"], dtype=np.int64),
            threshold=np.array(state["threshold"], dtype=np.float64),
            left=np.array(state["left"], dtype=np.int64),
            right=np.array(state["right"], dtype=np.int64),
            value=np.array(state["value"], dtype=np.float64).reshape(-1, 2),
            depth=int(state["depth"]),
        )


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    # candidate features drawn per node, None for all
    max_features: int | None = None


def _best_split(
    rows: FloatArray, labels: IntArray, weights: FloatArray, features: IntArray, min_leaf: int
) -> tuple[int, float, float] | None:
    """Best weighted-Gini split of one node as (feature, threshold, impurity decrease)"""
    n = len(labels)
    w1 = weights * labels
    w0 = weights - w1
    total0, total1 = float(w0.sum()), float(w1.sum())
    total = total0 + total1
    parent = (total0**2 + total1**2) / total

    best: tuple[int, float, float] | None = None
    best_gain = 1e-12 * total
    for j in features:
        col = rows[:, j]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        c0 = np.cumsum(w0[order])[:-1]
        c1 = np.cumsum(w1[order])[:-1]
        left_n = np.arange(1, n)

        valid = (xs[:-1] < xs[1:]) & (left_n >= min_leaf) & (n - left_n >= min_leaf)
        if not valid.any():
            continue

        wl = c0 + c1
        wr = total - wl
        with np.errstate(divide="ignore", invalid="ignore"):
            purity = (c0**2 + c1**2) / wl + ((total0 - c0) ** 2 + (total1 - c1) ** 2) / wr
        gain = np.where(valid & (wl > 0) & (wr > 0), purity - parent, -np.inf)

        i = int(np.argmax(gain))
        if gain[i] > best_gain:
            best_gain = float(gain[i])
            best = (int(j), float((xs[i] + xs[i + 1]) / 2.0), best_gain)

    return best


def grow_tree(
    rows: FloatArray,
    labels: IntArray,
    weights: FloatArray,
    params: TreeParams,
    rng: np.random.Generator | None = None,
) -> DecisionTree:
    """Grow a classification tree on weighted Gini impurity"""
    n, d = rows.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[tuple[float, float]] = []
    depth = 0

    def new_node(idx: IntArray) -> int:
        w = weights[idx]
        w1 = float((w * labels[idx]).sum())
        total = float(w.sum())
        p1 = w1 / total if total > 0 else 0.5
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append((1.0 - p1, p1))
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack: list[tuple[int, IntArray, int]] = [(root, np.arange(n), 0)]
    while stack:
        node, idx, level = stack.pop()
        depth = max(depth, level)

        size = len(idx)
        node_labels = labels[idx]
        if (
            (params.max_depth is not None and level >= params.max_depth)
            or size < params.min_samples_split
            or size < 2 * params.min_samples_leaf
            or node_labels.min() == node_labels.max()
        ):
            continue

        if params.max_features is not None and params.max_features < d:
            assert rng is not None, "feature subsampling needs a random stream"
            candidates = np.sort(rng.choice(d, size=params.max_features, replace=False))
        else:
            candidates = np.arange(d)

        split = _best_split(rows[idx], node_labels, weights[idx], candidates, params.min_samples_leaf)
        if split is None:
            continue

        j, t, _ = split
        goes_left = rows[idx, j] <= t
        left_idx, right_idx = idx[goes_left], idx[~goes_left]
        feature[node] = j
        threshold[node] = t
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        # right pushed first so the left subtree is expanded first
        stack.append((right[node], right_idx, level + 1))
        stack.append((left[node], left_idx, level + 1))

    return DecisionTree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value, dtype=np.float64).reshape(-1, 2),
        depth=depth,
    )


@dataclass(frozen=True, eq=False)
class ObliviousTree:
    """Symmetric tree: level k splits every node on (features[k], thresholds[k]).

    The leaf index sets bit k when x[features[k]] > thresholds[k].
    """

    features: IntArray
    thresholds: FloatArray
    leaf_values: FloatArray

    @property
    def depth(self) -> int:
        return len(self.features)

    def leaf_index(self, rows: FloatArray) -> IntArray:
        index = np.zeros(rows.shape[0], dtype=np.int64)
        for k, (f, t) in enumerate(zip(self.features, self.thresholds)):
            index |= (rows[:, f] > t).astype(np.int64) << k
        return index

    def predict(self, rows: FloatArray) -> FloatArray:
        return self.leaf_values[self.leaf_index(rows)]

    def state(self) -> dict[str, Any]:
        return {
            "features": self.features.tolist(),
            "thresholds": self.thresholds.tolist(),
            "leaf_values": self.leaf_values.tolist(),
        }

    @staticmethod
    def from_state(state: dict[str, Any]) -> "ObliviousTree":
        return ObliviousTree(
            features=np.array(state["features"], dtype=np.int64),
            thresholds=np.array(state["thresholds"], dtype=np.float64),
            leaf_values=np.array(state["leaf_values"], dtype=np.float64),
        )


@dataclass(frozen=True, eq=False)
class FeatureBins:
    """Distinct sorted values and per-row bin codes of every column, computed once per fit"""

    values: list[FloatArray]
    codes: list[IntArray]

    @staticmethod
    def of(rows: FloatArray) -> "FeatureBins":
        values: list[FloatArray] = []
        codes: list[IntArray] = []
        for j in range(rows.shape[1]):
            uniq, inverse = np.unique(rows[:, j], return_inverse=True)
            values.append(uniq)
            codes.append(inverse.astype(np.int64).ravel())
        return FeatureBins(values=values, codes=codes)


def newton_leaf_values(grad_sum: FloatArray, hess_sum: FloatArray, l2: float) -> FloatArray:
    """-G / (H + l2) per leaf, 0 for leaves with nothing to fit"""
    denom = hess_sum + l2
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, -grad_sum / safe, 0.0)


def grow_oblivious_tree(
    rows: FloatArray, bins: FeatureBins, grad: FloatArray, hess: FloatArray, depth: int, l2: float
) -> ObliviousTree:
    """Grow a symmetric tree level by level. Each level takes the split with the largest second-order gain summed over
    all current leaves."""
    n = rows.shape[0]
    leaf = np.zeros(n, dtype=np.int64)
    features: list[int] = []
    thresholds: list[float] = []

    for level in range(depth):
        n_leaves = 1 << level
        g_tot = np.bincount(leaf, weights=grad, minlength=n_leaves)
        h_tot = np.bincount(leaf, weights=hess, minlength=n_leaves)

        best: tuple[int, float] | None = None
        best_score = -np.inf
        for j, (values, codes) in enumerate(zip(bins.values, bins.codes)):
            n_bins = len(values)
            if n_bins < 2:
                continue

            key = codes * n_leaves + leaf
            gl = np.cumsum(np.bincount(key, weights=grad, minlength=n_bins * n_leaves).reshape(n_bins, n_leaves), 0)
            hl = np.cumsum(np.bincount(key, weights=hess, minlength=n_bins * n_leaves).reshape(n_bins, n_leaves), 0)
            gl, hl = gl[:-1], hl[:-1]
            gr, hr = g_tot - gl, h_tot - hl

            with np.errstate(divide="ignore", invalid="ignore"):
                left = np.where(hl + l2 > 0, gl**2 / (hl + l2), 0.0)
                right = np.where(hr + l2 > 0, gr**2 / (hr + l2), 0.0)
            score = (left + right).sum(axis=1)

            i = int(np.argmax(score))
            if score[i] > best_score:
                best_score = float(score[i])
                best = (j, float((values[i] + values[i + 1]) / 2.0))

        if best is None:
            break

        j, t = best
        features.append(j)
        thresholds.append(t)
        leaf |= (rows[:, j] > t).astype(np.int64) << level

    n_leaves = 1 << len(features)
    g_sum = np.bincount(leaf, weights=grad, minlength=n_leaves)
    h_sum = np.bincount(leaf, weights=hess, minlength=n_leaves)

    return ObliviousTree(
        features=np.array(features, dtype=np.int64),
        thresholds=np.array(thresholds, dtype=np.float64),
        leaf_values=newton_leaf_values(g_sum, h_sum, l2),
    )
