"""CART trees on flat node arrays, grown with the split-scan kernels.

Two growth modes share one builder:

* ``gini`` - classification; leaf value is the positive fraction.
* ``newton`` - second-order regression on (gradient, hessian) pairs as used by
  gradient boosting; leaf value is ``-G / (H + lambda)``.

Samples go left when ``x[feature] <= threshold``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import ModuleType

import numpy as np

from . import kernels as _kernels

LEAF = -1


@dataclass
class Tree:
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        def walk(i: int) -> int:
            if self.feature[i] == LEAF:
                return 0
            return 1 + max(walk(self.left[i]), walk(self.right[i]))

        return walk(0) if self.feature else 0

    def _add(self, value: float) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(float(value))
        return len(self.feature) - 1

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf value reached by every row of ``X``."""
        feat = np.asarray(self.feature, dtype=np.intp)
        thr = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.intp)
        right = np.asarray(self.right, dtype=np.intp)
        value = np.asarray(self.value, dtype=np.float64)
        rows = np.arange(X.shape[0])
        cur = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            f = feat[cur]
            inner = f != LEAF
            if not inner.any():
                return value[cur]
            go_left = X[rows, np.where(inner, f, 0)] <= thr[cur]
            cur = np.where(inner, np.where(go_left, left[cur], right[cur]), cur)

    def to_dict(self) -> dict:
        return {
            "feature": list(self.feature),
            "threshold": list(self.threshold),
            "left": list(self.left),
            "right": list(self.right),
            "value": list(self.value),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(
            [int(v) for v in d["feature"]],
            [float(v) for v in d["threshold"]],
            [int(v) for v in d["left"]],
            [int(v) for v in d["right"]],
            [float(v) for v in d["value"]],
        )


def _threshold(lo: float, hi: float) -> float:
    t = (lo + hi) / 2.0
    # midpoint can round up onto hi when lo and hi are adjacent floats
    return lo if t >= hi else t


def grow_tree(
    X: np.ndarray,
    *,
    mode: str,
    y: np.ndarray | None = None,
    grad: np.ndarray | None = None,
    hess: np.ndarray | None = None,
    sample_idx: np.ndarray | None = None,
    max_depth: int = 8,
    min_samples_leaf: int = 1,
    max_features: int | None = None,
    reg_lambda: float = 1.0,
    rng: np.random.Generator | None = None,
    kernels: ModuleType | None = None,
) -> Tree:
    """Grow one tree depth-first.

    ``sample_idx`` may repeat rows (bootstrap). With ``max_features`` set, each
    node scans a fresh random subset of that many columns drawn from ``rng``.
    """
    if mode not in ("gini", "newton"):
        raise ValueError(f"unknown tree mode {mode!r}")
    k = kernels or _kernels.active
    X = np.asarray(X, dtype=np.float64)
    n_features = X.shape[1]
    idx = np.arange(X.shape[0]) if sample_idx is None else np.asarray(sample_idx, dtype=np.intp)
    if mode == "gini":
        target = np.asarray(y, dtype=np.float64)
    else:
        g_all = np.asarray(grad, dtype=np.float64)
        h_all = np.asarray(hess, dtype=np.float64)
    subsample = max_features is not None and max_features < n_features
    if subsample and rng is None:
        raise ValueError("feature subsampling needs an rng")
    tree = Tree()

    def leaf_value(node_idx: np.ndarray) -> float:
        if mode == "gini":
            return math.fsum(target[node_idx]) / len(node_idx)
        return -math.fsum(g_all[node_idx]) / (math.fsum(h_all[node_idx]) + reg_lambda)

    def build(node_idx: np.ndarray, depth: int) -> int:
        node = tree._add(leaf_value(node_idx))
        n = len(node_idx)
        if depth >= max_depth or n < 2 * min_samples_leaf:
            return node
        if mode == "gini":
            v = tree.value[node]
            if v == 0.0 or v == 1.0:
                return node
        feats = (
            np.sort(rng.choice(n_features, size=max_features, replace=False))
            if subsample
            else np.arange(n_features)
        )
        sub = X[np.ix_(node_idx, feats)]
        order = np.argsort(sub, axis=0, kind="stable")
        xs = np.ascontiguousarray(np.take_along_axis(sub, order, axis=0))
        if mode == "gini":
            ys = np.ascontiguousarray(target[node_idx][order])
            col, pos, _ = k.scan_gini(xs, ys, min_samples_leaf)
        else:
            gs = np.ascontiguousarray(g_all[node_idx][order])
            hs = np.ascontiguousarray(h_all[node_idx][order])
            col, pos, score = k.scan_newton(xs, gs, hs, reg_lambda, min_samples_leaf)
            if col >= 0:
                gt = float(np.cumsum(gs[:, col])[-1])
                ht = float(np.cumsum(hs[:, col])[-1])
                if score - gt * gt / (ht + reg_lambda) <= 1e-12:
                    return node
        if col < 0:
            return node
        f = int(feats[col])
        thr = _threshold(float(xs[pos - 1, col]), float(xs[pos, col]))
        goes_left = X[node_idx, f] <= thr
        tree.feature[node] = f
        tree.threshold[node] = thr
        tree.left[node] = build(node_idx[goes_left], depth + 1)
        tree.right[node] = build(node_idx[~goes_left], depth + 1)
        return node

    if len(idx) == 0:
        raise ValueError("cannot grow a tree on zero samples")
    build(idx, 0)
    return tree
