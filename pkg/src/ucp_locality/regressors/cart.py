"""Regression tree with greedy SSE-minimizing binary splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MIN_SPLIT = 8
DEFAULT_MIN_LEAF = 4
DEFAULT_MAX_DEPTH = 6


@dataclass(frozen=True)
class CartNode:
    """Internal node (feature, threshold, children) or leaf (children None).
    Every node keeps the mean and count of its training members."""

    prediction: float
    count: int
    feature: int | None = None
    threshold: float | None = None
    left: "CartNode | None" = None
    right: "CartNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"prediction": self.prediction, "count": self.count}
        return {
            "prediction": self.prediction,
            "count": self.count,
            "feature": self.feature,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CartNode":
        if "feature" not in data:
            return cls(prediction=data["prediction"], count=data["count"])
        return cls(
            prediction=data["prediction"],
            count=data["count"],
            feature=data["feature"],
            threshold=data["threshold"],
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


@dataclass(frozen=True)
class CartModel:
    root: CartNode
    n_train: int
    min_split: int
    min_leaf: int
    max_depth: int

    def predict(self, x) -> float:
        return cart_predict(self, x)

    def leaves(self) -> list[CartNode]:
        out: list[CartNode] = []
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                out.append(node)
            else:
                stack.extend((node.right, node.left))
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "cart",
            "params": {"root": self.root.to_dict()},
            "metadata": {
                "n_train": self.n_train,
                "min_split": self.min_split,
                "min_leaf": self.min_leaf,
                "max_depth": self.max_depth,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CartModel":
        meta = data["metadata"]
        return cls(
            root=CartNode.from_dict(data["params"]["root"]),
            n_train=meta["n_train"],
            min_split=meta["min_split"],
            min_leaf=meta["min_leaf"],
            max_depth=meta["max_depth"],
        )


def _best_split(X: np.ndarray, y: np.ndarray,
                min_leaf: int) -> tuple[int, float, float] | None:
    """Lowest total child SSE over all (feature, midpoint-threshold)
    candidates leaving both children >= min_leaf, or None."""
    n = y.size
    # centering keeps the prefix-sum SSE numerically tight
    yc = y - y.mean()
    best: tuple[int, float, float] | None = None
    for feature in range(X.shape[1]):
        order = np.argsort(X[:, feature], kind="stable")
        xs = X[order, feature]
        ys = yc[order]
        csum = np.cumsum(ys)
        csq = np.cumsum(ys * ys)
        total_sum = csum[-1]
        total_sq = csq[-1]

        # split after position i puts i+1 points left
        counts_left = np.arange(1, n)
        valid = (xs[:-1] < xs[1:])
        valid &= (counts_left >= min_leaf) & (n - counts_left >= min_leaf)
        if not valid.any():
            continue
        idx = np.nonzero(valid)[0]
        nl = counts_left[idx].astype(float)
        nr = n - nl
        sum_l = csum[idx]
        sq_l = csq[idx]
        sse = (sq_l - sum_l * sum_l / nl) \
            + ((total_sq - sq_l) - (total_sum - sum_l) ** 2 / nr)
        j = int(np.argmin(sse))
        if best is None or sse[j] < best[2]:
            threshold = (xs[idx[j]] + xs[idx[j] + 1]) / 2.0
            best = (feature, float(threshold), float(sse[j]))
    return best


def _grow(X: np.ndarray, y: np.ndarray, depth: int, min_split: int,
          min_leaf: int, max_depth: int) -> CartNode:
    prediction = float(y.mean())
    count = y.size
    if count < min_split or depth >= max_depth or np.all(y == y[0]):
        return CartNode(prediction=prediction, count=count)
    found = _best_split(X, y, min_leaf)
    if found is None:
        return CartNode(prediction=prediction, count=count)
    feature, threshold, _ = found
    mask = X[:, feature] <= threshold
    return CartNode(
        prediction=prediction,
        count=count,
        feature=feature,
        threshold=threshold,
        left=_grow(X[mask], y[mask], depth + 1, min_split, min_leaf, max_depth),
        right=_grow(X[~mask], y[~mask], depth + 1, min_split, min_leaf, max_depth),
    )


def cart_fit(X, y, min_split: int = DEFAULT_MIN_SPLIT,
             min_leaf: int = DEFAULT_MIN_LEAF,
             max_depth: int = DEFAULT_MAX_DEPTH) -> CartModel:
    """Grow a regression tree; leaves predict their members' mean target."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, f) with one target per row")
    if y.size == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if min_leaf < 1 or min_split < 2 or max_depth < 0:
        raise ValueError("invalid tree limits")
    root = _grow(X, y, 0, min_split, min_leaf, max_depth)
    return CartModel(root=root, n_train=y.size, min_split=min_split,
                     min_leaf=min_leaf, max_depth=max_depth)


def cart_predict(model: CartModel, x) -> float:
    """Route x to its leaf; values equal to a threshold go left."""
    x = np.asarray(x, dtype=float)
    node = model.root
    while not node.is_leaf:
        node = node.left if x[node.feature] <= node.threshold else node.right
    return node.prediction
