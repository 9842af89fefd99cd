"""Epsilon-insensitive support vector regression with an RBF kernel,
trained by sequential minimal optimization.

The dual is solved over 2n box-bounded variables (alpha, alpha*) with the
single equality constraint sum(alpha - alpha*) = 0.  Pairs are picked by
maximal violation with second-order selection of the partner, and the
solver stops when the worst KKT violation drops to `tol`.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

DEFAULT_C = 1.0
DEFAULT_EPSILON = 0.1
DEFAULT_TOL = 0.001
DEFAULT_CACHE_ENTRIES = 5000
DEFAULT_MAX_ITER = 100_000

_TAU = 1e-12       # curvature floor for coincident points
_BOUND_SNAP = 1e-12


class _KernelRowCache:
    """LRU cache of RBF kernel rows; capacity derives from an entry-count
    hint (entries / n rows, at least two rows).  Rows are stored doubled
    (length 2n) to match the stacked (alpha, alpha*) variable layout."""

    def __init__(self, X: np.ndarray, gamma: float, entries: int):
        self._X = X
        self._gamma = gamma
        self._sq = np.sum(X * X, axis=1)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self._capacity = max(2, entries // max(1, X.shape[0]))

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Doubled kernel row and the matching pair curvature
        max(2*(1 - K), tau)."""
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        d2 = self._sq + self._sq[i] - 2.0 * (self._X @ self._X[i])
        single = np.exp(-self._gamma * np.maximum(d2, 0.0))
        row = np.concatenate([single, single])
        entry = (row, np.maximum(2.0 * (1.0 - row), _TAU))
        self._rows[i] = entry
        if len(self._rows) > self._capacity:
            self._rows.popitem(last=False)
        return entry


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)   # alpha_i - alpha_i* per SV
    bias: float
    gamma: float
    c: float
    epsilon: float
    tol: float
    n_train: int
    n_iter: int
    converged: bool

    def predict(self, x) -> float:
        return svr_predict(self, x)

    def dual_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """Canonical (alpha, alpha*) per support vector; complementary by
        construction."""
        beta = self.coefficients
        return np.maximum(beta, 0.0), np.maximum(-beta, 0.0)

    def to_dict(self) -> dict:
        return {
            "kind": "svr",
            "params": {
                "support_vectors": self.support_vectors.tolist(),
                "coefficients": self.coefficients.tolist(),
                "bias": self.bias,
                "gamma": self.gamma,
            },
            "metadata": {
                "c": self.c,
                "epsilon": self.epsilon,
                "tol": self.tol,
                "n_train": self.n_train,
                "n_iter": self.n_iter,
                "converged": self.converged,
                "n_features": int(self.support_vectors.shape[1]),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SvrModel":
        params, meta = data["params"], data["metadata"]
        return cls(
            support_vectors=np.array(params["support_vectors"], dtype=float).reshape(
                len(params["coefficients"]), meta["n_features"]),
            coefficients=np.array(params["coefficients"], dtype=float),
            bias=params["bias"],
            gamma=params["gamma"],
            c=meta["c"],
            epsilon=meta["epsilon"],
            tol=meta["tol"],
            n_train=meta["n_train"],
            n_iter=meta["n_iter"],
            converged=meta["converged"],
        )


def resolve_gamma(X: np.ndarray, gamma: float | None) -> float:
    """Explicit gamma, or 1 / (n_features * mean per-feature variance)."""
    if gamma is not None:
        if not gamma > 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        return float(gamma)
    mean_var = float(X.var(axis=0).mean())
    if mean_var <= 0:
        raise ValueError("gamma=auto undefined for constant inputs")
    return 1.0 / (X.shape[1] * mean_var)


def _bias_only(y: np.ndarray, gamma: float, c: float, epsilon: float,
               tol: float, n_features: int) -> SvrModel:
    return SvrModel(
        support_vectors=np.empty((0, n_features)),
        coefficients=np.empty(0),
        bias=float(y.mean()),
        gamma=gamma,
        c=c,
        epsilon=epsilon,
        tol=tol,
        n_train=y.size,
        n_iter=0,
        converged=True,
    )


def svr_fit(X, y, c: float = DEFAULT_C, epsilon: float = DEFAULT_EPSILON,
            gamma: float | None = None, tol: float = DEFAULT_TOL,
            cache_entries: int = DEFAULT_CACHE_ENTRIES,
            max_iter: int = DEFAULT_MAX_ITER) -> SvrModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError("X must be (n, f) with one target per row")
    n = y.size
    if n < 2:
        raise ValueError(f"SVR needs at least 2 training projects, got {n}")
    if not c > 0:
        raise ValueError(f"C must be positive, got {c}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon}")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")

    if np.all(X == X[0]):
        g = resolve_gamma(X, gamma) if gamma is not None else 1.0
        return _bias_only(y, g, c, epsilon, tol, X.shape[1])
    gamma_val = resolve_gamma(X, gamma)

    cache = _KernelRowCache(X, gamma_val, cache_entries)
    pos = np.zeros(2 * n, dtype=bool)
    pos[:n] = True
    theta = np.zeros(2 * n)
    # track -z*grad directly: its pair update is -(Ki - Kj)*d since z^2 = 1
    neg_zg = np.concatenate([y - epsilon, y + epsilon])
    # with theta = 0, positive-z variables can move up, negative-z down
    up = pos.copy()
    low = ~pos

    def refresh_masks(idx: int) -> None:
        free_up = theta[idx] < c if pos[idx] else theta[idx] > 0.0
        free_low = theta[idx] > 0.0 if pos[idx] else theta[idx] < c
        up[idx] = free_up
        low[idx] = free_low

    n_iter = 0
    converged = False
    up_vals = np.empty(2 * n)
    low_vals = np.empty(2 * n)
    for n_iter in range(1, max_iter + 1):
        np.copyto(up_vals, neg_zg)
        up_vals[~up] = -np.inf
        i = int(np.argmax(up_vals))
        m = up_vals[i]
        np.copyto(low_vals, neg_zg)
        low_vals[~low] = np.inf
        if m - low_vals.min() <= tol:
            converged = True
            break

        k2i, quad = cache.row(i % n)
        diff = m - neg_zg
        gain = diff * diff
        gain /= quad
        gain[~low] = -np.inf
        gain[diff <= 0] = -np.inf
        j = int(np.argmax(gain))

        d_star = diff[j] / quad[j]
        cap_i = (c - theta[i]) if pos[i] else theta[i]
        cap_j = theta[j] if pos[j] else (c - theta[j])
        d = min(d_star, cap_i, cap_j)
        if d <= 0:
            converged = True
            break

        theta[i] += d if pos[i] else -d
        theta[j] -= d if pos[j] else -d
        for idx in (i, j):
            if theta[idx] < _BOUND_SNAP:
                theta[idx] = 0.0
            elif theta[idx] > c - _BOUND_SNAP:
                theta[idx] = c
            refresh_masks(idx)

        k2j, _ = cache.row(j % n)
        neg_zg -= (k2i - k2j) * d

    # bias from the final violation bracket (masks recomputed from theta)
    up = np.where(pos, theta < c, theta > 0.0)
    low = np.where(pos, theta > 0.0, theta < c)
    lo_bound = np.max(neg_zg[up]) if up.any() else None
    hi_bound = np.min(neg_zg[low]) if low.any() else None
    if lo_bound is not None and hi_bound is not None:
        bias = float(lo_bound + hi_bound) / 2.0
    elif lo_bound is not None:
        bias = float(lo_bound)
    elif hi_bound is not None:
        bias = float(hi_bound)
    else:
        bias = float(y.mean())

    beta = theta[:n] - theta[n:]
    sv_mask = beta != 0.0
    return SvrModel(
        support_vectors=X[sv_mask].copy(),
        coefficients=beta[sv_mask].copy(),
        bias=bias,
        gamma=gamma_val,
        c=c,
        epsilon=epsilon,
        tol=tol,
        n_train=n,
        n_iter=n_iter,
        converged=converged,
    )


def svr_predict(model: SvrModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if model.coefficients.size == 0:
        return model.bias
    d2 = np.sum((model.support_vectors - x) ** 2, axis=1)
    return float(model.coefficients @ np.exp(-model.gamma * d2) + model.bias)
