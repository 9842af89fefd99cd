"""Weighted-average ensemble over the three base learners, with weights
discounted through a sigmoid of each model's normalized inner-validation
error, plus the two fixed-productivity baselines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import N_FACTORS, validate_factor_score
from .regressors.cart import cart_fit
from .regressors.stepwise import MIN_TRAIN as STEPWISE_MIN_TRAIN
from .regressors.stepwise import stepwise_fit
from .regressors.svr import svr_fit

DEFAULT_ALPHA = 15.0
PDR_FLOOR = 0.01
BASE_MODELS = ("svr", "stepwise", "cart")

KARNER_PDR = 20.0
SW_LEVELS = (20.0, 28.0, 36.0)


def sigmoid_weight(normalized_error: float, mean_normalized_error: float,
                   alpha: float = DEFAULT_ALPHA) -> float:
    """1 / (1 + exp(alpha * (err - mean))); strictly inside (0, 1).

    The exponent is clamped at +/-36, the float64 saturation point, so the
    weight never collapses to exactly 0 or 1.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    t = alpha * (normalized_error - mean_normalized_error)
    t = max(-36.0, min(36.0, t))
    return 1.0 / (1.0 + math.exp(t))


def combine_weights(w_mae: float, w_mbre: float, w_mibre: float) -> float:
    """Arithmetic mean of the three per-metric weights."""
    return (w_mae + w_mbre + w_mibre) / 3.0


def ensemble_predict(predictions, weights) -> float:
    """Weighted average of the base predictions.  Equal weights reduce to
    the exact simple mean; an all-zero weight vector (cannot arise from the
    sigmoid) also falls back to the mean."""
    predictions = np.asarray(predictions, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if predictions.size == 0 or predictions.size != weights.size:
        raise ValueError("need one weight per prediction")
    total = weights.sum()
    if total <= 0 or np.all(weights == weights[0]):
        return float(predictions.mean())
    return float((predictions * weights).sum() / total)


def karner_predict(ucp: float) -> float:
    """Fixed-productivity effort: 20 person-hours per UCP."""
    if not ucp > 0:
        raise ValueError(f"ucp must be positive, got {ucp}")
    return KARNER_PDR * ucp


def sw_productivity(env) -> float:
    """Three-level productivity from the environmental assessment: count
    factors 1..6 scored below 3 plus factors 7..8 scored above 3; up to 2
    unfavorable gives 20, 3..4 gives 28, above 4 gives 36 hours/UCP."""
    env = tuple(env)
    if len(env) != N_FACTORS:
        raise ValueError(f"expected {N_FACTORS} scores, got {len(env)}")
    scores = [validate_factor_score(e) for e in env]
    total = sum(1 for e in scores[:6] if e < 3) + sum(1 for e in scores[6:] if e > 3)
    if total <= 2:
        return SW_LEVELS[0]
    if total <= 4:
        return SW_LEVELS[1]
    return SW_LEVELS[2]


@dataclass(frozen=True)
class BaseModelParams:
    """Hyperparameters for the three base learners."""

    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    svr_gamma: float | None = None        # None = auto
    svr_tol: float = 0.001
    cart_min_split: int = 8
    cart_min_leaf: int = 4
    cart_max_depth: int = 6
    stepwise_alpha: float = 0.05

    def fit_one(self, kind: str, X: np.ndarray, y: np.ndarray):
        if kind == "svr":
            return svr_fit(X, y, c=self.svr_c, epsilon=self.svr_epsilon,
                           gamma=self.svr_gamma, tol=self.svr_tol)
        if kind == "stepwise":
            return stepwise_fit(X, y, alpha_remove=self.stepwise_alpha)
        if kind == "cart":
            return cart_fit(X, y, min_split=self.cart_min_split,
                            min_leaf=self.cart_min_leaf,
                            max_depth=self.cart_max_depth)
        raise ValueError(f"unknown base model {kind!r}")

    def to_dict(self) -> dict:
        return {
            "svr_c": self.svr_c, "svr_epsilon": self.svr_epsilon,
            "svr_gamma": self.svr_gamma, "svr_tol": self.svr_tol,
            "cart_min_split": self.cart_min_split,
            "cart_min_leaf": self.cart_min_leaf,
            "cart_max_depth": self.cart_max_depth,
            "stepwise_alpha": self.stepwise_alpha,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BaseModelParams":
        return cls(**data)


@dataclass(frozen=True)
class ErrorProfile:
    """Inner-validation errors per base model, raw and min-max normalized
    across the three models (all-equal normalizes to all-zero)."""

    raw: dict[str, tuple[float, float, float]]        # model -> (mae, mbre, mibre)
    normalized: dict[str, tuple[float, float, float]]


@dataclass(frozen=True)
class WeightBreakdown:
    w_mae: float
    w_mbre: float
    w_mibre: float
    combined: float


def predict_or_fallback(model, x, fallback: float) -> float:
    """Prediction, or the given fallback when the model cannot evaluate the
    point (a log-scaled stepwise feature at a non-positive value; possible
    for held-out or extrapolated rows after min-max scaling)."""
    try:
        return float(model.predict(x))
    except ValueError:
        return float(fallback)


def _metric_triple(actual: np.ndarray, estimate: np.ndarray) -> tuple[float, float, float]:
    abs_err = np.abs(actual - estimate)
    return (
        float(abs_err.mean()),
        float((abs_err / np.minimum(actual, estimate)).mean()),
        float((abs_err / np.maximum(actual, estimate)).mean()),
    )


def _normalize_across_models(raw: dict[str, tuple[float, float, float]]) -> dict:
    normalized = {}
    for m in range(3):
        vals = np.array([raw[name][m] for name in BASE_MODELS])
        span = vals.max() - vals.min()
        scaled = (vals - vals.min()) / span if span > 0 else np.zeros_like(vals)
        for name, v in zip(BASE_MODELS, scaled):
            normalized.setdefault(name, []).append(float(v))
    return {name: tuple(v) for name, v in normalized.items()}


def inner_error_profile(X, y, ucp=None,
                        params: BaseModelParams | None = None,
                        pdr_floor: float = PDR_FLOOR) -> ErrorProfile:
    """Leave-one-out inside the training set for each base model, scoring
    effort predictions (predicted PDR times the held-out project's UCP)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < STEPWISE_MIN_TRAIN + 1:
        raise ValueError(
            f"inner validation needs at least {STEPWISE_MIN_TRAIN + 1} "
            f"projects, got {n}")
    ucp_arr = np.ones(n) if ucp is None else np.asarray(ucp, dtype=float)
    params = params or BaseModelParams()

    predictions = {name: np.empty(n) for name in BASE_MODELS}
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        keep[i] = False
        fallback = float(y[keep].mean())
        for name in BASE_MODELS:
            model = params.fit_one(name, X[keep], y[keep])
            pred = predict_or_fallback(model, X[i], fallback)
            predictions[name][i] = max(pred, pdr_floor)
        keep[i] = True

    actual_effort = y * ucp_arr
    raw = {name: _metric_triple(actual_effort, predictions[name] * ucp_arr)
           for name in BASE_MODELS}
    return ErrorProfile(raw=raw, normalized=_normalize_across_models(raw))


@dataclass(frozen=True)
class EnsembleModel:
    models: dict[str, object]                      # fitted base models
    weights: dict[str, WeightBreakdown]
    alpha: float
    n_train: int
    train_mean: float                              # fallback prediction level
    profile: ErrorProfile | None = field(default=None, repr=False)

    def predict(self, x) -> float:
        preds = list(self.base_predictions(x).values())
        w = [self.weights[name].combined for name in BASE_MODELS]
        return ensemble_predict(preds, w)

    def base_predictions(self, x) -> dict[str, float]:
        return {name: predict_or_fallback(self.models[name], x, self.train_mean)
                for name in BASE_MODELS}

    def to_dict(self) -> dict:
        return {
            "kind": "ensemble",
            "params": {
                "models": {name: self.models[name].to_dict() for name in BASE_MODELS},
                "weights": {name: [w.w_mae, w.w_mbre, w.w_mibre, w.combined]
                            for name, w in self.weights.items()},
                "alpha": self.alpha,
                "train_mean": self.train_mean,
            },
            "metadata": {"n_train": self.n_train},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EnsembleModel":
        from .regressors.base import model_from_dict

        params = data["params"]
        models = {name: model_from_dict(params["models"][name])
                  for name in BASE_MODELS}
        weights = {name: WeightBreakdown(*vals)
                   for name, vals in params["weights"].items()}
        return cls(models=models, weights=weights, alpha=params["alpha"],
                   train_mean=params["train_mean"],
                   n_train=data["metadata"]["n_train"])


def ensemble_fit(X, y, ucp=None, alpha: float = DEFAULT_ALPHA,
                 params: BaseModelParams | None = None,
                 pdr_floor: float = PDR_FLOOR) -> EnsembleModel:
    """Fit the three base models and weight them by their sigmoid-discounted
    inner-validation errors.  Training sets too small for inner validation
    fall back to equal weights."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    params = params or BaseModelParams()
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if y.size < STEPWISE_MIN_TRAIN:
        raise ValueError(
            f"ensemble needs at least {STEPWISE_MIN_TRAIN} projects, got {y.size}")

    profile: ErrorProfile | None
    if y.size >= STEPWISE_MIN_TRAIN + 1:
        profile = inner_error_profile(X, y, ucp, params, pdr_floor)
        normalized = profile.normalized
    else:
        profile = None
        normalized = {name: (0.0, 0.0, 0.0) for name in BASE_MODELS}

    means = [float(np.mean([normalized[name][m] for name in BASE_MODELS]))
             for m in range(3)]
    weights = {}
    for name in BASE_MODELS:
        per_metric = [sigmoid_weight(normalized[name][m], means[m], alpha)
                      for m in range(3)]
        weights[name] = WeightBreakdown(*per_metric, combine_weights(*per_metric))

    models = {name: params.fit_one(name, X, y) for name in BASE_MODELS}
    return EnsembleModel(models=models, weights=weights, alpha=alpha,
                         n_train=y.size, train_mean=float(y.mean()),
                         profile=profile)


@dataclass(frozen=True)
class KarnerModel:
    """Fixed 20 hours/UCP baseline; features are ignored."""

    def predict(self, x) -> float:
        return KARNER_PDR

    def to_dict(self) -> dict:
        return {"kind": "karner", "params": {}, "metadata": {}}

    @classmethod
    def from_dict(cls, data: dict) -> "KarnerModel":
        return cls()


@dataclass(frozen=True)
class SwModel:
    """Three-level productivity baseline driven by the test project's
    environmental assessment."""

    def predict_env(self, env) -> float:
        return sw_productivity(env)

    def to_dict(self) -> dict:
        return {"kind": "sw", "params": {}, "metadata": {}}

    @classmethod
    def from_dict(cls, data: dict) -> "SwModel":
        return cls()
