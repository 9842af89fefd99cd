"""Accuracy metrics, the leave-one-out harness and the full benchmark grid.

All metrics are computed on effort (predicted PDR times the test project's
measured UCP), which is the quantity the benchmark tables report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset, Project
from .ensemble import (
    BaseModelParams,
    KARNER_PDR,
    PDR_FLOOR,
    WeightBreakdown,
    ensemble_fit,
    predict_or_fallback,
    sw_productivity,
)
from .locality import (
    Partitioning,
    assign,
    derive_seed,
    partition_by_factor,
    partition_by_kmeans,
)
from .preprocess import minmax_apply, minmax_fit
from .regressors.stepwise import MIN_TRAIN as STEPWISE_MIN_TRAIN

LEARNER_MODELS = ("svr", "stepwise", "cart", "ensemble")
BASELINE_MODELS = ("karner", "sw")
ALL_MODELS = LEARNER_MODELS + BASELINE_MODELS

SCHEME_NONE = "none"
SCHEME_KMEANS = "kmeans"
FACTOR_SCHEMES = tuple(f"e{i}" for i in range(1, 9))
ALL_SCHEMES = FACTOR_SCHEMES + (SCHEME_KMEANS,)

MIN_DATASET_SIZE = 10
DEFAULT_MIN_LOCAL = 5

# smallest training set each model kind can be fit on
_MODEL_MIN_TRAIN = {
    "svr": 2,
    "stepwise": STEPWISE_MIN_TRAIN,
    "cart": 1,
    "ensemble": STEPWISE_MIN_TRAIN,
    "karner": 0,
    "sw": 0,
}


def mae(actuals, estimates) -> float:
    """Mean absolute error."""
    a, e = _paired(actuals, estimates)
    return float(np.mean(np.abs(a - e)))


def mbre(actuals, estimates) -> float:
    """Mean balanced relative error: |e - e_hat| / min(e, e_hat)."""
    a, e = _paired(actuals, estimates)
    _require_positive(a, e)
    return float(np.mean(np.abs(a - e) / np.minimum(a, e)))


def mibre(actuals, estimates) -> float:
    """Mean inverse balanced relative error: |e - e_hat| / max(e, e_hat)."""
    a, e = _paired(actuals, estimates)
    _require_positive(a, e)
    return float(np.mean(np.abs(a - e) / np.maximum(a, e)))


def _paired(actuals, estimates) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actuals, dtype=float)
    e = np.asarray(estimates, dtype=float)
    if a.size != e.size:
        raise ValueError(f"length mismatch: {a.size} vs {e.size}")
    if a.size == 0:
        raise ValueError("metrics need at least one pair")
    return a, e


def _require_positive(a: np.ndarray, e: np.ndarray) -> None:
    if a.min() <= 0:
        raise ValueError("actual efforts must be positive")
    if e.min() <= 0:
        raise ValueError("estimates must be positive (apply the PDR floor)")


@dataclass(frozen=True)
class MetricTriple:
    mae: float
    mbre: float
    mibre: float

    @classmethod
    def compute(cls, actuals, estimates) -> "MetricTriple":
        return cls(mae=mae(actuals, estimates),
                   mbre=mbre(actuals, estimates),
                   mibre=mibre(actuals, estimates))


@dataclass(frozen=True)
class RunSettings:
    """Hyperparameters and seeds for a benchmark run; defaults match the
    documented per-module defaults."""

    seed: int = 42
    min_local: int = DEFAULT_MIN_LOCAL
    pdr_floor: float = PDR_FLOOR
    ensemble_alpha: float = 15.0
    k_min: int = 2
    k_max: int = 10
    base_params: BaseModelParams = field(default_factory=BaseModelParams)
    # record full partition membership in each fold trace (for structural
    # leak checks; off by default to keep reports small)
    keep_partitions: bool = False

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "min_local": self.min_local,
            "pdr_floor": self.pdr_floor,
            "ensemble_alpha": self.ensemble_alpha,
            "k_min": self.k_min,
            "k_max": self.k_max,
            "base_params": self.base_params.to_dict(),
            "keep_partitions": self.keep_partitions,
        }


@dataclass(frozen=True)
class FoldTrace:
    """One leave-one-out fold: which local data trained the model and what
    it predicted for the held-out project."""

    test_id: str
    partition_label: str | None
    fallback: bool
    local_size: int
    local_ids: tuple[str, ...]
    pdr_pred: float
    effort_pred: float
    effort_actual: float
    ucp: float
    base_pdrs: dict[str, float] | None = None
    weights: dict[str, WeightBreakdown] | None = None
    partition_members: dict[str, tuple[str, ...]] | None = None


@dataclass(frozen=True)
class EvaluationReport:
    scheme: str
    model: str
    metrics: MetricTriple
    folds: tuple[FoldTrace, ...]
    seed: int
    settings: dict

    @property
    def n(self) -> int:
        return len(self.folds)


def _build_partitioning(training: Dataset, scheme: str, fold_seed: int,
                        settings: RunSettings) -> Partitioning:
    if scheme in FACTOR_SCHEMES:
        return partition_by_factor(training, int(scheme[1:]))
    if scheme == SCHEME_KMEANS:
        return partition_by_kmeans(training, k_min=settings.k_min,
                                   k_max=settings.k_max, seed=fold_seed,
                                   k_cap=len(training) // 2)
    raise ValueError(f"unknown scheme {scheme!r}")


def _fit_and_predict(model: str, local: list[Project], test: Project,
                     settings: RunSettings):
    """Fit the configured model on the local projects (scaler fit on the
    local set only) and predict the test project's PDR."""
    features = np.array([p.size_features() for p in local])
    targets = np.array([p.pdr for p in local])
    ucps = np.array([p.ucp for p in local])
    scaler = minmax_fit(features)
    X = minmax_apply(scaler, features)
    x_test = minmax_apply(scaler, np.array(test.size_features()))

    base_pdrs = None
    weights = None
    if model == "ensemble":
        fitted = ensemble_fit(X, targets, ucps, alpha=settings.ensemble_alpha,
                              params=settings.base_params,
                              pdr_floor=settings.pdr_floor)
        base_pdrs = fitted.base_predictions(x_test)
        weights = fitted.weights
        return fitted.predict(x_test), base_pdrs, weights
    fitted = settings.base_params.fit_one(model, X, targets)
    return predict_or_fallback(fitted, x_test, float(targets.mean())), \
        base_pdrs, weights


def loocv_run(dataset: Dataset, scheme: str, model: str,
              settings: RunSettings | None = None) -> EvaluationReport:
    """Leave-one-out evaluation of one (scheme, model) pair.

    Per fold: the partitioning, the feature scaler and the model fit all see
    only the training projects.  A local set smaller than the minimum (or a
    missing partition label) falls back to the full training set, flagged.
    """
    settings = settings or RunSettings()
    if scheme != SCHEME_NONE and scheme not in ALL_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if model not in ALL_MODELS:
        raise ValueError(f"unknown model {model!r}")
    if len(dataset) < MIN_DATASET_SIZE:
        raise ValueError(
            f"LOOCV needs at least {MIN_DATASET_SIZE} projects, got {len(dataset)}")

    min_needed = max(settings.min_local, _MODEL_MIN_TRAIN[model])
    folds = []
    actuals = []
    estimates = []
    for fold_index, test in enumerate(dataset):
        training = [p for p in dataset if p.id != test.id]

        label: str | None = None
        fallback = False
        partition_members = None
        local = training
        if scheme != SCHEME_NONE and model not in BASELINE_MODELS:
            training_ds = Dataset(tuple(training), name=dataset.name)
            partitioning = _build_partitioning(
                training_ds, scheme, derive_seed(settings.seed, fold_index),
                settings)
            if settings.keep_partitions:
                partition_members = dict(partitioning.partitions)
            label = assign(test, partitioning)
            members = partitioning.partitions.get(label)
            if members is None:
                fallback = True
            else:
                by_id = {p.id: p for p in training}
                candidate = [by_id[pid] for pid in members]
                if len(candidate) < min_needed:
                    fallback = True
                else:
                    local = candidate

        if model == "karner":
            pdr_raw = KARNER_PDR
            base_pdrs = weights = None
        elif model == "sw":
            pdr_raw = sw_productivity(test.env)
            base_pdrs = weights = None
        else:
            pdr_raw, base_pdrs, weights = _fit_and_predict(
                model, local, test, settings)

        pdr = max(pdr_raw, settings.pdr_floor)
        effort = pdr * test.ucp
        folds.append(FoldTrace(
            test_id=test.id,
            partition_label=label,
            fallback=fallback,
            local_size=len(local),
            local_ids=tuple(p.id for p in local),
            pdr_pred=pdr,
            effort_pred=effort,
            effort_actual=test.effort,
            ucp=test.ucp,
            base_pdrs=base_pdrs,
            weights=weights,
            partition_members=partition_members,
        ))
        actuals.append(test.effort)
        estimates.append(effort)

    return EvaluationReport(
        scheme=scheme,
        model=model,
        metrics=MetricTriple.compute(actuals, estimates),
        folds=tuple(folds),
        seed=settings.seed,
        settings=settings.to_dict(),
    )


def benchmark_all(dataset: Dataset, settings: RunSettings | None = None,
                  schemes=None, models=None) -> list[EvaluationReport]:
    """Every locality scheme crossed with the four learners, plus
    no-locality runs for the learners and both baselines.

    `schemes`/`models` filter the grid; baselines ignore locality so they
    only appear in the no-locality rows.
    """
    settings = settings or RunSettings()
    scheme_list = list(schemes) if schemes is not None \
        else list(ALL_SCHEMES) + [SCHEME_NONE]
    model_list = list(models) if models is not None else list(ALL_MODELS)

    reports = []
    for scheme in scheme_list:
        for model in model_list:
            if scheme != SCHEME_NONE and model in BASELINE_MODELS:
                continue
            reports.append(loocv_run(dataset, scheme, model, settings))
    return reports
