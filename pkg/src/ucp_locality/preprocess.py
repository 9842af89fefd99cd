"""Outlier screening, feature scaling, normality checking and the log
transform used before fitting regression models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .dataset import Dataset

# Size/effort variables screened for outliers; these are the heavy-tailed
# columns in this kind of dataset.
DEFAULT_OUTLIER_FEATURES = ("effort", "ucp", "uaw", "uucw", "pdr")
DEFAULT_Z_THRESHOLD = 3.0


@dataclass(frozen=True)
class OutlierReport:
    """Per-project z-score screening result."""

    ids: tuple[str, ...]
    features: tuple[str, ...]
    zscores: np.ndarray          # n x len(features); nan where stdev was 0
    flagged: tuple[bool, ...]
    threshold: float

    @property
    def flagged_ids(self) -> tuple[str, ...]:
        return tuple(i for i, f in zip(self.ids, self.flagged) if f)

    def max_abs_z(self) -> np.ndarray:
        """Largest |z| over screened features per project; 0 when every
        feature was constant."""
        return np.max(np.abs(np.nan_to_num(self.zscores, nan=0.0)), axis=1)

    def to_csv_rows(self) -> list[tuple[str, str, str]]:
        """Rows for the `id,flagged,max_abs_z` export."""
        maxes = self.max_abs_z()
        return [(pid, str(bool(flag)).lower(), repr(float(m)))
                for pid, flag, m in zip(self.ids, self.flagged, maxes)]


def zscore_outliers(dataset: Dataset,
                    features: tuple[str, ...] = DEFAULT_OUTLIER_FEATURES,
                    threshold: float = DEFAULT_Z_THRESHOLD) -> OutlierReport:
    """Flag projects with any feature more than `threshold` sample standard
    deviations from the feature mean.  Constant features are skipped."""
    if len(dataset) < 3:
        raise ValueError("outlier screening needs at least 3 projects")
    if not threshold > 0:
        raise ValueError(f"threshold must be positive, got {threshold}")

    n = len(dataset)
    zscores = np.full((n, len(features)), np.nan)
    for j, feat in enumerate(features):
        values = dataset.column(feat)
        std = values.std(ddof=1)
        if std > 0:
            zscores[:, j] = (values - values.mean()) / std
    flagged = np.max(np.abs(np.nan_to_num(zscores, nan=0.0)), axis=1) > threshold
    return OutlierReport(
        ids=dataset.ids(),
        features=tuple(features),
        zscores=zscores,
        flagged=tuple(bool(f) for f in flagged),
        threshold=threshold,
    )


def remove_outliers(dataset: Dataset, report: OutlierReport) -> Dataset:
    """Dataset minus the flagged projects, order preserved."""
    if report.ids != dataset.ids():
        raise ValueError("report was not produced from this dataset")
    kept = tuple(p for p, flag in zip(dataset, report.flagged) if not flag)
    if not kept:
        raise ValueError("removing outliers would empty the dataset")
    return Dataset(kept, name=dataset.name)


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature (min, max) learned from a training sample."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if len(self.mins) != len(self.maxs):
            raise ValueError("mins and maxs must have equal length")
        for lo, hi in zip(self.mins, self.maxs):
            if hi < lo:
                raise ValueError(f"max {hi} < min {lo}")

    @property
    def n_features(self) -> int:
        return len(self.mins)

    def to_dict(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalerParams":
        return cls(mins=tuple(data["mins"]), maxs=tuple(data["maxs"]))


def minmax_fit(values: np.ndarray) -> ScalerParams:
    """Learn per-feature min/max from a (n, f) training array (or (n,) for a
    single feature)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] < 1:
        raise ValueError("cannot fit a scaler on an empty sample")
    return ScalerParams(
        mins=tuple(float(v) for v in arr.min(axis=0)),
        maxs=tuple(float(v) for v in arr.max(axis=0)),
    )


def minmax_apply(params: ScalerParams, values: np.ndarray) -> np.ndarray:
    """Scale values by (x - min) / (max - min); a degenerate span maps to 0.
    Values outside the fit range extrapolate outside [0, 1].

    A 2-d (m, f) array scales row-wise.  A 1-d array is a column of samples
    when the scaler has one feature, otherwise a single f-long sample; the
    output keeps the input's shape.
    """
    arr = np.asarray(values, dtype=float)
    single_sample = arr.ndim == 1 and params.n_features > 1
    if arr.ndim == 1:
        arr = arr[None, :] if single_sample else arr[:, None]
    if arr.shape[1] != params.n_features:
        raise ValueError(
            f"expected {params.n_features} features, got {arr.shape[1]}")
    mins = np.array(params.mins)
    spans = np.array(params.maxs) - mins
    out = np.zeros_like(arr)
    nonzero = spans > 0
    out[:, nonzero] = (arr[:, nonzero] - mins[nonzero]) / spans[nonzero]
    if np.asarray(values).ndim == 1:
        return out[0] if single_sample else out[:, 0]
    return out


@dataclass(frozen=True)
class NormalityResult:
    is_normal: bool
    statistic: float
    critical_value: float
    alpha: float


# Critical values for the normality KS test with estimated mean/stdev
# (Lilliefors).  The modified statistic D * (sqrt(n) - 0.01 + 0.85/sqrt(n))
# is compared against a constant per significance level (Stephens' table).
_LILLIEFORS_COEFF = {0.15: 0.775, 0.10: 0.819, 0.05: 0.895,
                     0.025: 0.995, 0.01: 1.035}


def _lilliefors_critical(n: int, alpha: float) -> float:
    alphas = sorted(_LILLIEFORS_COEFF)
    if not alphas[0] <= alpha <= alphas[-1]:
        raise ValueError(
            f"alpha must be within [{alphas[0]}, {alphas[-1]}], got {alpha}")
    if alpha in _LILLIEFORS_COEFF:
        coeff = _LILLIEFORS_COEFF[alpha]
    else:
        hi = min(a for a in alphas if a > alpha)
        lo = max(a for a in alphas if a < alpha)
        t = (alpha - lo) / (hi - lo)
        coeff = (1 - t) * _LILLIEFORS_COEFF[lo] + t * _LILLIEFORS_COEFF[hi]
    return coeff / (math.sqrt(n) - 0.01 + 0.85 / math.sqrt(n))


def normality_check(values: np.ndarray, alpha: float = 0.05) -> NormalityResult:
    """One-sample KS test against a normal with the sample's mean and
    stdev, using Lilliefors-adjusted critical values.

    A constant sample is reported as not normal with statistic 1.
    """
    arr = np.sort(np.asarray(values, dtype=float))
    n = arr.size
    if n < 5:
        raise ValueError(f"normality check needs at least 5 values, got {n}")
    critical = _lilliefors_critical(n, alpha)
    std = arr.std(ddof=1)
    if std == 0:
        return NormalityResult(False, 1.0, critical, alpha)
    cdf = ndtr((arr - arr.mean()) / std)
    steps = np.arange(1, n + 1) / n
    d_plus = np.max(steps - cdf)
    d_minus = np.max(cdf - (steps - 1.0 / n))
    statistic = float(max(d_plus, d_minus))
    return NormalityResult(statistic <= critical, statistic, critical, alpha)


def log_transform(values: np.ndarray) -> np.ndarray:
    """Elementwise natural log; rejects non-positive values."""
    arr = np.asarray(values, dtype=float)
    if arr.size and arr.min() <= 0:
        raise ValueError("log transform requires strictly positive values")
    return np.log(arr)
