"""Partitioning a dataset into local datasets, either by merged influence
levels of one environmental factor or by k-means over all eight factors
with Dunn-index selection of k."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dataset import FACTOR_MAX, FACTOR_MIN, Dataset, Project
from .preprocess import ScalerParams, minmax_apply, minmax_fit

KMEANS_MAX_ITER = 300


class MergedLevel(enum.IntEnum):
    """Three-way merge of the six raw influence levels."""

    L12 = 0   # scores 0, 1, 2
    L3 = 1    # score 3
    L45 = 2   # scores 4, 5

    @property
    def label(self) -> str:
        return self.name


def merge_level(score: int) -> MergedLevel:
    """Map a raw 0..5 score onto the merged level (low boundary levels are
    pooled; 3 stays alone; 4 and 5 are pooled)."""
    if not FACTOR_MIN <= score <= FACTOR_MAX:
        raise ValueError(f"score must be in 0..5, got {score}")
    if score <= 2:
        return MergedLevel.L12
    if score == 3:
        return MergedLevel.L3
    return MergedLevel.L45


def derive_seed(*parts: int) -> int:
    """Stable derived seed from integer parts (for per-k and per-fold runs)."""
    state = np.random.SeedSequence(tuple(int(p) for p in parts))
    return int(state.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Partitioning:
    """Labeled, disjoint member-id sets covering the input dataset.

    Factor partitionings carry merged-level labels; k-means partitionings
    additionally carry the chosen k, the centroids in normalized factor
    space and the scaler that maps raw scores into that space.
    """

    scheme: str
    partitions: dict[str, tuple[str, ...]]
    k: int | None = None
    centroids: np.ndarray | None = None
    env_scaler: ScalerParams | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for label, members in self.partitions.items():
            if not members:
                raise ValueError(f"partition {label!r} is empty")
            overlap = seen.intersection(members)
            if overlap:
                raise ValueError(f"ids in multiple partitions: {sorted(overlap)}")
            seen.update(members)

    def member_ids(self) -> set[str]:
        out: set[str] = set()
        for members in self.partitions.values():
            out.update(members)
        return out

    def label_of(self, project_id: str) -> str:
        for label, members in self.partitions.items():
            if project_id in members:
                return label
        raise KeyError(project_id)

    def to_csv_rows(self) -> list[tuple[str, str]]:
        """Rows for the `id,partition_label` export."""
        return [(pid, label)
                for label, members in self.partitions.items()
                for pid in members]


def partition_by_factor(dataset: Dataset, factor_index: int) -> Partitioning:
    """Split by the merged influence level of one factor.  Empty merged
    levels are omitted, so there are at most three partitions."""
    if not 1 <= factor_index <= 8:
        raise ValueError(f"factor index must be in 1..8, got {factor_index}")
    if len(dataset) == 0:
        raise ValueError("cannot partition an empty dataset")
    buckets: dict[str, list[str]] = {}
    for p in dataset:
        label = merge_level(p.factor(factor_index)).label
        buckets.setdefault(label, []).append(p.id)
    ordered = {lvl.label: tuple(buckets[lvl.label])
               for lvl in MergedLevel if lvl.label in buckets}
    return Partitioning(scheme=f"e{factor_index}", partitions=ordered)


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    n_iter: int
    inertia_history: tuple[float, ...]
    reseeds: int


def _inertia(points: np.ndarray, assignments: np.ndarray,
             centroids: np.ndarray) -> float:
    diffs = points - centroids[assignments]
    return float(np.sum(diffs * diffs))


def kmeans(points: np.ndarray, k: int, seed: int) -> KMeansResult:
    """Lloyd's algorithm with Euclidean distance.

    Centroids start at k distinct points chosen by the seeded generator, and
    iteration stops at an assignment fixpoint or after 300 iterations.  If a
    cluster empties, its centroid is re-seeded from the point currently
    farthest from its own centroid (which keeps the objective non-increasing).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    unique = np.unique(points, axis=0)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if k > unique.shape[0]:
        raise ValueError(
            f"k={k} exceeds the {unique.shape[0]} distinct points")

    rng = np.random.default_rng(seed)
    centroids = unique[rng.choice(unique.shape[0], size=k, replace=False)]

    assignments = np.full(points.shape[0], -1)
    history: list[float] = []
    reseeds = 0
    n_iter = 0
    for n_iter in range(1, KMEANS_MAX_ITER + 1):
        dists = np.linalg.norm(points[:, None, :] - centroids[None, :, :], axis=2)
        new_assignments = np.argmin(dists, axis=1)

        # A reseed can empty the donor cluster, so rescan until stable;
        # terminates because k never exceeds the number of distinct points.
        for _ in range(points.shape[0] + 1):
            empty = [c for c in range(k) if not np.any(new_assignments == c)]
            if not empty:
                break
            for cluster in empty:
                assigned_dist = dists[np.arange(points.shape[0]), new_assignments]
                farthest = int(np.argmax(assigned_dist))
                new_assignments[farthest] = cluster
                centroids[cluster] = points[farthest]
                dists[:, cluster] = np.linalg.norm(points - centroids[cluster], axis=1)
                reseeds += 1
        else:
            raise RuntimeError("could not repopulate empty clusters")

        converged = np.array_equal(new_assignments, assignments)
        assignments = new_assignments
        for cluster in range(k):
            centroids[cluster] = points[assignments == cluster].mean(axis=0)
        history.append(_inertia(points, assignments, centroids))
        if converged:
            break
    return KMeansResult(assignments=assignments, centroids=centroids,
                        n_iter=n_iter, inertia_history=tuple(history),
                        reseeds=reseeds)


def dunn_index(points: np.ndarray, assignments: np.ndarray,
               centroids: np.ndarray) -> float:
    """Minimum pairwise centroid distance over maximum intra-cluster
    point-to-point diameter.  All-singleton clusterings (zero diameter)
    give +inf unless two centroids coincide."""
    points = np.asarray(points, dtype=float)
    centroids = np.asarray(centroids, dtype=float)
    k = centroids.shape[0]
    if k < 2:
        raise ValueError("Dunn index needs at least 2 clusters")
    for cluster in range(k):
        if not np.any(assignments == cluster):
            raise ValueError(f"cluster {cluster} is empty")

    gaps = [float(np.linalg.norm(centroids[a] - centroids[b]))
            for a in range(k) for b in range(a + 1, k)]
    min_gap = min(gaps)

    max_diameter = 0.0
    for cluster in range(k):
        members = points[assignments == cluster]
        if members.shape[0] < 2:
            continue
        diffs = members[:, None, :] - members[None, :, :]
        diameter = float(np.sqrt((diffs * diffs).sum(axis=2)).max())
        max_diameter = max(max_diameter, diameter)

    if max_diameter == 0.0:
        return 0.0 if min_gap == 0.0 else float("inf")
    return min_gap / max_diameter


DEFAULT_KMEANS_RESTARTS = 8


def best_kmeans(points: np.ndarray, k: int, seed: int,
                restarts: int = DEFAULT_KMEANS_RESTARTS) -> KMeansResult:
    """Best-of-restarts Lloyd run (lowest final inertia); restart seeds are
    derived from (seed, restart index), so the result is deterministic."""
    best: KMeansResult | None = None
    for r in range(restarts):
        result = kmeans(points, k, derive_seed(seed, r))
        if best is None or result.inertia_history[-1] < best.inertia_history[-1]:
            best = result
    assert best is not None
    return best


def select_k(points: np.ndarray, k_min: int, k_max: int, seed: int,
             restarts: int = DEFAULT_KMEANS_RESTARTS) -> tuple[int, KMeansResult]:
    """Run k-means for each k in [k_min, k_max] (fresh derived seed per k,
    several restarts against bad local optima) and keep the k with the
    largest Dunn index, ties toward smaller k."""
    points = np.asarray(points, dtype=float)
    n_distinct = np.unique(points, axis=0).shape[0]
    if n_distinct < 2:
        raise ValueError("need at least 2 distinct points to cluster")
    if k_min < 2 or k_max < k_min:
        raise ValueError(f"invalid k range [{k_min}, {k_max}]")
    k_max = min(k_max, n_distinct)
    if k_max < k_min:
        raise ValueError(
            f"only {n_distinct} distinct points, cannot use k >= {k_min}")

    best_k = None
    best_result = None
    best_index = -float("inf")
    for k in range(k_min, k_max + 1):
        result = best_kmeans(points, k, derive_seed(seed, k), restarts)
        index = dunn_index(points, result.assignments, result.centroids)
        if index > best_index:
            best_k, best_result, best_index = k, result, index
    assert best_k is not None and best_result is not None
    return best_k, best_result


def partition_by_kmeans(dataset: Dataset, k_min: int = 2, k_max: int = 10,
                        seed: int = 0,
                        k_cap: int | None = None) -> Partitioning:
    """Cluster the dataset on its eight min-max-normalized factor scores and
    label partitions c0..c(k-1).  `k_cap` optionally bounds k further (the
    benchmark harness caps it at half the training size)."""
    if len(dataset) == 0:
        raise ValueError("cannot partition an empty dataset")
    env = dataset.env_matrix()
    scaler = minmax_fit(env)
    normalized = minmax_apply(scaler, env)
    if k_cap is not None:
        k_max = min(k_max, k_cap)
    k_max = max(k_max, k_min)
    k, result = select_k(normalized, k_min, k_max, seed)

    ids = dataset.ids()
    partitions = {
        f"c{cluster}": tuple(ids[i] for i in range(len(dataset))
                             if result.assignments[i] == cluster)
        for cluster in range(k)
    }
    return Partitioning(scheme="kmeans", partitions=partitions, k=k,
                        centroids=result.centroids, env_scaler=scaler)


def assign(project: Project, partitioning: Partitioning) -> str:
    """Partition label for a project that was not part of the build.

    Factor partitionings map through merge_level; the label may be absent
    from the partitioning when that merged level was empty (callers fall
    back to the full training set).  K-means partitionings assign to the
    nearest centroid, ties to the lowest cluster index.
    """
    if partitioning.centroids is not None:
        assert partitioning.env_scaler is not None
        x = minmax_apply(partitioning.env_scaler,
                         np.array(project.env, dtype=float))
        dists = np.linalg.norm(partitioning.centroids - x, axis=1)
        return f"c{int(np.argmin(dists))}"
    factor_index = int(partitioning.scheme.lstrip("e"))
    return merge_level(project.factor(factor_index)).label
