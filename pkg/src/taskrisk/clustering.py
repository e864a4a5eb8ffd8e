"""PAM k-medoid clustering in factor-score space with silhouette validation.

The BUILD phase is deterministic greedy by default (lowest index wins
ties); a seeded random start (`init="random"`) exists for comparison runs.
SWAP applies the best strictly-cost-reducing exchange until none is left.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UndefinedSilhouetteError
from .kernels import pam_build, pam_swap

METRICS = ("euclidean", "manhattan")


@dataclass(frozen=True)
class DissimilarityMatrix:
    """Symmetric pairwise distances with a zero diagonal."""

    ids: tuple[str, ...]
    values: np.ndarray
    metric: str

    def __post_init__(self):
        v = self.values
        n = len(self.ids)
        if self.metric not in METRICS:
            raise ParameterError(f"metric must be one of {METRICS}")
        if v.shape != (n, n):
            raise ParameterError("dissimilarity shape does not match ids")
        if np.max(np.abs(v - v.T)) > 1e-12:
            raise ParameterError("dissimilarity matrix is not symmetric")
        if np.max(np.abs(np.diag(v))) != 0.0:
            raise ParameterError("dissimilarity diagonal must be zero")
        if v.min() < 0.0:
            raise ParameterError("dissimilarities must be non-negative")

    @property
    def n(self) -> int:
        return len(self.ids)


@dataclass
class ClusterSolution:
    k: int
    medoids: list[int]
    assignment: np.ndarray
    cost_z: float
    cost_history: list[float]
    silhouettes: np.ndarray | None = None
    mean_silhouette: float | None = None


def dissimilarity_matrix(
    scores: np.ndarray, metric: str = "euclidean", ids: list[str] | None = None
) -> DissimilarityMatrix:
    """Pairwise distances between score rows under the chosen metric."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim == 1:
        scores = scores[:, None]
    n = scores.shape[0]
    if n < 2:
        raise ParameterError("need at least 2 points")
    if metric not in METRICS:
        raise ParameterError(f"metric must be one of {METRICS}")
    if ids is None:
        ids = [str(i) for i in range(n)]
    diff = scores[:, None, :] - scores[None, :, :]
    if metric == "euclidean":
        d = np.sqrt((diff * diff).sum(axis=2))
    else:
        d = np.abs(diff).sum(axis=2)
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return DissimilarityMatrix(tuple(ids), d, metric)


def pam(
    d: DissimilarityMatrix, k: int, seed: int = 0, init: str = "build"
) -> ClusterSolution:
    """Partitioning Around Medoids: BUILD (or seeded random start) + SWAP.

    Points are assigned to their nearest medoid, ties broken toward the
    lowest medoid point index; cluster labels follow the ascending order of
    medoid indices. cost_z is the sum of distances of points to their
    medoids.
    """
    n = d.n
    if not 1 <= k <= n:
        raise ParameterError(f"k must satisfy 1 <= k <= n (k={k}, n={n})")
    if init == "build":
        medoids = pam_build(d.values, k)
    elif init == "random":
        if seed < 0:
            raise ParameterError("seed must be a non-negative integer")
        rng = np.random.default_rng([seed, k])
        medoids = np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
    else:
        raise ParameterError("init must be 'build' or 'random'")
    medoids, history = pam_swap(d.values, medoids)

    dm = d.values[:, medoids]
    assignment = np.argmin(dm, axis=1)
    cost = float(dm[np.arange(n), assignment].sum())
    return ClusterSolution(
        k=k,
        medoids=[int(m) for m in medoids],
        assignment=assignment.astype(np.int64),
        cost_z=cost,
        cost_history=history,
    )


def silhouette(d: DissimilarityMatrix, assignment: np.ndarray) -> tuple[np.ndarray, float]:
    """Per-point silhouettes s(i) = (b-a)/max(a,b) and their unweighted mean.

    a(i) is the mean distance to the other members of i's cluster; b(i) the
    smallest mean distance to another non-empty cluster. Singleton clusters
    contribute s(i) = 0, as does the a(i) = b(i) = 0 case.
    """
    assignment = np.asarray(assignment)
    n = d.n
    if assignment.shape != (n,):
        raise ParameterError("assignment length does not match the matrix")
    labels = np.unique(assignment)
    if labels.min() < 0:
        raise ParameterError("cluster labels must be non-negative")
    if len(labels) < 2:
        raise UndefinedSilhouetteError("silhouette needs at least 2 non-empty clusters")

    k = int(labels.max()) + 1
    sizes = np.bincount(assignment, minlength=k)
    # column c: total distance from each point to cluster c members
    sums = np.zeros((n, k))
    for c in labels:
        sums[:, c] = d.values[:, assignment == c].sum(axis=1)

    s = np.zeros(n)
    for i in range(n):
        own = assignment[i]
        if sizes[own] == 1:
            continue
        a = sums[i, own] / (sizes[own] - 1)
        b = np.inf
        for c in labels:
            if c != own:
                b = min(b, sums[i, c] / sizes[c])
        peak = max(a, b)
        s[i] = (b - a) / peak if peak > 0.0 else 0.0
    return s, float(s.mean())


def with_silhouettes(d: DissimilarityMatrix, solution: ClusterSolution) -> ClusterSolution:
    """Fill the silhouette fields of a PAM solution in place."""
    s, mean = silhouette(d, solution.assignment)
    solution.silhouettes = s
    solution.mean_silhouette = mean
    return solution


def select_k(
    d: DissimilarityMatrix, k_min: int = 2, k_max: int = 12, seed: int = 0
) -> tuple[int, list[tuple[int, float, float]]]:
    """Scan k in [k_min, k_max]; best k maximizes mean silhouette, ties
    resolving toward the smaller k. Returns (best_k, rows of
    (k, mean_silhouette, cost_z))."""
    if not 2 <= k_min <= k_max < d.n:
        raise ParameterError(
            f"need 2 <= k_min <= k_max < n (k_min={k_min}, k_max={k_max}, n={d.n})"
        )
    rows: list[tuple[int, float, float]] = []
    best_k = k_min
    best_sil = -np.inf
    for k in range(k_min, k_max + 1):
        sol = with_silhouettes(d, pam(d, k, seed=seed))
        rows.append((k, sol.mean_silhouette, sol.cost_z))
        if sol.mean_silhouette > best_sil:
            best_sil = sol.mean_silhouette
            best_k = k
    return best_k, rows
