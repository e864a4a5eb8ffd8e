"""Susceptibility flags by factor-score quantiles, vulnerable-cluster
labeling, and assembly of the final vulnerability report.

No vulnerability ranking is produced; occupations are only segregated by
criteria and cluster membership.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .clustering import ClusterSolution
from .errors import ParameterError, TieWarning

DIRECTIONS = ("top", "bottom")


@dataclass(frozen=True)
class SusceptibilityCriterion:
    """Quantile rule on one factor, e.g. the top 20% on a hazard factor."""

    factor_index: int
    direction: str
    fraction: float = 0.20
    label: str = ""

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ParameterError(f"direction must be one of {DIRECTIONS}")
        if not 0.0 < self.fraction < 1.0:
            raise ParameterError("fraction must be in (0, 1)")
        if self.factor_index < 0:
            raise ParameterError("factor_index must be >= 0")
        if not self.label:
            raise ParameterError("criterion label must be non-empty")


@dataclass
class VulnerabilityReport:
    criteria: list[SusceptibilityCriterion]
    flags: dict[str, set[str]]
    susceptibility_type: dict[str, str]
    vulnerable_clusters: set[int]
    vulnerable_occupations: list[str]
    cluster_of: dict[str, int]
    threshold_sd: float
    counts_per_cluster: dict[int, int] = field(default_factory=dict)
    counts_per_type: dict[str, int] = field(default_factory=dict)


def subset_type(satisfied: set[str], criteria: list[SusceptibilityCriterion]) -> str:
    """Stable identifier for the satisfied-criteria subset ("none" if empty;
    otherwise labels joined with '+' in configured criteria order)."""
    ordered = [c.label for c in criteria if c.label in satisfied]
    return "+".join(ordered) if ordered else "none"


def score_criteria(
    scores: np.ndarray,
    criteria: list[SusceptibilityCriterion],
    occupation_ids: list[str],
) -> tuple[dict[str, set[str]], dict[str, str]]:
    """Flag the ceil(fraction*n) extreme scorers per criterion.

    Ties at the cutoff are resolved by including the lower row index first;
    a warning notes when that tie-break fired.
    """
    if not criteria:
        raise ParameterError("criteria list is empty")
    scores = np.asarray(scores, dtype=np.float64)
    n, m = scores.shape
    if len(occupation_ids) != n:
        raise ParameterError("occupation_ids length does not match scores")
    labels = [c.label for c in criteria]
    if len(set(labels)) != len(labels):
        raise ParameterError("criterion labels must be unique")

    flags: dict[str, set[str]] = {soc: set() for soc in occupation_ids}
    for crit in criteria:
        if crit.factor_index >= m:
            raise ParameterError(
                f"criterion {crit.label!r} references factor {crit.factor_index} "
                f"but only {m} factors exist"
            )
        if crit.fraction * n < 1.0:
            raise ParameterError(
                f"criterion {crit.label!r}: fraction {crit.fraction} selects "
                f"less than one of {n} occupations"
            )
        count = int(np.ceil(crit.fraction * n))
        col = scores[:, crit.factor_index]
        key = -col if crit.direction == "top" else col
        order = np.argsort(key, kind="stable")
        chosen = order[:count]
        if count < n and key[order[count - 1]] == key[order[count]]:
            warnings.warn(
                f"tie at the {crit.label!r} cutoff; lower row index included first",
                TieWarning,
                stacklevel=2,
            )
        for i in chosen:
            flags[occupation_ids[int(i)]].add(crit.label)

    types = {soc: subset_type(flags[soc], criteria) for soc in occupation_ids}
    return flags, types


def label_clusters(
    solution: ClusterSolution,
    scores: np.ndarray,
    susceptible_factors: set[int],
    bottleneck_factors: set[int],
    threshold_sd: float = 0.5,
) -> set[int]:
    """Vulnerable clusters by medoid profile.

    A cluster is vulnerable iff its medoid's mean score over the
    susceptible factors exceeds +threshold_sd, or its medoid's mean score
    over the bottleneck factors falls below -threshold_sd. Either factor
    set may be empty (its condition then never fires), but not both.
    """
    susceptible = sorted(susceptible_factors)
    bottleneck = sorted(bottleneck_factors)
    if not susceptible and not bottleneck:
        raise ParameterError("susceptible and bottleneck factor sets are both empty")
    if set(susceptible) & set(bottleneck):
        raise ParameterError("susceptible and bottleneck factor sets must be disjoint")
    scores = np.asarray(scores, dtype=np.float64)
    m = scores.shape[1]
    for idx in susceptible + bottleneck:
        if not 0 <= idx < m:
            raise ParameterError(f"factor index {idx} out of range for {m} factors")
    if threshold_sd < 0:
        raise ParameterError("threshold_sd must be >= 0")

    vulnerable: set[int] = set()
    for cluster, medoid in enumerate(solution.medoids):
        profile = scores[medoid]
        high_risk = susceptible and float(profile[susceptible].mean()) > threshold_sd
        low_shield = bottleneck and float(profile[bottleneck].mean()) < -threshold_sd
        if high_risk or low_shield:
            vulnerable.add(cluster)
    return vulnerable


def vulnerable_list(
    criteria: list[SusceptibilityCriterion],
    flags: dict[str, set[str]],
    types: dict[str, str],
    solution: ClusterSolution,
    vulnerable_clusters: set[int],
    occupation_ids: list[str],
    threshold_sd: float,
) -> VulnerabilityReport:
    """Assemble the report; vulnerable occupations are exactly the members
    of the vulnerable clusters, sorted by soc_code."""
    cluster_of = {
        soc: int(solution.assignment[i]) for i, soc in enumerate(occupation_ids)
    }
    vulnerable_occupations = sorted(
        soc for soc in occupation_ids if cluster_of[soc] in vulnerable_clusters
    )
    counts_per_cluster: dict[int, int] = {c: 0 for c in range(solution.k)}
    for soc in occupation_ids:
        counts_per_cluster[cluster_of[soc]] += 1
    counts_per_type: dict[str, int] = {}
    for soc in occupation_ids:
        counts_per_type[types[soc]] = counts_per_type.get(types[soc], 0) + 1
    return VulnerabilityReport(
        criteria=list(criteria),
        flags=flags,
        susceptibility_type=types,
        vulnerable_clusters=set(vulnerable_clusters),
        vulnerable_occupations=vulnerable_occupations,
        cluster_of=cluster_of,
        threshold_sd=threshold_sd,
        counts_per_cluster=counts_per_cluster,
        counts_per_type=counts_per_type,
    )
