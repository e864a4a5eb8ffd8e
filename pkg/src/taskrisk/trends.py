"""Employment-growth comparison between vulnerable and non-vulnerable
occupation groups.

Growth metric: unweighted mean over occupations of the simple annual
percent change averaged across the window. CAGR and pooled (summed
headcount) variants are reported alongside because the headline metric is
convention-sensitive. Occupations missing any year in the window, or with
a zero denominator year, are excluded and listed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import EmploymentSeries, soc_prefix
from .errors import EmptyGroupError, ParameterError
from .vulnerability import VulnerabilityReport


@dataclass
class GroupGrowth:
    label: str
    mean_annual_growth: float
    mean_cagr: float
    pooled_annual_growth: float
    whole_period_growth: float
    total_start: float
    total_end: float
    count: int
    per_occupation: dict[str, float] = field(default_factory=dict)
    excluded: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class TrendReport:
    year_range: tuple[int, int]
    group_stats: dict[str, GroupGrowth]
    ratio_vulnerable_to_nonvulnerable: float | None
    per_occupation_growth: dict[str, float]
    unmatched: dict[str, list[str]]


def _validate_range(year_range: tuple[int, int]) -> tuple[int, int]:
    start, end = int(year_range[0]), int(year_range[1])
    if start >= end:
        raise ParameterError(f"year range must satisfy start < end, got {year_range}")
    return start, end


def growth_stats(
    series: EmploymentSeries,
    group: set[str],
    year_range: tuple[int, int],
    label: str = "group",
) -> GroupGrowth:
    """Growth aggregates for one group of soc codes.

    Codes are matched to the series by 6-digit SOC prefix. Per occupation,
    annual growth is the mean of (E[t+1] - E[t]) / E[t] over the window.
    """
    start, end = _validate_range(year_range)
    by_prefix = series.by_prefix()
    years = list(range(start, end + 1))

    per_occ: dict[str, float] = {}
    per_cagr: dict[str, float] = {}
    excluded: list[tuple[str, str]] = []
    totals = np.zeros(len(years))
    for code in sorted(group):
        rec = by_prefix.get(soc_prefix(code))
        if rec is None:
            excluded.append((code, "no employment series"))
            continue
        missing = [y for y in years if y not in rec]
        if missing:
            excluded.append((code, f"missing years {missing}"))
            continue
        counts = [rec[y] for y in years]
        if any(c == 0.0 for c in counts[:-1]):
            excluded.append((code, "zero headcount in a denominator year"))
            continue
        changes = [(counts[t + 1] - counts[t]) / counts[t] for t in range(len(years) - 1)]
        per_occ[code] = float(np.mean(changes))
        per_cagr[code] = float((counts[-1] / counts[0]) ** (1.0 / (end - start)) - 1.0)
        totals += np.array(counts)

    if not per_occ:
        shown = ", ".join(code for code, _ in excluded[:10])
        raise EmptyGroupError(
            f"group {label!r} has no occupation with full coverage; "
            f"excluded: {shown}{'...' if len(excluded) > 10 else ''}"
        )
    pooled = [
        (totals[t + 1] - totals[t]) / totals[t] for t in range(len(years) - 1)
    ]
    return GroupGrowth(
        label=label,
        mean_annual_growth=float(np.mean(list(per_occ.values()))),
        mean_cagr=float(np.mean(list(per_cagr.values()))),
        pooled_annual_growth=float(np.mean(pooled)),
        whole_period_growth=float((totals[-1] - totals[0]) / totals[0]),
        total_start=float(totals[0]),
        total_end=float(totals[-1]),
        count=len(per_occ),
        per_occupation=per_occ,
        excluded=excluded,
    )


def compare_groups(
    series: EmploymentSeries,
    report: VulnerabilityReport,
    year_range: tuple[int, int],
    subgroups: dict[str, set[str]] | None = None,
) -> TrendReport:
    """Vulnerable vs non-vulnerable growth, plus optional sub-groups.

    The ratio is vulnerable mean annual growth over non-vulnerable; it is
    None (reported as undefined) when the denominator is <= 0.
    """
    start, end = _validate_range(year_range)
    vulnerable = set(report.vulnerable_occupations)
    everyone = set(report.cluster_of)
    non_vulnerable = everyone - vulnerable
    if not vulnerable or not non_vulnerable:
        raise EmptyGroupError("both groups need at least one occupation")

    group_stats = {
        "vulnerable": growth_stats(series, vulnerable, (start, end), "vulnerable"),
        "non_vulnerable": growth_stats(
            series, non_vulnerable, (start, end), "non_vulnerable"
        ),
    }
    for name in sorted(subgroups or {}):
        members = set(subgroups[name]) & everyone
        if not members:
            raise EmptyGroupError(
                f"sub-group {name!r} matches no known occupation: "
                f"{sorted(subgroups[name])}"
            )
        group_stats[name] = growth_stats(series, members, (start, end), name)

    denom = group_stats["non_vulnerable"].mean_annual_growth
    numer = group_stats["vulnerable"].mean_annual_growth
    ratio = numer / denom if denom > 0 else None

    per_occupation: dict[str, float] = {}
    unmatched: dict[str, list[str]] = {}
    for name in ("vulnerable", "non_vulnerable"):
        stats = group_stats[name]
        per_occupation.update(stats.per_occupation)
        codes = [c for c, _ in stats.excluded]
        if codes:
            unmatched[name] = codes
    return TrendReport(
        year_range=(start, end),
        group_stats=group_stats,
        ratio_vulnerable_to_nonvulnerable=ratio,
        per_occupation_growth=per_occupation,
        unmatched=unmatched,
    )
