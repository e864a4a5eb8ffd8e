"""Correlation matrix and factorability diagnostics (Bartlett, KMO).

The diagnostics are advisory: the CLI prints conventional guidance
(KMO >= 0.6, Bartlett p < 0.05) but never gates the pipeline on them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .corpus import OccupationMatrix
from .errors import (
    ConditioningWarning,
    ParameterError,
    SingularMatrixError,
    UndefinedKMOError,
)

#: Guidance thresholds printed with the adequacy report (advisory only).
KMO_GUIDANCE = 0.6
BARTLETT_P_GUIDANCE = 0.05


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric Pearson correlation matrix with unit diagonal."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = self.values
        p = len(self.ids)
        if v.shape != (p, p):
            raise ParameterError("correlation matrix shape does not match ids")
        if np.max(np.abs(v - v.T)) > 1e-12:
            raise ParameterError("correlation matrix is not symmetric")
        if np.max(np.abs(np.diag(v) - 1.0)) > 1e-12:
            raise ParameterError("correlation matrix diagonal is not 1")
        if np.max(np.abs(v)) > 1.0 + 1e-12:
            raise ParameterError("correlation entries outside [-1, 1]")

    @property
    def p(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class BartlettResult:
    statistic: float
    df: int
    p_value: float


@dataclass(frozen=True)
class KmoResult:
    overall: float
    per_variable: dict[str, float]


@dataclass(frozen=True)
class AdequacyResult:
    bartlett_statistic: float
    bartlett_df: int
    bartlett_p: float
    kmo_overall: float
    kmo_per_variable: dict[str, float]


def chi_square_sf(x: float, df: float) -> float:
    """Upper-tail chi-square probability via the regularized incomplete
    gamma function Q(df/2, x/2); relative accuracy ~1e-14 for df <= 5000."""
    if x < 0 or df <= 0:
        raise ParameterError("chi_square_sf needs x >= 0 and df > 0")
    return float(gammaincc(df / 2.0, x / 2.0))


def correlation(matrix: OccupationMatrix) -> CorrelationMatrix:
    """Pearson correlations of a standardized matrix."""
    if not matrix.standardized:
        raise ParameterError("correlation requires a standardized matrix")
    n = matrix.shape[0]
    if n < 3:
        raise ParameterError("correlation requires n >= 3")
    z = matrix.values
    r = (z.T @ z) / (n - 1)
    r = (r + r.T) / 2.0
    np.clip(r, -1.0, 1.0, out=r)
    np.fill_diagonal(r, 1.0)
    return CorrelationMatrix(tuple(matrix.attribute_ids), r)


def bartlett_test(r: CorrelationMatrix, n: int) -> BartlettResult:
    """Bartlett sphericity: chi2 = -(n-1-(2p+5)/6) ln det R, df = p(p-1)/2."""
    p = r.p
    if p < 2:
        raise ParameterError("bartlett_test requires p >= 2")
    if n <= p:
        raise ParameterError(f"bartlett_test requires n > p (n={n}, p={p})")
    sign, logdet = np.linalg.slogdet(r.values)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularMatrixError("correlation matrix determinant is not positive")
    statistic = float(-(n - 1 - (2 * p + 5) / 6.0) * logdet)
    if statistic <= 0.0:
        statistic = 0.0
    df = p * (p - 1) // 2
    return BartlettResult(statistic, df, chi_square_sf(statistic, df))


def kmo(r: CorrelationMatrix) -> KmoResult:
    """Kaiser-Meyer-Olkin sampling adequacy, overall and per variable.

    Uses anti-image partial correlations u_ij = -S_ij / sqrt(S_ii S_jj)
    with S = R^-1; KMO = sum r^2 / (sum r^2 + sum u^2) over i != j.
    """
    p = r.p
    if p < 2:
        raise ParameterError("kmo requires p >= 2")
    sign, logdet = np.linalg.slogdet(r.values)
    if sign <= 0 or not np.isfinite(logdet):
        raise SingularMatrixError("correlation matrix determinant is not positive")
    try:
        inv = np.linalg.inv(r.values)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"correlation matrix is singular: {exc}") from None
    recon = np.max(np.abs(inv @ r.values - np.eye(p)))
    cond = np.linalg.cond(r.values)
    if recon > 1e-8 or cond > 1e12:
        warnings.warn(
            f"correlation matrix is ill-conditioned "
            f"(condition number {cond:.2e}, inverse residual {recon:.2e})",
            ConditioningWarning,
            stacklevel=2,
        )

    d = 1.0 / np.sqrt(np.diag(inv))
    partial = -inv * d[:, None] * d[None, :]
    np.fill_diagonal(partial, 0.0)
    r_sq = r.values * r.values
    np.fill_diagonal(r_sq, 0.0)
    u_sq = partial * partial

    r_total = float(r_sq.sum())
    if r_total == 0.0:
        raise UndefinedKMOError("all off-diagonal correlations are zero (KMO is 0/0)")
    overall = r_total / (r_total + float(u_sq.sum()))
    per_variable = {}
    r_rows = r_sq.sum(axis=1)
    u_rows = u_sq.sum(axis=1)
    for i, attr in enumerate(r.ids):
        denom = r_rows[i] + u_rows[i]
        per_variable[attr] = float(r_rows[i] / denom) if denom > 0 else 0.0
    return KmoResult(float(overall), per_variable)


def assess(matrix: OccupationMatrix) -> AdequacyResult:
    """Run both factorability diagnostics on a standardized matrix."""
    r = correlation(matrix)
    bart = bartlett_test(r, matrix.shape[0])
    k = kmo(r)
    return AdequacyResult(bart.statistic, bart.df, bart.p_value, k.overall, k.per_variable)
