"""Factor extraction: parallel analysis, iterated principal-axis factoring,
varimax rotation, fit indices, and regression factor scores.

Conventions, documented because alternatives exist in the literature:

* Parallel analysis uses principal-component eigenvalues of correlation
  matrices built from n-by-p standard-normal noise (Horn's original form);
  the reference envelope is the per-rank quantile over replicates, and the
  suggested factor count is the number of ranks whose observed eigenvalue
  exceeds the reference.
* Varimax maximizes the raw criterion by default (Kaiser row
  normalization off; selectable).
* Factor scores use the regression (Thurstone) method: S = Z R^-1 L.
* Model chi-square is the maximum-likelihood discrepancy
  F = ln det Sigma - ln det R + trace(R Sigma^-1) - p evaluated at the
  principal-axis solution, chi2 = (n-1) F, df = ((p-m)^2 - (p+m)) / 2.
  TLI uses the independence baseline; RMSEA = sqrt(max(chi2-df,0)/(df(n-1)));
  BIC = chi2 - df ln n. Saturated models (df <= 0) report TLI 1, RMSEA 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .adequacy import CorrelationMatrix
from .corpus import OccupationMatrix
from .errors import ConvergenceError, HeywoodWarning, ParameterError, SingularMatrixError
from .kernels import jacobi_eigh

#: Default factor labels applied when the caller supplies none; positions
#: past the list are padded with "unnamed-N".
DEFAULT_FACTOR_LABELS = [
    "Problem-solving and repetitive work",
    "Negotiation and leadership",
    "Exposure to hazard",
    "Empathy",
    "Artistic ability",
    "Coordination and leading",
    "unnamed-7",
]


@dataclass(frozen=True)
class ParallelAnalysisResult:
    observed_eigenvalues: np.ndarray
    reference_eigenvalues: np.ndarray
    suggested_factors: int
    replicates: int
    quantile: float
    seed: int


@dataclass(frozen=True)
class FitIndices:
    tli: float
    rmsr: float
    rmsea: float
    bic: float
    chi_square: float
    df: int


@dataclass
class FactorSolution:
    """Loadings and everything derived from them.

    ``rotation`` satisfies loadings = unrotated_loadings @ rotation and is
    orthonormal; ``scores`` stays None until factor_scores() fills it.
    """

    loadings: np.ndarray
    communalities: np.ndarray
    rotation: np.ndarray
    eigenvalues: np.ndarray
    n_iterations: int
    heywood_variables: tuple[str, ...] = ()
    scores: np.ndarray | None = None
    factor_labels: list[str] = field(default_factory=list)
    fit: FitIndices | None = None

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]


def pad_factor_labels(labels: list[str] | None, m: int) -> list[str]:
    base = list(labels) if labels else list(DEFAULT_FACTOR_LABELS)
    if len(base) < m:
        base += [f"unnamed-{j + 1}" for j in range(len(base), m)]
    return base[:m]


def _correlation_eigenvalues(z: np.ndarray) -> np.ndarray:
    """Descending eigenvalues of the correlation matrix of z-scored data."""
    n = z.shape[0]
    r = (z.T @ z) / (n - 1)
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 1.0)
    w, _ = jacobi_eigh(r)
    return w


def parallel_analysis(
    matrix: OccupationMatrix,
    replicates: int = 100,
    quantile: float = 0.95,
    seed: int = 0,
) -> ParallelAnalysisResult:
    """Horn's parallel analysis on a standardized matrix.

    Each replicate draws its own stream from (seed, replicate index), so
    results do not depend on evaluation order. Deterministic for a fixed
    seed.
    """
    if not matrix.standardized:
        raise ParameterError("parallel_analysis requires a standardized matrix")
    if replicates < 1:
        raise ParameterError("replicates must be >= 1")
    if not 0.0 < quantile < 1.0:
        raise ParameterError("quantile must be in (0, 1)")
    if seed < 0:
        raise ParameterError("seed must be a non-negative integer")
    n, p = matrix.shape
    if not n > p or p < 2:
        raise ParameterError(f"parallel_analysis requires n > p >= 2 (n={n}, p={p})")

    observed = _correlation_eigenvalues(matrix.values)
    ref = np.empty((replicates, p))
    for rep in range(replicates):
        rng = np.random.default_rng([seed, rep])
        noise = rng.standard_normal((n, p))
        noise = noise - noise.mean(axis=0)
        sd = np.sqrt((noise * noise).sum(axis=0) / (n - 1))
        ref[rep] = _correlation_eigenvalues(noise / sd)
    reference = np.quantile(ref, quantile, axis=0)
    # Horn's retention rule: keep the leading run of ranks whose observed
    # eigenvalue exceeds the reference; stop at the first failure so noise
    # exceedances at tail ranks cannot inflate the suggestion.
    exceed = observed > reference
    suggested = int(p if exceed.all() else np.argmin(exceed))
    return ParallelAnalysisResult(
        observed, reference, suggested, replicates, quantile, seed
    )


def extract_paf(
    r: CorrelationMatrix, m: int, tol: float = 1e-6, max_iter: int = 200
) -> FactorSolution:
    """Iterated principal-axis factoring with m factors.

    Communalities start at the squared multiple correlations
    1 - 1/diag(R^-1) and are re-estimated from the top-m eigenpairs of the
    reduced matrix until the largest change drops below tol. Rows whose
    final communality exceeds 1 are rescaled onto the unit sphere (Heywood
    clamp) with a warning. Column signs make each column's
    largest-magnitude loading positive.
    """
    p = r.p
    if not 1 <= m < p:
        raise ParameterError(f"factor count must satisfy 1 <= m < p (m={m}, p={p})")
    if tol <= 0 or max_iter < 1:
        raise ParameterError("tol must be > 0 and max_iter >= 1")
    try:
        inv = np.linalg.inv(r.values)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"correlation matrix is singular: {exc}") from None
    comm = 1.0 - 1.0 / np.diag(inv)
    comm = np.clip(comm, 0.0, 1.0)

    reduced = r.values.copy()
    loadings = np.zeros((p, m))
    top = np.zeros(m)
    delta = np.inf
    for iteration in range(1, max_iter + 1):
        np.fill_diagonal(reduced, comm)
        w, v = jacobi_eigh(reduced)
        top = w[:m]
        loadings = v[:, :m] * np.sqrt(np.maximum(top, 0.0))
        # iterate on the clamped domain so Heywood rows pin at 1 and the
        # change measure still contracts
        new_comm = np.minimum((loadings * loadings).sum(axis=1), 1.0)
        delta = float(np.max(np.abs(new_comm - comm)))
        comm = new_comm
        if delta < tol:
            break
    else:
        raise ConvergenceError(
            f"principal-axis factoring did not converge in {max_iter} iterations "
            f"(last communality change {delta:.3e})"
        )

    heywood = []
    row_ss = (loadings * loadings).sum(axis=1)
    for i in np.nonzero(row_ss > 1.0)[0]:
        loadings[i] /= math.sqrt(row_ss[i])
        heywood.append(r.ids[i])
    if heywood:
        warnings.warn(
            f"communality exceeded 1 and was clamped for: {', '.join(heywood)}",
            HeywoodWarning,
            stacklevel=2,
        )
    for j in range(m):
        peak = int(np.argmax(np.abs(loadings[:, j])))
        if loadings[peak, j] < 0.0:
            loadings[:, j] = -loadings[:, j]

    return FactorSolution(
        loadings=loadings,
        communalities=(loadings * loadings).sum(axis=1),
        rotation=np.eye(m),
        eigenvalues=top.copy(),
        n_iterations=iteration,
        heywood_variables=tuple(heywood),
    )


def varimax_criterion(loadings: np.ndarray) -> float:
    """Raw varimax objective: total variance of squared loadings by column."""
    sq = loadings * loadings
    p = loadings.shape[0]
    return float(np.sum(sq * sq) / p - np.sum(sq.sum(axis=0) ** 2) / (p * p))


def varimax(
    loadings: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 100,
    kaiser_normalize: bool = False,
    criterion_history: list[float] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Pairwise-rotation varimax; returns (rotated, rotation).

    rotated = loadings @ rotation with rotation orthonormal. The raw
    criterion is maximized unless kaiser_normalize is set, in which case
    rows are scaled to unit communality during rotation and rescaled after.
    Sweeps stop when the largest rotation angle falls below tol. If
    criterion_history is a list, the criterion value is appended before the
    first sweep and after every sweep.
    """
    lam = np.array(loadings, dtype=np.float64, copy=True)
    p, m = lam.shape
    rotation = np.eye(m)
    if m == 1:
        return lam, rotation
    if kaiser_normalize:
        norms = np.sqrt((lam * lam).sum(axis=1))
        norms[norms == 0.0] = 1.0
        lam /= norms[:, None]

    if criterion_history is not None:
        criterion_history.append(varimax_criterion(lam))
    converged = False
    for _ in range(max_iter):
        largest = 0.0
        for a in range(m - 1):
            for b in range(a + 1, m):
                x = lam[:, a].copy()
                y = lam[:, b].copy()
                u = x * x - y * y
                v = 2.0 * x * y
                su = float(u.sum())
                sv = float(v.sum())
                c2 = float((u * u - v * v).sum())
                d2 = 2.0 * float((u * v).sum())
                num = d2 - 2.0 * su * sv / p
                den = c2 - (su * su - sv * sv) / p
                phi = 0.25 * math.atan2(num, den)
                if abs(phi) <= 1e-15:
                    continue
                largest = max(largest, abs(phi))
                c = math.cos(phi)
                s = math.sin(phi)
                lam[:, a] = c * x + s * y
                lam[:, b] = -s * x + c * y
                ra = rotation[:, a].copy()
                rb = rotation[:, b].copy()
                rotation[:, a] = c * ra + s * rb
                rotation[:, b] = -s * ra + c * rb
        if criterion_history is not None:
            criterion_history.append(varimax_criterion(lam))
        if largest < tol:
            converged = True
            break
    if not converged:
        raise ConvergenceError(f"varimax did not converge in {max_iter} sweeps")

    if kaiser_normalize:
        lam *= norms[:, None]
    for j in range(m):
        peak = int(np.argmax(np.abs(lam[:, j])))
        if lam[peak, j] < 0.0:
            lam[:, j] = -lam[:, j]
            rotation[:, j] = -rotation[:, j]
    return lam, rotation


def rotate_solution(
    solution: FactorSolution,
    tol: float = 1e-10,
    max_iter: int = 100,
    kaiser_normalize: bool = False,
) -> FactorSolution:
    """Apply varimax to an extracted solution, updating loadings/rotation."""
    rotated, rotation = varimax(
        solution.loadings, tol=tol, max_iter=max_iter, kaiser_normalize=kaiser_normalize
    )
    solution.loadings = rotated
    solution.rotation = solution.rotation @ rotation
    solution.communalities = (rotated * rotated).sum(axis=1)
    return solution


def fit_indices(r: CorrelationMatrix, solution: FactorSolution, n: int) -> FitIndices:
    """TLI, RMSR, RMSEA, and BIC for a factor solution against R."""
    p = r.p
    m = solution.n_factors
    if n <= p:
        raise ParameterError(f"fit_indices requires n > p (n={n}, p={p})")
    lam = solution.loadings
    implied = lam @ lam.T
    uniqueness = np.maximum(1.0 - np.diag(implied), 1e-8)
    sigma = implied + np.diag(uniqueness)

    residual = r.values - sigma
    off = residual[~np.eye(p, dtype=bool)]
    rmsr = float(np.sqrt(np.mean(off * off)))

    sign_r, logdet_r = np.linalg.slogdet(r.values)
    sign_s, logdet_s = np.linalg.slogdet(sigma)
    if sign_r <= 0 or sign_s <= 0:
        raise SingularMatrixError("R or the implied matrix is not positive definite")
    trace = float(np.trace(np.linalg.solve(sigma, r.values)))
    f_stat = max(logdet_s - logdet_r + trace - p, 0.0)
    chi2 = (n - 1) * f_stat
    df = ((p - m) ** 2 - (p + m)) // 2

    chi2_base = max(-(n - 1) * logdet_r, 0.0)
    df_base = p * (p - 1) // 2
    if df > 0:
        ratio_base = chi2_base / df_base
        ratio_model = chi2 / df
        tli = 1.0 if ratio_base <= 1.0 else (ratio_base - ratio_model) / (ratio_base - 1.0)
        rmsea = math.sqrt(max(chi2 - df, 0.0) / (df * (n - 1)))
    else:
        tli = 1.0
        rmsea = 0.0
    bic = chi2 - df * math.log(n)
    return FitIndices(float(tli), rmsr, float(rmsea), float(bic), float(chi2), int(df))


def factor_scores(
    matrix: OccupationMatrix, r: CorrelationMatrix, solution: FactorSolution
) -> np.ndarray:
    """Regression (Thurstone) factor scores S = Z R^-1 L; stored on the
    solution and returned."""
    if not matrix.standardized:
        raise ParameterError("factor_scores requires a standardized matrix")
    if tuple(matrix.attribute_ids) != tuple(r.ids):
        raise ParameterError("matrix columns do not match the correlation matrix")
    try:
        weights = np.linalg.solve(r.values, solution.loadings)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"correlation matrix is singular: {exc}") from None
    scores = matrix.values @ weights
    solution.scores = scores
    return scores
