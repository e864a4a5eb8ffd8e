"""Pure NumPy implementations of the numeric kernels.

Fallback used when the compiled extension is unavailable. Kept
operation-for-operation in step with ``_ckernels`` so both backends agree:
scalar formulas are identical and elementwise updates round the same way,
so differences are confined to reduction order (pairwise vs sequential
sums), which only matters at the last bit.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError

BACKEND = "python"

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
PAM_MAX_SWAPS = 10_000


def _order_eigh(diag: np.ndarray, vecs: np.ndarray):
    """Sort eigenpairs descending and fix eigenvector signs.

    Sign convention: the largest-magnitude entry of each eigenvector is
    positive; ties resolve to the lowest row index via argmax.
    """
    order = np.argsort(-diag, kind="stable")
    w = diag[order].copy()
    v = vecs[:, order].copy()
    for col in range(v.shape[1]):
        peak = int(np.argmax(np.abs(v[:, col])))
        if v[peak, col] < 0.0:
            v[:, col] = -v[:, col]
    return w, v


def jacobi_eigh(a):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Returns ``(w, v)`` with eigenvalues ``w`` in descending order and the
    matching eigenvector columns in ``v``. Convergence is declared when the
    off-diagonal Frobenius norm drops below ``JACOBI_TOL`` times the
    Frobenius norm of the input (which rotations preserve).
    """
    a = np.array(a, dtype=np.float64, copy=True)
    p = a.shape[0]
    v = np.eye(p)
    fro = math.sqrt(float(np.sum(a * a)))
    if p == 1 or fro == 0.0:
        return _order_eigh(np.diag(a).copy(), v)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(2.0 * float(np.sum(np.triu(a, 1) ** 2)))
        if off <= JACOBI_TOL * fro:
            return _order_eigh(np.diag(a).copy(), v)
        for i in range(p - 1):
            for j in range(i + 1, p):
                apq = a[i, j]
                if apq == 0.0:
                    continue
                tau = (a[j, j] - a[i, i]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                row_i = c * a[i, :] - s * a[j, :]
                row_j = s * a[i, :] + c * a[j, :]
                a[i, :] = row_i
                a[j, :] = row_j
                col_i = c * a[:, i] - s * a[:, j]
                col_j = s * a[:, i] + c * a[:, j]
                a[:, i] = col_i
                a[:, j] = col_j
                a[i, j] = 0.0
                a[j, i] = 0.0
                vec_i = c * v[:, i] - s * v[:, j]
                vec_j = s * v[:, i] + c * v[:, j]
                v[:, i] = vec_i
                v[:, j] = vec_j
    raise ConvergenceError(
        f"jacobi eigendecomposition did not converge in {JACOBI_MAX_SWEEPS} sweeps"
    )


def pam_build(d, k: int) -> np.ndarray:
    """Greedy BUILD phase: returns k medoid point indices, sorted ascending.

    The first medoid minimizes total distance to all points; each later
    medoid maximizes the drop in total nearest-medoid distance. All argmin
    and argmax ties break toward the lowest point index.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    totals = d.sum(axis=1)
    first = int(np.argmin(totals))
    medoids = [first]
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[first] = True
    d_near = d[first].copy()
    while len(medoids) < k:
        diff = d_near[None, :] - d
        np.maximum(diff, 0.0, out=diff)
        gains = diff.sum(axis=1)
        gains[is_medoid] = -np.inf
        best = int(np.argmax(gains))
        medoids.append(best)
        is_medoid[best] = True
        np.minimum(d_near, d[best], out=d_near)
    return np.array(sorted(medoids), dtype=np.int64)


def _nearest_two(d, medoids):
    """Per point: position of nearest medoid, its distance, second distance."""
    n = d.shape[0]
    dm = d[:, medoids]
    pos = np.argmin(dm, axis=1)
    idx = np.arange(n)
    d1 = dm[idx, pos]
    if len(medoids) > 1:
        dm2 = dm.copy()
        dm2[idx, pos] = np.inf
        d2 = dm2.min(axis=1)
    else:
        d2 = np.full(n, np.inf)
    return pos, d1, d2


def pam_swap(d, medoids):
    """Best-improvement SWAP phase.

    Repeatedly evaluates every (medoid, non-medoid) exchange and applies
    the one with the largest strict cost reduction, lowest (medoid, point)
    index pair winning ties, until no exchange reduces the cost. Returns
    ``(medoids, cost_history)`` where the history holds the total cost
    after BUILD and after every applied swap.
    """
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    med = sorted(int(m) for m in medoids)
    is_medoid = np.zeros(n, dtype=bool)
    is_medoid[med] = True
    history = []

    for _ in range(PAM_MAX_SWAPS):
        pos, d1, d2 = _nearest_two(d, med)
        history.append(float(d1.sum()))
        best_delta = 0.0
        best_pair = None
        for mi in range(len(med)):
            base = np.where(pos == mi, d2, d1)
            deltas = np.minimum(d, base[None, :]).sum(axis=1) - float(d1.sum())
            deltas[is_medoid] = np.inf
            h = int(np.argmin(deltas))
            if deltas[h] < best_delta:
                best_delta = float(deltas[h])
                best_pair = (mi, h)
        if best_pair is None:
            return np.array(med, dtype=np.int64), history
        mi, h = best_pair
        is_medoid[med[mi]] = False
        is_medoid[h] = True
        med[mi] = h
        med.sort()
    raise ConvergenceError(f"pam swap phase did not terminate in {PAM_MAX_SWAPS} swaps")
