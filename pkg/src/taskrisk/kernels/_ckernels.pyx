# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numeric kernels.

Same algorithms and scalar formulas as ``_pykernels``; compiled with
-ffp-contract=off so elementwise arithmetic matches the NumPy fallback.
"""

from libc.math cimport sqrt, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()

from ..errors import ConvergenceError

BACKEND = "cython"

cdef double JACOBI_TOL = 1e-12
cdef int JACOBI_MAX_SWEEPS = 100
cdef int PAM_MAX_SWAPS = 10000


def _order_eigh(cnp.ndarray diag, cnp.ndarray vecs):
    order = np.argsort(-diag, kind="stable")
    w = diag[order].copy()
    v = vecs[:, order].copy()
    cdef Py_ssize_t col, peak
    for col in range(v.shape[1]):
        peak = int(np.argmax(np.abs(v[:, col])))
        if v[peak, col] < 0.0:
            v[:, col] = -v[:, col]
    return w, v


def jacobi_eigh(a_in):
    """Cyclic Jacobi eigendecomposition; see the Python twin for contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a = np.array(a_in, dtype=np.float64, copy=True)
    cdef Py_ssize_t p = a.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] v = np.eye(p)
    cdef double[:, :] A = a
    cdef double[:, :] V = v
    cdef Py_ssize_t i, j, t_idx, sweep
    cdef double fro2 = 0.0, off2, apq, tau, t, c, s, xi, xj

    for i in range(p):
        for j in range(p):
            fro2 += A[i, j] * A[i, j]
    cdef double fro = sqrt(fro2)
    if p == 1 or fro == 0.0:
        return _order_eigh(np.diag(a).copy(), v)

    for sweep in range(JACOBI_MAX_SWEEPS):
        off2 = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                off2 += A[i, j] * A[i, j]
        if sqrt(2.0 * off2) <= JACOBI_TOL * fro:
            return _order_eigh(np.diag(a).copy(), v)
        for i in range(p - 1):
            for j in range(i + 1, p):
                apq = A[i, j]
                if apq == 0.0:
                    continue
                tau = (A[j, j] - A[i, i]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s = t * c
                for t_idx in range(p):
                    xi = A[i, t_idx]
                    xj = A[j, t_idx]
                    A[i, t_idx] = c * xi - s * xj
                    A[j, t_idx] = s * xi + c * xj
                for t_idx in range(p):
                    xi = A[t_idx, i]
                    xj = A[t_idx, j]
                    A[t_idx, i] = c * xi - s * xj
                    A[t_idx, j] = s * xi + c * xj
                A[i, j] = 0.0
                A[j, i] = 0.0
                for t_idx in range(p):
                    xi = V[t_idx, i]
                    xj = V[t_idx, j]
                    V[t_idx, i] = c * xi - s * xj
                    V[t_idx, j] = s * xi + c * xj
    raise ConvergenceError(
        f"jacobi eigendecomposition did not converge in {JACOBI_MAX_SWEEPS} sweeps"
    )


def pam_build(d_in, int k):
    """Greedy BUILD phase; see the Python twin for the tie-break contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(d_in, dtype=np.float64)
    cdef double[:, :] D = d
    cdef Py_ssize_t n = d.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d_near = np.empty(n)
    cdef double[:] near = d_near
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] is_med = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t i, j, first = 0, best, chosen
    cdef double tot, best_tot, gain, best_gain, diff

    best_tot = INFINITY
    for i in range(n):
        tot = 0.0
        for j in range(n):
            tot += D[i, j]
        if tot < best_tot:
            best_tot = tot
            first = i
    medoids = [first]
    is_med[first] = 1
    for j in range(n):
        near[j] = D[first, j]

    while len(medoids) < k:
        best = -1
        best_gain = -INFINITY
        for i in range(n):
            if is_med[i]:
                continue
            gain = 0.0
            for j in range(n):
                diff = near[j] - D[i, j]
                if diff > 0.0:
                    gain += diff
            if gain > best_gain:
                best_gain = gain
                best = i
        chosen = best
        medoids.append(chosen)
        is_med[chosen] = 1
        for j in range(n):
            if D[chosen, j] < near[j]:
                near[j] = D[chosen, j]
    return np.array(sorted(medoids), dtype=np.int64)


def pam_swap(d_in, medoids_in):
    """Best-improvement SWAP phase; see the Python twin for contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] d = np.ascontiguousarray(d_in, dtype=np.float64)
    cdef double[:, :] D = d
    cdef Py_ssize_t n = d.shape[0]
    med = sorted(int(m) for m in medoids_in)
    cdef Py_ssize_t k = len(med)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] med_arr = np.array(med, dtype=np.int64)
    cdef long long[:] M = med_arr
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] is_med = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pos_arr = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d1_arr = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2_arr = np.empty(n)
    cdef long long[:] pos = pos_arr
    cdef double[:] d1 = d1_arr
    cdef double[:] d2 = d2_arr
    cdef Py_ssize_t i, j, mi, h, best_mi, best_h, it
    cdef double cost, newcost, delta, best_delta, base, dist

    for i in range(k):
        is_med[M[i]] = 1
    history = []

    for it in range(PAM_MAX_SWAPS):
        # nearest and second-nearest medoid per point
        cost = 0.0
        for j in range(n):
            d1[j] = INFINITY
            d2[j] = INFINITY
            pos[j] = -1
            for mi in range(k):
                dist = D[M[mi], j]
                if dist < d1[j]:
                    d2[j] = d1[j]
                    d1[j] = dist
                    pos[j] = mi
                elif dist < d2[j]:
                    d2[j] = dist
            cost += d1[j]
        history.append(cost)

        best_delta = 0.0
        best_mi = -1
        best_h = -1
        for mi in range(k):
            for h in range(n):
                if is_med[h]:
                    continue
                newcost = 0.0
                for j in range(n):
                    base = d2[j] if pos[j] == mi else d1[j]
                    dist = D[h, j]
                    newcost += dist if dist < base else base
                delta = newcost - cost
                if delta < best_delta:
                    best_delta = delta
                    best_mi = mi
                    best_h = h
        if best_mi < 0:
            return np.array([M[i] for i in range(k)], dtype=np.int64), history
        is_med[M[best_mi]] = 0
        is_med[best_h] = 1
        M[best_mi] = best_h
        med_arr.sort()
    raise ConvergenceError(f"pam swap phase did not terminate in {PAM_MAX_SWAPS} swaps")
