# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: one-sided Jacobi SVD, streaming operator-norm scans,
and the proximal-gradient inner loop.

Mirrors the interface of ``avmc._kernels_py``. The Jacobi sweep cap is
``10 * max(d1, d2)**2``; hitting it raises RuntimeError instead of returning
unconverged factors.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log1p, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double JACOBI_TOL = 1e-14
cdef double OBJECTIVE_FAIL = -1e308

cdef int _FAMILY_GAUSSIAN = 0
cdef int _FAMILY_BINOMIAL = 1
cdef int _FAMILY_POISSON = 2


cdef int _jacobi(double* w, double* v, int m, int n, bint accumulate_v,
                 int max_sweeps) nogil:
    """One-sided Jacobi on the columns of w (m x n, row-major).

    On exit the columns of w are mutually orthogonal and w_in = w_out @ v.T
    when v (n x n) accumulates the rotations. Returns 0 on convergence,
    -1 when the sweep cap is hit. Columns whose norm is negligible against
    the whole matrix are frozen so they cannot stall convergence.
    """
    cdef int sweep, p, q, i
    cdef double app, aqq, apq, tau, t, cs, sn, wp, wq, total, cut
    cdef bint rotated
    if accumulate_v:
        for p in range(n):
            for q in range(n):
                v[p * n + q] = 1.0 if p == q else 0.0
    total = 0.0
    for i in range(m * n):
        total += w[i] * w[i]
    if total == 0.0:
        return 0
    cut = total * 1e-30
    for sweep in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                app = 0.0
                aqq = 0.0
                apq = 0.0
                for i in range(m):
                    wp = w[i * n + p]
                    wq = w[i * n + q]
                    app += wp * wp
                    aqq += wq * wq
                    apq += wp * wq
                if app <= cut or aqq <= cut:
                    continue
                # sqrt before multiplying: app * aqq can underflow to zero
                if apq == 0.0 or fabs(apq) <= JACOBI_TOL * sqrt(app) * sqrt(aqq):
                    continue
                rotated = True
                tau = (aqq - app) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = 1.0 / (tau - sqrt(1.0 + tau * tau))
                cs = 1.0 / sqrt(1.0 + t * t)
                sn = cs * t
                for i in range(m):
                    wp = w[i * n + p]
                    wq = w[i * n + q]
                    w[i * n + p] = cs * wp - sn * wq
                    w[i * n + q] = sn * wp + cs * wq
                if accumulate_v:
                    for i in range(n):
                        wp = v[i * n + p]
                        wq = v[i * n + q]
                        v[i * n + p] = cs * wp - sn * wq
                        v[i * n + q] = sn * wp + cs * wq
        if not rotated:
            return 0
    return -1


cdef inline int _sweep_cap(int m, int n) nogil:
    cdef int d = m if m > n else n
    return 10 * d * d


cdef double _largest_colnorm(double* w, int m, int n) nogil:
    cdef int i, j
    cdef double best = 0.0, acc
    for j in range(n):
        acc = 0.0
        for i in range(m):
            acc += w[i * n + j] * w[i * n + j]
        if acc > best:
            best = acc
    return sqrt(best)


cdef double _opnorm_inplace(double* w, int m, int n) nogil:
    """Largest singular value; w is destroyed. -1 signals non-convergence."""
    if _jacobi(w, NULL, m, n, False, _sweep_cap(m, n)) != 0:
        return -1.0
    return _largest_colnorm(w, m, n)


def svd(a):
    """Economy SVD ``a = U @ diag(s) @ V.T`` with ``s`` nonincreasing."""
    cdef cnp.ndarray[double, ndim=2] arr = np.ascontiguousarray(a, dtype=np.float64)
    cdef bint transposed = arr.shape[0] < arr.shape[1]
    if transposed:
        arr = np.ascontiguousarray(arr.T)
    cdef int m = arr.shape[0]
    cdef int n = arr.shape[1]
    cdef cnp.ndarray[double, ndim=2] w = arr.copy()
    cdef cnp.ndarray[double, ndim=2] v = np.empty((n, n))
    cdef int status
    with nogil:
        status = _jacobi(&w[0, 0], &v[0, 0], m, n, True, _sweep_cap(m, n))
    if status != 0:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    s = np.linalg.norm(w, axis=0)
    order = np.argsort(s, kind="stable")[::-1]
    s = s[order]
    w = np.ascontiguousarray(w[:, order])
    v = np.ascontiguousarray(v[:, order])
    u = np.zeros((m, n))
    # columns at or below the Jacobi freeze scale carry no usable direction
    cutoff = float(np.linalg.norm(arr)) * 1e-13
    filled = []
    for j in range(n):
        if s[j] > cutoff:
            u[:, j] = w[:, j] / s[j]
            filled.append(j)
    # complete zero-singular-value columns to an orthonormal set
    for j in range(n):
        if s[j] > cutoff:
            continue
        for k in range(m):
            cand = np.zeros(m)
            cand[k] = 1.0
            for jj in filled:
                cand -= (u[:, jj] @ cand) * u[:, jj]
            nrm = np.linalg.norm(cand)
            if nrm > 1e-6:
                u[:, j] = cand / nrm
                filled.append(j)
                break
    if transposed:
        return v, s, u
    return u, s, v


def singular_values(a):
    cdef cnp.ndarray[double, ndim=2] arr = np.ascontiguousarray(a, dtype=np.float64)
    if arr.shape[0] < arr.shape[1]:
        arr = np.ascontiguousarray(arr.T)
    cdef cnp.ndarray[double, ndim=2] w = arr.copy()
    cdef int m = w.shape[0]
    cdef int n = w.shape[1]
    cdef int status
    with nogil:
        status = _jacobi(&w[0, 0], NULL, m, n, False, _sweep_cap(m, n))
    if status != 0:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    return np.sort(np.linalg.norm(w, axis=0))[::-1]


def op_norm(a):
    cdef cnp.ndarray[double, ndim=2] w = np.ascontiguousarray(a, dtype=np.float64).copy()
    cdef int m = w.shape[0]
    cdef int n = w.shape[1]
    cdef double res
    with nogil:
        res = _opnorm_inplace(&w[0, 0], m, n)
    if res < 0.0:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    return res


def cumulative_opnorm_scan(rows, cols, eps, int d1, int d2):
    """Operator norm of the running sum ``sum_{i<=k} eps[i] * E(rows[i], cols[i])``."""
    cdef cnp.int64_t[::1] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef cnp.int64_t[::1] c = np.ascontiguousarray(cols, dtype=np.int64)
    cdef double[::1] e = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t n_steps = e.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_steps)
    cdef cnp.ndarray[double, ndim=1] acc = np.zeros(d1 * d2)
    cdef cnp.ndarray[double, ndim=1] scratch = np.empty(d1 * d2)
    cdef double* accp = &acc[0]
    cdef double* scr = &scratch[0]
    cdef double* outp
    cdef Py_ssize_t k
    cdef int i
    cdef double res = 0.0
    if n_steps == 0:
        return out
    outp = &out[0]
    with nogil:
        for k in range(n_steps):
            accp[r[k] * d2 + c[k]] += e[k]
            for i in range(d1 * d2):
                scr[i] = accp[i]
            res = _opnorm_inplace(scr, d1, d2)
            if res < 0.0:
                break
            outp[k] = res
    if res < 0.0:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    return out


def martingale_violation_elementary(rows, cols, eps, int d1, int d2,
                                    double threshold, double budget):
    """Early-exit scan for ``exists k: ||M_k||_op >= threshold and S_k <= budget``."""
    cdef cnp.int64_t[::1] r = np.ascontiguousarray(rows, dtype=np.int64)
    cdef cnp.int64_t[::1] c = np.ascontiguousarray(cols, dtype=np.int64)
    cdef double[::1] e = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t n_steps = e.shape[0]
    cdef cnp.ndarray[double, ndim=1] acc = np.zeros(d1 * d2)
    cdef cnp.ndarray[double, ndim=1] scratch = np.empty(d1 * d2)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] row_counts = np.zeros(d1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] col_counts = np.zeros(d2, dtype=np.int64)
    cdef double* accp = &acc[0]
    cdef double* scr = &scratch[0]
    cdef cnp.int64_t* rc = &row_counts[0]
    cdef cnp.int64_t* cc = &col_counts[0]
    cdef cnp.int64_t s_k = 0
    cdef Py_ssize_t k
    cdef int i, found = 0, failed = 0
    cdef double res
    with nogil:
        for k in range(n_steps):
            accp[r[k] * d2 + c[k]] += e[k]
            rc[r[k]] += 1
            cc[c[k]] += 1
            if rc[r[k]] > s_k:
                s_k = rc[r[k]]
            if cc[c[k]] > s_k:
                s_k = cc[c[k]]
            if s_k > budget:
                break
            for i in range(d1 * d2):
                scr[i] = accp[i]
            res = _opnorm_inplace(scr, d1, d2)
            if res < 0.0:
                failed = 1
                break
            if res >= threshold:
                found = 1
                break
    if failed:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    return bool(found)


def martingale_violation_dense(mats, eps, double threshold, double budget):
    """Dense-matrix variant: ``S_k = max(||sum X X^T||_op, ||sum X^T X||_op)``."""
    cdef double[:, :, ::1] x = np.ascontiguousarray(mats, dtype=np.float64)
    cdef double[::1] e = np.ascontiguousarray(eps, dtype=np.float64)
    cdef Py_ssize_t n_steps = e.shape[0]
    cdef int d1 = x.shape[1]
    cdef int d2 = x.shape[2]
    cdef int dmax = d1 if d1 > d2 else d2
    cdef cnp.ndarray[double, ndim=1] acc = np.zeros(d1 * d2)
    cdef cnp.ndarray[double, ndim=1] gl = np.zeros(d1 * d1)
    cdef cnp.ndarray[double, ndim=1] gr = np.zeros(d2 * d2)
    cdef cnp.ndarray[double, ndim=1] scratch = np.empty(dmax * dmax)
    cdef double* accp = &acc[0]
    cdef double* glp = &gl[0]
    cdef double* grp = &gr[0]
    cdef double* scr = &scratch[0]
    cdef Py_ssize_t k
    cdef int i, j, l, found = 0, failed = 0
    cdef double s_k, res, dot
    with nogil:
        for k in range(n_steps):
            for i in range(d1):
                for j in range(d2):
                    accp[i * d2 + j] += e[k] * x[k, i, j]
            for i in range(d1):
                for j in range(d1):
                    dot = 0.0
                    for l in range(d2):
                        dot += x[k, i, l] * x[k, j, l]
                    glp[i * d1 + j] += dot
            for i in range(d2):
                for j in range(d2):
                    dot = 0.0
                    for l in range(d1):
                        dot += x[k, l, i] * x[k, l, j]
                    grp[i * d2 + j] += dot
            for i in range(d1 * d1):
                scr[i] = glp[i]
            s_k = _opnorm_inplace(scr, d1, d1)
            if s_k < 0.0:
                failed = 1
                break
            for i in range(d2 * d2):
                scr[i] = grp[i]
            res = _opnorm_inplace(scr, d2, d2)
            if res < 0.0:
                failed = 1
                break
            if res > s_k:
                s_k = res
            if s_k > budget:
                break
            for i in range(d1 * d2):
                scr[i] = accp[i]
            res = _opnorm_inplace(scr, d1, d2)
            if res < 0.0:
                failed = 1
                break
            if res >= threshold:
                found = 1
                break
    if failed:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    return bool(found)


cdef inline double _link_g(int family, double par, double x) nogil:
    if family == _FAMILY_GAUSSIAN:
        return 0.5 * par * par * x * x
    if family == _FAMILY_BINOMIAL:
        if x > 0.0:
            return par * (x + log1p(exp(-x)))
        return par * log1p(exp(x))
    return exp(x)


cdef inline double _link_gprime(int family, double par, double x) nogil:
    if family == _FAMILY_GAUSSIAN:
        return par * par * x
    if family == _FAMILY_BINOMIAL:
        return par / (1.0 + exp(-x))
    return exp(x)


cdef double _penalized_objective(double* theta, double* counts, double* ysums,
                                 double t_obs, int family, double par,
                                 double lam, double* scratch,
                                 int d1, int d2) nogil:
    cdef int i, j
    cdef double phi = 0.0, nuc, colsq
    for i in range(d1 * d2):
        phi += counts[i] * _link_g(family, par, theta[i]) - ysums[i] * theta[i]
        scratch[i] = theta[i]
    phi /= t_obs
    if _jacobi(scratch, NULL, d1, d2, False, _sweep_cap(d1, d2)) != 0:
        return OBJECTIVE_FAIL
    nuc = 0.0
    for j in range(d2):
        colsq = 0.0
        for i in range(d1):
            colsq += scratch[i * d2 + j] * scratch[i * d2 + j]
        nuc += sqrt(colsq)
    return phi + lam * nuc


def prox_grad_fit(counts, ysums, double t_obs, int family, double par,
                  double lam, double gamma, double step0, int max_iters,
                  double rel_tol, double fp_tol, theta0):
    """Projected proximal gradient; see the fallback docstring for semantics.

    Returns ``(theta, iterations, converged)``.
    """
    cdef cnp.ndarray[double, ndim=2] cnt = np.ascontiguousarray(counts, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] ys = np.ascontiguousarray(ysums, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] theta = np.array(theta0, dtype=np.float64, copy=True, order="C")
    cdef int d1 = cnt.shape[0]
    cdef int d2 = cnt.shape[1]
    cdef cnp.ndarray[double, ndim=2] grad = np.empty((d1, d2))
    cdef cnp.ndarray[double, ndim=2] cand = np.empty((d1, d2))
    cdef cnp.ndarray[double, ndim=2] best = theta.copy()
    cdef cnp.ndarray[double, ndim=2] w = np.empty((d1, d2))
    cdef cnp.ndarray[double, ndim=2] v = np.empty((d2, d2))
    cdef cnp.ndarray[double, ndim=1] scratch = np.empty(d1 * d2)
    cdef cnp.ndarray[double, ndim=1] factors = np.empty(d2)

    cdef double* thp = &theta[0, 0]
    cdef double* cntp = &cnt[0, 0]
    cdef double* ysp = &ys[0, 0]
    cdef double* gp = &grad[0, 0]
    cdef double* cp = &cand[0, 0]
    cdef double* bp = &best[0, 0]
    cdef double* wp = &w[0, 0]
    cdef double* vp = &v[0, 0]
    cdef double* scr = &scratch[0]
    cdef double* fac = &factors[0]

    cdef double step = step0
    cdef double f_cur, f_new, f_best, displacement, rel_change, snorm, entry, tau
    cdef int it = 0, i, j, l
    cdef bint converged = False, failed = False, underflow = False

    with nogil:
        f_cur = _penalized_objective(thp, cntp, ysp, t_obs, family, par, lam,
                                     scr, d1, d2)
        if f_cur == OBJECTIVE_FAIL:
            failed = True
        f_best = f_cur
        while not failed and it < max_iters:
            it += 1
            for i in range(d1 * d2):
                gp[i] = (cntp[i] * _link_gprime(family, par, thp[i]) - ysp[i]) / t_obs
            while True:
                # gradient step, then singular-value soft-threshold via Jacobi
                for i in range(d1 * d2):
                    wp[i] = thp[i] - step * gp[i]
                if _jacobi(wp, vp, d1, d2, True, _sweep_cap(d1, d2)) != 0:
                    failed = True
                    break
                tau = step * lam
                for j in range(d2):
                    snorm = 0.0
                    for i in range(d1):
                        snorm += wp[i * d2 + j] * wp[i * d2 + j]
                    snorm = sqrt(snorm)
                    fac[j] = (snorm - tau) / snorm if snorm > tau else 0.0
                for i in range(d1):
                    for l in range(d2):
                        entry = 0.0
                        for j in range(d2):
                            entry += fac[j] * wp[i * d2 + j] * vp[l * d2 + j]
                        if entry > gamma:
                            entry = gamma
                        elif entry < -gamma:
                            entry = -gamma
                        cp[i * d2 + l] = entry
                f_new = _penalized_objective(cp, cntp, ysp, t_obs, family, par,
                                             lam, scr, d1, d2)
                if f_new == OBJECTIVE_FAIL:
                    failed = True
                    break
                if f_new <= f_cur + 1e-12 * (1.0 if fabs(f_cur) < 1.0 else fabs(f_cur)):
                    break
                step *= 0.5
                if step < step0 * 1e-20:
                    underflow = True
                    break
            if failed or underflow:
                break
            displacement = 0.0
            for i in range(d1 * d2):
                entry = cp[i] - thp[i]
                displacement += entry * entry
                thp[i] = cp[i]
            displacement = sqrt(displacement)
            rel_change = fabs(f_cur - f_new) / (1.0 if fabs(f_cur) < 1.0 else fabs(f_cur))
            f_cur = f_new
            if f_cur < f_best:
                f_best = f_cur
                for i in range(d1 * d2):
                    bp[i] = thp[i]
            if rel_change < rel_tol and displacement <= fp_tol:
                converged = True
                break
    if failed:
        raise RuntimeError("Jacobi SVD did not converge within the sweep cap")
    if underflow:
        raise RuntimeError("proximal gradient step size underflow")
    return best, it, bool(converged)
