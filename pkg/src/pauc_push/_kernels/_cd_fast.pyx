# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate-descent kernel (hot inner loop of the solver)."""

from libc.math cimport fabs, INFINITY


cdef double _sweep(const double[:, ::1] XT, double[::1] u, const double[::1] omega,
                   double[::1] beta, double[::1] intercept,
                   const long long[::1] cols, const double[::1] col_curv,
                   double lam1, double lam2, double sum_omega,
                   bint update_intercept) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t n_cols = cols.shape[0]
    cdef Py_ssize_t i, ci, m
    cdef double max_delta = 0.0
    cdef double s, d0, a, g, z, b_new, d
    if update_intercept:
        s = 0.0
        for i in range(n):
            s += u[i]
        d0 = -s / sum_omega
        if d0 != 0.0:
            intercept[0] += d0
            for i in range(n):
                u[i] += omega[i] * d0
            max_delta = fabs(d0)
    for ci in range(n_cols):
        m = <Py_ssize_t> cols[ci]
        a = col_curv[m]
        if a <= 0.0:
            continue
        g = 0.0
        for i in range(n):
            g += XT[m, i] * u[i]
        z = a * beta[m] - g
        if z > lam1:
            b_new = (z - lam1) / (a + lam2)
        elif z < -lam1:
            b_new = (z + lam1) / (a + lam2)
        else:
            b_new = 0.0
        d = b_new - beta[m]
        if d != 0.0:
            beta[m] = b_new
            for i in range(n):
                u[i] += omega[i] * XT[m, i] * d
            if fabs(d) > max_delta:
                max_delta = fabs(d)
    return max_delta


def cd_sweep(const double[:, ::1] XT, double[::1] u, const double[::1] omega,
             double[::1] beta, double[::1] intercept,
             const long long[::1] cols, const double[::1] col_curv,
             double lam1, double lam2, double sum_omega,
             bint update_intercept):
    """One cyclic coordinate pass; see `_cd_py.cd_sweep` for the contract."""
    cdef double max_delta
    with nogil:
        max_delta = _sweep(XT, u, omega, beta, intercept, cols, col_curv,
                           lam1, lam2, sum_omega, update_intercept)
    return max_delta


def cd_solve(const double[:, ::1] XT, double[::1] u, const double[::1] omega,
             double[::1] beta, double[::1] intercept,
             const long long[::1] cols, const double[::1] col_curv,
             double lam1, double lam2, double sum_omega,
             bint update_intercept, double tol, long long max_sweeps):
    """Sweep until the largest change drops below tol; returns (sweeps, delta)."""
    cdef long long sweeps = 0
    cdef double delta = INFINITY
    with nogil:
        while sweeps < max_sweeps:
            delta = _sweep(XT, u, omega, beta, intercept, cols, col_curv,
                           lam1, lam2, sum_omega, update_intercept)
            sweeps += 1
            if delta < tol:
                break
    return sweeps, delta
