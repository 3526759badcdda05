"""Pure-Python (NumPy) coordinate-descent kernel.

Fallback used when the compiled extension is unavailable.  Semantics match
`_cd_fast` exactly; only summation order (and hence the last few ulps)
may differ.
"""
from __future__ import annotations

import math


def cd_sweep(XT, u, omega, beta, intercept, cols, col_curv, lam1, lam2,
             sum_omega, update_intercept):
    """One cyclic coordinate pass on the local quadratic model.

    XT is the (p, n) transposed design; u holds the weighted residual
    d + omega * (f - f0) and is kept consistent in place, as are beta and
    the one-element intercept array.  Returns the largest absolute
    coefficient change of the pass.
    """
    max_delta = 0.0
    if update_intercept:
        d0 = -float(u.sum()) / sum_omega
        if d0 != 0.0:
            intercept[0] += d0
            u += omega * d0
            max_delta = abs(d0)
    for m in cols:
        a = col_curv[m]
        if a <= 0.0:
            continue
        x = XT[m]
        g = float(x @ u)
        z = a * beta[m] - g
        over = abs(z) - lam1
        b_new = 0.0 if over <= 0.0 else math.copysign(over, z) / (a + lam2)
        d = b_new - beta[m]
        if d != 0.0:
            beta[m] = b_new
            u += omega * (x * d)
            if abs(d) > max_delta:
                max_delta = abs(d)
    return max_delta


def cd_solve(XT, u, omega, beta, intercept, cols, col_curv, lam1, lam2,
             sum_omega, update_intercept, tol, max_sweeps):
    """Sweep until the largest coefficient change drops below tol.

    Returns (sweeps_used, last_max_delta).
    """
    sweeps = 0
    delta = math.inf
    while sweeps < max_sweeps:
        delta = cd_sweep(XT, u, omega, beta, intercept, cols, col_curv,
                         lam1, lam2, sum_omega, update_intercept)
        sweeps += 1
        if delta < tol:
            break
    return sweeps, delta
