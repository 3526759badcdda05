"""Independent reference implementations used only by the tests.

Everything here is written the slow, obvious way (explicit loops, dense
Newton solves) so the production code paths are checked against genuinely
different computations.
"""
import math

import numpy as np
from scipy.stats import rankdata


def brute_quantile(neg, t):
    """Order-statistic threshold: m-th smallest with m = ceil((1-t)*K)."""
    K = len(neg)
    m = math.ceil((1.0 - t) * K - 1e-9)
    if m <= 0:
        return -math.inf, 0
    return sorted(neg)[m - 1], m


def brute_pauc(scores, labels, t, tie_policy="strict"):
    """Double enumeration of the pair-counting partial-AUC estimator."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    threshold, _ = brute_quantile(neg, t)
    total = 0.0
    for sj in pos:
        for sk in neg:
            if sk > threshold:
                if sj > sk:
                    total += 1.0
                elif sj == sk and tie_policy == "half-credit":
                    total += 0.5
    return total / (len(pos) * len(neg))


def brute_zero_one_push(scores, labels, t):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    threshold, _ = brute_quantile(neg, t)
    total = 0
    for sk in neg:
        if sk > threshold:
            total += sum(1 for sj in pos if sj < sk)
    return total


def brute_pnorm(scores, labels, p):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == -1]
    return float(sum(sum(1 for sj in pos if sj < sk) ** p for sk in neg))


def mann_whitney_auc(scores, labels):
    """Tie-corrected AUC from average ranks."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    ranks = rankdata(scores)
    J = int(np.sum(labels == 1))
    K = int(np.sum(labels == -1))
    r_pos = float(np.sum(ranks[labels == 1]))
    return (r_pos - J * (J + 1) / 2.0) / (J * K)


def newton_logistic(X, y01, v, max_iter=200, tol=1e-12):
    """Dense damped-Newton fit of the v-weighted logistic likelihood.

    Returns (intercept, coefficients).  Intended for small, well-behaved,
    non-separable problems only.
    """
    n, p = X.shape
    Z = np.column_stack([np.ones(n), X])
    theta = np.zeros(p + 1)

    def loss(th):
        f = Z @ th
        return float(np.sum(v * (np.logaddexp(0.0, f) - y01 * f)))

    current = loss(theta)
    for _ in range(max_iter):
        f = Z @ theta
        mu = 1.0 / (1.0 + np.exp(-f))
        grad = Z.T @ (v * (mu - y01))
        W = v * mu * (1.0 - mu)
        H = Z.T @ (Z * W[:, None]) + 1e-12 * np.eye(p + 1)
        step = np.linalg.solve(H, grad)
        scale = 1.0
        while scale > 1e-8:
            candidate = theta - scale * step
            new = loss(candidate)
            if new <= current:
                break
            scale *= 0.5
        theta = theta - scale * step
        if new > current:
            break
        moved = scale * float(np.max(np.abs(step)))
        current = new
        if moved < tol:
            break
    return float(theta[0]), theta[1:]


def central_difference_gradient(fun, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy()
        dn = x.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (fun(up) - fun(dn)) / (2.0 * h)
    return g
