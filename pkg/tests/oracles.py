"""Independent reference computations for the test suite.

Everything here is deliberately naive: bisection instead of Newton,
dense eigensolvers instead of power iteration, bounded scalar search
instead of closed forms.  Slow but hard to get wrong, so the fast
implementations can be checked against these.
"""

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import expit


def prox_logistic_bisect(v, gamma, iters=200):
    """Root of p - v - gamma*sigma(-p) by plain bisection on [v, v+gamma]."""
    v = float(v)
    gamma = float(gamma)
    lo, hi = v, v + gamma
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid - v - gamma * expit(-mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def prox_by_minimization(loss_fn, v, gamma):
    """argmin_p 0.5*(p - v)^2 + gamma*loss_fn(p) by bounded scalar search."""
    v = float(v)
    gamma = float(gamma)
    span = 10.0 + abs(v) + gamma
    res = minimize_scalar(
        lambda p: 0.5 * (p - v) ** 2 + gamma * loss_fn(p),
        bounds=(v - span, v + span),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)


def central_difference(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def top_eigenvalue(X):
    """Largest eigenvalue of X^T X via the dense symmetric eigensolver."""
    dense = X.toarray() if hasattr(X, "toarray") else np.asarray(X, dtype=float)
    if dense.shape[1] == 0:
        return 0.0
    return float(np.linalg.eigvalsh(dense.T @ dense)[-1])


# Correctly rounded doubles computed with mpmath at 60 decimal digits.
# Compared with a few-ulp tolerance, never bitwise.
PROX_LOGISTIC_0_1 = 0.40105813754154701      # prox of logistic at v=0, gamma=1
PROX_LOGISTIC_10_1 = 10.00004539580797       # v=10, gamma=1
PROX_LOGISTIC_25_05 = 2.5366637747721663     # v=2.5, gamma=0.5
PROX_LOGISTIC_M30_1 = -29.000000000000256    # v=-30, gamma=1 (deep tail)
PROX_LOGISTIC_M20_2 = -18.000000030459958    # v=-20, gamma=2 (deep tail)
PROX_CONJ_5_2 = -0.07332754954433252         # conjugate prox, v=5, sigma=2
