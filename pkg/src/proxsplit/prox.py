"""Proximity operators and scalar margin losses.

The logistic prox is the numerical core: prox of gamma*log(1+exp(-v)) has
no elementary closed form, but its optimality condition

    p - v = gamma / (exp(p) + 1)

pins p inside (v, v+gamma) where the left side is increasing with slope
>= 1, so a safeguarded Newton iteration converges for every finite input.
Equivalently p = v + W_{exp(-v)}(gamma*exp(-v)) in terms of the
generalized Lambert W branch of :mod:`proxsplit.lambert`; the Newton form
avoids exp(-v) overflow for very negative v.  Far below zero the solution
collapses onto v + gamma and a two-term expansion is both cheaper and
exact to machine precision.
"""

import enum

import numpy as np
from scipy.special import expit

from .errors import ConvergenceError, DomainError

# delegate prox_logistic to the asymptotic expansion when gamma + v is below
# this: the expansion parameter exp(gamma+v) is then < 6.4e-16, so the
# neglected third-order term is far under double precision, and the Newton
# path would see no representable curvature anyway
V_SWITCH = -35.0


def _sigma_neg(p):
    """1 / (exp(p) + 1), overflow-safe for any float p."""
    t = np.exp(-np.abs(p))
    return np.where(p >= 0.0, t / (1.0 + t), 1.0 / (1.0 + t))


def prox_logistic(v, gamma, tol=1e-14, max_iters=200):
    """Proximity operator of gamma * log(1 + exp(-.)) at v.

    Parameters
    ----------
    v : float or array
        Evaluation point(s).
    gamma : float or array
        Positive scale, broadcastable against v.
    tol : float
        Newton stopping tolerance on the optimality residual, relative to
        max(1, gamma).
    max_iters : int
        Safeguarded-Newton iteration cap.

    Returns
    -------
    float or ndarray
        The unique p with p - v = gamma/(exp(p)+1).  The returned value is
        clamped to the open interval (v, v+gamma): when rounding would land
        exactly on an endpoint the nearest interior double is returned.
    """
    v_arr, g_arr = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(gamma, dtype=float))
    if not np.all(g_arr > 0.0):
        raise DomainError("gamma must be positive")
    if not (np.all(np.isfinite(v_arr)) and np.all(np.isfinite(g_arr))):
        raise DomainError("prox_logistic arguments must be finite")
    scalar = v_arr.ndim == 0
    v_arr = np.atleast_1d(v_arr)
    g_arr = np.atleast_1d(g_arr)

    p = np.empty_like(v_arr)
    tail = g_arr + v_arr <= V_SWITCH
    if np.any(tail):
        p[tail] = prox_logistic_asymptotic(v_arr[tail], g_arr[tail])
    head = ~tail
    if np.any(head):
        p[head] = _prox_logistic_newton(v_arr[head], g_arr[head], tol, max_iters)

    # the exact solution is strictly interior; keep the float one interior too
    lo_open = np.nextafter(v_arr, np.inf)
    hi_open = np.nextafter(v_arr + g_arr, -np.inf)
    p = np.maximum(np.minimum(p, hi_open), lo_open)
    if scalar:
        return float(p[0])
    return p


def _prox_logistic_newton(v, gamma, tol, max_iters):
    """Safeguarded Newton for the logistic prox on the bracket [v, v+gamma]."""
    lo = v.copy()
    hi = v + gamma
    p = v + 0.5 * gamma
    step_old = hi - lo
    done = np.zeros(v.shape, dtype=bool)
    tol_abs = tol * np.maximum(1.0, gamma)
    for _ in range(max_iters):
        g = p - v - gamma * _sigma_neg(p)
        t = np.exp(-np.abs(p))
        gp = 1.0 + gamma * t / (1.0 + t) ** 2
        hi = np.where(~done & (g > 0.0), p, hi)
        lo = np.where(~done & (g <= 0.0), p, lo)
        width = hi - lo
        done |= (np.abs(g) <= tol_abs) | (width <= 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(p)))
        if np.all(done):
            break
        cand = p - g / gp
        # bisect when the step leaves the bracket or fails to halve the
        # previous one; plain in-bracket acceptance admits two-cycles that
        # straddle the root without ever tightening it
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi) | (2.0 * np.abs(g) > step_old * gp)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        step_old = np.where(done, step_old, np.abs(cand - p))
        p = np.where(done, p, cand)
    else:
        raise ConvergenceError("logistic prox Newton did not converge in %d iterations" % max_iters)
    return p


def prox_logistic_asymptotic(v, gamma):
    """Two-term expansion v + gamma*(1 - e^(gamma+v) + (1+gamma)*e^(2(gamma+v))).

    Intended for gamma + v well below zero (see V_SWITCH), where it agrees
    with the exact prox to machine precision and never overflows.
    """
    v = np.asarray(v, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    t = gamma + v
    with np.errstate(over="ignore"):
        out = v + gamma * (1.0 - np.exp(t) + (1.0 + gamma) * np.exp(2.0 * t))
    if out.ndim == 0:
        return float(out)
    return out


def prox_hinge(v, gamma, q):
    """Prox of gamma * max(0, 1-v)**q for q in {1, 2} (closed form)."""
    if q not in (1, 2):
        raise DomainError("hinge exponent q must be 1 or 2, got %r" % (q,))
    v_arr, g_arr = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(gamma, dtype=float))
    if not np.all(np.isfinite(g_arr) & (g_arr > 0.0)):
        raise DomainError("gamma must be positive and finite")
    if q == 1:
        out = np.where(v_arr > 1.0, v_arr, np.where(v_arr >= 1.0 - g_arr, 1.0, v_arr + g_arr))
    else:
        out = np.where(v_arr >= 1.0, v_arr, (v_arr + 2.0 * g_arr) / (1.0 + 2.0 * g_arr))
    if out.ndim == 0:
        return float(out)
    return out


def prox_huber(v, gamma):
    """Prox of the one-sided Huber loss (0 for v>=1, -v for v<=-1, quadratic between)."""
    v_arr, g_arr = np.broadcast_arrays(np.asarray(v, dtype=float), np.asarray(gamma, dtype=float))
    if not np.all(np.isfinite(g_arr) & (g_arr > 0.0)):
        raise DomainError("gamma must be positive and finite")
    out = np.where(
        v_arr >= 1.0,
        v_arr,
        np.where(v_arr <= -1.0 - g_arr, v_arr + g_arr, (2.0 * v_arr + g_arr) / (2.0 + g_arr)),
    )
    if out.ndim == 0:
        return float(out)
    return out


def prox_l1(w, thresh):
    """Soft thresholding: sign(w) * max(|w| - thresh, 0), with exact zeros."""
    if thresh < 0.0:
        raise DomainError("threshold must be nonnegative")
    w = np.asarray(w, dtype=float)
    return np.sign(w) * np.maximum(np.abs(w) - thresh, 0.0)


def prox_group_l2(w, thresh):
    """Block shrinkage (1 - thresh/||w||_2)_+ * w; the zero vector when ||w|| <= thresh."""
    if thresh < 0.0:
        raise DomainError("threshold must be nonnegative")
    w = np.asarray(w, dtype=float)
    nrm = np.linalg.norm(w)
    if nrm <= thresh:
        return np.zeros_like(w)
    return (1.0 - thresh / nrm) * w


def prox_conjugate(prox_of_h, v, sigma):
    """Prox of sigma * h^* via the Moreau decomposition.

    prox_{sigma h*}(v) = v - sigma * prox_{h/sigma}(v / sigma), where
    prox_of_h(x, gamma) evaluates prox_{gamma h}(x).
    """
    if not np.all(np.asarray(sigma) > 0.0):
        raise DomainError("sigma must be positive")
    return v - sigma * prox_of_h(v / sigma, 1.0 / sigma)


class ScalarLoss(enum.Enum):
    """Margin losses h(v) applied to y * <x, w>."""

    LOGISTIC = "logistic"
    HINGE_Q1 = "hinge_q1"
    HINGE_Q2 = "hinge_q2"
    HUBER = "huber"


def loss_value(loss, v):
    """Evaluate the loss elementwise, overflow-safe for extreme margins."""
    v = np.asarray(v, dtype=float)
    if loss is ScalarLoss.LOGISTIC:
        return np.logaddexp(0.0, -v)
    if loss is ScalarLoss.HINGE_Q1:
        return np.maximum(0.0, 1.0 - v)
    if loss is ScalarLoss.HINGE_Q2:
        return np.maximum(0.0, 1.0 - v) ** 2
    if loss is ScalarLoss.HUBER:
        return np.where(v >= 1.0, 0.0, np.where(v <= -1.0, -v, 0.25 * (v - 1.0) ** 2))
    raise DomainError("unknown loss %r" % (loss,))


def loss_grad(loss, v):
    """Derivative of the loss; at hinge kinks the zero subgradient side is used."""
    v = np.asarray(v, dtype=float)
    if loss is ScalarLoss.LOGISTIC:
        return -expit(-v)
    if loss is ScalarLoss.HINGE_Q1:
        return np.where(v < 1.0, -1.0, 0.0)
    if loss is ScalarLoss.HINGE_Q2:
        return -2.0 * np.maximum(0.0, 1.0 - v)
    if loss is ScalarLoss.HUBER:
        return np.where(v >= 1.0, 0.0, np.where(v <= -1.0, -1.0, 0.5 * (v - 1.0)))
    raise DomainError("unknown loss %r" % (loss,))


def loss_prox(loss, v, gamma):
    """prox_{gamma h}(v) for the given scalar loss."""
    if loss is ScalarLoss.LOGISTIC:
        return prox_logistic(v, gamma)
    if loss is ScalarLoss.HINGE_Q1:
        return prox_hinge(v, gamma, 1)
    if loss is ScalarLoss.HINGE_Q2:
        return prox_hinge(v, gamma, 2)
    if loss is ScalarLoss.HUBER:
        return prox_huber(v, gamma)
    raise DomainError("unknown loss %r" % (loss,))


def loss_beta(loss):
    """Lipschitz constant of the loss gradient; None marks the losses that
    must run with the rho = 0 limit of the splitting scheme."""
    if loss is ScalarLoss.LOGISTIC:
        return 0.25
    return None
