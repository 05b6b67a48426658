"""Stochastic baseline solvers: forward-backward, dual averaging, primal-dual.

All three share the mini-batch convention of the splitting solver (uniform
without replacement, seeded) and the same trace format, so benchmark runs
are directly comparable.  SFB and RDA use the decreasing steps
gamma_i = c / sqrt(i+1); BCPD uses constant steps tau, sigma subject to
tau * sigma * ||sum_l x_l x_l^T|| <= 1.
"""

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConvergenceError, DomainError, NumericalError
from .model import objective, reg_prox
from .prox import loss_grad, loss_prox, prox_conjugate
from .sampling import make_rng, sample_without_replacement
from .trace import ZEROS_TOL, ConvergenceTrace, TraceRecord, plateau_hit


@dataclass
class BaselineConfig:
    """Parameters shared by the baselines.

    step_c scales the decreasing SFB/RDA steps c/sqrt(i+1).  tau and sigma
    are the BCPD steps; sigma None means 1/(tau * ||sum x x^T||), the
    largest admissible value.
    """

    step_c: float = 1.0
    tau: float = 0.1
    sigma: object = None
    batch_size: object = None
    seed: int = 0
    max_iters: int = 1000
    trace_stride: int = 10
    plateau_window: object = None
    plateau_rtol: float = 1e-10


def _resolve_batch(config, L):
    batch = L if config.batch_size is None else int(config.batch_size)
    if not 1 <= batch <= L:
        raise DomainError("batch_size must lie in [1, %d], got %d" % (L, batch))
    return batch


def _batch_gradient(problem, w, act_l):
    """sum_{l in batch} y_l x_l h'(y_l <x_l, w>)."""
    X = problem.data.features
    ya = problem.data.labels[act_l]
    hp = loss_grad(problem.loss, ya * (X[act_l] @ w))
    return X[act_l].T @ (ya * hp)


def _record(trace, problem, iteration, seconds, w, reference, step=None):
    dist = None if reference is None else float(np.linalg.norm(w - reference))
    trace.append(
        TraceRecord(
            iteration=iteration,
            seconds=seconds,
            objective=objective(problem, w),
            dist_ref=dist,
            zeros_exact=int(np.count_nonzero(w == 0.0)),
            zeros_tol=int(np.count_nonzero(np.abs(w) <= ZEROS_TOL)),
        )
    )
    if step is not None:
        trace.extra.setdefault("step", []).append(step)


def sfb_run(problem, config, w0=None, reference=None, callback=None):
    """Stochastic forward-backward (proximal gradient) with decreasing steps.

    w <- prox_{gamma_i f}(w - gamma_i * batch gradient), gamma_i = c/sqrt(i+1).
    Returns (w, trace); the step sequence is kept in trace.extra["step"].
    """
    start = time.perf_counter()
    if not (config.step_c > 0.0):
        raise DomainError("step_c must be positive")
    L = problem.n_samples
    batch = _resolve_batch(config, L)
    rng = make_rng(config.seed)
    w = (rng.standard_normal(problem.n_features) if w0 is None else np.array(w0, dtype=float)).copy()
    trace = ConvergenceTrace(setup_seconds=time.perf_counter() - start)
    _record(trace, problem, 0, time.perf_counter() - start, w, reference)
    pool_l = np.arange(L)
    stride = int(config.trace_stride)
    max_iters = int(config.max_iters)
    stopped = False
    for i in range(max_iters):
        gamma_i = config.step_c / np.sqrt(i + 1.0)
        act_l = sample_without_replacement(rng, pool_l, batch)
        w = reg_prox(problem, w - gamma_i * _batch_gradient(problem, w, act_l), gamma_i)
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite iterate at iteration %d" % (i + 1))
        if callback is not None:
            callback(i + 1, w)
        if (i + 1) % stride == 0 or i + 1 == max_iters:
            _record(trace, problem, i + 1, time.perf_counter() - start, w, reference, step=gamma_i)
            if config.plateau_window is not None and plateau_hit(
                trace, int(config.plateau_window), float(config.plateau_rtol)
            ):
                stopped = True
                break
    trace.extra["stopped_by_plateau"] = stopped
    return w, trace


def rda_run(problem, config, w0=None, reference=None, callback=None):
    """Regularized dual averaging.

    Accumulates batch gradients in z and sets

        w <- prox_{gamma_i (i+1) f}(-gamma_i * z),   gamma_i = c/sqrt(i+1),

    i.e. the regularizer is weighted by the number of accumulated gradients
    so that its strength keeps pace with the growing dual sum; a coordinate
    stays at zero exactly when its running-average gradient is within the
    regularization threshold, matching the stationarity condition of the
    batch problem.  With a fixed weight the f term would fade relative to z
    and the iterates would drift toward the unregularized minimizer.
    """
    start = time.perf_counter()
    if not (config.step_c > 0.0):
        raise DomainError("step_c must be positive")
    L = problem.n_samples
    batch = _resolve_batch(config, L)
    rng = make_rng(config.seed)
    w = (rng.standard_normal(problem.n_features) if w0 is None else np.array(w0, dtype=float)).copy()
    z = np.zeros(problem.n_features)
    trace = ConvergenceTrace(setup_seconds=time.perf_counter() - start)
    _record(trace, problem, 0, time.perf_counter() - start, w, reference)
    pool_l = np.arange(L)
    stride = int(config.trace_stride)
    max_iters = int(config.max_iters)
    stopped = False
    for i in range(max_iters):
        gamma_i = config.step_c / np.sqrt(i + 1.0)
        act_l = sample_without_replacement(rng, pool_l, batch)
        z += _batch_gradient(problem, w, act_l)
        w = reg_prox(problem, -gamma_i * z, gamma_i * (i + 1.0))
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite iterate at iteration %d" % (i + 1))
        if callback is not None:
            callback(i + 1, w)
        if (i + 1) % stride == 0 or i + 1 == max_iters:
            _record(trace, problem, i + 1, time.perf_counter() - start, w, reference, step=gamma_i)
            if config.plateau_window is not None and plateau_hit(
                trace, int(config.plateau_window), float(config.plateau_rtol)
            ):
                stopped = True
                break
    trace.extra["stopped_by_plateau"] = stopped
    return w, trace


def bcpd_run(problem, config, w0=None, reference=None, callback=None):
    """Block-coordinate primal-dual (Chambolle-Pock style) baseline.

        w+ <- prox_{tau f}(w - tau u)
        v_l <- prox_{sigma h*}(v_l + sigma y_l <x_l, 2 w+ - w>)   (batch only)
        u  <- u + sum_{l in batch} (v_l^new - v_l) y_l x_l

    Steps must satisfy tau * sigma * ||sum_l x_l x_l^T|| <= 1; sigma=None
    picks equality.
    """
    start = time.perf_counter()
    if not (config.tau > 0.0):
        raise DomainError("tau must be positive")
    L = problem.n_samples
    X = problem.data.features
    y = problem.data.labels
    batch = _resolve_batch(config, L)
    nrm = operator_norm_sq(X)
    if config.sigma is None:
        sigma = 1.0 / (config.tau * nrm) if nrm > 0.0 else 1.0
    else:
        sigma = float(config.sigma)
        if not (sigma > 0.0):
            raise DomainError("sigma must be positive")
    if config.tau * sigma * nrm > 1.0 + 1e-12:
        raise DomainError(
            "tau*sigma*||sum x x^T|| <= 1 violated: tau=%g, sigma=%g, norm=%g gives %g"
            % (config.tau, sigma, nrm, config.tau * sigma * nrm)
        )
    rng = make_rng(config.seed)
    w = (rng.standard_normal(problem.n_features) if w0 is None else np.array(w0, dtype=float)).copy()
    v = np.zeros(L)
    u = np.zeros(problem.n_features)

    def prox_h(x, gamma):
        return loss_prox(problem.loss, x, gamma)

    trace = ConvergenceTrace(setup_seconds=time.perf_counter() - start)
    _record(trace, problem, 0, time.perf_counter() - start, w, reference)
    pool_l = np.arange(L)
    stride = int(config.trace_stride)
    max_iters = int(config.max_iters)
    stopped = False
    for i in range(max_iters):
        act_l = sample_without_replacement(rng, pool_l, batch)
        w_new = reg_prox(problem, w - config.tau * u, config.tau)
        ya = y[act_l]
        arg = v[act_l] + sigma * (ya * (X[act_l] @ (2.0 * w_new - w)))
        v_new = prox_conjugate(prox_h, arg, sigma)
        u += X[act_l].T @ (ya * (v_new - v[act_l]))
        v[act_l] = v_new
        w = w_new
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite iterate at iteration %d" % (i + 1))
        if callback is not None:
            callback(i + 1, w)
        if (i + 1) % stride == 0 or i + 1 == max_iters:
            _record(trace, problem, i + 1, time.perf_counter() - start, w, reference)
            if config.plateau_window is not None and plateau_hit(
                trace, int(config.plateau_window), float(config.plateau_rtol)
            ):
                stopped = True
                break
    trace.extra["stopped_by_plateau"] = stopped
    return w, trace


def operator_norm_sq(features, rtol=1e-6, max_iters=1000, seed=0):
    """||sum_l x_l x_l^T|| = largest eigenvalue of X^T X, by power iteration.

    Stops when the eigen-residual ||X^T X z - lam z|| drops below
    rtol * lam, which bounds the eigenvalue error by the same amount.
    Raises ConvergenceError at the iteration cap.
    """
    X = sp.csr_matrix(features, dtype=float)
    n = X.shape[1]
    if n == 0:
        raise DomainError("feature matrix must have at least one column")
    rng = make_rng(seed)
    z = rng.standard_normal(n)
    z /= np.linalg.norm(z)
    for _ in range(int(max_iters)):
        mz = X.T @ (X @ z)
        lam = float(z @ mz)
        if np.linalg.norm(mz - lam * z) <= rtol * max(lam, np.finfo(float).tiny):
            return lam
        nrm = float(np.linalg.norm(mz))
        if nrm == 0.0:
            return 0.0
        z = mz / nrm
    raise ConvergenceError(
        "power iteration did not reach relative tolerance %g in %d iterations" % (rtol, max_iters)
    )
