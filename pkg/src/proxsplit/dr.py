"""Random block-coordinate Douglas-Rachford splitting.

The solver maintains primal auxiliaries (w_b, t_b) per coordinate block
and dual auxiliaries (v_l, s_l) per sample, linked by the aggregate
u_b = sum_l A*_{l,b} s_{l,b} / (1 + gamma_l rho_l) with A_{l,b} w_b =
y_l <x_{l,b}, w_b>.  One iteration activates a subset of blocks and a
mini-batch of samples:

    w_b <- C_b (t_b - tau_b u_b)                                 (activated b)
    t_b <- t_b + mu (prox_{tau_b f_b}(2 w_b - t_b) - w_b)
    v_l <- (s_l + gamma_l (A_{l,b} w_b)_b) / (1 + gamma_l rho_l)  (activated l)
    p_l = 2 sum_b v_{l,b} - sum_b s_{l,b}
    q_l = prox_{B(1-gamma_l rho_l)/gamma_l h}(p_l / gamma_l)
    s_{l,b} <- s_{l,b} + mu ((p_l - gamma_l q_l)/(B(1-gamma_l rho_l)) - v_{l,b})
    u_b <- u_b + sum_l A*_{l,b} (s_{l,b}^new - s_{l,b}) / (1 + gamma_l rho_l)

with C_b = (Id + tau_b sum_l c_l x_{l,b} x_{l,b}^T)^{-1},
c_l = gamma_l / (1 + gamma_l rho_l), factored once up front.  The printed
scheme reads the pre-iteration w in the v-update ("literal"); composing
the resolvents instead reads the block value just produced ("refreshed",
the default), which is also what the simplified single-block scheme of
:func:`run_simplified` does.
"""

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DomainError, FactorizationError, NumericalError
from .model import objective, reg_prox
from .prox import loss_beta, loss_prox, prox_group_l2, prox_l1
from .sampling import make_rng, sample_without_replacement
from .trace import ZEROS_TOL, ConvergenceTrace, TraceRecord, plateau_hit


@dataclass
class DRConfig:
    """Solver parameters.

    tau, gamma, rho accept scalars or per-block / per-sample sequences.
    mu is the relaxation: a constant in (eta, 2-eta) or a callable i -> mu_i.
    batch_size None means every sample each iteration; primal_activation is
    "all" or the number of blocks drawn uniformly per iteration.
    plateau_window enables early stopping when the objective moves by less
    than plateau_rtol (relative) over that many iterations.
    """

    tau: object = 1.0
    gamma: object = 1.0
    rho: object = 0.0
    mu: object = 1.5
    eta: float = 0.49
    batch_size: object = None
    primal_activation: object = "all"
    v_update_variant: str = "refreshed"
    seed: int = 0
    max_iters: int = 1000
    trace_stride: int = 10
    plateau_window: object = None
    plateau_rtol: float = 1e-10


@dataclass
class _Resolved:
    """Validated per-block / per-sample parameter arrays."""

    tau: np.ndarray
    gamma: np.ndarray
    rho: np.ndarray
    inv1p: np.ndarray  # 1 / (1 + gamma * rho)
    batch_size: int
    primal_k: object  # None = all blocks
    literal: bool


def resolve_config(problem, config):
    """Broadcast and validate a DRConfig against a problem.

    Raises DomainError naming the violated inequality; returns the
    resolved arrays.  rho is forced to 0 (with a warning) for losses
    without a Lipschitz gradient.
    """
    B = problem.num_blocks
    L = problem.n_samples
    tau = np.broadcast_to(np.asarray(config.tau, dtype=float), (B,)).copy()
    gamma = np.broadcast_to(np.asarray(config.gamma, dtype=float), (L,)).copy()
    rho = np.broadcast_to(np.asarray(config.rho, dtype=float), (L,)).copy()
    if not np.all(np.isfinite(tau)) or np.any(tau <= 0.0):
        raise DomainError("tau must be positive and finite for every block")
    if not np.all(np.isfinite(gamma)) or np.any(gamma <= 0.0):
        raise DomainError("gamma must be positive and finite for every sample")
    if not np.all(np.isfinite(rho)) or np.any(rho < 0.0):
        raise DomainError("rho must be nonnegative and finite for every sample")

    beta = loss_beta(problem.loss)
    if beta is None:
        if np.any(rho != 0.0):
            warnings.warn(
                "rho forced to 0: loss %s has no Lipschitz gradient" % problem.loss.value,
                stacklevel=2,
            )
            rho[:] = 0.0
    else:
        worst = B * beta * float(np.max(rho))
        if worst > 1.0:
            raise DomainError(
                "B*beta*rho <= 1 violated: B=%d, beta=%g, rho=%g gives %g"
                % (B, beta, float(np.max(rho)), worst)
            )
    gr = gamma * rho
    if np.any(gr >= 1.0):
        bad = int(np.argmax(gr))
        raise DomainError(
            "gamma*rho < 1 violated: gamma=%g, rho=%g gives %g"
            % (gamma[bad], rho[bad], gr[bad])
        )

    eta = float(config.eta)
    if not (0.0 < eta <= 1.0):
        raise DomainError("eta must lie in (0, 1], got %g" % eta)
    if not callable(config.mu):
        _check_mu(float(config.mu), eta)

    batch = L if config.batch_size is None else int(config.batch_size)
    if not 1 <= batch <= L:
        raise DomainError("batch_size must lie in [1, %d], got %d" % (L, batch))

    if config.primal_activation == "all":
        primal_k = None
    else:
        primal_k = int(config.primal_activation)
        if not 1 <= primal_k <= B:
            raise DomainError(
                "primal_activation must be 'all' or a block count in [1, %d], got %d"
                % (B, primal_k)
            )

    if config.v_update_variant not in ("literal", "refreshed"):
        raise DomainError(
            "v_update_variant must be 'literal' or 'refreshed', got %r"
            % (config.v_update_variant,)
        )
    if int(config.trace_stride) < 1:
        raise DomainError("trace_stride must be >= 1")
    if int(config.max_iters) < 0:
        raise DomainError("max_iters must be >= 0")
    if config.plateau_window is not None and int(config.plateau_window) < 1:
        raise DomainError("plateau_window must be >= 1 when set")

    return _Resolved(
        tau=tau,
        gamma=gamma,
        rho=rho,
        inv1p=1.0 / (1.0 + gr),
        batch_size=batch,
        primal_k=primal_k,
        literal=config.v_update_variant == "literal",
    )


def _check_mu(mu, eta):
    if not (eta < mu < 2.0 - eta):
        raise DomainError("mu must lie in (eta, 2 - eta): mu=%g, eta=%g" % (mu, eta))
    return mu


def _mu_at(config, i):
    mu = config.mu(i) if callable(config.mu) else config.mu
    return _check_mu(float(mu), float(config.eta))


@dataclass
class Preconditioner:
    """Cholesky-factored block resolvent matrices plus block data views.

    matrices[b] = Id + tau_b * X_b^T diag(c) X_b with
    c_l = gamma_l/(1+gamma_l rho_l); labels cancel since y_l^2 = 1.
    block_columns[b] is the CSR column slice of X for block b, reused by
    the iteration for all forward/adjoint products.
    """

    block_slices: list
    tau: np.ndarray
    matrices: list
    factors: list
    block_columns: list

    def apply(self, b, z):
        """Solve matrices[b] @ out = z."""
        return cho_solve(self.factors[b], z)


def build_preconditioner(problem, config):
    """Assemble and factor the per-block resolvent matrices."""
    return _build_preconditioner(problem, resolve_config(problem, config))


def _build_preconditioner(problem, res):
    Xc = problem.data.features.tocsc()
    c = res.gamma * res.inv1p
    slices = problem.partition.slices()
    matrices, factors, columns = [], [], []
    for b, sl in enumerate(slices):
        Xb = Xc[:, sl].tocsr()
        columns.append(Xb)
        gram = (Xb.T @ Xb.multiply(c[:, None])).toarray()
        M = np.eye(sl.stop - sl.start) + res.tau[b] * gram
        try:
            factors.append(cho_factor(M, lower=True))
        except (LinAlgError, ValueError) as exc:
            raise FactorizationError(
                "block %d resolvent factorization failed: %s" % (b, exc)
            ) from exc
        matrices.append(M)
    return Preconditioner(
        block_slices=slices,
        tau=res.tau,
        matrices=matrices,
        factors=factors,
        block_columns=columns,
    )


@dataclass
class DRState:
    """Solver state: primal w, t (length N), dual v, s (L x B), aggregate u."""

    w: np.ndarray
    t: np.ndarray
    v: np.ndarray
    s: np.ndarray
    u: np.ndarray
    iteration: int = 0


def dual_aggregate(problem, config, s):
    """Recompute u_b = sum_l y_l x_{l,b} s_{l,b} / (1 + gamma_l rho_l) from scratch."""
    return _aggregate(problem, resolve_config(problem, config), np.asarray(s, dtype=float))


def _aggregate(problem, res, s):
    Xc = problem.data.features.tocsc()
    coef = problem.data.labels * res.inv1p
    u = np.empty(problem.n_features)
    for b, sl in enumerate(problem.partition.slices()):
        u[sl] = Xc[:, sl].T @ (coef * s[:, b])
    return u


def init_state(problem, config, t0, s0):
    """Fresh state: w = 0 (the first iteration overwrites activated blocks),
    t = t0, s = s0, v = 0, u aggregated from s0."""
    res = resolve_config(problem, config)
    N, L, B = problem.n_features, problem.n_samples, problem.num_blocks
    t0 = np.array(t0, dtype=float).ravel()
    s0 = np.array(s0, dtype=float)
    if t0.shape != (N,):
        raise DomainError("t0 must have shape (%d,)" % N)
    if s0.shape != (L, B):
        raise DomainError("s0 must have shape (%d, %d)" % (L, B))
    return DRState(
        w=np.zeros(N),
        t=t0,
        v=np.zeros((L, B)),
        s=s0,
        u=_aggregate(problem, res, s0),
        iteration=0,
    )


def dr_iterate(state, problem, precond, config, epsilon, mu):
    """One splitting iteration, in place.

    epsilon is the activation mask of length B + L (first the blocks, then
    the samples), entries in {0, 1}, not all zero.  Non-activated blocks
    and samples keep their w, t, v, s coordinates bitwise unchanged; u is
    refreshed incrementally from the activated s deltas.
    """
    res = resolve_config(problem, config)
    B, L = problem.num_blocks, problem.n_samples
    eps = np.asarray(epsilon)
    if eps.shape != (B + L,):
        raise DomainError("epsilon must have length B + L = %d" % (B + L))
    if not np.all(np.isin(eps, (0, 1))):
        raise DomainError("epsilon entries must be 0 or 1")
    if not np.any(eps):
        raise DomainError("epsilon must activate at least one block or sample")
    act_b = np.flatnonzero(eps[:B])
    act_l = np.flatnonzero(eps[B:])
    return _iterate(state, problem, precond, res, act_b, act_l, _check_mu(float(mu), float(config.eta)))


def _iterate(state, problem, precond, res, act_b, act_l, mu):
    y = problem.data.labels
    lam = problem.reg.lam
    slices = precond.block_slices
    B = len(slices)

    aw = None
    if res.literal and act_l.size:
        aw = _block_products(precond, y, state.w, act_l)

    for b in act_b:
        sl = slices[b]
        wb = precond.apply(b, state.t[sl] - res.tau[b] * state.u[sl])
        if not np.all(np.isfinite(wb)):
            raise NumericalError("non-finite primal update in block %d" % b)
        state.w[sl] = wb
        z = 2.0 * wb - state.t[sl]
        thresh = res.tau[b] * lam
        pz = prox_l1(z, thresh) if problem.kappas[b] == 1 else prox_group_l2(z, thresh)
        state.t[sl] += mu * (pz - wb)

    if act_l.size:
        if aw is None:
            aw = _block_products(precond, y, state.w, act_l)
        g = res.gamma[act_l]
        inv1p = res.inv1p[act_l]
        s_rows = state.s[act_l, :]
        v_new = (s_rows + g[:, None] * aw) * inv1p[:, None]
        p = 2.0 * v_new.sum(axis=1) - s_rows.sum(axis=1)
        if not np.all(np.isfinite(p)):
            raise NumericalError("non-finite dual intermediate")
        scale = B * (1.0 - g * res.rho[act_l])
        q = loss_prox(problem.loss, p / g, scale / g)
        ds = mu * (((p - g * q) / scale)[:, None] - v_new)
        if not np.all(np.isfinite(ds)):
            raise NumericalError("non-finite dual update")
        state.v[act_l, :] = v_new
        state.s[act_l, :] = s_rows + ds
        coef = y[act_l] * inv1p
        for b in range(B):
            state.u[slices[b]] += precond.block_columns[b][act_l].T @ (coef * ds[:, b])

    state.iteration += 1
    return state


def _block_products(precond, y, w, act_l):
    """(A_{l,b} w_b)_{l in act_l, b} = y_l <x_{l,b}, w_b> as an (m, B) array."""
    out = np.empty((act_l.size, len(precond.block_slices)))
    for b, sl in enumerate(precond.block_slices):
        out[:, b] = precond.block_columns[b][act_l] @ w[sl]
    out *= y[act_l][:, None]
    return out


def extract_solution(state, problem, config, which="prox"):
    """Solution candidate from the state.

    "prox" (default) returns prox_{tau_b f_b}(2 w_b - t_b) per block, which
    carries exact zeros under l1/group-l2; "iterate" returns w itself.
    """
    if which == "iterate":
        return state.w.copy()
    if which == "prox":
        res = resolve_config(problem, config)
        return reg_prox(problem, 2.0 * state.w - state.t, res.tau)
    raise DomainError("which must be 'prox' or 'iterate', got %r" % (which,))


def _append_record(trace, problem, iteration, seconds, w_state, w_hat, reference):
    dist = None if reference is None else float(np.linalg.norm(w_state - reference))
    trace.append(
        TraceRecord(
            iteration=iteration,
            seconds=seconds,
            objective=objective(problem, w_state),
            dist_ref=dist,
            zeros_exact=int(np.count_nonzero(w_hat == 0.0)),
            zeros_tol=int(np.count_nonzero(np.abs(w_hat) <= ZEROS_TOL)),
        )
    )


def run(problem, config, t0=None, s0=None, reference=None, callback=None):
    """Run the block-coordinate splitting scheme.

    Per iteration the primal activation is every block ("all") or a
    uniform subset, and the dual activation is a uniform mini-batch drawn
    without replacement (partial Fisher-Yates).  By default t0 is a
    standard-normal draw from the config seed and s0 = 0.

    Parameters
    ----------
    problem : Problem
    config : DRConfig
    t0, s0 : optional initial auxiliaries (shapes (N,) and (L, B)).
    reference : optional solution vector; fills the dist_ref trace column.
    callback : optional callable(iteration, w) invoked after each iteration.

    Returns
    -------
    (w, trace)
        The extracted prox-image solution and the convergence trace.
    """
    start = time.perf_counter()
    res = resolve_config(problem, config)
    N, L, B = problem.n_features, problem.n_samples, problem.num_blocks
    rng = make_rng(config.seed)
    precond = _build_preconditioner(problem, res)
    w_init = rng.standard_normal(N)
    t_init = w_init if t0 is None else np.array(t0, dtype=float).ravel()
    s_init = np.zeros((L, B)) if s0 is None else np.array(s0, dtype=float)
    if t_init.shape != (N,):
        raise DomainError("t0 must have shape (%d,)" % N)
    if s_init.shape != (L, B):
        raise DomainError("s0 must have shape (%d, %d)" % (L, B))
    state = DRState(
        w=np.zeros(N),
        t=t_init.copy(),
        v=np.zeros((L, B)),
        s=s_init.copy(),
        u=_aggregate(problem, res, s_init),
        iteration=0,
    )
    trace = ConvergenceTrace(setup_seconds=time.perf_counter() - start)

    def w_hat():
        return reg_prox(problem, 2.0 * state.w - state.t, res.tau)

    _append_record(trace, problem, 0, time.perf_counter() - start, state.w, w_hat(), reference)
    pool_b = np.arange(B)
    pool_l = np.arange(L)
    stride = int(config.trace_stride)
    max_iters = int(config.max_iters)
    stopped_by_plateau = False
    for i in range(max_iters):
        mu = _mu_at(config, i)
        act_b = pool_b if res.primal_k is None else sample_without_replacement(rng, pool_b, res.primal_k)
        act_l = sample_without_replacement(rng, pool_l, res.batch_size)
        _iterate(state, problem, precond, res, act_b, act_l, mu)
        if callback is not None:
            callback(i + 1, state.w)
        if (i + 1) % stride == 0 or i + 1 == max_iters:
            _append_record(trace, problem, i + 1, time.perf_counter() - start, state.w, w_hat(), reference)
            if config.plateau_window is not None and plateau_hit(
                trace, int(config.plateau_window), float(config.plateau_rtol)
            ):
                stopped_by_plateau = True
                break
    trace.extra["stopped_by_plateau"] = stopped_by_plateau
    return extract_solution(state, problem, config), trace


def run_simplified(problem, config, t0=None, st0=None, reference=None, callback=None):
    """Single-block splitting with rho = 0, in substituted variables.

    Requires B = 1 and rho = 0.  Works on st = -tau*s and ut = -tau*u, so
    the dual update needs no v at all:

        w <- C (t + ut)
        t <- t + mu (prox_{tau f}(2 w - t) - w)
        q_l = prox_{h/gamma_l}(2 A_l w - st_l / (tau gamma_l))   (activated l)
        st_l <- st_l + mu tau gamma_l (q_l - A_l w)
        ut <- ut + sum_l A*_l (st_l^new - st_l)

    With matched seeds this reproduces the iterates of :func:`run` (same
    variant) exactly up to rounding.
    """
    start = time.perf_counter()
    res = resolve_config(problem, config)
    if problem.num_blocks != 1:
        raise DomainError("run_simplified requires a single block, got B=%d" % problem.num_blocks)
    if np.any(res.rho != 0.0):
        raise DomainError("run_simplified requires rho = 0")
    N, L = problem.n_features, problem.n_samples
    tau = float(res.tau[0])
    rng = make_rng(config.seed)
    precond = _build_preconditioner(problem, res)
    X = problem.data.features
    y = problem.data.labels
    w_init = rng.standard_normal(N)
    t = (w_init if t0 is None else np.array(t0, dtype=float).ravel()).copy()
    st = (np.zeros(L) if st0 is None else np.array(st0, dtype=float).ravel()).copy()
    if t.shape != (N,):
        raise DomainError("t0 must have shape (%d,)" % N)
    if st.shape != (L,):
        raise DomainError("st0 must have shape (%d,)" % L)
    ut = X.T @ (y * st)
    w = np.zeros(N)
    trace = ConvergenceTrace(setup_seconds=time.perf_counter() - start)
    _append_record(
        trace, problem, 0, time.perf_counter() - start, w,
        reg_prox(problem, 2.0 * w - t, tau), reference,
    )
    pool_l = np.arange(L)
    stride = int(config.trace_stride)
    max_iters = int(config.max_iters)
    stopped_by_plateau = False
    for i in range(max_iters):
        mu = _mu_at(config, i)
        act_l = sample_without_replacement(rng, pool_l, res.batch_size)
        w_for_dual = w.copy() if res.literal else None
        w = precond.apply(0, t + ut)
        if not np.all(np.isfinite(w)):
            raise NumericalError("non-finite primal update")
        t += mu * (reg_prox(problem, 2.0 * w - t, tau) - w)
        if res.literal:
            w_used = w_for_dual
        else:
            w_used = w
        ya = y[act_l]
        aw = ya * (X[act_l] @ w_used)
        g = res.gamma[act_l]
        q = loss_prox(problem.loss, 2.0 * aw - st[act_l] / (tau * g), 1.0 / g)
        ds = mu * tau * g * (q - aw)
        if not np.all(np.isfinite(ds)):
            raise NumericalError("non-finite dual update")
        st[act_l] += ds
        ut += X[act_l].T @ (ya * ds)
        if callback is not None:
            callback(i + 1, w)
        if (i + 1) % stride == 0 or i + 1 == max_iters:
            _append_record(
                trace, problem, i + 1, time.perf_counter() - start, w,
                reg_prox(problem, 2.0 * w - t, tau), reference,
            )
            if config.plateau_window is not None and plateau_hit(
                trace, int(config.plateau_window), float(config.plateau_rtol)
            ):
                stopped_by_plateau = True
                break
    trace.extra["stopped_by_plateau"] = stopped_by_plateau
    return reg_prox(problem, 2.0 * w - t, tau), trace
