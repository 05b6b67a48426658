"""Problem container: data, block structure, regularizer, loss.

A problem is the composite criterion

    F(w) = sum_l h(y_l * <x_l, w>) + lambda * sum_b ||w_b||_{kappa_b}

over contiguous coordinate blocks w_1, ..., w_B, where h is one of the
scalar margin losses and kappa_b in {1, 2} picks the l1 norm or the
(non-squared) l2 norm per block.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DomainError
from .prox import ScalarLoss, loss_grad, loss_value, prox_group_l2, prox_l1


@dataclass(frozen=True)
class TrainingSet:
    """Feature matrix (L x N, CSR) with labels in {-1, +1}."""

    features: sp.csr_matrix
    labels: np.ndarray

    def __post_init__(self):
        X = self.features
        if not (sp.issparse(X) and X.format == "csr" and X.dtype == np.float64):
            X = sp.csr_matrix(X, dtype=float)  # keep an already-canonical matrix shared
        y = np.asarray(self.labels, dtype=float).ravel()
        if X.shape[0] == 0 or X.shape[1] == 0:
            raise DomainError("training set must have at least one sample and one feature")
        if y.shape[0] != X.shape[0]:
            raise DomainError(
                "label count %d does not match sample count %d" % (y.shape[0], X.shape[0])
            )
        if not np.all(np.isin(y, (-1.0, 1.0))):
            raise DomainError("labels must be -1 or +1")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous partition of {0, ..., N-1} given by offsets[0]=0 < ... < offsets[B]=N."""

    offsets: tuple

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        if len(offs) < 2 or offs[0] != 0:
            raise DomainError("offsets must start at 0 and contain at least one block")
        if any(b <= a for a, b in zip(offs, offs[1:])):
            raise DomainError("offsets must be strictly increasing (empty blocks are not allowed)")
        object.__setattr__(self, "offsets", offs)

    @classmethod
    def contiguous(cls, n_features, num_blocks):
        """Split N coordinates into num_blocks blocks of size ceil(N/B) (last one smaller)."""
        n = int(n_features)
        b = int(num_blocks)
        if b < 1 or b > n:
            raise DomainError("need 1 <= num_blocks <= n_features, got B=%d, N=%d" % (b, n))
        size = math.ceil(n / b)
        offs = [0]
        while offs[-1] < n:
            offs.append(min(offs[-1] + size, n))
        return cls(tuple(offs))

    @property
    def num_blocks(self):
        return len(self.offsets) - 1

    @property
    def n_features(self):
        return self.offsets[-1]

    def slices(self):
        return [slice(a, b) for a, b in zip(self.offsets, self.offsets[1:])]


@dataclass(frozen=True)
class RegularizerSpec:
    """Weight lam >= 0 and per-block norm exponent kappa (1 or 2, scalar or per block)."""

    lam: float
    kappa: object = 1

    def __post_init__(self):
        if not (self.lam >= 0.0) or not math.isfinite(self.lam):
            raise DomainError("lambda must be nonnegative and finite")
        kappa = self.kappa
        if np.isscalar(kappa):
            if kappa not in (1, 2):
                raise DomainError("kappa must be 1 or 2, got %r" % (kappa,))
        else:
            kappa = tuple(int(k) for k in kappa)
            if any(k not in (1, 2) for k in kappa):
                raise DomainError("every block kappa must be 1 or 2")
            object.__setattr__(self, "kappa", kappa)


@dataclass(frozen=True)
class Problem:
    """A training set with its block partition, regularizer and loss."""

    data: TrainingSet
    partition: BlockPartition
    reg: RegularizerSpec
    loss: ScalarLoss = ScalarLoss.LOGISTIC
    kappas: tuple = field(init=False)

    def __post_init__(self):
        if self.partition.n_features != self.data.n_features:
            raise DomainError(
                "partition covers %d coordinates but data has %d features"
                % (self.partition.n_features, self.data.n_features)
            )
        B = self.partition.num_blocks
        kappa = self.reg.kappa
        if np.isscalar(kappa):
            kappas = (int(kappa),) * B
        else:
            if len(kappa) != B:
                raise DomainError(
                    "kappa has %d entries for %d blocks" % (len(kappa), B)
                )
            kappas = tuple(kappa)
        object.__setattr__(self, "kappas", kappas)

    @property
    def n_features(self):
        return self.data.n_features

    @property
    def n_samples(self):
        return self.data.n_samples

    @property
    def num_blocks(self):
        return self.partition.num_blocks


def margins(problem, w):
    """y_l * <x_l, w> for all samples."""
    return problem.data.labels * (problem.data.features @ np.asarray(w, dtype=float))


def regularizer_value(problem, w):
    """lambda * sum_b ||w_b||_{kappa_b}."""
    w = np.asarray(w, dtype=float)
    total = 0.0
    for sl, kappa in zip(problem.partition.slices(), problem.kappas):
        block = w[sl]
        total += np.sum(np.abs(block)) if kappa == 1 else np.linalg.norm(block)
    return problem.reg.lam * total


def objective(problem, w):
    """Full criterion: summed margin losses plus the regularizer."""
    return float(np.sum(loss_value(problem.loss, margins(problem, w))) + regularizer_value(problem, w))


def smooth_gradient(problem, w):
    """Gradient of the data-fit term: sum_l y_l x_l h'(y_l <x_l, w>)."""
    y = problem.data.labels
    g = loss_grad(problem.loss, margins(problem, w))
    return problem.data.features.T @ (y * g)


def reg_prox(problem, z, tau):
    """Blockwise prox of tau_b * lambda * ||.||_{kappa_b}; exact zeros survive.

    tau may be a scalar or one value per block.
    """
    z = np.asarray(z, dtype=float)
    B = problem.num_blocks
    tau_b = np.broadcast_to(np.asarray(tau, dtype=float), (B,))
    out = np.empty_like(z)
    for b, (sl, kappa) in enumerate(zip(problem.partition.slices(), problem.kappas)):
        thresh = tau_b[b] * problem.reg.lam
        if kappa == 1:
            out[sl] = prox_l1(z[sl], thresh)
        else:
            out[sl] = prox_group_l2(z[sl], thresh)
    return out


def predict(w, features):
    """Class labels sign(<x, w>); ties on the decision boundary go to +1."""
    scores = sp.csr_matrix(features, dtype=float) @ np.asarray(w, dtype=float)
    return np.where(scores >= 0.0, 1.0, -1.0)


def test_error(w, test_set):
    """Fraction of misclassified samples of a TrainingSet."""
    if test_set.n_samples == 0:
        raise DomainError("cannot evaluate the error of an empty test set")
    pred = predict(w, test_set.features)
    return float(np.mean(pred != test_set.labels))


def sparsity_degree(w, tol=1e-8):
    """Fraction of coordinates with |w_j| <= tol (tol=0 counts exact zeros)."""
    if tol < 0.0:
        raise DomainError("tolerance must be nonnegative")
    w = np.asarray(w, dtype=float)
    if w.size == 0:
        raise DomainError("empty weight vector")
    return float(np.mean(np.abs(w) <= tol))


def kkt_residual(problem, w):
    """Worst first-order optimality violation of w.

    With g the smooth-part gradient, stationarity requires -g to lie in the
    subdifferential of the regularizer.  Per l1 coordinate this means
    |g_j| <= lambda at zeros and g_j = -lambda*sign(w_j) elsewhere; per l2
    block, ||g_b|| <= lambda at zero blocks and g_b = -lambda*w_b/||w_b||
    elsewhere.  Returns the largest violation over all blocks.
    """
    w = np.asarray(w, dtype=float)
    g = smooth_gradient(problem, w)
    lam = problem.reg.lam
    worst = 0.0
    for sl, kappa in zip(problem.partition.slices(), problem.kappas):
        wb, gb = w[sl], g[sl]
        if kappa == 1:
            zero = wb == 0.0
            if np.any(zero):
                worst = max(worst, float(np.max(np.maximum(np.abs(gb[zero]) - lam, 0.0))))
            if np.any(~zero):
                worst = max(worst, float(np.max(np.abs(gb[~zero] + lam * np.sign(wb[~zero])))))
        else:
            nrm = np.linalg.norm(wb)
            if nrm == 0.0:
                worst = max(worst, max(0.0, float(np.linalg.norm(gb)) - lam))
            else:
                worst = max(worst, float(np.linalg.norm(gb + lam * wb / nrm)))
    return worst
