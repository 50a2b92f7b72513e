"""0-1 loss minimax risk classifier: dual objective, accelerated subgradient
solver and the deterministic classification rule.

For a parameter ``mu`` the dual objective is

    F(mu) = 1 - tau.mu + phi(mu) + lambda.|mu|
    phi(mu) = max_{x, C} (sum_{y in C} Phi(x, y).mu - 1) / |C|

where ``x`` ranges over a finite candidate set and ``C`` over the non-empty
subsets of classes.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, ShapeError

DEFAULT_ITERATIONS = 2000


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Instances over which the inner maximization ranges.

    Stored through their label-free features ``psi`` (``N x D``); the
    embedding of ``(x_i, y)`` is ``psi[i]`` placed in class block ``y``.
    """

    psi: np.ndarray
    n_classes: int

    def __post_init__(self):
        if self.psi.ndim != 2 or self.psi.shape[0] == 0:
            raise ShapeError(f"candidate set needs a non-empty (N, D) array, got {self.psi.shape}")

    @classmethod
    def from_instances(cls, fmap, X):
        return cls(fmap.transform(X), fmap.n_classes)

    @property
    def m(self):
        return self.n_classes * self.psi.shape[1]

    def __len__(self):
        return self.psi.shape[0]

    def embedding(self, i, y):
        out = np.zeros((self.n_classes, self.psi.shape[1]))
        out[y] = self.psi[i]
        return out.ravel()


@dataclass(eq=False)
class MrcModel:
    mu: np.ndarray
    tau_used: np.ndarray
    lambda_used: np.ndarray
    objective: float
    iterations: int
    task_index: int = None
    n_classes: int = field(default=None, repr=False)

    def to_dict(self):
        return {
            "mu": self.mu.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "task_index": self.task_index,
        }

    def to_json(self):
        return json.dumps(self.to_dict())


def class_scores(mu, candidates):
    """``(N, |Y|)`` array of ``Phi(x_i, y).mu``."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (candidates.m,):
        raise ShapeError(f"parameter of length {mu.shape} for features of length {candidates.m}")
    return candidates.psi @ mu.reshape(candidates.n_classes, -1).T


def _phi_from_scores(scores):
    n_classes = scores.shape[1]
    order = np.argsort(-scores, axis=1, kind="stable")
    ranked = np.take_along_axis(scores, order, axis=1)
    values = (np.cumsum(ranked, axis=1) - 1.0) / np.arange(1, n_classes + 1)
    flat = int(np.argmax(values))
    i, size = divmod(flat, n_classes)
    return float(values[i, size]), i, order[i, :size + 1]


def phi(mu, candidates):
    """Inner maximum of the dual objective.

    At a fixed instance the best class subset is always a prefix of the
    classes sorted by decreasing score, so only ``|Y|`` subsets per instance
    are examined.

    Returns
    -------
    value : float
    argmax : tuple
        ``(instance index, sorted tuple of class indices)`` attaining it.
    """
    value, i, classes = _phi_from_scores(class_scores(mu, candidates))
    return value, (i, tuple(sorted(int(c) for c in classes)))


def objective(mu, tau, lam, candidates):
    mu = np.asarray(mu, dtype=float)
    return 1.0 - tau @ mu + phi(mu, candidates)[0] + lam @ np.abs(mu)


def solve(tau, lam, candidates, K=DEFAULT_ITERATIONS, warm_start=None, task_index=None):
    """Minimize the dual objective with Nesterov-accelerated subgradient steps.

    Uses step sizes ``a_l = (l + 1)^(-3/2)`` and momentum weights
    ``theta_l = 2 / (l + 1)``; the iterate with the smallest objective seen
    is returned, since subgradient methods are not monotone.
    """
    tau = np.asarray(tau, dtype=float)
    lam = np.asarray(lam, dtype=float)
    m = candidates.m
    if tau.shape != (m,) or lam.shape != (m,):
        raise ShapeError(f"tau {tau.shape} and lambda {lam.shape} must have length {m}")
    if np.any(lam < 0) or not np.all(np.isfinite(lam)):
        raise InvalidInputError("confidence vector lambda must be finite and non-negative")
    if K < 1:
        raise InvalidInputError("the number of iterations K must be positive")
    n_classes = candidates.n_classes
    psi = candidates.psi
    D = psi.shape[1]
    sizes = np.arange(1, n_classes + 1)

    mu = np.zeros(m) if warm_start is None else np.array(warm_start, dtype=float)
    if mu.shape != (m,):
        raise ShapeError(f"warm start of length {mu.shape} for features of length {m}")
    mubar_prev = mu.copy()
    best_mu, best_val = mu.copy(), np.inf
    grad = np.zeros((n_classes, D))

    for l in range(1, int(K) + 2):
        scores = psi @ mu.reshape(n_classes, D).T
        order = np.argsort(-scores, axis=1, kind="stable")
        values = (np.cumsum(np.take_along_axis(scores, order, axis=1), axis=1) - 1.0) / sizes
        flat = int(np.argmax(values))
        i, size = divmod(flat, n_classes)
        val = 1.0 - tau @ mu + values[i, size] + lam @ np.abs(mu)
        if val < best_val:
            best_val, best_mu = val, mu.copy()
        if l == K + 1:
            break
        grad[:] = 0.0
        grad[order[i, :size + 1]] = psi[i] / (size + 1)
        step = tau - grad.ravel() - lam * np.sign(mu)
        mubar = mu + step / (l + 1) ** 1.5
        # theta_{l+1} (1/theta_l - 1) with theta_l = 2/(l+1)
        mu = mubar + (l - 1) / (l + 2) * (mubar - mubar_prev)
        mubar_prev = mubar

    return MrcModel(best_mu, tau.copy(), lam.copy(), float(best_val), int(K), task_index, n_classes)


def minimax_objective(model):
    """Best dual objective found; an upper bound on the minimax risk."""
    return model.objective


def predict_scores(model, psi):
    psi = np.atleast_2d(psi)
    return psi @ model.mu.reshape(model.n_classes, -1).T


def predict_batch(model, fmap, X):
    """Class with the largest score for each row of ``X``; ties go to the lowest index."""
    if model.mu.shape != (fmap.m,):
        raise ShapeError(f"model of length {model.mu.shape} for a feature map with m={fmap.m}")
    return np.argmax(predict_scores(model, fmap.transform(X)), axis=1)


def predict(model, fmap, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (fmap.instance_dim,):
        raise ShapeError(f"expected an instance of length {fmap.instance_dim}, got {x.shape}")
    return int(predict_batch(model, fmap, x[None, :])[0])


def error_rate(model, psi, y):
    """Fraction of misclassified rows of precomputed features ``psi``."""
    pred = np.argmax(predict_scores(model, psi), axis=1)
    return float(np.mean(pred != np.asarray(y)))
