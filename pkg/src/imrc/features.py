"""Random Fourier feature map with one-hot label encoding, and per-task
sample statistics.

The feature vector of a labeled instance ``(x, y)`` is the concatenation of
``n_classes`` blocks of length ``rff_dim``; block ``y`` holds

    psi_i(x) = sqrt(2 / D) * cos(w_i . x + b_i),   i = 1..D

and every other block is zero.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EmptyTaskError, InvalidConfigError, ShapeError

DEFAULT_VARIANCE_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Frozen mapping ``(x, y) -> R^m`` with ``m = n_classes * rff_dim``."""

    instance_dim: int
    rff_dim: int
    n_classes: int
    frequencies: np.ndarray  # (rff_dim, instance_dim)
    phases: np.ndarray  # (rff_dim,)

    def __post_init__(self):
        self.frequencies.setflags(write=False)
        self.phases.setflags(write=False)

    @property
    def m(self):
        return self.n_classes * self.rff_dim

    @property
    def bound(self):
        """Sup-norm bound ``M`` of every embedded vector."""
        return float(np.sqrt(2.0 / self.rff_dim))

    def transform(self, X):
        """Label-free part of the map: ``(N, instance_dim) -> (N, rff_dim)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.instance_dim:
            raise ShapeError(
                f"expected instances with {self.instance_dim} attributes, got shape {X.shape}"
            )
        return self.bound * np.cos(X @ self.frequencies.T + self.phases)

    def embed_batch(self, X, y):
        """Embed labeled instances as an ``(N, m)`` array."""
        psi = self.transform(X)
        y = self._check_labels(y, psi.shape[0])
        out = np.zeros((psi.shape[0], self.n_classes, self.rff_dim))
        out[np.arange(psi.shape[0]), y] = psi
        return out.reshape(psi.shape[0], self.m)

    def _check_labels(self, y, n):
        y = np.asarray(y)
        if y.shape != (n,):
            raise ShapeError(f"expected {n} labels, got shape {y.shape}")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DomainError("class labels must be integers")
            y = y.astype(int)
        if n and (y.min() < 0 or y.max() >= self.n_classes):
            raise DomainError(f"class index outside [0, {self.n_classes})")
        return y


def build_feature_map(instance_dim, n_classes, rff_dim=200, sigma2_scale=10.0, seed=None):
    """Draw a random Fourier feature map.

    Frequencies are i.i.d. ``N(0, 1/sigma2_scale)`` per component, which
    approximates the Gaussian kernel ``exp(-|x - x'|^2 / (2 sigma2_scale))``.
    Phases are uniform on ``[0, 2 pi)``.
    """
    for name, value in (("instance_dim", instance_dim), ("n_classes", n_classes),
                        ("rff_dim", rff_dim)):
        if int(value) != value or value <= 0:
            raise InvalidConfigError(f"{name} must be a positive integer, got {value!r}")
    if not sigma2_scale > 0:
        raise InvalidConfigError(f"sigma2_scale must be positive, got {sigma2_scale!r}")
    rng = np.random.default_rng(seed)
    frequencies = rng.normal(0.0, 1.0 / np.sqrt(sigma2_scale), size=(int(rff_dim), int(instance_dim)))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=int(rff_dim))
    return FeatureMap(int(instance_dim), int(rff_dim), int(n_classes), frequencies, phases)


def embed(fmap, x, y):
    """Feature vector of one labeled instance."""
    x = np.asarray(x, dtype=float)
    if x.shape != (fmap.instance_dim,):
        raise ShapeError(f"expected an instance of length {fmap.instance_dim}, got shape {x.shape}")
    if int(y) != y or not 0 <= y < fmap.n_classes:
        raise DomainError(f"class index {y!r} outside [0, {fmap.n_classes})")
    out = np.zeros(fmap.m)
    out[int(y) * fmap.rff_dim:(int(y) + 1) * fmap.rff_dim] = fmap.transform(x)[0]
    return out


@dataclass(frozen=True, eq=False)
class TaskStats:
    """Sample average ``tau``, floored variance ``sigma2`` and MSE ``s = sigma2 / n``."""

    tau: np.ndarray
    sigma2: np.ndarray
    s: np.ndarray
    n: int

    @property
    def m(self):
        return self.tau.shape[0]


def stats_from_features(F, variance_floor=DEFAULT_VARIANCE_FLOOR):
    """Statistics of an ``(n, m)`` array of already embedded samples."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2:
        raise ShapeError(f"expected a 2-d array of embeddings, got shape {F.shape}")
    n = F.shape[0]
    if n == 0:
        raise EmptyTaskError("cannot compute statistics of an empty task")
    if not variance_floor > 0:
        raise InvalidConfigError("variance_floor must be positive")
    tau = F.mean(axis=0)
    if n > 1:
        sigma2 = np.maximum(F.var(axis=0, ddof=1), variance_floor)
    else:
        sigma2 = np.full(F.shape[1], float(variance_floor))
    return TaskStats(tau=tau, sigma2=sigma2, s=sigma2 / n, n=n)


def stats_from_arrays(fmap, X, y, variance_floor=DEFAULT_VARIANCE_FLOOR):
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[0] == 0:
        raise EmptyTaskError("cannot compute statistics of an empty task")
    return stats_from_features(fmap.embed_batch(X, y), variance_floor)


def task_stats(fmap, samples, variance_floor=DEFAULT_VARIANCE_FLOOR):
    """Statistics of a list of ``(x, y)`` pairs."""
    samples = list(samples)
    if not samples:
        raise EmptyTaskError("cannot compute statistics of an empty task")
    X = np.array([np.asarray(x, dtype=float) for x, _ in samples])
    y = np.array([label for _, label in samples])
    return stats_from_arrays(fmap, X, y, variance_floor)
