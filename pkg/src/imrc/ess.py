"""Effective sample sizes and risk-bound terms for forward and
forward-backward learning.

The ESS recursions take the certified right-hand sides as the reported
values, so every number here is a conservative ESS.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, ShapeError


@dataclass(frozen=True)
class BoundInputs:
    """Constants of the excess-risk term.

    ``mu_norm`` is the l1 norm of the ideal classifier parameter, unknown in
    practice; when omitted the bound is reported per unit norm.
    """

    M: float
    m: int
    kappa: float = 1.0
    delta: float = 0.05
    mu_norm: float = None

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise InvalidConfigError(f"delta must lie in (0, 1), got {self.delta!r}")
        if self.M <= 0 or self.kappa <= 0 or self.m <= 0:
            raise InvalidConfigError("M, kappa and m must be positive")
        if self.mu_norm is not None and self.mu_norm <= 0:
            raise InvalidConfigError("mu_norm must be positive when given")


@dataclass
class EssReport:
    n: list
    sigma2_inf: list
    d2_inf: list
    n_forward: list = field(default_factory=list)
    n_backward: list = field(default_factory=list)
    n_fused: list = field(default_factory=list)

    def rows(self, inputs=None):
        """JSON-ready rows, one per task (1-based ``task_index``)."""
        out = []
        for j in range(len(self.n)):
            row = {
                "task_index": j + 1,
                "n": self.n[j],
                "n_forward": self.n_forward[j],
                "n_backward": self.n_backward[j],
                "n_fused": self.n_fused[j],
            }
            if inputs is not None:
                row["bound_coefficient"] = risk_bound(self.n_fused[j], inputs)
            out.append(row)
        return out


def _check_lengths(n, sigma2_inf, d2_inf):
    n = [float(v) for v in n]
    sigma2_inf = [float(v) for v in sigma2_inf]
    d2_inf = [float(v) for v in d2_inf]
    if not (len(n) == len(sigma2_inf) == len(d2_inf)) or not n:
        raise ShapeError("n, sigma2_inf and d2_inf must be non-empty and of equal length")
    return n, sigma2_inf, d2_inf


def _gain(ess_other, sigma2, d2):
    return ess_other * sigma2 / (sigma2 + ess_other * d2)


def forward_ess(n, sigma2_inf, d2_inf):
    """Forward ESS of every task.

    ``d2_inf[j]`` is the sup-norm drift of the transition into task ``j``
    (``d2_inf[0]`` is unused).
    """
    n, sigma2_inf, d2_inf = _check_lengths(n, sigma2_inf, d2_inf)
    out = [n[0]]
    for j in range(1, len(n)):
        out.append(n[j] + _gain(out[-1], sigma2_inf[j], d2_inf[j]))
    return out


def fused_ess(n, sigma2_inf, d2_inf):
    """Forward-backward ESS of every task at the last step.

    Returns ``(n_fused, n_backward)``.
    """
    n, sigma2_inf, d2_inf = _check_lengths(n, sigma2_inf, d2_inf)
    k = len(n)
    forward = forward_ess(n, sigma2_inf, d2_inf)
    backward = [0.0] * k
    backward[-1] = n[-1]
    for j in range(k - 2, -1, -1):
        backward[j] = n[j] + _gain(backward[j + 1], sigma2_inf[j], d2_inf[j + 1])
    fused = [forward[j] + _gain(backward[j + 1], sigma2_inf[j], d2_inf[j + 1]) for j in range(k - 1)]
    fused.append(forward[-1])
    return fused, backward


def ess_report(n, sigma2_inf, d2_inf):
    fused, backward = fused_ess(n, sigma2_inf, d2_inf)
    return EssReport(list(map(float, n)), list(map(float, sigma2_inf)), list(map(float, d2_inf)),
                     forward_ess(n, sigma2_inf, d2_inf), backward, fused)


def growth_alpha(nd2):
    """``2 / (sqrt(1 + 4/(n d^2)) - 1)``, written without cancellation."""
    if nd2 < 0:
        raise InvalidConfigError("n d^2 must be non-negative")
    if nd2 == 0:
        return 0.0
    return nd2 * (math.sqrt(1.0 + 4.0 / nd2) + 1.0) / 2.0


def _summand(alpha, L):
    # ((1+a)^L - 1 - a) / (a (1+a)^L + a); tends to (L-1)/2 as a -> 0
    if alpha == 0.0:
        return (L - 1) / 2.0
    log_growth = L * math.log1p(alpha)
    if log_growth < 30.0:
        e = math.expm1(log_growth)
        return (e - alpha) / (alpha * (e + 2.0))
    q = math.exp(-log_growth)
    return (1.0 - (1.0 + alpha) * q) / (alpha * (1.0 + q))


def ess_lower_bound_forward(n, d2, j):
    """Closed-form lower bound on the forward ESS of task ``j`` under uniform inputs."""
    if j < 1 or n <= 0:
        raise InvalidConfigError("need j >= 1 and n > 0")
    alpha = growth_alpha(n * d2)
    return n * (1.0 + _summand(alpha, 2 * j - 1))


def ess_lower_bound_fused(n, d2, j, k):
    """Closed-form lower bound on the forward-backward ESS of task ``j`` at step ``k``."""
    if not 1 <= j <= k or n <= 0:
        raise InvalidConfigError("need 1 <= j <= k and n > 0")
    alpha = growth_alpha(n * d2)
    return n * (1.0 + _summand(alpha, 2 * j - 1) + _summand(alpha, 2 * (k - j) + 1))


def forward_regime_bound(n, d2, j):
    """Linear-growth bound ``n (1 + (j-1)/3)``, valid when ``n d^2 < 1/j^2``; else ``None``."""
    if n * d2 < 1.0 / j ** 2:
        return n * (1.0 + (j - 1) / 3.0)
    return None


def fused_regime_bound(n, d2, j, k):
    """Simplified forward-backward bound of the regime ``n d^2`` falls in.

    Returns ``(regime, bound)`` with regime 1 (``n d^2 < 1/j^2``),
    2 (``1/j^2 <= n d^2 < 1``) or 3 (``n d^2 >= 1``).
    """
    nd2 = n * d2
    if nd2 < 1.0 / j ** 2:
        return 1, n * (1.0 + (j - 1) / 3.0 + j * (k - j) / (j + 2.0 * (k - j)))
    if nd2 < 1.0:
        return 2, n * (1.0 + 2.0 / (5.0 * math.sqrt(nd2)))
    return 3, n * (1.0 + 2.0 / (3.0 * nd2))


def risk_bound(n_ess, inputs):
    """Excess-risk term ``M (kappa+1) sqrt(2 log(2m/delta)) / sqrt(n_ess) * |mu|_1``."""
    if n_ess <= 0:
        raise InvalidConfigError("effective sample size must be positive")
    coef = inputs.M * (inputs.kappa + 1.0) * math.sqrt(2.0 * math.log(2.0 * inputs.m / inputs.delta))
    coef /= math.sqrt(n_ess)
    return coef if inputs.mu_norm is None else coef * inputs.mu_norm


def uniform_ess(n, d2, k, sigma2=1.0):
    """Forward and fused ESS recursions for ``k`` tasks with identical inputs."""
    report = ess_report([n] * k, [sigma2] * k, [d2] * k)
    return np.array(report.n_forward), np.array(report.n_fused)
