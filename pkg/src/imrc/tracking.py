"""Tracking of the evolving mean vectors.

All recursions are diagonal: every component of the feature vector is an
independent scalar random walk observed through the task's sample average.
Forward beliefs are Kalman filter estimates, backward beliefs are the same
filter run in reverse from the newest task, and fused beliefs combine the two
into the fixed-lag smoother estimate over the last ``b + 1`` tasks.
"""

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import EmptyStateError, InsufficientHistoryError, InvalidConfigError, ShapeError
from .features import DEFAULT_VARIANCE_FLOOR, TaskStats

DRIFT_FLOOR = 1e-12
CHECKPOINT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Belief:
    """Estimate of a task's mean vector together with its per-component MSE."""

    mean: np.ndarray
    mse: np.ndarray

    def __post_init__(self):
        if self.mean.shape != self.mse.shape:
            raise ShapeError(f"mean {self.mean.shape} and mse {self.mse.shape} differ in shape")

    @property
    def confidence(self):
        return np.sqrt(self.mse)


@dataclass(frozen=True, eq=False)
class DriftEstimate:
    """Expected quadratic change between consecutive mean vectors."""

    d2: np.ndarray
    window: int = 1


def _d2(drift):
    return np.asarray(getattr(drift, "d2", drift), dtype=float)


def _same_length(*arrays):
    m = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != m:
            raise ShapeError(f"vector shapes differ: {m} vs {a.shape}")


def estimate_drift(recent_taus, W=2, floor=DRIFT_FLOOR):
    """Average squared difference of the ``W`` most recent consecutive sample averages."""
    taus = [np.atleast_1d(np.asarray(t, dtype=float)) for t in recent_taus]
    if len(taus) < 2:
        raise InsufficientHistoryError("drift estimation needs at least two sample averages")
    if W < 1:
        raise InvalidConfigError("drift window must be a positive integer")
    _same_length(*taus)
    used = min(int(W), len(taus) - 1)
    tail = np.array(taus[-(used + 1):])
    d2 = np.mean(np.diff(tail, axis=0) ** 2, axis=0)
    return DriftEstimate(d2=np.maximum(d2, floor), window=int(W))


def init_forward(stats):
    return Belief(mean=stats.tau.copy(), mse=stats.s.copy())


def _combine(own_mean, own_mse, other_mean, other_mse, d2):
    # Precision-weighted combination of own estimate with a neighbour's one
    # propagated over one random-walk step.
    spread = other_mse + d2
    mean = own_mean + own_mse / (own_mse + spread) * (other_mean - own_mean)
    mse = 1.0 / (1.0 / own_mse + 1.0 / spread)
    return mean, mse


def forward_update(prev, stats, drift):
    """Forward belief of a task given the forward belief of its predecessor."""
    d2 = _d2(drift)
    _same_length(prev.mean, stats.tau, d2)
    mean, mse = _combine(stats.tau, stats.s, prev.mean, prev.mse, d2)
    return Belief(mean, mse)


def backward_pass(stats_window, drifts):
    """Backward beliefs for a window of consecutive tasks.

    ``drifts[i]`` is the drift of the transition from ``stats_window[i]`` to
    ``stats_window[i + 1]``. The last task's backward belief is its own
    sample statistics; earlier ones are obtained by running the forward
    recursion in reverse index order.
    """
    stats_window = list(stats_window)
    if not stats_window:
        raise EmptyStateError("backward pass over an empty window")
    drifts = list(drifts)
    if len(drifts) != len(stats_window) - 1:
        raise ShapeError(f"need {len(stats_window) - 1} transition drifts, got {len(drifts)}")
    out = [init_forward(stats_window[-1])]
    for stats, drift in zip(reversed(stats_window[:-1]), reversed(drifts)):
        out.append(forward_update(out[-1], stats, drift))
    return out[::-1]


def fuse(forward, backward_next=None, drift_next=None):
    """Fixed-lag smoother estimate from a forward belief and its successor's backward belief.

    Without a successor (the newest task) the fused belief is the forward one.
    """
    if backward_next is None:
        return forward
    d2 = _d2(drift_next)
    _same_length(forward.mean, backward_next.mean, d2)
    mean, mse = _combine(forward.mean, forward.mse, backward_next.mean, backward_next.mse, d2)
    return Belief(mean, mse)


def fuse_window(forward_beliefs, stats_window, drifts):
    """``fuse`` applied over a whole window using ``backward_pass``."""
    forward_beliefs = list(forward_beliefs)
    backward = backward_pass(stats_window, drifts)
    if len(forward_beliefs) != len(backward):
        raise ShapeError("forward beliefs and statistics windows differ in length")
    fused = [fuse(f, b, d) for f, b, d in zip(forward_beliefs[:-1], backward[1:], drifts)]
    fused.append(forward_beliefs[-1])
    return fused


def rts_smooth(forward_beliefs, drifts, fused_last=None):
    """Rauch-Tung-Striebel form of the fused beliefs.

    Each fused belief is computed from the next task's fused belief, starting
    at ``fused_last`` (defaults to the last forward belief, i.e. the newest
    task). Agrees with :func:`fuse_window` up to rounding.
    """
    forward_beliefs = list(forward_beliefs)
    if not forward_beliefs:
        raise EmptyStateError("smoothing over an empty window")
    drifts = list(drifts)
    if len(drifts) != len(forward_beliefs) - 1:
        raise ShapeError(f"need {len(forward_beliefs) - 1} transition drifts, got {len(drifts)}")
    out = [fused_last if fused_last is not None else forward_beliefs[-1]]
    for fwd, drift in zip(reversed(forward_beliefs[:-1]), reversed(drifts)):
        d2 = _d2(drift)
        nxt = out[-1]
        _same_length(fwd.mean, nxt.mean, d2)
        predicted = fwd.mse + d2
        mean = fwd.mean + fwd.mse / predicted * (nxt.mean - fwd.mean)
        with np.errstate(divide="ignore"):
            # information the successors add on top of the prediction; zero -> inf -> no gain
            gain = 1.0 / (1.0 / nxt.mse - 1.0 / predicted)
            mse = 1.0 / (1.0 / fwd.mse + 1.0 / (d2 + gain))
        out.append(Belief(mean, mse))
    return out[::-1]


@dataclass
class WindowEntry:
    j: int
    stats: TaskStats
    forward: Belief


class ImrcState:
    """Rolling state of the incremental learner.

    Holds the statistics and forward beliefs of the last ``b + 1`` tasks and
    the most recent sample averages needed for drift estimation. ``advance``
    must be called serially, once per arriving task.

    Parameters
    ----------
    m : int
        Length of the feature vectors.
    b : int
        Number of backward steps; ``b = 0`` gives forward learning only.
    W : int
        Window of the drift estimator.
    fixed_d2 : array_like, optional
        Use this drift for every transition instead of estimating it.
    """

    def __init__(self, m, b=3, W=2, fixed_d2=None, variance_floor=DEFAULT_VARIANCE_FLOOR):
        if m <= 0 or b < 0 or W < 1:
            raise InvalidConfigError(f"invalid state configuration m={m}, b={b}, W={W}")
        self.m = int(m)
        self.b = int(b)
        self.W = int(W)
        self.variance_floor = variance_floor
        self.fixed_d2 = None if fixed_d2 is None else np.broadcast_to(
            np.asarray(fixed_d2, dtype=float), (self.m,)).copy()
        self.k = 0
        self.buffer = deque(maxlen=self.b + 1)
        self.recent_taus = deque(maxlen=max(self.W + 1, 2))
        self.drift = DriftEstimate(np.full(self.m, variance_floor), self.W)

    @property
    def window_indices(self):
        return [e.j for e in self.buffer]

    def _current_drift(self):
        if self.fixed_d2 is not None:
            return DriftEstimate(self.fixed_d2.copy(), self.W)
        if len(self.recent_taus) < 2:
            return DriftEstimate(np.full(self.m, self.variance_floor), self.W)
        return estimate_drift(self.recent_taus, self.W)

    def fused(self):
        """Fused beliefs of the tasks in the window, oldest first."""
        if not self.buffer:
            raise EmptyStateError("no task has been observed yet")
        entries = list(self.buffer)
        drifts = [self.drift] * (len(entries) - 1)
        return fuse_window([e.forward for e in entries], [e.stats for e in entries], drifts)

    def to_dict(self):
        doc = {
            "version": CHECKPOINT_VERSION,
            "k": self.k,
            "b": self.b,
            "W": self.W,
            "m": self.m,
            "buffer": [
                {
                    "j": e.j,
                    "tau": e.stats.tau.tolist(),
                    "sigma2": e.stats.sigma2.tolist(),
                    "s": e.stats.s.tolist(),
                    "n": e.stats.n,
                    "fwd_mean": e.forward.mean.tolist(),
                    "fwd_mse": e.forward.mse.tolist(),
                }
                for e in self.buffer
            ],
            "recent_taus": [t.tolist() for t in self.recent_taus],
        }
        if self.fixed_d2 is not None:
            doc["fixed_d2"] = self.fixed_d2.tolist()
        return doc

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc, variance_floor=DEFAULT_VARIANCE_FLOOR):
        if doc.get("version") != CHECKPOINT_VERSION:
            raise InvalidConfigError(f"unsupported checkpoint version {doc.get('version')!r}")
        state = cls(doc["m"], doc["b"], doc["W"], doc.get("fixed_d2"), variance_floor)
        state.k = int(doc["k"])
        for e in doc["buffer"]:
            stats = TaskStats(np.array(e["tau"], dtype=float), np.array(e["sigma2"], dtype=float),
                              np.array(e["s"], dtype=float), int(e["n"]))
            fwd = Belief(np.array(e["fwd_mean"], dtype=float), np.array(e["fwd_mse"], dtype=float))
            state.buffer.append(WindowEntry(int(e["j"]), stats, fwd))
        for t in doc["recent_taus"]:
            state.recent_taus.append(np.array(t, dtype=float))
        if state.k:
            state.drift = state._current_drift()
        return state

    @classmethod
    def from_json(cls, text, variance_floor=DEFAULT_VARIANCE_FLOOR):
        return cls.from_dict(json.loads(text), variance_floor)


def advance(state, new_stats):
    """Process the next task: returns ``(state, fused beliefs of the window)``.

    The state is updated in place. Only the newest task's forward belief is
    computed; the drift of every transition in the window is refreshed from
    the retained sample averages before the backward pass.
    """
    if new_stats.tau.shape != (state.m,):
        raise ShapeError(f"statistics of length {new_stats.tau.shape} for a state with m={state.m}")
    state.k += 1
    state.recent_taus.append(new_stats.tau)
    state.drift = state._current_drift()
    if state.buffer:
        forward = forward_update(state.buffer[-1].forward, new_stats, state.drift)
    else:
        forward = init_forward(new_stats)
    state.buffer.append(WindowEntry(state.k, new_stats, forward))
    return state, state.fused()
