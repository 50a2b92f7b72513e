"""Incremental minimax risk classifiers for sequences of evolving tasks.

Modules
-------
features   random Fourier feature mapping and per-task sample statistics
tracking   forward, backward and fused estimates of the task mean vectors
mrc        0-1 loss minimax risk classifier and its subgradient solver
ess        effective sample sizes and risk-bound terms
harness    datasets, the streaming loop, diagnostics, reports and the CLI
"""

from . import errors, ess, features, mrc, tracking
from .errors import ImrcError
from .features import FeatureMap, TaskStats, build_feature_map, embed, task_stats
from .mrc import CandidateSet, MrcModel, phi, predict, solve
from .tracking import Belief, ImrcState, advance

__version__ = "0.1.0"

__all__ = [
    "Belief", "CandidateSet", "FeatureMap", "ImrcError", "ImrcState", "MrcModel", "TaskStats",
    "advance", "build_feature_map", "embed", "errors", "ess", "features", "mrc", "phi",
    "predict", "solve", "task_stats", "tracking",
]
