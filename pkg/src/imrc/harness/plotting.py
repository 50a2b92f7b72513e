"""Figures for run reports and diagnostics (matplotlib, Agg backend)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .. import ess as ess_mod  # noqa: E402

_LABELS = {"single": "single-task", "forward": "forward", "fwd-bwd": "forward and backward"}
# PNG metadata without the matplotlib version keeps files byte-stable
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_error_vs_k(summary, path):
    """Averaged error against the number of tasks, one line per (mode, n)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for g in summary["groups"]:
        k = np.array([p["k"] for p in g["error_vs_k"]])
        mean = np.array([p["mean"] for p in g["error_vs_k"]])
        std = np.array([p["std"] for p in g["error_vs_k"]])
        line, = ax.plot(k, mean, label=f"{_LABELS.get(g['mode'], g['mode'])}, n={g['n']}")
        ax.fill_between(k, mean - std, mean + std, color=line.get_color(), alpha=0.15)
    ax.set_xlabel("number of tasks k")
    ax.set_ylabel("averaged classification error")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_error_vs_n(summary, path):
    """Averaged error against the sample size per task, one line per mode."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    modes = sorted({g["mode"] for g in summary["groups"]})
    for mode in modes:
        gs = sorted((g for g in summary["groups"] if g["mode"] == mode), key=lambda g: g["n"])
        ax.errorbar([g["n"] for g in gs], [g["mean_error"] for g in gs],
                    yerr=[g["std_error"] for g in gs], marker="o", capsize=3,
                    label=_LABELS.get(mode, mode))
    ax.set_xlabel("samples per task n")
    ax.set_ylabel("averaged classification error")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_ess_curves(j, k, path, nd2_grid=None):
    """ESS over ``n`` against ``n d^2`` for forward and forward-backward learning."""
    nd2_grid = np.logspace(-4, 2, 61) if nd2_grid is None else np.asarray(nd2_grid)
    fwd, fused = [], []
    for nd2 in nd2_grid:
        f, b = ess_mod.uniform_ess(1.0, float(nd2), k)
        fwd.append(f[j - 1])
        fused.append(b[j - 1])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogx(nd2_grid, fused, label=f"forward and backward, j={j}, k={k}")
    ax.semilogx(nd2_grid, fwd, "--", label=f"forward, j={j}")
    ax.set_xlabel("n d²")
    ax.set_ylabel("ESS / n")
    ax.legend(fontsize="small")
    return _save(fig, path)


def plot_pacf(mean, std, path):
    """Per-lag partial autocorrelation averaged over components, with a one-sd band."""
    lags = np.arange(1, len(mean) + 1)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(lags, mean, yerr=std, capsize=3, color="tab:blue", alpha=0.8)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("lag")
    ax.set_ylabel("partial autocorrelation")
    return _save(fig, path)
