"""Writing and reading run reports.

A report directory holds

``records.jsonl``      one error per (mode, n, repetition, origin, step, task)
``ess.jsonl``          per-task effective sample sizes of every sequence
``steps.jsonl``        solver calls per step
``models.jsonl``       final classifier parameter of every task
``timing.jsonl``       wall-clock seconds per step
``summary.json``       mean and standard deviation of the averaged error
``config.json``        the run configurations
``error_vs_k.csv``     averaged error against the number of tasks
``error_vs_n.csv``     averaged error against the sample size

Everything except ``timing.jsonl`` is a deterministic function of the data,
the configuration and the seed.
"""

import csv
import json
import os

from .runner import RunReport

_STEP_KEYS = ("mode", "n", "rep", "origin", "step")


def _dump_jsonl(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")


def _load_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _dump_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def curve_rows(summary):
    """``(error_vs_k, error_vs_n)`` row lists built from a summary dict."""
    vs_k, vs_n = [], []
    for g in summary["groups"]:
        vs_n.append([g["mode"], g["n"], repr(g["mean_error"]), repr(g["std_error"])])
        for point in g["error_vs_k"]:
            vs_k.append([g["mode"], g["n"], point["k"], repr(point["mean"]), repr(point["std"])])
    return vs_k, vs_n


def report_write(report, path, figures=True):
    """Write ``report`` into directory ``path`` (created if needed).

    Returns the list of files written. I/O failures are re-raised as
    ``OSError`` naming the offending path.
    """
    try:
        os.makedirs(path, exist_ok=True)
        written = []

        def target(name):
            written.append(os.path.join(path, name))
            return written[-1]

        _dump_jsonl(target("records.jsonl"), report.records)
        _dump_jsonl(target("ess.jsonl"), report.ess)
        _dump_jsonl(target("steps.jsonl"),
                    [{k: s[k] for k in (*_STEP_KEYS, "solver_calls")} for s in report.steps])
        _dump_jsonl(target("models.jsonl"), report.models)
        _dump_jsonl(target("timing.jsonl"),
                    [{**{k: s[k] for k in _STEP_KEYS}, "seconds": s["seconds"]} for s in report.steps])
        summary = report.summary()
        _dump_json(target("summary.json"), summary)
        _dump_json(target("config.json"), report.configs)
        vs_k, vs_n = curve_rows(summary)
        _write_csv(target("error_vs_k.csv"), ["mode", "n", "k", "mean_error", "std_error"], vs_k)
        _write_csv(target("error_vs_n.csv"), ["mode", "n", "mean_error", "std_error"], vs_n)
        if figures and summary["groups"]:
            from . import plotting

            plotting.plot_error_vs_k(summary, target("error_vs_k.png"))
            plotting.plot_error_vs_n(summary, target("error_vs_n.png"))
        return written
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report(path):
    """Load a report directory written by :func:`report_write`."""
    try:
        records = _load_jsonl(os.path.join(path, "records.jsonl"))
        ess = _load_jsonl(os.path.join(path, "ess.jsonl"))
        steps = _load_jsonl(os.path.join(path, "steps.jsonl"))
        models_path = os.path.join(path, "models.jsonl")
        models = _load_jsonl(models_path) if os.path.exists(models_path) else []
        timing_path = os.path.join(path, "timing.jsonl")
        timing = _load_jsonl(timing_path) if os.path.exists(timing_path) else []
        with open(os.path.join(path, "config.json")) as fh:
            configs = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc}") from exc
    seconds = {tuple(t[k] for k in _STEP_KEYS): t["seconds"] for t in timing}
    for s in steps:
        s["seconds"] = seconds.get(tuple(s[k] for k in _STEP_KEYS))
    return RunReport(records, ess, steps, configs, models)
