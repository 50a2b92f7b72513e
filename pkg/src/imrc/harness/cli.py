"""Command-line entry point ``imrc``.

Subcommands print comma-delimited tables to stdout. On failure the exit
code is nonzero and a JSON object ``{"error": ..., "message": ...}`` is
written to stderr.
"""

import argparse
import csv
import json
import sys

import numpy as np

from .. import ess as ess_mod
from ..errors import ImrcError, InsufficientDataError, InvalidConfigError, ParseError, StepError
from ..features import build_feature_map, stats_from_arrays
from . import data
from .diagnostics import partial_autocorrelation
from .report import curve_rows, report_write
from .runner import MODES, RunConfig, RunReport, normalize_mode, run

EXIT_USAGE = 2
EXIT_FAILURE = 1


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _mode_list(text):
    try:
        return [normalize_mode(v.strip()) for v in text.split(",") if v.strip()]
    except InvalidConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _writer():
    return csv.writer(sys.stdout, lineterminator="\n")


def _cmd_run(args):
    schema = args.schema or data.default_schema_path(args.dataset)
    stream = data.load_dataset(args.dataset, schema, seed=args.seed)
    report = RunReport.empty()
    for mode in args.mode:
        for n in args.n:
            config = RunConfig(
                n_per_task=n, b=args.b, W=args.window, rff_dim=args.rff_dim,
                rff_sigma2_scale=args.rff_scale, K=args.iters, seed=args.seed,
                repetitions=args.reps, mode=mode, sequence_length=args.sequence_length,
                sliding_origin=args.sliding_origin, candidates=args.candidates,
                jobs=args.jobs, out=args.out)
            report = report.merge(run(stream, config))
    if args.out:
        report_write(report, args.out, figures=not args.no_plots)
    w = _writer()
    w.writerow(["mode", "n", "sequences", "mean_error", "std_error"])
    for g in report.summary()["groups"]:
        w.writerow([g["mode"], g["n"], g["sequences"], f"{g['mean_error']:.6f}", f"{g['std_error']:.6f}"])
    return 0


def _cmd_synth(args):
    stream = data.synthesize(args.kind, k=args.tasks, n=args.n, d2=args.d2, seed=args.seed,
                             dim=args.dim, separation=args.separation, test_size=args.test_size)
    schema_path = data.save_stream(stream, args.out)
    w = _writer()
    w.writerow(["task", "bayes_error"])
    for t in stream.tasks:
        w.writerow([t.task_id, f"{t.bayes_error:.6f}"])
    print(f"# wrote {args.out} and {schema_path}", file=sys.stderr)
    return 0


def _cmd_ess(args):
    if args.tasks < 1 or args.n <= 0 or args.d2 < 0:
        raise InvalidConfigError("need tasks >= 1, n > 0 and d2 >= 0")
    fwd, fused = ess_mod.uniform_ess(args.n, args.d2, args.tasks)
    rows = range(1, args.tasks + 1) if args.j is None else [args.j]
    w = _writer()
    w.writerow(["j", "k", "n_forward", "n_fused", "bound_forward", "bound_fused",
                "regime", "regime_bound_fused"])
    for j in rows:
        if not 1 <= j <= args.tasks:
            raise InvalidConfigError(f"task index j={j} outside 1..{args.tasks}")
        regime, rb = ess_mod.fused_regime_bound(args.n, args.d2, j, args.tasks)
        w.writerow([j, args.tasks, f"{fwd[j - 1]:.6f}", f"{fused[j - 1]:.6f}",
                    f"{ess_mod.ess_lower_bound_forward(args.n, args.d2, j):.6f}",
                    f"{ess_mod.ess_lower_bound_fused(args.n, args.d2, j, args.tasks):.6f}",
                    regime, f"{rb:.6f}"])
    if args.plot:
        from . import plotting

        plotting.plot_ess_curves(args.j or args.tasks // 2 or 1, args.tasks, args.plot)
    return 0


def task_mean_vectors(stream, rff_dim=200, sigma2_scale=10.0, seed=0):
    """Sample average of the feature mapping over all samples of each task.

    The diagnostic describes the dataset rather than a learner, so training
    and test samples are pooled.
    """
    X0 = stream.tasks[0].train_X
    center, scale = X0.mean(axis=0), X0.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    fmap = build_feature_map(stream.instance_dim, stream.n_classes, rff_dim, sigma2_scale, seed=seed)
    taus = []
    for t in stream.tasks:
        X = np.vstack([t.train_X, t.test_X])
        y = np.concatenate([t.train_y, t.test_y])
        taus.append(stats_from_arrays(fmap, (X - center) / scale, y).tau)
    return np.array(taus)


def _cmd_diagnose(args):
    schema = args.schema or data.default_schema_path(args.dataset)
    stream = data.load_dataset(args.dataset, schema, seed=args.seed)
    taus = task_mean_vectors(stream, args.rff_dim, args.rff_scale, args.seed)
    mean, std = partial_autocorrelation(taus, args.max_lag)
    w = _writer()
    w.writerow(["lag", "mean_pacf", "std_pacf"])
    for lag, (mu, sd) in enumerate(zip(mean, std), start=1):
        w.writerow([lag, f"{mu:.6f}", f"{sd:.6f}"])
    if args.plot:
        from . import plotting

        plotting.plot_pacf(mean, std, args.plot)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="imrc", description="Incremental minimax risk classifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the incremental learner over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--schema", help="sidecar schema (default: <dataset>.schema.json)")
    p.add_argument("--n", type=_int_list, default=[10], help="samples per task, e.g. 10 or 10,50,100")
    p.add_argument("--b", type=int, default=3)
    p.add_argument("--window", type=int, default=2)
    p.add_argument("--rff-dim", type=int, default=200)
    p.add_argument("--rff-scale", type=float, default=10.0)
    p.add_argument("--iters", type=int, default=2000)
    p.add_argument("--mode", type=_mode_list, default=["fwd-bwd"],
                   help=f"one or more of {', '.join(MODES)}, comma-separated")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--sequence-length", type=int)
    p.add_argument("--sliding-origin", action="store_true")
    p.add_argument("--candidates", choices=["task", "window"], default="task")
    p.add_argument("--out", help="report directory")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="write a synthetic evolving-task stream")
    p.add_argument("--kind", default="gauss-walk", choices=["gauss-walk"])
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--d2", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=5)
    p.add_argument("--separation", type=float, default=2.5)
    p.add_argument("--test-size", type=int, default=data.DEFAULT_TEST_SIZE)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ess", help="effective sample sizes under uniform inputs")
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)
    p.add_argument("--tasks", type=int, required=True)
    p.add_argument("--j", type=int)
    p.add_argument("--plot", help="write ESS/n curves to this PNG")
    p.set_defaults(func=_cmd_ess)

    p = sub.add_parser("diagnose", help="evolving-task diagnostics")
    dsub = p.add_subparsers(dest="diagnostic", required=True)
    q = dsub.add_parser("pacf", help="partial autocorrelation of task mean vectors")
    q.add_argument("--dataset", required=True)
    q.add_argument("--schema")
    q.add_argument("--max-lag", type=int, default=5)
    q.add_argument("--rff-dim", type=int, default=200)
    q.add_argument("--rff-scale", type=float, default=10.0)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--plot", help="write the PACF bar chart to this PNG")
    q.set_defaults(func=_cmd_diagnose)
    return parser


def _error_doc(exc):
    doc = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        doc["row"] = exc.row
    if isinstance(exc, InsufficientDataError):
        doc["task"] = exc.task
    if isinstance(exc, StepError):
        doc["step"], doc["repetition"] = exc.step, exc.repetition
    return doc


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ImrcError, OSError) as exc:
        print(json.dumps(_error_doc(exc), default=str), file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, (InvalidConfigError, ParseError, FileNotFoundError)) else EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
