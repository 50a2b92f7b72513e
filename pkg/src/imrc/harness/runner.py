"""The streaming experiment loop.

At every step a new task's training samples arrive; the tracking state is
advanced, the classifiers of the tasks in the window are re-solved, and the
current rule of every task seen so far is scored on that task's test set.
"""

import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import ess as ess_mod
from ..errors import ImrcError, InsufficientDataError, InvalidConfigError, StepError
from ..features import DEFAULT_VARIANCE_FLOOR, build_feature_map, stats_from_features
from ..mrc import DEFAULT_ITERATIONS, CandidateSet, error_rate, solve
from ..tracking import ImrcState, advance, estimate_drift

MODES = ("single", "forward", "fwd-bwd")
_MODE_ALIASES = {
    "single": "single", "single-task": "single",
    "forward": "forward",
    "fwd-bwd": "fwd-bwd", "forward-backward": "fwd-bwd",
}


def normalize_mode(mode):
    try:
        return _MODE_ALIASES[mode]
    except KeyError:
        raise InvalidConfigError(f"unknown mode {mode!r}; expected one of {MODES}") from None


@dataclass
class RunConfig:
    n_per_task: int = 10
    b: int = 3
    W: int = 2
    rff_dim: int = 200
    rff_sigma2_scale: float = 10.0
    K: int = DEFAULT_ITERATIONS
    seed: int = 0
    repetitions: int = 1
    mode: str = "fwd-bwd"
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    sequence_length: int = None
    sliding_origin: bool = False
    standardize: bool = True
    candidates: str = "task"
    jobs: int = 1
    out: str = None

    def __post_init__(self):
        self.mode = normalize_mode(self.mode)
        for name in ("n_per_task", "W", "rff_dim", "K", "repetitions", "jobs"):
            if getattr(self, name) < 1:
                raise InvalidConfigError(f"{name} must be positive")
        if self.b < 0:
            raise InvalidConfigError("b must be non-negative")
        if self.rff_sigma2_scale <= 0 or self.variance_floor <= 0:
            raise InvalidConfigError("rff_sigma2_scale and variance_floor must be positive")
        if self.sequence_length is not None and self.sequence_length < 1:
            raise InvalidConfigError("sequence_length must be positive")

    @property
    def backward_steps(self):
        return {"single": 0, "forward": 0, "fwd-bwd": self.b}[self.mode]


@dataclass(eq=False)
class RunReport:
    """Outcome of one or more runs.

    ``records`` hold one error per (mode, n, repetition, origin, step, task);
    ``ess`` one row per task and sequence; ``steps`` the solver-call count
    and wall-clock seconds of each step; ``models`` the final classifier
    parameter of every task of every sequence.
    """

    records: list
    ess: list
    steps: list
    configs: list
    models: list = field(default_factory=list)

    @classmethod
    def empty(cls):
        return cls([], [], [], [], [])

    def merge(self, other):
        return RunReport(self.records + other.records, self.ess + other.ess,
                         self.steps + other.steps, self.configs + other.configs,
                         self.models + other.models)

    def averaged_errors(self):
        """``{(mode, n, rep, origin, step): mean error over tasks 1..step}``."""
        acc = defaultdict(list)
        for r in self.records:
            acc[(r["mode"], r["n"], r["rep"], r["origin"], r["step"])].append(r["error"])
        return {key: float(np.mean(v)) for key, v in sorted(acc.items())}

    def sequence_errors(self):
        """``{(mode, n, rep, origin): averaged error over all steps}``."""
        acc = defaultdict(list)
        for (mode, n, rep, origin, _), err in self.averaged_errors().items():
            acc[(mode, n, rep, origin)].append(err)
        return {key: float(np.mean(v)) for key, v in acc.items()}

    def summary(self):
        """Mean and standard deviation across sequences for each (mode, n)."""
        per_seq = defaultdict(list)
        for (mode, n, _, _), err in sorted(self.sequence_errors().items()):
            per_seq[(mode, n)].append(err)
        per_step = defaultdict(list)
        for (mode, n, _, _, step), err in self.averaged_errors().items():
            per_step[(mode, n, step)].append(err)
        groups = []
        for (mode, n), errs in sorted(per_seq.items()):
            steps = sorted(s for (md, nn, s) in per_step if md == mode and nn == n)
            groups.append({
                "mode": mode,
                "n": n,
                "sequences": len(errs),
                "mean_error": float(np.mean(errs)),
                "std_error": float(np.std(errs)),
                "error_vs_k": [
                    {"k": s, "mean": float(np.mean(per_step[(mode, n, s)])),
                     "std": float(np.std(per_step[(mode, n, s)]))}
                    for s in steps
                ],
            })
        reps = sorted({r["rep"] for r in self.records})
        return {"repetitions": len(reps), "records": len(self.records), "groups": groups}

    def solver_calls(self):
        return sum(s["solver_calls"] for s in self.steps)


def _nearest_model(models, j):
    if j in models:
        return models[j].mu
    if not models:
        return None
    # closest solved task; ties go to the earlier one
    return models[min(models, key=lambda i: (abs(i - j), i))].mu


def _run_sequence(stream, config, rep, origin, center, scale):
    mode = config.mode
    rng = np.random.default_rng([config.seed, rep, origin])
    fmap = build_feature_map(stream.instance_dim, stream.n_classes, config.rff_dim,
                             config.rff_sigma2_scale, seed=rng.integers(2 ** 63))
    test_psi = [fmap.transform((t.test_X - center) / scale) for t in stream.tasks]
    train_psi, train_stats, taus = {}, [], []
    models = {}
    state = None if mode == "single" else ImrcState(
        fmap.m, config.backward_steps, config.W, variance_floor=config.variance_floor)
    records, steps, d2_inf = [], [], []

    for k, task in enumerate(stream.tasks, start=1):
        t0 = time.perf_counter()
        try:
            pool = len(task.train_y)
            if pool < config.n_per_task:
                raise InsufficientDataError(
                    f"task {task.task_id!r} has {pool} training samples, {config.n_per_task} requested",
                    task.task_id)
            idx = rng.choice(pool, size=config.n_per_task, replace=False)
            psi = fmap.transform((task.train_X[idx] - center) / scale)
            y = task.train_y[idx]
            F = np.zeros((len(y), fmap.n_classes, fmap.rff_dim))
            F[np.arange(len(y)), y] = psi
            stats = stats_from_features(F.reshape(len(y), fmap.m), config.variance_floor)
            train_psi[k], taus = psi, taus + [stats.tau]
            train_stats.append(stats)
            d2_inf.append(float(np.max(estimate_drift(taus[-(config.W + 1):], config.W).d2))
                          if k > 1 else 0.0)

            if mode == "single":
                targets = [(k, stats.tau, np.sqrt(stats.s))]
                window = [k]
            else:
                state, fused = advance(state, stats)
                window = state.window_indices
                targets = [(j, f.mean, np.sqrt(f.mse)) for j, f in zip(window, fused)][::-1]
            shared = CandidateSet(np.vstack([train_psi[j] for j in window]), fmap.n_classes)
            for j, tau, lam in targets:
                cands = shared if config.candidates == "window" else CandidateSet(train_psi[j], fmap.n_classes)
                models[j] = solve(tau, lam, cands, config.K, _nearest_model(models, j), task_index=j)
            for j in range(1, k + 1):
                records.append({
                    "mode": mode, "n": config.n_per_task, "rep": rep, "origin": origin,
                    "step": k, "task": j,
                    "error": error_rate(models[j], test_psi[j - 1], stream.tasks[j - 1].test_y),
                })
        except ImrcError as exc:
            raise StepError(str(exc), k, rep) from exc
        steps.append({"mode": mode, "n": config.n_per_task, "rep": rep, "origin": origin, "step": k,
                      "solver_calls": len(targets), "seconds": time.perf_counter() - t0})

    report = ess_mod.ess_report([s.n for s in train_stats],
                                [float(np.max(s.sigma2)) for s in train_stats], d2_inf)
    bound = ess_mod.BoundInputs(M=fmap.bound, m=fmap.m)
    key = {"mode": mode, "n": config.n_per_task, "rep": rep, "origin": origin}
    ess_rows = [{**key, **row} for row in report.rows(bound)]
    model_rows = [{**key, "task": j, **models[j].to_dict()} for j in sorted(models)]
    return records, ess_rows, steps, model_rows


def _standardization(stream, config):
    if not config.standardize:
        return 0.0, 1.0
    X = stream.tasks[0].train_X
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    return center, np.where(scale > 0, scale, 1.0)


def _origins(stream, config):
    length = config.sequence_length or len(stream)
    if length > len(stream):
        raise InvalidConfigError(f"sequence length {length} exceeds the {len(stream)} tasks available")
    starts = range(len(stream) - length + 1) if config.sliding_origin else [0]
    return [(s, length) for s in starts]


def _run_rep(args):
    stream, config, rep, origins, center, scale = args
    out = ([], [], [], [])
    for start, length in origins:
        res = _run_sequence(stream.subsequence(start, length), config, rep, start, center, scale)
        for acc, part in zip(out, res):
            acc.extend(part)
    return out


def run(stream, config):
    """Run the incremental learner over ``stream`` for every repetition."""
    if stream.n_classes < 2:
        raise InvalidConfigError("a classification stream needs at least two classes")
    center, scale = _standardization(stream, config)
    origins = _origins(stream, config)
    jobs = [(stream, config, rep, origins, center, scale) for rep in range(config.repetitions)]
    if config.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(_run_rep, jobs))
    else:
        results = [_run_rep(job) for job in jobs]
    report = RunReport.empty()
    for rec, er, st, mo in results:
        report = report.merge(RunReport(rec, er, st, [], mo))
    report.configs.append(asdict(config))
    return report
