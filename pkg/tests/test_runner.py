from collections import defaultdict

import numpy as np
import pytest

from imrc.errors import InvalidConfigError, StepError
from imrc.harness.data import synthesize
from imrc.harness.runner import RunConfig, RunReport, normalize_mode, run

FAST = dict(rff_dim=20, K=60)


@pytest.fixture(scope="module")
def stream():
    return synthesize(k=7, n=12, d2=0.01, seed=4, test_size=30)


def strip_mode(records):
    return [{k: v for k, v in r.items() if k != "mode"} for r in records]


class TestConfig:
    def test_aliases(self):
        assert normalize_mode("forward-backward") == "fwd-bwd"
        assert normalize_mode("single-task") == "single"
        with pytest.raises(InvalidConfigError):
            normalize_mode("both")

    @pytest.mark.parametrize("field, value", [("n_per_task", 0), ("b", -1), ("K", 0), ("rff_sigma2_scale", 0.0)])
    def test_invalid(self, field, value):
        with pytest.raises(InvalidConfigError):
            RunConfig(**{field: value})

    def test_forward_ignores_b(self):
        assert RunConfig(mode="forward", b=5).backward_steps == 0
        assert RunConfig(mode="fwd-bwd", b=5).backward_steps == 5


class TestRun:
    def test_solver_calls_per_step(self, stream):
        report = run(stream, RunConfig(mode="fwd-bwd", b=3, **FAST))
        assert [s["solver_calls"] for s in report.steps] == [min(k, 4) for k in range(1, 8)]
        assert report.solver_calls() == sum(min(k, 4) for k in range(1, 8))

    def test_b_zero_matches_forward(self, stream):
        a = run(stream, RunConfig(mode="fwd-bwd", b=0, **FAST))
        b = run(stream, RunConfig(mode="forward", **FAST))
        assert strip_mode(a.records) == strip_mode(b.records)
        assert strip_mode(a.models) == strip_mode(b.models)

    def test_single_task_stream_all_modes_agree(self, stream):
        one = stream.subsequence(0, 1)
        reports = [run(one, RunConfig(mode=m, **FAST)) for m in ("single", "forward", "fwd-bwd")]
        assert strip_mode(reports[0].records) == strip_mode(reports[1].records) == strip_mode(reports[2].records)
        assert strip_mode(reports[0].models) == strip_mode(reports[1].models) == strip_mode(reports[2].models)

    def test_errors_and_averages(self, stream):
        report = run(stream, RunConfig(mode="fwd-bwd", repetitions=2, **FAST))
        assert all(0.0 <= r["error"] <= 1.0 for r in report.records)
        per_step = defaultdict(list)
        for r in report.records:
            per_step[(r["rep"], r["step"])].append(r["error"])
        averaged = report.averaged_errors()
        for (mode, n, rep, origin, step), value in averaged.items():
            assert len(per_step[(rep, step)]) == step
            assert value == pytest.approx(np.mean(per_step[(rep, step)]), abs=1e-12)

    def test_frozen_rules(self, stream):
        report = run(stream, RunConfig(mode="fwd-bwd", b=2, **FAST))
        errors = {(r["step"], r["task"]): r["error"] for r in report.records}
        for j in range(1, 8):
            evicted = j + 3  # first step at which task j is outside the window
            later = [errors[(k, j)] for k in range(evicted - 1, 8)]
            assert len(set(later)) <= 1

    def test_deterministic(self, stream):
        a = run(stream, RunConfig(mode="fwd-bwd", seed=3, **FAST))
        b = run(stream, RunConfig(mode="fwd-bwd", seed=3, **FAST))
        assert a.records == b.records and a.ess == b.ess

    def test_repetitions_differ(self, stream):
        report = run(stream, RunConfig(mode="single", repetitions=2, n_per_task=5, **FAST))
        errs = report.sequence_errors()
        assert len(errs) == 2

    def test_step_error(self, stream):
        with pytest.raises(StepError) as info:
            run(stream, RunConfig(n_per_task=13, **FAST))
        assert info.value.step == 1 and info.value.repetition == 0

    def test_sliding_origin(self, stream):
        report = run(stream, RunConfig(mode="forward", sequence_length=5, sliding_origin=True, **FAST))
        assert sorted({r["origin"] for r in report.records}) == [0, 1, 2]
        with pytest.raises(InvalidConfigError):
            run(stream, RunConfig(sequence_length=9, **FAST))

    def test_ess_rows(self, stream):
        report = run(stream, RunConfig(mode="fwd-bwd", **FAST))
        assert len(report.ess) == 7
        for row in report.ess:
            assert row["n_fused"] >= row["n_forward"] >= row["n"]
            assert row["bound_coefficient"] > 0

    def test_window_candidates_option(self, stream):
        report = run(stream, RunConfig(mode="fwd-bwd", candidates="window", **FAST))
        assert len(report.records) == 28

    def test_parallel_matches_serial(self, stream):
        a = run(stream, RunConfig(mode="forward", repetitions=2, jobs=1, **FAST))
        b = run(stream, RunConfig(mode="forward", repetitions=2, jobs=2, **FAST))
        assert a.records == b.records


class TestReport:
    def test_empty_summary(self):
        summary = RunReport.empty().summary()
        assert summary["repetitions"] == 0 and summary["records"] == 0 and summary["groups"] == []

    def test_merge(self, stream):
        a = run(stream.subsequence(0, 2), RunConfig(mode="single", **FAST))
        b = run(stream.subsequence(0, 2), RunConfig(mode="forward", **FAST))
        merged = a.merge(b)
        assert {g["mode"] for g in merged.summary()["groups"]} == {"single", "forward"}
