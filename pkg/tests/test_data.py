import json

import numpy as np
import pytest

from imrc.errors import InsufficientDataError, InvalidConfigError, ParseError
from imrc.harness.cli import task_mean_vectors
from imrc.harness.data import load_dataset, save_stream, synthesize
from imrc.harness.diagnostics import partial_autocorrelation


def write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(str(v) for v in r) + "\n")
    return str(path)


class TestLoadDataset:
    def test_contiguous_blocks(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = [[*rng.normal(size=3).round(4), int(rng.integers(0, 2))] for _ in range(1500)]
        path = write_csv(tmp_path / "u.csv", ["a", "b", "c", "y"], rows)
        stream = load_dataset(path, {"label": "y", "task_size": 300})
        assert len(stream) == 5
        assert all(len(t.train_y) == 200 and len(t.test_y) == 100 for t in stream.tasks)
        assert stream.instance_dim == 3 and stream.n_classes == 2

    def test_train_and_test_disjoint(self, tmp_path):
        rows = [[i, i % 2] for i in range(250)]
        path = write_csv(tmp_path / "d.csv", ["x", "y"], rows)
        stream = load_dataset(path, {"label": "y", "n_tasks": 2}, seed=3)
        for t in stream.tasks:
            assert not set(t.train_X[:, 0]) & set(t.test_X[:, 0])
            assert len(t.train_y) + len(t.test_y) == 125

    def test_task_ids_with_gaps(self, tmp_path):
        rows = []
        for tid in (7, 1, 3):
            rows += [[tid, float(tid) + i / 1000, i % 2] for i in range(110)]
        path = write_csv(tmp_path / "g.csv", ["tid", "x", "y"], rows)
        stream = load_dataset(path, {"label": "y", "task_id": "tid"})
        assert [t.task_id for t in stream.tasks] == [1, 3, 7]
        for t in stream.tasks:
            assert np.all(np.floor(t.train_X[:, 0]) == t.task_id)
        assert stream.feature_names == ["x"]

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1.0,0\n2.0\n")
        with pytest.raises(ParseError, match="row 3"):
            load_dataset(str(path), {"label": "y", "n_tasks": 1})
        path.write_text("x,y\n1.0,0\nabc,1\n")
        with pytest.raises(ParseError) as info:
            load_dataset(str(path), {"label": "y", "n_tasks": 1})
        assert info.value.row == 3

    def test_small_task(self, tmp_path):
        path = write_csv(tmp_path / "s.csv", ["tid", "x", "y"],
                         [[1, i, i % 2] for i in range(150)] + [[2, i, i % 2] for i in range(100)])
        with pytest.raises(InsufficientDataError) as info:
            load_dataset(path, {"label": "y", "task_id": "tid"})
        assert info.value.task == 2

    def test_schema_errors(self, tmp_path):
        path = write_csv(tmp_path / "e.csv", ["x", "y"], [[1, 0]])
        with pytest.raises(InvalidConfigError):
            load_dataset(path, {"n_tasks": 1})
        with pytest.raises(InvalidConfigError):
            load_dataset(path, {"label": "z", "n_tasks": 1})
        with pytest.raises(InvalidConfigError):
            load_dataset(path, {"label": "y"})
        with pytest.raises(FileNotFoundError):
            load_dataset(str(tmp_path / "missing.csv"), {"label": "y", "n_tasks": 1})

    def test_schema_file_and_classes(self, tmp_path):
        rows = [[i, "bad" if i % 3 else "good"] for i in range(120)]
        path = write_csv(tmp_path / "c.csv", ["x", "label"], rows)
        schema = tmp_path / "c.schema.json"
        schema.write_text(json.dumps({"label": "label", "n_tasks": 1, "classes": ["good", "bad"]}))
        stream = load_dataset(path, str(schema))
        t = stream.tasks[0]
        labels = np.concatenate([t.train_y, t.test_y])
        xs = np.concatenate([t.train_X[:, 0], t.test_X[:, 0]])
        np.testing.assert_array_equal(labels, (xs % 3 != 0).astype(int))


class TestSynthesize:
    def test_round_trip_is_byte_identical(self, tmp_path):
        stream = synthesize(k=4, n=7, d2=0.01, seed=2, test_size=5)
        first = tmp_path / "a.csv"
        schema = save_stream(stream, str(first))
        loaded = load_dataset(str(first), schema)
        for a, b in zip(stream.tasks, loaded.tasks):
            np.testing.assert_array_equal(a.train_X, b.train_X)
            np.testing.assert_array_equal(a.test_y, b.test_y)
        second = tmp_path / "b.csv"
        save_stream(loaded, str(second))
        assert first.read_bytes() == second.read_bytes()

    def test_stationary(self):
        stream = synthesize(k=5, n=10, d2=0.0, seed=0)
        assert len({t.bayes_error for t in stream.tasks}) == 1

    def test_bayes_error_formula(self):
        stream = synthesize(k=1, n=10, d2=0.0, dim=3, separation=2.0, seed=0)
        from math import erf, sqrt

        assert stream.tasks[0].bayes_error == pytest.approx(0.5 * (1 + erf(-1 / sqrt(2))))

    def test_deterministic(self):
        a, b = synthesize(k=3, seed=9), synthesize(k=3, seed=9)
        np.testing.assert_array_equal(a.tasks[2].train_X, b.tasks[2].train_X)

    def test_invalid(self):
        with pytest.raises(InvalidConfigError):
            synthesize(kind="other")
        with pytest.raises(InvalidConfigError):
            synthesize(k=0)

    def test_walk_shows_lag_one_autocorrelation(self):
        k = 50
        lag1 = []
        for seed in range(8):
            taus = task_mean_vectors(synthesize(k=k, n=10, d2=0.01, seed=seed), 50, 10.0, seed=0)
            lag1.append(partial_autocorrelation(taus, 3)[0][0])
        lag1 = np.array(lag1)
        assert lag1.mean() > 2 / np.sqrt(k)
        assert np.sum(lag1 > 2 / np.sqrt(k)) >= 6
