"""Task streams: CSV ingestion with a sidecar schema, and a synthetic
generator of evolving Gaussian tasks.

Schema keys (JSON object):

``label``       label column (required)
``features``    attribute columns; default is every column without a role
``task_id``     column whose numeric value orders the tasks
``task_size``   contiguous blocks of this many rows (when no ``task_id``)
``n_tasks``     split rows into this many near-equal contiguous blocks
``split``       column holding ``train``/``test`` (skips the random split)
``test_size``   held-out samples per task, default 100
``classes``     label values in class-index order; default sorted unique
"""

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, InvalidConfigError, ParseError

DEFAULT_TEST_SIZE = 100


@dataclass(eq=False)
class Task:
    train_X: np.ndarray
    train_y: np.ndarray
    test_X: np.ndarray
    test_y: np.ndarray
    task_id: object = None
    bayes_error: float = None


@dataclass(eq=False)
class TaskStream:
    tasks: list
    instance_dim: int
    n_classes: int
    feature_names: list = None
    classes: list = None

    def __len__(self):
        return len(self.tasks)

    def __getitem__(self, i):
        return self.tasks[i]

    def subsequence(self, start, length):
        return TaskStream(self.tasks[start:start + length], self.instance_dim, self.n_classes,
                          self.feature_names, self.classes)


def _read_schema(schema):
    if isinstance(schema, dict):
        return dict(schema)
    with open(schema) as fh:
        return json.load(fh)


def _sort_key(value):
    try:
        return (0, float(value), "")
    except ValueError:
        return (1, 0.0, value)


def _to_float(value, row, column):
    try:
        out = float(value)
    except ValueError:
        raise ParseError(f"column {column!r}: cannot parse {value!r} as a number", row) from None
    if not math.isfinite(out):
        raise ParseError(f"column {column!r}: non-finite value {value!r}", row)
    return out


def load_dataset(path, schema, seed=0, test_size=None):
    """Read a CSV file into a :class:`TaskStream`.

    Tasks keep the order given by the task-id column (numeric sort, gaps
    ignored) or by their position in the file. Each task's held-out test set
    is drawn with ``seed``; the remaining samples form its training pool.
    """
    schema = _read_schema(schema)
    if "label" not in schema:
        raise InvalidConfigError("schema must name the label column")
    test_size = int(schema.get("test_size", DEFAULT_TEST_SIZE) if test_size is None else test_size)
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset not found: {path}")

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", lineno)
            rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise ParseError("no data rows", 2)

    col = {name: i for i, name in enumerate(header)}
    roles = [schema["label"], schema.get("task_id"), schema.get("split")]
    for name in roles + list(schema.get("features") or []):
        if name is not None and name not in col:
            raise InvalidConfigError(f"column {name!r} not in header")
    features = schema.get("features") or [h for h in header if h not in roles]

    X = np.array([[_to_float(r[col[f]], ln, f) for f in features] for ln, r in rows])
    labels = [r[col[schema["label"]]] for _, r in rows]
    classes = [str(c) for c in schema["classes"]] if schema.get("classes") else sorted(set(labels), key=_sort_key)
    class_index = {c: i for i, c in enumerate(classes)}
    for (ln, _), lab in zip(rows, labels):
        if lab not in class_index:
            raise ParseError(f"unknown label {lab!r}", ln)
    y = np.array([class_index[lab] for lab in labels], dtype=int)

    if schema.get("task_id"):
        ids = np.array([_to_float(r[col[schema["task_id"]]], ln, schema["task_id"]) for ln, r in rows])
        groups = [(tid, np.flatnonzero(ids == tid)) for tid in np.unique(ids)]
        groups = [(int(t) if float(t).is_integer() else float(t), g) for t, g in groups]
    elif schema.get("task_size"):
        size = int(schema["task_size"])
        groups = [(i + 1, np.arange(s, min(s + size, len(rows)))) for i, s in enumerate(range(0, len(rows), size))]
    elif schema.get("n_tasks"):
        groups = [(i + 1, g) for i, g in enumerate(np.array_split(np.arange(len(rows)), int(schema["n_tasks"])))]
    else:
        raise InvalidConfigError("schema needs one of task_id, task_size or n_tasks")

    split = None
    if schema.get("split"):
        split = np.array([r[col[schema["split"]]].lower() for _, r in rows])
        bad = np.flatnonzero(~np.isin(split, ["train", "test"]))
        if bad.size:
            raise ParseError(f"split must be 'train' or 'test', got {split[bad[0]]!r}", rows[bad[0]][0])

    rng = np.random.default_rng(seed)
    tasks = []
    for tid, idx in groups:
        if split is not None:
            test_idx, train_idx = idx[split[idx] == "test"], idx[split[idx] == "train"]
            if not len(train_idx) or not len(test_idx):
                raise InsufficientDataError(f"task {tid!r} lacks train or test samples", tid)
        else:
            if len(idx) < test_size + 1:
                raise InsufficientDataError(
                    f"task {tid!r} has {len(idx)} samples, needs at least {test_size + 1}", tid)
            perm = rng.permutation(idx)
            test_idx, train_idx = np.sort(perm[:test_size]), np.sort(perm[test_size:])
        tasks.append(Task(X[train_idx], y[train_idx], X[test_idx], y[test_idx], tid))
    return TaskStream(tasks, X.shape[1], len(classes), list(features), classes)


def save_stream(stream, path, schema_path=None):
    """Write a stream as CSV (with an explicit split column) plus its schema.

    Floats are written with ``repr`` so that loading reproduces them exactly.
    """
    names = stream.feature_names or [f"x{i}" for i in range(stream.instance_dim)]
    classes = stream.classes or list(range(stream.n_classes))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["task_id", "split", *names, "label"])
        for pos, task in enumerate(stream.tasks, start=1):
            tid = task.task_id if task.task_id is not None else pos
            for part, X, y in (("train", task.train_X, task.train_y), ("test", task.test_X, task.test_y)):
                for xi, yi in zip(X, y):
                    writer.writerow([tid, part, *(repr(float(v)) for v in xi), classes[int(yi)]])
    schema = {"label": "label", "task_id": "task_id", "split": "split", "features": names,
              "classes": [str(c) for c in classes]}
    schema_path = schema_path or default_schema_path(path)
    with open(schema_path, "w") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")
    return schema_path


def default_schema_path(path):
    root, _ = os.path.splitext(path)
    return root + ".schema.json"


def _normal_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def synthesize(kind="gauss-walk", k=10, n=10, d2=1e-3, seed=0, dim=5, separation=2.5,
               test_size=DEFAULT_TEST_SIZE):
    """Stream of binary tasks whose class-conditional means follow a random walk.

    Both class means start at ``-/+ separation/2`` along the first axis and
    move by independent ``N(0, d2 I)`` steps between consecutive tasks;
    instances are ``N(mean_y, I)`` with balanced labels. Each task gets ``n``
    training samples and ``test_size`` test samples, and records its Bayes
    error ``Phi(-|mean_1 - mean_0| / 2)``.
    """
    if kind != "gauss-walk":
        raise InvalidConfigError(f"unknown synthetic stream kind {kind!r}")
    if k < 1 or n < 1 or dim < 1 or test_size < 1 or d2 < 0:
        raise InvalidConfigError("synthetic stream sizes must be positive and d2 non-negative")
    rng = np.random.default_rng(seed)
    means = np.zeros((2, dim))
    means[0, 0], means[1, 0] = -separation / 2.0, separation / 2.0
    tasks = []
    for j in range(1, k + 1):
        if j > 1:
            means = means + rng.normal(0.0, math.sqrt(d2), size=means.shape)
        parts = []
        for size in (n, test_size):
            y = rng.integers(0, 2, size=size)
            X = means[y] + rng.normal(size=(size, dim))
            parts += [X, y]
        bayes = _normal_cdf(-np.linalg.norm(means[1] - means[0]) / 2.0)
        tasks.append(Task(*parts, task_id=j, bayes_error=bayes))
    return TaskStream(tasks, dim, 2, [f"x{i}" for i in range(dim)], ["0", "1"])
