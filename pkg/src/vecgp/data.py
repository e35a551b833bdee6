"""Dataset ingestion and the column-major store the evaluators read from.

A CSV file holds one sample per row (features then the solution ``s``); the
store keeps it transposed so every feature is one contiguous vector.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import KernelKind
from .errors import (EmptyFile, InvalidFraction, InvalidShape, MissingSolutionColumn,
                     NonNumericCell, RaggedRow)

SOLUTION = "s"

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_REAL = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")


@dataclass(frozen=True, eq=False)
class ColumnStore:
    feature_names: tuple
    columns: np.ndarray  # shape (n_features, n_rows), row i is feature i
    solution: np.ndarray

    def __post_init__(self):
        names = tuple(self.feature_names)
        columns = np.array(self.columns, dtype=np.float64, order="C", ndmin=2)
        solution = np.array(self.solution, dtype=np.float64).reshape(-1)
        if not names:
            raise InvalidShape("at least one feature is required")
        if len(set(names)) != len(names):
            raise InvalidShape(f"duplicate feature names in {names}")
        for name in names:
            if not _IDENT.match(name) or name == SOLUTION:
                raise InvalidShape(f"invalid feature name {name!r}")
        if columns.shape[0] != len(names):
            raise InvalidShape(f"{len(names)} names but {columns.shape[0]} columns")
        if columns.shape[1] < 1 or columns.shape[1] != solution.shape[0]:
            raise InvalidShape("columns and solution must share a row count >= 1")
        if not (np.isfinite(columns).all() and np.isfinite(solution).all()):
            raise InvalidShape("non-finite values in store")
        columns.setflags(write=False)
        solution.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "solution", solution)

    @property
    def n_rows(self) -> int:
        return self.columns.shape[1]

    @property
    def n_features(self) -> int:
        return self.columns.shape[0]

    @property
    def n_data_points(self) -> int:
        return self.n_rows * self.n_features

    def column(self, name: str) -> np.ndarray:
        return self.columns[self.feature_names.index(name)]

    def take(self, rows) -> "ColumnStore":
        rows = np.asarray(rows, dtype=np.intp)
        return ColumnStore(self.feature_names, self.columns[:, rows], self.solution[rows])

    def equals(self, other: "ColumnStore") -> bool:
        return (self.feature_names == other.feature_names
                and np.array_equal(self.columns, other.columns)
                and np.array_equal(self.solution, other.solution))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(",".join(self.feature_names).encode())
        h.update(self.columns.tobytes())
        h.update(self.solution.tobytes())
        return h.hexdigest()


def parse_csv(text: str) -> ColumnStore:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyFile("no header row")
    header = [h.strip() for h in lines[0].split(",")]
    if header[-1] != SOLUTION:
        raise MissingSolutionColumn(f"last header must be {SOLUTION!r}, got {header[-1]!r}")
    if len(header) < 2:
        raise InvalidShape("no feature columns")
    if len(lines) < 2:
        raise EmptyFile("header but no data rows")
    width = len(header)
    values = np.empty((len(lines) - 1, width), dtype=np.float64)
    for r, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != width:
            raise RaggedRow(r, width, len(cells))
        for c, cell in enumerate(cells):
            cell = cell.strip()
            if not _REAL.match(cell):
                raise NonNumericCell(r, c + 1, cell)
            values[r - 1, c] = float(cell)
    if not np.isfinite(values).all():
        r, c = np.argwhere(~np.isfinite(values))[0]
        raise NonNumericCell(int(r) + 1, int(c) + 1, lines[r + 1].split(",")[c])
    # the transposition: data row j / column i becomes column i / element j
    transposed = values.T
    return ColumnStore(tuple(header[:-1]), transposed[:-1], transposed[-1])


def load_csv(path) -> ColumnStore:
    """Read a header + numeric CSV whose final column is the solution ``s``."""
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_csv(fh.read())


def to_csv(store: ColumnStore) -> str:
    header = ",".join(store.feature_names + (SOLUTION,))
    rows = np.vstack([store.columns, store.solution]).T
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in rows)
    return header + "\n" + body + "\n"


def write_csv(store: ColumnStore, path) -> None:
    Path(path).write_text(to_csv(store), encoding="utf-8")


def synth_dataset(n_rows: int, n_features: int, kind=KernelKind.REGRESSION,
                  seed: int = 0, n_classes: int = 2) -> ColumnStore:
    """Uniform [-1, 1] features with a deterministic solution column.

    Regression targets use the first (up to) three features ``x0, x1, x2``::

        s = x0*x0 + x1 - x0*x2      (terms on absent features are dropped)

    Classification targets are labels ``0..n_classes-1`` in shuffled,
    balanced proportions (counts differ by at most one).
    """
    if n_rows < 1 or n_features < 1:
        raise InvalidShape(f"need n_rows >= 1 and n_features >= 1, got {n_rows}x{n_features}")
    kind = KernelKind(kind)
    rng = np.random.default_rng(seed)
    columns = rng.uniform(-1.0, 1.0, size=(n_features, n_rows))
    if kind is KernelKind.CLASSIFICATION:
        if n_classes < 2:
            raise InvalidShape("classification needs n_classes >= 2")
        solution = (np.arange(n_rows) % n_classes).astype(np.float64)
        rng.shuffle(solution)
    else:
        x = columns
        solution = x[0] * x[0]
        if n_features > 1:
            solution = solution + x[1]
        if n_features > 2:
            solution = solution - x[0] * x[2]
    names = tuple(f"x{i}" for i in range(n_features))
    return ColumnStore(names, columns, solution)


def split_train_test(store: ColumnStore, train_fraction: float,
                     seed: int = 0) -> tuple[ColumnStore, Optional[ColumnStore]]:
    """Seeded row shuffle, then partition. The test half is None when empty."""
    if not 0.0 < train_fraction <= 1.0:
        raise InvalidFraction(f"train_fraction must be in (0, 1], got {train_fraction}")
    if train_fraction == 1.0:
        return store, None
    n = store.n_rows
    n_train = min(n, max(1, int(round(train_fraction * n))))
    order = np.random.default_rng(seed).permutation(n)
    train = store.take(np.sort(order[:n_train]))
    if n_train == n:
        return train, None
    return train, store.take(np.sort(order[n_train:]))


# -- bundled and named datasets ----------------------------------------------

BUNDLED = ("kepler", "iris")
SYNTHETIC = {
    # name: (rows, features, kind, seed)
    "kat7": (10_000, 9, KernelKind.REGRESSION, 42),
    "ligo": (400, 137, KernelKind.CLASSIFICATION, 7),
    "ligo-full": (4_000, 1_373, KernelKind.CLASSIFICATION, 7),
}


def load_bundled(name: str) -> ColumnStore:
    text = resources.files("vecgp.datasets").joinpath(f"{name}.csv").read_text("utf-8")
    return parse_csv(text)


def load_named(name: str) -> ColumnStore:
    if name in BUNDLED:
        return load_bundled(name)
    if name in SYNTHETIC:
        rows, feats, kind, seed = SYNTHETIC[name]
        return synth_dataset(rows, feats, kind, seed)
    raise KeyError(name)


def resolve_dataset(spec: str) -> ColumnStore:
    """A CSV path if one exists, otherwise a bundled or synthetic dataset name."""
    path = Path(spec)
    if path.exists():
        return load_csv(path)
    try:
        return load_named(spec)
    except KeyError:
        raise FileNotFoundError(f"no such file or dataset: {spec}") from None


def class_count(store: ColumnStore) -> int:
    labels = np.unique(store.solution)
    return len(labels)


def dataset_names() -> Sequence[str]:
    return BUNDLED + tuple(SYNTHETIC)
