"""Labeled marker data: CSV ingestion, standardization, stratified folds.

Labels are stored as +1 (diseased) and -1 (non-diseased).  Datasets are
immutable after construction, so they can be shared freely across folds,
grid points and worker threads.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DataError,
    DuplicateMarkerName,
    MissingValue,
    NonNumeric,
    SingleClass,
    TooFewPerClass,
)

DISEASED = 1
NON_DISEASED = -1

# Columns whose population SD falls below this (relative to the mean size)
# are treated as constant and excluded from penalized updates.
_ZERO_VARIANCE_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Marker matrix with a diseased / non-diseased partition.

    Attributes:
        labels: (n,) array of +1 / -1 outcomes.
        markers: (n, p) float matrix, one column per candidate marker.
        marker_names: p unique column names.
    """

    labels: np.ndarray
    markers: np.ndarray
    marker_names: tuple[str, ...]

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        markers = np.asarray(self.markers, dtype=np.float64)
        if markers.ndim != 2:
            raise DataError("markers must be a 2-d array")
        if labels.shape != (markers.shape[0],):
            raise DataError("labels and markers disagree on sample count")
        if not np.all((labels == DISEASED) | (labels == NON_DISEASED)):
            raise DataError("labels must be +1 or -1")
        if not np.all(np.isfinite(markers)):
            raise DataError("markers contain non-finite values")
        names = tuple(str(n) for n in self.marker_names)
        if len(names) != markers.shape[1]:
            raise DataError("marker_names length must match the column count")
        if len(set(names)) != len(names):
            raise DuplicateMarkerName("marker names are not unique")
        if not np.any(labels == DISEASED) or not np.any(labels == NON_DISEASED):
            raise SingleClass("need at least one diseased and one non-diseased sample")
        labels.setflags(write=False)
        markers.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "markers", markers)
        object.__setattr__(self, "marker_names", names)

    @property
    def n(self) -> int:
        return self.markers.shape[0]

    @property
    def p(self) -> int:
        return self.markers.shape[1]

    @property
    def n_diseased(self) -> int:
        return int(np.sum(self.labels == DISEASED))

    @property
    def n_non_diseased(self) -> int:
        return int(np.sum(self.labels == NON_DISEASED))

    def subset(self, indices) -> "Dataset":
        """Row subset preserving column names; both classes must survive."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.labels[idx], self.markers[idx], self.marker_names)

    def column_index(self, name: str) -> int:
        try:
            return self.marker_names.index(name)
        except ValueError:
            raise DataError(f"no marker column named {name!r}") from None


@dataclass(frozen=True)
class Standardization:
    """Per-column centering/scaling transform fitted on training data.

    Scales are population standard deviations (1/n).  Constant columns are
    recorded in ``zero_variance`` and carried through untouched (mean 0,
    scale 1), so column indexing stays stable for reporting.
    """

    means: np.ndarray
    scales: np.ndarray
    enabled: bool = True
    zero_variance: tuple[int, ...] = ()

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        scales = np.asarray(self.scales, dtype=np.float64)
        if means.shape != scales.shape or means.ndim != 1:
            raise DataError("means and scales must be matching 1-d arrays")
        if not np.all(scales > 0):
            raise DataError("scales must be strictly positive")
        means.setflags(write=False)
        scales.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "scales", scales)
        object.__setattr__(self, "zero_variance", tuple(int(j) for j in self.zero_variance))

    def apply(self, markers: np.ndarray) -> np.ndarray:
        if not self.enabled:
            return np.asarray(markers, dtype=np.float64)
        return (np.asarray(markers, dtype=np.float64) - self.means) / self.scales


def standardize(data: Dataset) -> tuple[Dataset, Standardization]:
    """Center each marker column and scale it to unit population SD.

    Zero-variance columns are flagged and left untouched rather than
    rejected; downstream fitting pins their coefficients to zero.
    """
    X = data.markers
    means = X.mean(axis=0)
    sds = X.std(axis=0)
    zero = np.flatnonzero(sds <= _ZERO_VARIANCE_TOL * np.maximum(1.0, np.abs(means)))
    m = means.copy()
    s = sds.copy()
    m[zero] = 0.0
    s[zero] = 1.0
    transform = Standardization(m, s, True, tuple(int(j) for j in zero))
    return Dataset(data.labels, transform.apply(X), data.marker_names), transform


@dataclass(frozen=True)
class FoldAssignment:
    """Stratified partition of samples into k folds.

    Per-fold class counts differ from perfect proportionality by at most
    one in each class, and the assignment is a pure function of the seed.
    """

    fold_of: np.ndarray
    k: int
    seed: int

    def __post_init__(self):
        fold_of = np.asarray(self.fold_of, dtype=np.int64)
        fold_of.setflags(write=False)
        object.__setattr__(self, "fold_of", fold_of)

    def heldout_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def training_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def stratified_folds(data: Dataset, k: int, seed: int) -> FoldAssignment:
    """Assign samples to k folds, shuffling within each class.

    Raises TooFewPerClass when min(J, K) < k.
    """
    if k < 2:
        raise DataError("fold count must be at least 2")
    if min(data.n_diseased, data.n_non_diseased) < k:
        raise TooFewPerClass(
            f"need at least k={k} samples per class, got "
            f"J={data.n_diseased}, K={data.n_non_diseased}"
        )
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    fold_of = np.empty(data.n, dtype=np.int64)
    for cls in (DISEASED, NON_DISEASED):
        idx = np.flatnonzero(data.labels == cls)
        perm = rng.permutation(idx)
        fold_of[perm] = np.arange(perm.size) % k
    return FoldAssignment(fold_of, k, int(seed))


def load_csv(path, label_column: str, positive_label: str) -> Dataset:
    """Read an RFC-4180-style CSV with a header row into a Dataset.

    The ``label_column`` is mapped to +1 where the cell equals
    ``positive_label`` and -1 otherwise; every other column must be a
    finite number.  Row/column positions in errors are 1-based file
    coordinates (the header is row 0).
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file, header row required")
        header = [h.strip() for h in header]
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header")
        label_pos = header.index(label_column)
        marker_cols = [i for i in range(len(header)) if i != label_pos]
        names = [header[i] for i in marker_cols]
        if len(set(names)) != len(names):
            raise DuplicateMarkerName(f"{path}: duplicate marker column names in header")

        labels = []
        rows = []
        for r, row in enumerate(reader, start=1):
            if len(row) != len(header):
                raise DataError(
                    f"{path}: data row {r} has {len(row)} fields, expected {len(header)}"
                )
            token = row[label_pos].strip()
            labels.append(DISEASED if token == positive_label else NON_DISEASED)
            values = []
            for c in marker_cols:
                cell = row[c].strip()
                if cell == "":
                    raise MissingValue(r, c + 1)
                try:
                    value = float(cell)
                except ValueError:
                    raise NonNumeric(r, c + 1, cell) from None
                if not math.isfinite(value):
                    raise NonNumeric(r, c + 1, cell)
                values.append(value)
            rows.append(values)

    if not rows:
        raise DataError(f"{path}: no data rows")
    labels = np.asarray(labels, dtype=np.int64)
    if not np.any(labels == DISEASED) or not np.any(labels == NON_DISEASED):
        raise SingleClass(
            f"{path}: label column has a single class "
            f"(positive token was {positive_label!r})"
        )
    return Dataset(labels, np.asarray(rows, dtype=np.float64), tuple(names))
