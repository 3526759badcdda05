import pathlib
import sys

import numpy as np
import pytest

SRC = pathlib.Path(__file__).resolve().parents[1] / "src"
if str(SRC) not in sys.path:
    sys.path.insert(0, str(SRC))

from pauc_push import Dataset  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def random_dataset(rng, n_pos=25, n_neg=35, p=4, shift=0.8, names=None):
    """Overlapping-class dataset; non-separable for the sizes used in tests."""
    X = rng.normal(size=(n_pos + n_neg, p))
    X[:n_pos] += shift * rng.uniform(0.2, 1.0, size=p)
    labels = np.concatenate([np.ones(n_pos, dtype=int), -np.ones(n_neg, dtype=int)])
    if names is None:
        names = tuple(f"m{j}" for j in range(p))
    return Dataset(labels, X, names)


def random_scores(rng, n_pos, n_neg, ties=False):
    """Score/label arrays; with ties=True, values collide on a coarse grid."""
    pos = rng.normal(0.5, 1.0, n_pos)
    neg = rng.normal(0.0, 1.0, n_neg)
    if ties:
        pos = np.round(pos * 4) / 4
        neg = np.round(neg * 4) / 4
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(n_pos, dtype=int), -np.ones(n_neg, dtype=int)])
    return scores, labels
