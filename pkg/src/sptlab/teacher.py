"""Teacher models estimating the sale probability f(x, p), plus the
precomputed revenue matrix the student tree learns from."""

from __future__ import annotations

import abc
import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import boosting
from .dataset import DataError, Dataset, PriceGrid


@dataclass(frozen=True)
class GbtConfig:
    """Boosting hyperparameters; defaults mirror common library defaults."""

    rounds: int = 50
    learning_rate: float = 0.1
    max_leaves: int = 31
    min_child_samples: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValueError("learning_rate must lie in (0, 1]")
        if self.max_leaves < 2:
            raise ValueError("max_leaves must be >= 2")


class TeacherModel(abc.ABC):
    """Deterministic estimator of the sale probability at (features, price)."""

    n_features: int

    @abc.abstractmethod
    def predict_proba_batch(self, X: np.ndarray, p) -> np.ndarray:
        """Probabilities for rows of X at price p (scalar or per-row vector)."""

    def predict_proba(self, x, p: float) -> float:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        out = float(self.predict_proba_batch(x, float(p))[0])
        return out

    def _check_dim(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(
                f"expected {self.n_features} features, got {X.shape[1]}")
        return X


class GradientBoostedTeacher(TeacherModel):
    """Boosted-tree demand model; price enters as an extra numeric feature."""

    def __init__(self, booster: boosting.BoostedTrees, config: GbtConfig):
        self.booster = booster
        self.config = config
        self.n_features = booster.n_features - 1

    def predict_proba_batch(self, X, p, n_rounds: int | None = None):
        X = self._check_dim(X)
        pcol = np.broadcast_to(np.asarray(p, dtype=np.float64), (X.shape[0],))
        aug = np.column_stack([X, pcol])
        return self.booster.predict_proba(aug, n_rounds)

    def save(self, path) -> None:
        boosting.save_boosted_trees(self.booster, path)

    @classmethod
    def load(cls, path, config: GbtConfig | None = None) -> "GradientBoostedTeacher":
        return cls(boosting.load_boosted_trees(path), config or GbtConfig())


class OracleTeacher(TeacherModel):
    """Wraps an exact probability function, e.g. a synthetic world's truth."""

    def __init__(self, prob_fn, n_features: int):
        self._prob_fn = prob_fn
        self.n_features = n_features

    def predict_proba_batch(self, X, p):
        X = self._check_dim(X)
        out = np.asarray(self._prob_fn(X, p), dtype=np.float64)
        return np.broadcast_to(out, (X.shape[0],)).copy()


class TableTeacher(TeacherModel):
    """Row-indexed probability table aligned to a fixed price grid.

    Queries identify the row by feature value (a single row-index feature);
    prices must be members of the grid.
    """

    def __init__(self, probs: np.ndarray, grid: PriceGrid):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 2:
            raise DataError("table teacher needs a 2-D probability matrix")
        if probs.shape[1] != grid.m:
            raise DataError(
                f"table has {probs.shape[1]} columns but grid has {grid.m} prices")
        if not np.all(np.isfinite(probs)) or probs.min() < 0.0 or probs.max() > 1.0:
            raise DataError("table probabilities must lie in [0, 1]")
        self.probs = probs
        self.grid = grid
        self.n_features = 1

    def _grid_index(self, p: float) -> int:
        hit = np.nonzero(np.isclose(self.grid.prices, p, rtol=1e-12, atol=1e-12))[0]
        if hit.size == 0:
            raise ValueError(f"price {p} is not on the table teacher's grid")
        return int(hit[0])

    def predict_proba_batch(self, X, p):
        X = self._check_dim(X)
        rows = X[:, 0]
        idx = rows.astype(np.int64)
        if np.any(idx != rows) or idx.min() < 0 or idx.max() >= self.probs.shape[0]:
            raise ValueError("table teacher queries must use valid integer row indices")
        pvec = np.broadcast_to(np.asarray(p, dtype=np.float64), (X.shape[0],))
        cols = np.asarray([self._grid_index(float(v)) for v in pvec])
        return self.probs[idx, cols]


@dataclass(frozen=True)
class RevenueMatrix:
    """Precomputed r[i, k] = p_k * f(x_i, p_k); the student's sole model input."""

    values: np.ndarray
    grid: PriceGrid

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != self.grid.m:
            raise DataError("revenue matrix must be n x m with m = grid size")
        if not np.all(np.isfinite(v)):
            raise DataError("revenue matrix entries must be finite")
        lo = np.minimum(0.0, self.grid.prices)
        hi = np.maximum(0.0, self.grid.prices)
        if np.any(v < lo - 1e-9) or np.any(v > hi + 1e-9):
            raise DataError("revenue entries must lie between 0 and the grid price")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


def fit_gbt(train: Dataset, config: GbtConfig = GbtConfig()) -> GradientBoostedTeacher:
    """Fit the boosted teacher on (x, p) -> y with price as the last feature."""
    if train.n < 2:
        raise DataError("teacher training needs at least 2 rows")
    if train.outcomes.min() == train.outcomes.max():
        raise DataError("teacher training data must contain both outcome classes")
    aug = np.column_stack([train.features, train.prices])
    booster = boosting.fit_boosted_trees(
        aug, train.outcomes,
        rounds=config.rounds, learning_rate=config.learning_rate,
        max_leaves=config.max_leaves, min_child_samples=config.min_child_samples)
    return GradientBoostedTeacher(booster, config)


def revenue_matrix(model: TeacherModel, features: np.ndarray,
                   grid: PriceGrid) -> RevenueMatrix:
    """Evaluate r[i, k] = p_k * f(x_i, p_k) over the whole grid."""
    X = np.atleast_2d(np.asarray(features, dtype=np.float64))
    cols = [grid.prices[k] * model.predict_proba_batch(X, float(grid.prices[k]))
            for k in range(grid.m)]
    return RevenueMatrix(np.column_stack(cols), grid)


def auc(model: TeacherModel, test: Dataset) -> float:
    """Mann-Whitney AUC of predicted probabilities at observed prices; ties 0.5."""
    y = test.outcomes
    if y.min() == y.max():
        raise DataError("AUC needs both classes in the test set")
    scores = model.predict_proba_batch(test.features, test.prices)
    ranks = rankdata(scores)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def load_table_teacher(path, grid: PriceGrid) -> TableTeacher:
    """Read an n x m probability matrix (CSV, no header) aligned to the grid."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = [[float(c) for c in row] for row in csv.reader(f) if row]
    if not rows:
        raise DataError(f"{path}: empty table teacher file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: ragged rows in table teacher file")
    return TableTeacher(np.asarray(rows), grid)


class TeacherGridPolicy:
    """Full teacher personalization: per row, the grid price maximizing p * f(x, p)."""

    def __init__(self, model: TeacherModel, grid: PriceGrid):
        self.model = model
        self.grid = grid

    def prescribe(self, X: np.ndarray) -> np.ndarray:
        rm = revenue_matrix(self.model, X, self.grid)
        return self.grid.prices[np.argmax(rm.values, axis=1)]

    def predict_price(self, x) -> float:
        return float(self.prescribe(np.atleast_2d(x))[0])
