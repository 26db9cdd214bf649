"""Tabular pricing data: ingestion, validation, splitting, price grids,
and the retail price-imputation / store-filtering preprocessing rules."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .rng import CounterRng


class DataError(ValueError):
    """Raised for malformed input data, with row/column location when known."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Observational pricing data: features x_i, observed price p_i, sold flag y_i.

    Immutable after construction and safe to share across workers.
    """

    features: np.ndarray
    prices: np.ndarray
    outcomes: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if feats.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        prices = np.asarray(self.prices, dtype=np.float64)
        outcomes = np.asarray(self.outcomes)
        n = feats.shape[0]
        if n < 1:
            raise DataError("dataset needs at least one row")
        if prices.shape != (n,) or outcomes.shape != (n,):
            raise DataError("features, prices and outcomes must share row count")
        if len(self.feature_names) != feats.shape[1]:
            raise DataError("feature_names length must equal feature count")
        if not np.all(np.isfinite(feats)) or not np.all(np.isfinite(prices)):
            raise DataError("non-finite value in features or prices")
        out_f = outcomes.astype(np.float64)
        if not np.all((out_f == 0.0) | (out_f == 1.0)):
            raise DataError("outcomes must be exactly 0 or 1")
        object.__setattr__(self, "features", _freeze(feats))
        object.__setattr__(self, "prices", _freeze(prices))
        object.__setattr__(self, "outcomes", _freeze(out_f.astype(np.int64)))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def subset(self, rows: np.ndarray) -> "Dataset":
        return Dataset(self.features[rows], self.prices[rows],
                       self.outcomes[rows], self.feature_names)


@dataclass(frozen=True)
class PriceGrid:
    """Strictly ascending candidate prices p_1 < ... < p_m."""

    prices: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise DataError("price grid must be a nonempty vector")
        if not np.all(np.isfinite(p)):
            raise DataError("price grid entries must be finite")
        if not np.all(np.diff(p) > 0):
            raise DataError("price grid must be strictly ascending with distinct entries")
        object.__setattr__(self, "prices", _freeze(p))

    @property
    def m(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class SaleHistory:
    """Time-ordered sale records (timestamp, store_id, price) for one product."""

    timestamps: np.ndarray
    store_ids: np.ndarray
    prices: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.timestamps, dtype=np.int64)
        s = np.asarray(self.store_ids, dtype=np.int64)
        p = np.asarray(self.prices, dtype=np.float64)
        if not (t.shape == s.shape == p.shape) or t.ndim != 1:
            raise DataError("sale history columns must be equal-length vectors")
        if t.size > 1 and np.any(np.diff(t) < 0):
            raise DataError("sale history timestamps must be non-decreasing")
        object.__setattr__(self, "timestamps", _freeze(t))
        object.__setattr__(self, "store_ids", _freeze(s))
        object.__setattr__(self, "prices", _freeze(p))

    def __len__(self) -> int:
        return self.timestamps.size


def load_csv(path) -> Dataset:
    """Load a dataset from CSV with reserved columns `price` and `sold`.

    Every other column is a numeric feature; file column order is preserved.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "price" not in header:
            raise DataError(f"{path}: missing required column 'price'")
        if "sold" not in header:
            raise DataError(f"{path}: missing required column 'sold'")
        price_col = header.index("price")
        sold_col = header.index("sold")
        feat_cols = [i for i in range(len(header)) if i not in (price_col, sold_col)]

        feats, prices, outcomes = [], [], []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}:{line_no}: expected {len(header)} cells, got {len(row)}")
            vals = []
            for i, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}:{line_no}: non-numeric value {cell!r} in column '{header[i]}'"
                    ) from None
            sold = vals[sold_col]
            if sold not in (0.0, 1.0):
                raise DataError(
                    f"{path}:{line_no}: 'sold' must be 0 or 1, got {row[sold_col]!r}"
                )
            feats.append([vals[i] for i in feat_cols])
            prices.append(vals[price_col])
            outcomes.append(sold)

    if not prices:
        raise DataError(f"{path}: no data rows")
    names = tuple(header[i] for i in feat_cols)
    return Dataset(np.asarray(feats, dtype=np.float64).reshape(len(prices), len(feat_cols)),
                   np.asarray(prices), np.asarray(outcomes), names)


def write_csv(data: Dataset, path) -> None:
    """Write a dataset in the load_csv schema (features..., price, sold)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(data.feature_names) + ["price", "sold"])
        for i in range(data.n):
            row = [repr(float(v)) for v in data.features[i]]
            row.append(repr(float(data.prices[i])))
            row.append(str(int(data.outcomes[i])))
            writer.writerow(row)


def load_sale_history(path) -> SaleHistory:
    """Load a sale history CSV with columns timestamp, store_id, price."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = [h.strip() for h in next(reader)]
        for col in ("timestamp", "store_id", "price"):
            if col not in header:
                raise DataError(f"{path}: missing required column '{col}'")
        ti, si, pi = header.index("timestamp"), header.index("store_id"), header.index("price")
        ts, ss, ps = [], [], []
        for line_no, row in enumerate(reader, start=2):
            try:
                ts.append(int(row[ti]))
                ss.append(int(row[si]))
                ps.append(float(row[pi]))
            except (ValueError, IndexError):
                raise DataError(f"{path}:{line_no}: malformed sale record {row!r}") from None
    return SaleHistory(np.asarray(ts), np.asarray(ss), np.asarray(ps))


def split_halves(data: Dataset, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic row-disjoint split into halves of size ceil(n/2), floor(n/2)."""
    if data.n < 2:
        raise DataError("need at least 2 rows to split")
    perm = CounterRng(seed).permutation(data.n)
    cut = (data.n + 1) // 2
    return data.subset(np.sort(perm[:cut])), data.subset(np.sort(perm[cut:]))


def percentile_grid(prices) -> PriceGrid:
    """Candidate prices at the 10th..90th percentiles of observed prices.

    Uses the nearest-rank convention (value at 1-based index ceil(p/100 * n)
    of the ascending sort) so every grid price is an observed price.
    Duplicate percentile values collapse, so the grid may have fewer than 9
    entries.
    """
    p = np.asarray(prices, dtype=np.float64)
    if p.size < 9:
        raise DataError("percentile grid needs at least 9 observations")
    s = np.sort(p)
    idx = [math.ceil(q / 100.0 * p.size) - 1 for q in range(10, 100, 10)]
    vals = sorted(set(float(s[i]) for i in idx))
    return PriceGrid(np.asarray(vals))


def explicit_grid(values) -> PriceGrid:
    """Fixed price ladder; input must be nonempty with distinct entries."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise DataError("explicit grid requires at least one price")
    if np.unique(v).size != v.size:
        raise DataError("explicit grid entries must be distinct")
    return PriceGrid(np.sort(v))


def impute_mode_of_last_k(history: SaleHistory, k: int) -> float:
    """Most frequent price among the most recent min(k, available) sales.

    Ties break toward the most recent tied price; retail prices trend over
    time so recency is the sensible default.
    """
    if len(history) == 0:
        raise DataError("cannot impute from an empty history")
    if k < 1:
        raise DataError("k must be >= 1")
    window = history.prices[-min(k, len(history)):]
    counts = Counter(window.tolist())
    best = max(counts.values())
    for price in reversed(window.tolist()):
        if counts[price] == best:
            return float(price)
    raise AssertionError("unreachable")


def impute_last_at_store(history: SaleHistory, store_id: int) -> float:
    """Price of the most recent sale at the given store."""
    matches = np.nonzero(history.store_ids == store_id)[0]
    if matches.size == 0:
        raise DataError(f"no sale record for store {store_id}")
    return float(history.prices[matches[-1]])


def filter_stores_min_sales(history: SaleHistory, min_sales: int) -> SaleHistory:
    """Keep only records of stores with at least min_sales sales, order preserved."""
    if min_sales < 1:
        raise DataError("min_sales must be >= 1")
    if len(history) == 0:
        return history
    ids, counts = np.unique(history.store_ids, return_counts=True)
    keep_ids = set(ids[counts >= min_sales].tolist())
    mask = np.asarray([int(s) in keep_ids for s in history.store_ids])
    return SaleHistory(history.timestamps[mask], history.store_ids[mask],
                       history.prices[mask])
