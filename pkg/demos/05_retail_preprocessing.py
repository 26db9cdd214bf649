"""Retail preprocessing utilities on synthetic sale histories.

Missing prices on no-sale trips are imputed from past sales: slow-moving
products use the mode of the last few sale prices, store-dependent products
use the last sale at the same store. Stores with too few sales are dropped
to avoid long gaps, and prices live on fixed ladders.
"""

import numpy as np

from sptlab import (SaleHistory, explicit_grid, filter_stores_min_sales,
                    impute_last_at_store, impute_mode_of_last_k)

# strawberry-style product: one national price trend, infrequent changes
strawberries = SaleHistory(
    np.arange(8),
    np.asarray([1, 2, 1, 3, 2, 1, 2, 3]),
    np.asarray([2.99, 2.99, 2.49, 2.49, 2.49, 1.99, 2.49, 2.49]))
print("mode of last 3 strawberry sales:",
      impute_mode_of_last_k(strawberries, 3))

# milk-style product: strong store-to-store price differences
milk = SaleHistory(
    np.arange(6),
    np.asarray([7, 9, 7, 9, 7, 9]),
    np.asarray([2.32, 2.69, 2.32, 2.79, 2.49, 2.69]))
for store in (7, 9):
    print(f"last milk sale at store {store}:", impute_last_at_store(milk, store))

# keep only stores with enough sales for timely imputation
rng = np.random.default_rng(0)
stores = np.repeat([1, 2, 3], [60, 55, 12])
history = SaleHistory(np.arange(stores.size), stores,
                      np.round(rng.uniform(2.0, 3.0, stores.size), 2))
kept = filter_stores_min_sales(history, 50)
print(f"store filter: kept {len(kept)} of {len(history)} records "
      f"(stores {sorted(set(kept.store_ids.tolist()))})")

ladder = explicit_grid([1.99, 2.49, 2.99, 3.49, 3.99, 4.49, 4.99])
print("strawberry price ladder:", ladder.prices)
