"""Firefly search for SVM (C, gamma) next to a plain 5x5 grid, on NSL-KDD-layout records.

Pass a real KDDTrain+ style file, or leave the argument off to use 500 seeded
synthetic rows with the same layout.

    python demos/tune_on_nsl_layout.py [path/to/KDDTrain+.txt]
"""

import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from adaptive_ids.dataset import load_labeled_csv
from adaptive_ids.evalmetrics import cross_validate, format_summary_table
from adaptive_ids.firefly import SVM_SPACE, FireflyParams, grid_search_svm, tune_svm
from adaptive_ids.synthdata import write_synthetic_nsl_kdd

if len(sys.argv) > 1:
    path = Path(sys.argv[1])
else:
    path = Path(tempfile.mkdtemp()) / "nsl500.csv"
    write_synthetic_nsl_kdd(path, n=500, seed=7)
ds = load_labeled_csv(path, "nsl_kdd")
print(f"{len(ds)} records, {ds.dim} features")

t = time.perf_counter()
c, g, fit = grid_search_svm(ds, np.logspace(-2, 2, 5), np.logspace(-3, 1, 5), cv_k=10, seed=0)
print(f"grid:    C={c:<8.3g} gamma={g:<8.3g} fitness={fit:.4f}  ({time.perf_counter() - t:.0f}s)")

t = time.perf_counter()
res = tune_svm(ds, SVM_SPACE, FireflyParams(population=20, iterations=50, seed=0), cv_k=10)
print(f"firefly: C={res.c_param:<8.3g} gamma={res.gamma_rbf:<8.3g} fitness={res.fitness:.4f}  "
      f"({time.perf_counter() - t:.0f}s, {res.evaluations} evaluations)")

# compare the chosen settings with the other classifiers on the same folds
specs = {"SVM (default)": "svm:c=1,gamma=0.1",
         "SVM (firefly)": f"svm:c={res.c_param},gamma={res.gamma_rbf}",
         "Naive Bayes": "nb", "Decision tree": "cart:depth=8", "Fuzzy": "fuzzy"}
print()
print(format_summary_table({name: cross_validate(ds, spec, k=10, seed=0).report for name, spec in specs.items()}))
