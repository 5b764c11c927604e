"""Cut an AR(1) series into windows and recover the lag-one chain.

Run: python demos/06_time_series_windows.py
"""
import numpy as np

from sparse_lingam.data import slice_windows
from sparse_lingam.pipeline import estimate

rng = np.random.default_rng(6)
x = np.zeros(6 * 1500)
for t in range(1, x.size):
    x[t] = 0.7 * x[t - 1] + rng.laplace()

data = slice_windows(x, 6)
result = estimate(data, alpha=0.05, escalate=False)
print("window matrix:", data.values.shape)
print("estimated B (expect about 0.7 on the subdiagonal):\n", np.round(result.B, 2))
