"""Run the ADMM solver at a fixed penalty on a two-variable chain.

Run: python demos/03_admm_solver.py
"""
import numpy as np

from sparse_lingam.admm import SolverConfig, fit
from sparse_lingam.data import Dataset, whiten
from sparse_lingam.postprocess import postprocess
from sparse_lingam.selection import adaptive_weights, initial_estimate

rng = np.random.default_rng(3)
x1 = rng.laplace(size=1000)
x2 = 0.8 * x1 + rng.uniform(-1.7, 1.7, size=1000)
w = whiten(Dataset(np.column_stack([x1, x2])))

M0, _ = initial_estimate(w)
state = fit(w, SolverConfig(alpha=0.1), C=adaptive_weights(M0), record_history=True)
print("converged:", state.converged, "after", state.n_outer, "outer iterations")
print("last residuals (primal, W step):", state.history[-1])
print("sparse demixing matrix:\n", np.round(state.M, 3))
print("B on the standardized scale:\n", np.round(postprocess(state.M).B, 3))
