"""Standardize and whiten data, then inspect the candidate source densities.

Run: python demos/02_whitening_and_ica.py
"""
import numpy as np

from sparse_lingam.data import Dataset, whiten
from sparse_lingam.ica import log_likelihood, select_density

rng = np.random.default_rng(0)
S = np.column_stack([rng.laplace(size=3000), rng.uniform(-1.7, 1.7, size=3000)])
X = S @ np.array([[1.0, 0.6], [0.0, 1.0]])

w = whiten(Dataset(X))
print("whitened covariance:\n", np.round(w.Z.T @ w.Z / len(w.Z), 6))

# the generating sources (unit variance): one heavy-tailed, one light-tailed
kinds = [select_density(S[:, j] / S[:, j].std()) for j in range(2)]
print("selected densities:", kinds)

# whitened mixtures are uncorrelated but still mixed, so an arbitrary rotation
# scores lower than the best one found by scanning angles
angles = np.linspace(0, np.pi, 181)
rot = lambda a: np.array([[np.cos(a), np.sin(a)], [-np.sin(a), np.cos(a)]])
scores = [log_likelihood(rot(a), w.Z, kinds) for a in angles]
print("log-likelihood at identity:", round(scores[0], 4))
print("best over rotations:", round(max(scores), 4), "at", round(np.degrees(angles[np.argmax(scores)]), 1), "deg")
