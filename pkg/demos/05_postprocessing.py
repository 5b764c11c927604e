"""Turn a noisy demixing matrix into an acyclic adjacency matrix.

Run: python demos/05_postprocessing.py
"""
import numpy as np

from sparse_lingam.postprocess import is_acyclic, postprocess

B_true = np.array([[0.0, 0.0, 0.0], [0.9, 0.0, 0.0], [0.0, -0.7, 0.0]])
M = np.eye(3) - B_true
M = M[[2, 0, 1]] * np.array([[3.0], [0.5], [-2.0]])  # shuffled and rescaled rows
M[0, 2] += 0.04                                        # a small spurious entry

est = postprocess(M)
print("estimated B:\n", np.round(est.B, 3))
print("causal order:", est.causal_order, "cutoff applied:", est.cutoff_applied)
print("acyclic:", is_acyclic(est.B)[0])
