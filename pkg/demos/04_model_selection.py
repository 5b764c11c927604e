"""Choose the sparsity mix by K-fold cross-validation on a short grid.

Run: python demos/04_model_selection.py
"""
import numpy as np

from sparse_lingam.pipeline import estimate
from sparse_lingam.selection import AlphaGrid
from sparse_lingam.synth import assign_weights_and_noises, evaluate, gen_er_graph, sample_data

truth = assign_weights_and_noises(gen_er_graph(5, 5, seed=4))
result = estimate(sample_data(truth, 800), grid=AlphaGrid.logspace(count=8), k_folds=4, seed=4)
print("per-fold maximizers:", result.cv.fold_argmax)
print("alpha selected by CV:", result.alpha_selected, "alpha used:", result.alpha_used)
print("escalation trace (alpha, cutoff, converged):", result.escalation_trace)
print(evaluate(result.B, truth.B))
