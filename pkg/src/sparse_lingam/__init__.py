"""Sparse ICA-based estimation of linear non-Gaussian acyclic models.

The estimator maximizes an ICA log-likelihood on pre-whitened data with an
adaptive-lasso penalty on the demixing matrix and a penalty pulling the
whitened demixing matrix toward orthogonality, solved by ADMM. The sparse
demixing matrix is then permuted, rescaled and pruned into an acyclic
weighted adjacency matrix.
"""
from .admm import SolverConfig, SolverState, fit
from .data import Dataset, Whitening, load_csv, slice_windows, standardize, whiten
from .pipeline import FitResult, SparseICALiNGAM, estimate
from .postprocess import AdjacencyEstimate, is_acyclic, postprocess
from .selection import AlphaGrid, adaptive_weights, cv_select_alpha
from .synth import GraphTruth, MetricsReport, evaluate

__version__ = "0.1.0"

__all__ = [
    "AdjacencyEstimate",
    "AlphaGrid",
    "Dataset",
    "FitResult",
    "GraphTruth",
    "MetricsReport",
    "SolverConfig",
    "SolverState",
    "SparseICALiNGAM",
    "Whitening",
    "adaptive_weights",
    "cv_select_alpha",
    "estimate",
    "evaluate",
    "fit",
    "is_acyclic",
    "load_csv",
    "postprocess",
    "slice_windows",
    "standardize",
    "whiten",
]
