"""End-to-end estimation: standardize, whiten, initial fit, weights, CV, escalation."""
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import SolverConfig
from .data import Dataset, standardize, whiten
from .selection import (
    DEFAULT_CAP,
    AlphaGrid,
    adaptive_weights,
    cv_select_alpha,
    escalate_alpha,
    initial_estimate,
    warm_start_W,
)


def to_raw_scale(B_std, scales):
    """Map an adjacency estimated on standardized columns back to raw units."""
    s = np.asarray(scales, dtype=float)
    return B_std * s[:, None] / s[None, :]


@dataclass
class FitResult:
    B: np.ndarray
    B_standardized: np.ndarray
    causal_order: list
    alpha_selected: float
    alpha_used: float
    cutoff_applied: float
    acyclic: bool
    cutoff_violating: bool
    converged: bool
    M: np.ndarray
    cv: object = None
    escalation_trace: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)

    def diagnostics(self):
        doc = {
            "alpha_selected": self.alpha_selected,
            "alpha_used": self.alpha_used,
            "alpha_fixed": self.cv is None,
            "cutoff_applied": self.cutoff_applied,
            "acyclic": self.acyclic,
            "cutoff_violating": self.cutoff_violating,
            "converged": self.converged,
            "causal_order": [int(k) for k in self.causal_order],
            "n_edges": int(np.count_nonzero(self.B)),
            "escalation": [
                {"alpha": a, "cutoff": c, "converged": bool(ok)}
                for a, c, ok in self.escalation_trace
            ],
            "residual_history": [[p, w] for p, w in self.residual_history],
        }
        if self.cv is not None:
            doc["cv"] = {
                "fold_argmax": list(self.cv.fold_argmax),
                "grid": list(self.cv.grid.values),
                "failures": [[k, a, m] for k, a, m in self.cv.failures],
            }
        return doc


def estimate(data, cfg=None, alpha=None, grid=None, k_folds=10, omega1=0.05, omega2=0.05,
             weight_cap=DEFAULT_CAP, escalate=True, seed=None, jobs=1):
    """Estimate a sparse linear non-Gaussian DAG from data.

    Parameters
    ----------
    data : Dataset or array_like, shape (N, d)
    cfg : SolverConfig, optional
        Solver settings; ``cfg.alpha`` is ignored in favour of CV or ``alpha``.
    alpha : float, optional
        Skip cross-validation and start escalation from this value.
    grid : AlphaGrid, optional
        Defaults to 50 log-spaced points in ``[1e-3, 10**-0.5]``.
    escalate : bool
        Move up the grid until the acyclification cutoff is at most ``omega1``.
    seed : int, optional
        Overrides ``cfg.seed`` (random start and fold assignment).
    """
    if not isinstance(data, Dataset):
        data = Dataset(np.asarray(data, dtype=float))
    cfg = cfg or SolverConfig()
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    grid = grid or AlphaGrid.logspace()
    ds = standardize(data)
    wh = whiten(ds)

    M0, _ = initial_estimate(wh, cfg)
    C = adaptive_weights(M0, cfg.gamma, weight_cap)

    cv = None
    if alpha is None:
        cv = cv_select_alpha(ds, grid, k_folds, cfg, C=C, M0=M0, seed=cfg.seed, jobs=jobs)
        alpha = cv.alpha
    esc = escalate_alpha(
        wh, alpha, grid, cfg, C=C, omega1=omega1, omega2=omega2,
        W0=warm_start_W(M0, wh), escalate=escalate,
    )
    est = esc.estimate
    return FitResult(
        B=to_raw_scale(est.B, ds.column_scales),
        B_standardized=est.B,
        causal_order=est.causal_order,
        alpha_selected=float(alpha),
        alpha_used=float(esc.alpha),
        cutoff_applied=float(est.cutoff_applied),
        acyclic=est.acyclic,
        cutoff_violating=esc.cutoff_violating,
        converged=esc.state.converged,
        M=esc.state.M,
        cv=cv,
        escalation_trace=esc.trace,
        residual_history=esc.state.history,
    )


class SparseICALiNGAM:
    """Estimator wrapper around :func:`estimate`.

    After :meth:`fit`, ``adjacency_matrix_`` holds ``B`` in the units of the
    input (``B[j, k]`` is the effect of ``x_k`` on ``x_j``) and
    ``causal_order_`` lists variables parents-first.
    """

    def __init__(self, alpha=None, k_folds=10, omega1=0.05, omega2=0.05, grid=None,
                 escalate=True, random_state=0, jobs=1, **solver_options):
        self.alpha = alpha
        self.k_folds = k_folds
        self.omega1 = omega1
        self.omega2 = omega2
        self.grid = grid
        self.escalate = escalate
        self.random_state = random_state
        self.jobs = jobs
        self.solver_options = solver_options

    def fit(self, X):
        cfg = SolverConfig(seed=self.random_state, **self.solver_options)
        self.result_ = estimate(
            X, cfg, alpha=self.alpha, grid=self.grid, k_folds=self.k_folds,
            omega1=self.omega1, omega2=self.omega2, escalate=self.escalate, jobs=self.jobs,
        )
        self.adjacency_matrix_ = self.result_.B
        self.causal_order_ = self.result_.causal_order
        return self
