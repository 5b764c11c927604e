"""Adaptive-lasso weights, the unweighted initial fit, K-fold CV over alpha and
alpha escalation until the post-processed graph is acyclic at a small cutoff."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .admm import SolverConfig, fit
from .data import apply_whitening, whiten
from .exceptions import ParameterError, SelectionError, SparseLingamError
from .ica import log_likelihood, row_normalize
from .postprocess import postprocess

logger = logging.getLogger(__name__)

DEFAULT_CAP = 1e6
LARGE_D = 50


@dataclass(frozen=True)
class AlphaGrid:
    values: tuple
    log_scale: bool = True

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ParameterError("alpha grid must be a non-empty 1-d sequence")
        if np.any(np.diff(v) <= 0):
            raise ParameterError("alpha grid must be strictly increasing")
        if v[0] < 0 or v[-1] > 1:
            raise ParameterError("alpha grid values must lie in [0, 1]")
        object.__setattr__(self, "values", tuple(float(x) for x in v))

    @classmethod
    def logspace(cls, lo=1e-3, hi=10 ** -0.5, count=50):
        return cls(tuple(np.logspace(np.log10(lo), np.log10(hi), count)))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def index(self, alpha):
        return int(np.argmin(np.abs(np.asarray(self.values) - alpha)))


def adaptive_weights(M0, gamma=1.0, cap=DEFAULT_CAP):
    """Entrywise ``min(1/|m0|, cap) ** gamma``; zero initial entries get the cap."""
    if not cap > 0:
        raise ParameterError("cap must be positive")
    absM = np.abs(np.asarray(M0, dtype=float))
    with np.errstate(divide="ignore"):
        c = np.where(absM > 0, 1.0 / absM, np.inf)
    c = np.minimum(c, cap)
    return c ** gamma


def initial_alpha(d):
    return 0.0 if d < LARGE_D else 0.1


def initial_estimate(whitening, cfg=None):
    """Unweighted (``gamma = 0``) fit from a random start; returns ``(M0, state)``.

    ``alpha`` is 0 below 50 variables and 0.1 otherwise.
    """
    cfg = cfg or SolverConfig()
    d = whitening.n_vars
    cfg0 = replace(cfg, gamma=0.0, alpha=initial_alpha(d))
    state = fit(whitening, cfg0, C=np.ones((d, d)))
    return state.M.copy(), state


def warm_start_W(M0, whitening):
    """Express an original-coordinate demixing matrix in a whitening's coordinates."""
    return row_normalize(whitening.to_whitened(M0))


def heldout_loglik(M, train_whitening, X_val, sub):
    """Average log-likelihood of validation rows under ``M``.

    Validation rows are mapped through the training whitening, so this is
    ``l(M V D; Z_val)`` with the training ``V, D``.
    """
    Z_val = apply_whitening(train_whitening, X_val)
    try:
        return log_likelihood(train_whitening.to_whitened(M), Z_val, sub)
    except SparseLingamError:
        return -np.inf


@dataclass
class CVResult:
    alpha: float
    fold_argmax: list
    paths: np.ndarray
    grid: AlphaGrid
    failures: list = field(default_factory=list)


def fold_indices(n, k, seed):
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, k)


def _cv_path(X, val_idx, grid, cfg, C, M0):
    train = np.ones(X.shape[0], dtype=bool)
    train[val_idx] = False
    wh = whiten(X[train])
    X_val = X[val_idx]
    path = np.full(len(grid), -np.inf)
    failures = []
    state = None
    W0 = warm_start_W(M0, wh) if M0 is not None else None
    for i, alpha in enumerate(grid):
        try:
            state = fit(wh, cfg.with_alpha(alpha), C=C, W0=W0, state=state)
        except SparseLingamError as exc:
            failures.append((alpha, str(exc)))
            continue
        path[i] = heldout_loglik(state.M, wh, X_val, state.sub)
    return path, failures


def _cv_path_task(args):
    return _cv_path(*args)


def lower_median(values):
    v = sorted(values)
    return v[(len(v) - 1) // 2]


def cv_select_alpha(data, grid=None, k_folds=10, cfg=None, C=None, M0=None,
                    seed=0, jobs=1):
    """Choose alpha as the median over folds of each fold's best held-out alpha.

    Each fold sweeps the grid in ascending order with warm starts. Taking the
    median of per-fold maximizers, rather than maximizing the averaged path,
    keeps one irregular fold from dominating. For even ``k_folds`` the lower
    median is used.

    Parameters
    ----------
    data : Dataset
        Standardized data.
    M0 : (d, d) array, optional
        Initial estimate used to start every fold (keeps the row order of the
        fits aligned with the adaptive weights ``C``).
    jobs : int
        Folds run in a process pool when > 1; results are reduced by fold
        index either way.
    """
    grid = grid or AlphaGrid.logspace()
    cfg = cfg or SolverConfig()
    X = data.values
    n = X.shape[0]
    if k_folds < 2 or n < 2 * k_folds:
        raise ParameterError(f"need k_folds >= 2 and N >= 2K (N={n}, K={k_folds})")
    folds = fold_indices(n, k_folds, seed)
    tasks = [(X, idx, grid, cfg, C, M0) for idx in folds]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cv_path_task, tasks))
    else:
        results = [_cv_path(*t) for t in tasks]

    paths = np.array([r[0] for r in results])
    failures = [(k, a, msg) for k, r in enumerate(results) for a, msg in r[1]]
    argmax = []
    for k, path in enumerate(paths):
        if not np.any(np.isfinite(path)):
            raise SelectionError(f"every fit failed on fold {k}: {failures}")
        argmax.append(grid.values[int(np.nanargmax(np.where(np.isfinite(path), path, -np.inf)))])
    alpha = lower_median(argmax)
    logger.info("CV per-fold argmax %s -> alpha %.4g", argmax, alpha)
    return CVResult(alpha=alpha, fold_argmax=argmax, paths=paths, grid=grid, failures=failures)


@dataclass
class EscalationResult:
    state: object
    alpha: float
    estimate: object
    cutoff_violating: bool
    trace: list


def escalate_alpha(whitening, alpha, grid, cfg=None, C=None, omega1=0.05, omega2=0.05,
                   W0=None, state=None, escalate=True):
    """Fit at ``alpha``; while the acyclification cutoff exceeds ``omega1`` move up the grid.

    Each refit warm-starts from the previous solution. If the grid runs out
    the last fit is returned with ``cutoff_violating`` set.
    """
    cfg = cfg or SolverConfig()
    values = list(grid) if grid is not None else [alpha]
    if alpha not in values:
        values = sorted(set(values) | {alpha})
    i = values.index(alpha)
    trace = []
    while True:
        a = values[i]
        state = fit(whitening, cfg.with_alpha(a), C=C, W0=W0, state=state)
        est = postprocess(state.M, omega2)
        trace.append((a, est.cutoff_applied, state.converged))
        if est.cutoff_applied <= omega1 or not escalate:
            return EscalationResult(state, a, est, est.cutoff_applied > omega1, trace)
        if i + 1 >= len(values):
            logger.warning("alpha grid exhausted with cutoff %.3g > omega1", est.cutoff_applied)
            return EscalationResult(state, a, est, True, trace)
        i += 1
