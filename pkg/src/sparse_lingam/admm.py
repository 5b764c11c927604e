"""ADMM solver for the sparse, orthogonality-penalized ICA objective.

The problem in ADMM form is::

    min_{W in N, M, P}  -l(W; Z) + lam (1-alpha)/2 ||P^T W - I||_F^2
                        + lam alpha sum_jk C_jk |M_jk|
    s.t.  W D^-1 V^T = M,   P^T P = I

where ``N`` is the set of nonsingular matrices with unit-norm rows. One outer
iteration updates ``P`` (Procrustes), then ``W`` (a few projected natural
gradient steps), then ``M`` (soft-thresholding), then the dual ``U``.
"""
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import DivergenceError, ParameterError
from .ica import (
    _coefficients,
    as_mask,
    log_density,
    natural_gradient,
    row_normalize,
    select_densities,
    tangent_project,
)

logger = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "SolverState",
    "soft_threshold",
    "update_P",
    "update_W",
    "update_M",
    "update_U",
    "augmented_lagrangian",
    "grad_augmented_lagrangian",
    "random_orthogonal",
    "init_state",
    "fit",
]


@dataclass(frozen=True)
class SolverConfig:
    lam: float = 0.1
    alpha: float = 0.0
    gamma: float = 1.0
    rho: float = 1.0
    eta: float = 0.005
    u_max: int = 10
    tol_primal: float = 1e-4
    tol_w: float = 1e-5
    max_outer: int = 2000
    # densities are re-selected every `density_interval` outer iterations and
    # frozen after they have changed `density_updates` times
    density_updates: int = 5
    density_interval: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ParameterError("lam must be nonnegative")
        if not 0.0 <= self.alpha <= 1.0:
            raise ParameterError("alpha must lie in [0, 1]")
        if self.gamma < 0:
            raise ParameterError("gamma must be nonnegative")
        for name in ("rho", "eta", "tol_primal", "tol_w"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        for name in ("u_max", "max_outer"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be a positive integer")

    def with_alpha(self, alpha):
        return replace(self, alpha=float(alpha))


@dataclass
class SolverState:
    W: np.ndarray
    M: np.ndarray
    P: np.ndarray
    U: np.ndarray
    sub: np.ndarray
    C: np.ndarray = None
    n_outer: int = 0
    n_inner: int = 0
    converged: bool = False
    flagged_components: np.ndarray = None
    history: list = field(default_factory=list)

    def copy(self):
        return SolverState(
            W=self.W.copy(), M=self.M.copy(), P=self.P.copy(), U=self.U.copy(),
            sub=self.sub.copy(), C=None if self.C is None else self.C.copy(),
            n_outer=self.n_outer, n_inner=self.n_inner, converged=self.converged,
            flagged_components=None if self.flagged_components is None
            else self.flagged_components.copy(),
            history=list(self.history),
        )

    def primal_residual(self, unmix):
        return float(np.max(np.abs(self.W @ unmix - self.M)))


def soft_threshold(X, thresh):
    """Entrywise soft-thresholding; entries with ``|x| <= thresh`` become exactly 0."""
    X = np.asarray(X, dtype=float)
    out = np.sign(X) * np.maximum(np.abs(X) - thresh, 0.0)
    out[np.abs(X) <= thresh] = 0.0
    return out


def update_P(W):
    """Orthogonal polar factor of ``W``, the minimizer of ``||P^T W - I||_F``."""
    W = np.asarray(W, dtype=float)
    if not np.all(np.isfinite(W)):
        raise np.linalg.LinAlgError("non-finite input to update_P")
    Uw, _, Vwt = np.linalg.svd(W)
    return Uw @ Vwt


def _weights(C, d):
    return np.ones((d, d)) if C is None else np.asarray(C, dtype=float)


def augmented_lagrangian(W, M, U, P, Z, unmix, kinds, C, lam, alpha, rho):
    """Value of the augmented Lagrangian (density constants dropped)."""
    d = W.shape[0]
    sub = as_mask(kinds, d)
    sign, logdet = np.linalg.slogdet(W)
    Y = Z @ W.T
    nll = -(log_density(Y, sub).sum() / Z.shape[0] + logdet)
    orth = 0.5 * lam * (1 - alpha) * np.sum((P.T @ W - np.eye(d)) ** 2)
    sparse = lam * alpha * np.sum(_weights(C, d) * np.abs(M))
    R = W @ unmix - M
    return nll + orth + sparse + np.sum(U * R) + 0.5 * rho * np.sum(R * R)


def grad_augmented_lagrangian(W, M, U, P, Z, unmix, kinds, lam, alpha, rho):
    """Euclidean gradient of :func:`augmented_lagrangian` with respect to ``W``."""
    d = W.shape[0]
    sub = as_mask(kinds, d)
    Y = Z @ W.T
    a, b, _, _ = _coefficients(sub)
    G = np.tanh(Y) * a + Y * b
    grad = -(G.T @ Z) / Z.shape[0] - np.linalg.inv(W).T
    grad += lam * (1 - alpha) * P @ (P.T @ W - np.eye(d))
    grad += (U + rho * (W @ unmix - M)) @ unmix.T
    return grad


def random_orthogonal(d, seed):
    """Sign-normalized Q factor of a seeded standard-normal matrix."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def init_state(whitening, W0=None, seed=0, sub=None, C=None):
    """Feasible starting point: ``M = W A``, ``U = 0``, ``P`` the polar factor of ``W``."""
    d = whitening.n_vars
    W = random_orthogonal(d, seed) if W0 is None else row_normalize(W0)
    unmix = whitening.unmix
    if sub is None:
        sub, flagged = select_densities(whitening.Z @ W.T)
    else:
        sub, flagged = as_mask(sub, d), np.zeros(d, dtype=bool)
    return SolverState(
        W=W, M=W @ unmix, P=update_P(W), U=np.zeros((d, d)), sub=sub,
        C=None if C is None else np.asarray(C, dtype=float),
        flagged_components=flagged,
    )


class _Workspace:
    """Per-fit constants for the inner W loop.

    The linear part of the natural gradient is folded into
    ``K + W Q`` with ``Q = rho A A^T + lam (1 - alpha) I`` and
    ``K = (U - rho M) A^T - lam (1 - alpha) P`` fixed during one sweep.
    """

    def __init__(self, whitening, sub, cfg):
        Z = whitening.Z
        self.n = Z.shape[0]
        # samples along the fast axis: W @ ZT and tanh run on contiguous rows
        self.ZT = np.ascontiguousarray(Z.T)
        self.cov = Z.T @ Z / self.n
        A = whitening.unmix
        self.At = A.T.copy()
        d = A.shape[0]
        self.eye = np.eye(d)
        self.orth = cfg.lam * (1.0 - cfg.alpha)
        self.Q = cfg.rho * (A @ A.T) + self.orth * self.eye
        self.set_sub(sub)

    def set_sub(self, sub):
        a, b, _, _ = _coefficients(sub)
        self.a_n = a[:, None] / self.n
        self.b = b[:, None]
        self.has_sub = bool(np.any(sub))

    def sweep_constant(self, U, M, P, rho):
        return (U - rho * M) @ self.At - self.orth * P

    def modified_gradient(self, W, K):
        YT = W @ self.ZT
        G = self.a_n * (np.tanh(YT) @ YT.T) + self.eye
        if self.has_sub:
            G += self.b * (W @ self.cov @ W.T)
        delta = (K + W @ self.Q) @ (W.T @ W) - G @ W
        coef = np.einsum("ij,ij->i", W, delta) / np.einsum("ij,ij->i", W, W)
        delta -= coef[:, None] * W
        return delta


def update_W(state, cfg, whitening, _ws=None):
    """Projected natural-gradient descent on ``W`` for at most ``u_max`` steps.

    Stops early once a step moves no entry by more than ``tol_w``; rows are
    renormalized at the end.
    """
    ws = _ws
    if ws is None:
        ws = _Workspace(whitening, state.sub, cfg)
    K = ws.sweep_constant(state.U, state.M, state.P, cfg.rho)
    W = state.W
    steps = 0
    for _ in range(cfg.u_max):
        step = cfg.eta * ws.modified_gradient(W, K)
        W = W - step
        steps += 1
        if not np.all(np.isfinite(W)):
            raise DivergenceError(
                f"W became non-finite after {state.n_inner + steps} inner steps; "
                f"try a smaller eta than {cfg.eta}"
            )
        if np.max(np.abs(step)) < cfg.tol_w:
            break
    state.n_inner += steps
    return row_normalize(W)


def update_M(state, cfg, whitening):
    X = state.W @ whitening.unmix + state.U / cfg.rho
    C = _weights(state.C, state.W.shape[0])
    return soft_threshold(X, (cfg.lam * cfg.alpha / cfg.rho) * C)


def update_U(state, cfg, whitening):
    return state.U + cfg.rho * (state.W @ whitening.unmix - state.M)


def _objective(state, cfg, whitening):
    return augmented_lagrangian(
        state.W, state.M, state.U, state.P, whitening.Z, whitening.unmix,
        state.sub, state.C, cfg.lam, cfg.alpha, cfg.rho,
    )


def fit(whitening, cfg=None, C=None, W0=None, state=None, record_history=True):
    """Run ADMM to convergence.

    Parameters
    ----------
    whitening : Whitening
        Pre-whitened data.
    cfg : SolverConfig
    C : (d, d) array, optional
        Adaptive-lasso weights already raised to ``gamma``. Defaults to ones.
    W0 : (d, d) array, optional
        Starting demixing matrix; a seeded random orthogonal matrix otherwise.
    state : SolverState, optional
        Warm start. Its ``W, M, P, U`` and density assignments are reused,
        overriding ``W0``.

    Returns
    -------
    SolverState
        ``converged`` is False if ``max_outer`` was reached; the returned state
        is then the iterate with the smallest scaled residual seen.
    """
    cfg = cfg or SolverConfig()
    d = whitening.n_vars
    if state is None:
        state = init_state(whitening, W0=W0, seed=cfg.seed, C=C)
    else:
        state = state.copy()
        state.C = None if C is None else np.asarray(C, dtype=float)
        state.n_outer = state.n_inner = 0
        state.converged = False
        state.history = []
    if state.C is not None and state.C.shape != (d, d):
        raise ParameterError("weight matrix C has the wrong shape")

    ws = _Workspace(whitening, state.sub, cfg)
    unmix = whitening.unmix
    best, best_score = None, np.inf
    last_obj = None
    changes = 0

    def reselect():
        nonlocal changes
        if changes >= cfg.density_updates:
            return False
        sub, flagged = select_densities(whitening.Z @ state.W.T)
        state.flagged_components = flagged
        if np.array_equal(sub, state.sub):
            return False
        changes += 1
        state.sub = sub
        ws.set_sub(sub)
        return True

    for t in range(cfg.max_outer):
        if t % cfg.density_interval == 0:
            reselect()
        W_prev = state.W
        state.P = update_P(state.W)
        state.W = update_W(state, cfg, whitening, _ws=ws)
        state.M = update_M(state, cfg, whitening)
        state.U = update_U(state, cfg, whitening)
        state.n_outer = t + 1

        primal = state.primal_residual(unmix)
        dw = float(np.max(np.abs(state.W - W_prev)))
        if record_history:
            state.history.append((primal, dw))
        score = max(primal / cfg.tol_primal, dw / cfg.tol_w)
        if score < best_score:
            best_score = score
            best = (state.W, state.M, state.P, state.U, state.sub, state.flagged_components)
        if primal < cfg.tol_primal and dw < cfg.tol_w and not reselect():
            state.converged = True
            return state
        if t % 50 == 0:
            obj = _objective(state, cfg, whitening)
            if not np.isfinite(obj) or (
                last_obj is not None and obj - last_obj > 10.0 * max(abs(last_obj), 1.0)
            ):
                raise DivergenceError(
                    f"objective jumped to {obj:.4g} at outer iteration {t}; try a smaller eta"
                )
            last_obj = obj
    logger.info("ADMM did not converge in %d outer iterations", cfg.max_outer)
    state.W, state.M, state.P, state.U, state.sub, state.flagged_components = best
    state.converged = False
    return state


def natural_gradient_of_state(state, cfg, whitening):
    """Convenience wrapper evaluating the natural gradient at the current state."""
    return natural_gradient(
        state.W, whitening.Z, state.sub, state.P, state.M, state.U,
        whitening.unmix, cfg.lam, cfg.alpha, cfg.rho,
    )


def modified_gradient_of_state(state, cfg, whitening):
    return tangent_project(state.W, natural_gradient_of_state(state, cfg, whitening))
