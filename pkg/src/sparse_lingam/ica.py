"""ICA log-likelihood with two candidate source densities and its gradients.

Densities (normalization constants dropped)::

    super-Gaussian   log p(s) = -2 log cosh(s)            g(s) = -2 tanh(s)
    sub-Gaussian     log p(s) = -(s^2/2 - log cosh(s))    g(s) = -s + tanh(s)

Per-component assignments are carried as a boolean mask ``sub`` (True for the
sub-Gaussian candidate). Public functions also accept sequences of the string
tags :data:`SUPER_GAUSSIAN` / :data:`SUB_GAUSSIAN`.
"""
import warnings

import numpy as np

from .exceptions import DegenerateRowError, SingularMatrixError

SUPER_GAUSSIAN = "super_gaussian"
SUB_GAUSSIAN = "sub_gaussian"
_LOG2 = np.log(2.0)

# a best statistic below this many standard errors is indistinguishable from 0
NONIDENTIFIABLE_Z = 3.0


class NonidentifiableComponentWarning(UserWarning):
    """Neither candidate density satisfies the stability condition."""


def as_mask(kinds, d=None):
    """Normalize density assignments to a boolean ``sub`` mask."""
    if isinstance(kinds, str):
        kinds = [kinds] * (1 if d is None else d)
    arr = np.asarray(kinds)
    if arr.dtype == bool:
        mask = arr.copy()
    else:
        mask = np.empty(arr.shape, dtype=bool)
        for i, tag in enumerate(arr.ravel()):
            if tag == SUB_GAUSSIAN:
                mask.flat[i] = True
            elif tag == SUPER_GAUSSIAN:
                mask.flat[i] = False
            else:
                raise ValueError(f"unknown density kind {tag!r}")
    if d is not None and mask.shape != (d,):
        raise ValueError(f"expected {d} density assignments, got {mask.shape}")
    return mask


def as_tags(mask):
    return [SUB_GAUSSIAN if m else SUPER_GAUSSIAN for m in np.asarray(mask, dtype=bool)]


def logcosh(x):
    return np.logaddexp(x, -x) - _LOG2


def score_function(s, kind):
    """Return ``(g(s), g'(s))`` for the chosen candidate density."""
    t = np.tanh(s)
    if kind == SUPER_GAUSSIAN:
        return -2.0 * t, -2.0 * (1.0 - t * t)
    if kind == SUB_GAUSSIAN:
        return -s + t, -t * t
    raise ValueError(f"unknown density kind {kind!r}")


def _coefficients(sub):
    # g = a * tanh(y) + b * y ;  log p = c * logcosh(y) + e * y^2
    a = np.where(sub, 1.0, -2.0)
    b = np.where(sub, -1.0, 0.0)
    e = np.where(sub, -0.5, 0.0)
    return a, b, a, e


def scores(Y, sub):
    """Columnwise score ``g_j(Y[:, j])``."""
    a, b, _, _ = _coefficients(sub)
    return np.tanh(Y) * a + Y * b


def log_density(Y, sub):
    _, _, c, e = _coefficients(sub)
    return logcosh(Y) * c + (Y * Y) * e


def stability_statistics(Y):
    """Empirical stability statistic ``mean(s g(s) - g'(s))`` per column.

    Returns
    -------
    stats : (2, d) ndarray
        Row 0 for the super-Gaussian candidate, row 1 for the sub-Gaussian one.
    stderr : (2, d) ndarray
        Standard errors of the means.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] == 1:
        Y = Y.T
    n = Y.shape[0]
    t = np.tanh(Y)
    sech2 = 1.0 - t * t
    st = Y * t
    terms_super = -2.0 * st + 2.0 * sech2
    terms_sub = -Y * Y + st + t * t
    stats = np.stack([terms_super.mean(axis=0), terms_sub.mean(axis=0)])
    stderr = np.stack([terms_super.std(axis=0), terms_sub.std(axis=0)]) / np.sqrt(n)
    return stats, stderr


def select_densities(Y):
    """Vectorized density selection for every column of ``Y``.

    Returns the ``sub`` mask and a boolean array flagging columns for which
    neither candidate is reliably stable.
    """
    stats, stderr = stability_statistics(Y)
    # ties go to the super-Gaussian candidate
    sub = stats[1] > stats[0]
    best = np.where(sub, stats[1], stats[0])
    best_se = np.where(sub, stderr[1], stderr[0])
    flagged = best <= NONIDENTIFIABLE_Z * best_se
    return sub, flagged


def select_density(component_samples):
    """Pick the candidate density whose stability statistic is positive.

    If both are positive the larger one wins. When the winning statistic is
    not distinguishable from zero (Gaussian-like samples) a
    :class:`NonidentifiableComponentWarning` is emitted and the larger one is
    still returned.
    """
    y = np.asarray(component_samples, dtype=float).reshape(-1, 1)
    sub, flagged = select_densities(y)
    if flagged[0]:
        warnings.warn(
            "component is close to Gaussian; density selection is unreliable",
            NonidentifiableComponentWarning,
            stacklevel=2,
        )
    return SUB_GAUSSIAN if sub[0] else SUPER_GAUSSIAN


def _logabsdet(W):
    sign, logdet = np.linalg.slogdet(W)
    if sign == 0 or logdet < np.log(1e-300):
        raise SingularMatrixError("W is singular")
    return logdet


def log_likelihood(W, Z, kinds):
    """Average ICA log-likelihood per sample of whitened data ``Z``."""
    W = np.asarray(W, dtype=float)
    sub = as_mask(kinds, W.shape[0])
    logdet = _logabsdet(W)
    Y = Z @ W.T
    return log_density(Y, sub).sum() / Z.shape[0] + logdet


def grad_negloglik(W, Z, kinds):
    """Euclidean gradient of the negative log-likelihood with respect to ``W``."""
    W = np.asarray(W, dtype=float)
    sub = as_mask(kinds, W.shape[0])
    _logabsdet(W)
    Y = Z @ W.T
    G = scores(Y, sub)
    return -(G.T @ Z) / Z.shape[0] - np.linalg.inv(W).T


def natural_gradient(W, Z, kinds, P, M, U, unmix, lam, alpha, rho):
    """Natural gradient of the augmented Lagrangian in ``W``.

    This is the Euclidean gradient right-multiplied by ``W^T W``::

        -(G + I) W + lam (1 - alpha) (W - P) W^T W
            + (U + rho (W A - M)) A^T W^T W

    with ``G = (1/N) sum_i g(y_i) y_i^T`` and ``A = D^-1 V^T`` (``unmix``).
    """
    W = np.asarray(W, dtype=float)
    d = W.shape[0]
    sub = as_mask(kinds, d)
    Y = Z @ W.T
    G = scores(Y, sub).T @ Y / Z.shape[0]
    WtW = W.T @ W
    out = -(G + np.eye(d)) @ W
    if lam * (1.0 - alpha) != 0.0:
        out += lam * (1.0 - alpha) * (W - P) @ WtW
    aug = U + rho * (W @ unmix - M)
    out += aug @ unmix.T @ WtW
    return out


def tangent_project(W, delta):
    """Remove from each row of ``delta`` its component along the matching row of ``W``.

    The result satisfies ``diag(W @ result.T) == 0`` so a small step stays on
    the unit-row-norm manifold to first order.
    """
    W = np.asarray(W, dtype=float)
    delta = np.asarray(delta, dtype=float)
    coef = np.einsum("ij,ij->i", W, delta) / np.einsum("ij,ij->i", W, W)
    return delta - coef[:, None] * W


def row_normalize(W):
    W = np.asarray(W, dtype=float)
    norms = np.sqrt(np.einsum("ij,ij->i", W, W))
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        bad = int(np.flatnonzero((norms == 0) | ~np.isfinite(norms))[0])
        raise DegenerateRowError(f"row {bad} has zero or non-finite norm")
    return W / norms[:, None]
