"""Independent reference implementations used as test oracles."""
import itertools

import numpy as np

from sparse_lingam.ica import SUB_GAUSSIAN, SUPER_GAUSSIAN


def random_instance(d, n, seed):
    """Well-conditioned random ``W``, mixed non-Gaussian ``Z`` and density tags."""
    rng = np.random.default_rng(seed)
    W = np.eye(d) + 0.3 * rng.normal(size=(d, d))
    Z = np.column_stack([
        rng.laplace(size=n) if j % 2 == 0 else rng.uniform(-1.7, 1.7, size=n)
        for j in range(d)
    ])
    kinds = [SUPER_GAUSSIAN if j % 2 == 0 else SUB_GAUSSIAN for j in range(d)]
    return W, Z, kinds


def central_diff(f, X, h=1e-6):
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (f(X + E) - f(X - E)) / (2 * h)
    return G


def loglik_oracle(W, Z, kinds):
    Y = Z @ W.T
    total = 0.0
    for j, kind in enumerate(kinds):
        lc = np.log(np.cosh(Y[:, j]))
        total += np.sum(-2 * lc) if kind == SUPER_GAUSSIAN else np.sum(lc - Y[:, j] ** 2 / 2)
    return total / Z.shape[0] + np.log(abs(np.linalg.det(W)))


def augmented_lagrangian_oracle(W, M, U, P, Z, A, kinds, C, lam, alpha, rho):
    R = W @ A - M
    return (
        -loglik_oracle(W, Z, kinds)
        + lam * (1 - alpha) / 2 * np.sum((P.T @ W - np.eye(W.shape[0])) ** 2)
        + lam * alpha * np.sum(C * np.abs(M))
        + np.sum(U * R)
        + rho / 2 * np.sum(R * R)
    )


def brute_force_assignment(M):
    """Row permutation ``perm`` (``M[perm]``) minimizing sum of 1/|diag|, by enumeration."""
    d = M.shape[0]
    absM = np.abs(M)
    with np.errstate(divide="ignore"):
        cost = np.where(absM > 0, 1.0 / absM, 1e12)
    perms = np.array(list(itertools.permutations(range(d))))
    totals = cost[perms, np.arange(d)].sum(axis=1)
    return perms[np.argmin(totals)], totals.min()


def dfs_has_cycle(B):
    """Cycle detection by colored depth-first search on edges k -> j for B[j, k] != 0."""
    d = B.shape[0]
    children = [np.flatnonzero(B[:, k]) for k in range(d)]
    color = [0] * d

    def visit(u):
        color[u] = 1
        for v in children[u]:
            if color[v] == 1 or (color[v] == 0 and visit(v)):
                return True
        color[u] = 2
        return False

    return any(color[u] == 0 and visit(u) for u in range(d))


def soft_threshold_scalar(x, t):
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def orthogonal_grid_2x2(n_angles=360):
    """Rotations and reflections of the plane at ``n_angles`` evenly spaced angles."""
    out = []
    for th in np.linspace(0, 2 * np.pi, n_angles, endpoint=False):
        c, s = np.cos(th), np.sin(th)
        out.append(np.array([[c, -s], [s, c]]))
        out.append(np.array([[c, s], [s, -c]]))
    return out
