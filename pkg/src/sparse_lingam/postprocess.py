"""Turn an estimated demixing matrix into an acyclic weighted adjacency."""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import RescaleError

ZERO_DIAGONAL_COST = 1e12


@dataclass
class AdjacencyEstimate:
    """Post-processed estimate.

    ``B[j, k]`` is the effect of variable ``k`` on variable ``j``;
    ``causal_order`` lists variables parents-first.
    """

    B: np.ndarray
    causal_order: list
    cutoff_applied: float
    acyclic: bool
    truncated: bool
    permutation: np.ndarray = None
    degenerate: bool = False


def best_diagonal_permutation(M):
    """Row permutation minimizing ``sum_j 1 / |M[perm[j], j]|``.

    Solved exactly as a linear assignment problem. Returns ``(perm,
    degenerate)`` where ``M[perm]`` is the permuted matrix and ``degenerate``
    signals that some diagonal entry of ``M[perm]`` is still zero.
    """
    M = np.asarray(M, dtype=float)
    absM = np.abs(M)
    with np.errstate(divide="ignore"):
        cost = np.where(absM > 0, 1.0 / absM, ZERO_DIAGONAL_COST)
    cost = np.minimum(cost, ZERO_DIAGONAL_COST)
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(M.shape[0], dtype=int)
    perm[cols] = rows
    degenerate = bool(np.any(M[perm, np.arange(M.shape[0])] == 0))
    return perm, degenerate


def rescale_to_B(M, perm):
    """``B = I - D^-1 M[perm]`` where ``D`` is the diagonal of ``M[perm]``."""
    PM = np.asarray(M, dtype=float)[np.asarray(perm)]
    diag = np.diag(PM).copy()
    if np.any(diag == 0):
        raise RescaleError(f"zero diagonal entry at row {int(np.flatnonzero(diag == 0)[0])}")
    B = -PM / diag[:, None]
    np.fill_diagonal(B, 0.0)
    return B


def is_acyclic(B):
    """Test acyclicity by repeatedly removing a variable with no remaining parents.

    Returns ``(acyclic, order)``; ``order`` is the full causal order when
    acyclic and the partial elimination order otherwise. Among several
    parentless variables the lowest index is removed first.
    """
    A = np.asarray(B) != 0
    d = A.shape[0]
    np.fill_diagonal(A, False)
    n_parents = A.sum(axis=1)
    removed = np.zeros(d, dtype=bool)
    order = []
    for _ in range(d):
        free = np.flatnonzero((n_parents == 0) & ~removed)
        if free.size == 0:
            return False, order
        k = int(free[0])
        order.append(k)
        removed[k] = True
        n_parents -= A[:, k]
    return True, order


def prune_to_dag(B):
    """Zero the smallest nonzero entries until ``B`` is acyclic.

    Equivalent to the one-at-a-time test-and-cutoff loop (ties broken by
    lowest ``(row, col)``); since removing edges never creates a cycle the
    number of removals is found by bisection. Returns ``(B_dag, cutoff)``
    where ``cutoff`` is the largest magnitude zeroed (0 if none).
    """
    B = np.array(B, dtype=float)
    if is_acyclic(B)[0]:
        return B, 0.0
    rows, cols = np.nonzero(B)
    mags = np.abs(B[rows, cols])
    order = np.lexsort((cols, rows, mags))
    rows, cols, mags = rows[order], cols[order], mags[order]

    def pruned(k):
        out = B.copy()
        out[rows[:k], cols[:k]] = 0.0
        return out

    lo, hi = 0, rows.size  # acyclic(pruned(hi)) holds, acyclic(pruned(lo)) does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if is_acyclic(pruned(mid))[0]:
            hi = mid
        else:
            lo = mid
    return pruned(hi), float(mags[hi - 1])


def final_truncate(B, omega2):
    """Zero every entry with ``|b| < omega2``."""
    B = np.array(B, dtype=float)
    B[np.abs(B) < omega2] = 0.0
    return B


def postprocess(M, omega2=0.05):
    """Full chain: diagonal permutation, rescale, acyclification, truncation."""
    perm, degenerate = best_diagonal_permutation(M)
    if degenerate:
        # fall back to a tiny diagonal so rescaling stays finite
        M = np.array(M, dtype=float)
        idx = np.arange(M.shape[0])
        zero = M[perm, idx] == 0
        M[perm[zero], idx[zero]] = 1e-12
    B = rescale_to_B(M, perm)
    B, cutoff = prune_to_dag(B)
    B = final_truncate(B, omega2)
    acyclic, order = is_acyclic(B)
    return AdjacencyEstimate(
        B=B, causal_order=order, cutoff_applied=cutoff, acyclic=acyclic,
        truncated=omega2 > 0, permutation=perm, degenerate=degenerate,
    )
