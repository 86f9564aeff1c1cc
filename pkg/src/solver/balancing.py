"""
Factor balancing and the ex-post optimality certificate.

For each term r, AM-GM gives
    (1/K) sum_k ||a_r^(k)||^K >= prod_k ||a_r^(k)||
with equality when every column has norm (prod_k ||a_r^(k)||)^(1/K).
Rescaling to that norm leaves the tensor unchanged and makes the factorized
regularizer equal the atomic-norm surrogate of the decomposition.
"""

import numpy as np

from config.settings import GRAD_TOL, NUMERICAL_RANK_TOL, ZERO_COLUMN_TOL


def balance_factors(factors):
    factors = [np.asarray(f, dtype=float) for f in factors]
    order = len(factors)
    norms = np.vstack([np.linalg.norm(f, axis=0) for f in factors])
    target = np.prod(norms, axis=0) ** (1.0 / order)
    dead = target == 0.0

    balanced = []
    for k, f in enumerate(factors):
        scale = np.where(dead, 0.0, target / np.where(norms[k] > 0, norms[k], 1.0))
        balanced.append(f * scale)
    return balanced


def global_optimality_check(factors, grad_norm, zero_tol=ZERO_COLUMN_TOL, grad_tol=GRAD_TOL):
    """
    Sufficient condition for a global minimizer: the point is stationary and
    some factor column is (numerically) zero.
    """
    if not grad_norm <= grad_tol:
        return False
    norms = np.concatenate([np.linalg.norm(np.asarray(f, dtype=float), axis=0) for f in factors])
    nonzero = norms[norms > 0]
    if nonzero.size == 0:
        return True
    return bool(np.any(norms <= zero_tol * np.mean(nonzero)))


def term_weights(factors):
    return np.prod(np.vstack([np.linalg.norm(np.asarray(f, dtype=float), axis=0) for f in factors]), axis=0)


def numerical_rank(factors, tol=NUMERICAL_RANK_TOL):
    """Number of terms whose weight exceeds tol times the largest weight."""
    weights = term_weights(factors)
    if weights.size == 0 or weights.max() == 0.0:
        return 0
    return int(np.sum(weights > tol * weights.max()))
