"""
Dimensionality reduction of the third moment before decomposition.

Two maps built from the top singular vectors of M2:

- whitening W = S^(-1/2) U^T (k x d): W M2 W^T = I_k, orthogonalizes the
  topic directions, ill-conditioned when M2 is.
- reduction Q = U^T restricted to the top k' vectors: orthonormal rows,
  condition number 1, inverse map Q^T.

`oversample_k` picks a reduced dimension k' > k large enough for the
recovery guarantee to cover k topics.
"""

import logging

import numpy as np
from scipy import linalg

from config.settings import BASIS_TOL
from src.tensor_core.dense import mode_multiply
from src.tensor_core.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


def _top_singular(m2, k):
    m2 = np.asarray(m2, dtype=float)
    if m2.ndim != 2 or m2.shape[0] != m2.shape[1]:
        raise DimensionMismatchError(f"Second moment must be square, got {m2.shape}.")
    scale = max(1.0, float(np.abs(m2).max(initial=0.0)))
    if np.abs(m2 - m2.T).max(initial=0.0) > 1e-8 * scale:
        raise ValueError("Second moment must be symmetric.")
    if not 1 <= k <= m2.shape[0]:
        raise ValueError(f"Reduced dimension must lie in 1..{m2.shape[0]}, got {k}.")
    u, s, _ = linalg.svd(m2)
    return u[:, :k], s[:k], s


def whitening_matrix(m2, k):
    u, s, spectrum = _top_singular(m2, k)
    if s[-1] <= BASIS_TOL * max(spectrum[0], 1e-300):
        raise ValueError(f"Second moment has rank below {k}; cannot whiten.")
    w = (u / np.sqrt(s)).T
    logger.debug("Whitening condition number %.3e", np.sqrt(s[0] / s[-1]))
    return w


def reduction_matrix(m2, k_prime):
    """Top k_prime singular vectors as rows, each signed to a nonnegative sum."""
    u, _, _ = _top_singular(m2, k_prime)
    signs = np.where(u.sum(axis=0) < 0, -1.0, 1.0)
    return (u * signs).T


def reduce_m3(m3, q):
    m3 = np.asarray(m3, dtype=float)
    q = np.asarray(q, dtype=float)
    if m3.ndim != 3 or len(set(m3.shape)) != 1:
        raise DimensionMismatchError(f"Third moment must be a cubic 3-way tensor, got {m3.shape}.")
    if q.ndim != 2 or q.shape[1] != m3.shape[0]:
        raise DimensionMismatchError(f"Reduction map {q.shape} does not act on vocabulary {m3.shape[0]}.")
    return mode_multiply(m3, q, q, q)


def oversample_condition(k_prime, m, mu0, alpha0, rho_r):
    """Largest topic count the reduced dimension k_prime supports, or 0 when n - m <= 1."""
    slack = k_prime ** 3 - m
    if slack <= 1:
        return 0.0
    return rho_r * np.sqrt(slack / (3.0 * k_prime * np.log(slack) * alpha0 ** 4 * mu0 ** 2))


def oversample_k(k_topics, m, mu0, alpha0, rho_r, max_dim):
    """Smallest k' >= k_topics with k_topics <= oversample_condition(k')."""
    if min(k_topics, mu0, alpha0, rho_r, max_dim) <= 0 or m < 0:
        raise ValueError("Oversampling inputs must be positive (m nonnegative).")
    for k_prime in range(int(k_topics), int(max_dim) + 1):
        if k_topics <= oversample_condition(k_prime, m, mu0, alpha0, rho_r):
            logger.info("Oversampling %d topics to reduced dimension %d", k_topics, k_prime)
            return k_prime
    raise ValueError(f"No reduced dimension up to {max_dim} supports {k_topics} topics.")
