"""
Tensor Norms

Purpose:
Elementwise norms, the Euclidean inner product, and a multi-start
estimate of the spectral norm ||T|| = max <T, u ⊗ v ⊗ w> over unit vectors.

Design choices:
- The spectral norm is NP-hard to compute; the estimate is the best value
  reached by alternating rank-one (higher-order power) iterations from
  random unit-sphere starts, so it is always a lower bound.
- Each restart is monotone: every sweep replaces one vector by the exact
  maximizer with the others fixed.
"""

import logging

import numpy as np

from config.settings import SPECTRAL_ITERS, SPECTRAL_RESTARTS, SPECTRAL_TOL
from src.tensor_core.dense import contract_except
from src.tensor_core.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


def frobenius(t):
    return float(np.sqrt(np.sum(np.square(t))))


def sum_norm(t):
    return float(np.sum(np.abs(t)))


def max_norm(t):
    t = np.asarray(t)
    if t.size == 0:
        return 0.0
    return float(np.max(np.abs(t)))


def inner(t, s):
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    if t.shape != s.shape:
        raise DimensionMismatchError(f"Inner product needs equal dims, got {t.shape} and {s.shape}.")
    return float(np.sum(t * s))


def power_iteration_rank_one(t, vectors, iters=SPECTRAL_ITERS, tol=SPECTRAL_TOL):
    """
    Alternating unit-vector maximization of <t, v_1 ⊗ ... ⊗ v_K>.

    Returns (value, vectors, history) where history holds the value after
    each full sweep.
    """
    t = np.asarray(t, dtype=float)
    vectors = [np.asarray(v, dtype=float) / np.linalg.norm(v) for v in vectors]
    value = 0.0
    history = []
    for _ in range(iters):
        for k in range(t.ndim):
            direction = contract_except(t, vectors, k)
            size = np.linalg.norm(direction)
            if size == 0.0:
                return 0.0, vectors, history + [0.0]
            vectors[k] = direction / size
        new_value = float(size)
        history.append(new_value)
        if abs(new_value - value) <= tol * max(new_value, 1e-300):
            value = new_value
            break
        value = new_value
    return value, vectors, history


def spectral_norm_estimate(t, restarts=SPECTRAL_RESTARTS, iters=SPECTRAL_ITERS, seed=None, tol=SPECTRAL_TOL):
    if restarts < 1:
        raise ValueError("Spectral norm estimation needs at least one restart.")
    t = np.asarray(t, dtype=float)
    if not np.any(t):
        return 0.0

    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        start = [rng.standard_normal(d) for d in t.shape]
        value, _, _ = power_iteration_rank_one(t, start, iters=iters, tol=tol)
        best = max(best, value)
    return best
