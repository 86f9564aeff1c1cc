"""
Higher-Order RPCA Baselines

Purpose:
Tensor RPCA through the Tucker structure of the mode unfoldings, the
comparison methods that cannot see past rank equal to the side length.

Solvers:
- `horpca_s`: min sum_i w_i ||Y_i,(i)||_* + lambda_s ||S||_1
  s.t. Y_i = X for every mode, X + S = Z. Scaled ADMM; each Y_i step is an
  svt of its own unfolding, the S step is a shrink and the X step averages.
- `horpca_c`: min ||S||_1 s.t. X + S = Z, Tucker rank of X <= (r_1, ..., r_K).
  Augmented Lagrangian with a truncated HOSVD projection in place of the
  rank constraint.

Design choices:
- Nuclear weights default to the side lengths.
- Both penalties adapt by residual balancing (see `admm.balance_penalty`).
- Stopping is relative to max(1, ||Z||_F).
"""

import logging

import numpy as np
from scipy import linalg

from src.baselines.admm import AdmmConfig, BaselineResult, balance_penalty
from src.baselines.matrix_rpca import svt
from src.solver.objective import shrink
from src.tensor_core.dense import as_tensor, fold, matricize, mode_multiply
from src.tensor_core.errors import DimensionMismatchError

logger = logging.getLogger(__name__)


def hosvd_truncate(t, ranks):
    """Project onto the leading r_i left singular vectors of every unfolding."""
    t = np.asarray(t, dtype=float)
    if len(ranks) != t.ndim:
        raise DimensionMismatchError(f"Got {len(ranks)} ranks for a {t.ndim}-way tensor.")
    projectors = []
    for mode, r in enumerate(ranks, start=1):
        if r >= t.shape[mode - 1]:
            projectors.append(None)
            continue
        u, _, _ = linalg.svd(matricize(t, mode), full_matrices=False)
        basis = u[:, :r]
        projectors.append(basis @ basis.T)
    return mode_multiply(t, *projectors)


def _mode_weights(dims, nuclear_weight, cfg):
    if cfg.mode_weights is not None:
        weights = tuple(float(w) for w in cfg.mode_weights)
    elif nuclear_weight is not None:
        weights = (float(nuclear_weight),) * len(dims)
    else:
        weights = tuple(float(d) for d in dims)
    if len(weights) != len(dims):
        raise DimensionMismatchError(f"Got {len(weights)} mode weights for a {len(dims)}-way tensor.")
    if any(w <= 0 for w in weights):
        raise ValueError("Nuclear-norm weights must be positive.")
    return weights


def horpca_s(z, nuclear_weight=None, cfg=None):
    cfg = cfg or AdmmConfig()
    z = as_tensor(z)
    dims, order = z.shape, z.ndim
    weights = _mode_weights(dims, nuclear_weight, cfg)
    scale = max(1.0, float(np.linalg.norm(z)))

    x = np.zeros_like(z)
    s = np.zeros_like(z)
    ys = [np.zeros_like(z) for _ in range(order)]
    us = [np.zeros_like(z) for _ in range(order)]
    v = np.zeros_like(z)
    rho = cfg.rho
    primal = dual = float("inf")
    converged = False

    it = 0
    for it in range(1, cfg.max_iters + 1):
        for i in range(order):
            mode = i + 1
            ys[i] = fold(svt(matricize(x - us[i], mode), weights[i] / rho), mode, dims)
        s = shrink(z - x - v, cfg.lambda_s / rho)

        previous = x
        x = (sum(y + u for y, u in zip(ys, us)) + z - s - v) / (order + 1)

        for i in range(order):
            us[i] += ys[i] - x
        v += x + s - z

        primal = float(np.sqrt(sum(np.sum((y - x) ** 2) for y in ys) + np.sum((x + s - z) ** 2)))
        dual = rho * np.sqrt(order + 1) * float(np.linalg.norm(x - previous))
        if primal <= cfg.primal_tol * scale and dual <= cfg.dual_tol * scale:
            converged = True
            break

        new_rho = balance_penalty(rho, primal, dual, cfg)
        if new_rho != rho:
            for u in us:
                u *= rho / new_rho
            v *= rho / new_rho
            rho = new_rho

    if not converged:
        logger.warning("HoRPCA-S stopped after %d iterations (primal %.2e, dual %.2e)", it, primal, dual)
    else:
        logger.debug("HoRPCA-S converged in %d iterations", it)
    return BaselineResult(x, s, it, converged, primal, dual, method="snn")


def horpca_c(z, ranks, cfg=None):
    cfg = cfg or AdmmConfig()
    z = as_tensor(z)
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != z.ndim:
        raise DimensionMismatchError(f"Got {len(ranks)} Tucker ranks for a {z.ndim}-way tensor.")
    for r, d in zip(ranks, z.shape):
        if not 1 <= r <= d:
            raise ValueError(f"Tucker ranks must lie in 1..d_i, got {ranks} for dims {z.shape}.")
    scale = max(1.0, float(np.linalg.norm(z)))

    x = hosvd_truncate(z, ranks)
    s = np.zeros_like(z)
    multiplier = np.zeros_like(z)
    rho = cfg.rho
    primal = dual = float("inf")
    converged = False

    it = 0
    for it in range(1, cfg.max_iters + 1):
        x = hosvd_truncate(z - s + multiplier / rho, ranks)
        previous = s
        s = shrink(z - x + multiplier / rho, cfg.lambda_s / rho)
        residual = z - x - s
        multiplier += rho * residual

        primal = float(np.linalg.norm(residual))
        dual = rho * float(np.linalg.norm(s - previous))
        if primal <= cfg.primal_tol * scale and dual <= cfg.dual_tol * scale:
            converged = True
            break
        rho = balance_penalty(rho, primal, dual, cfg)

    if not converged:
        logger.warning("HoRPCA-C stopped after %d iterations (primal %.2e, dual %.2e)", it, primal, dual)
    return BaselineResult(x, s, it, converged, primal, dual, method="constrained")
