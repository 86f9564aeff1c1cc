"""
Matrix RPCA Baselines

Purpose:
Robust PCA on a matricization of the tensor, the comparison point that
ignores higher-order structure.

Solvers:
- `rpca_admm`: min ||L||_* + lam ||S||_1 s.t. L + S = M, by an augmented
  Lagrangian splitting (svt step, shrink step, dual ascent) stopped once
  ||L + S - M||_F <= eps.
- `variational_rpca`: min max(||L||_*, lam ||S||_1) s.t. 1/2 ||L + S - M||_F^2 <= eps,
  solved by Newton root finding on the level-set value function, each level
  solved by accelerated projected gradient over the two norm balls.
- `lagrangian_rpca`: the penalized problem
  1/2 ||X + S - M||^2 + lambda_x ||X||_* + lambda_s ||S||_1, by accelerated
  proximal gradient on the Huber-smoothed loss.
"""

import logging

import numpy as np
from scipy import linalg

from config.settings import (
    LEVEL_SET_INNER_ITERS,
    LEVEL_SET_INNER_TOL,
    LEVEL_SET_MAX_OUTER,
    MATRIX_RPCA_EPS,
    PROX_GRAD_MAX_ITERS,
    PROX_GRAD_TOL,
)
from src.baselines.admm import AdmmConfig, BaselineResult, balance_penalty
from src.solver.objective import phi_eval, shrink
from src.tensor_core.dense import fold, matricize

logger = logging.getLogger(__name__)


def svt(m, tau):
    """Singular value thresholding: the proximal map of tau ||.||_*."""
    if tau < 0:
        raise ValueError("svt threshold must be nonnegative.")
    u, s, vt = linalg.svd(np.asarray(m, dtype=float), full_matrices=False)
    return (u * np.maximum(s - tau, 0.0)) @ vt


def nuclear_norm(m):
    return float(np.sum(linalg.svdvals(np.asarray(m, dtype=float))))


def project_l1_ball(x, radius):
    x = np.asarray(x, dtype=float)
    if np.isinf(radius):
        return x.copy()
    if radius <= 0:
        return np.zeros_like(x)
    mags = np.abs(x).ravel()
    if mags.sum() <= radius:
        return x.copy()
    u = np.sort(mags)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, u.size + 1)
    last = np.nonzero(u * j > css - radius)[0][-1]
    theta = (css[last] - radius) / (last + 1)
    return np.sign(x) * np.maximum(np.abs(x) - theta, 0.0)


def project_nuclear_ball(m, radius):
    u, s, vt = linalg.svd(np.asarray(m, dtype=float), full_matrices=False)
    return (u * project_l1_ball(s, radius)) @ vt


def rpca_admm(m, lam, eps=MATRIX_RPCA_EPS, cfg=None):
    cfg = cfg or AdmmConfig()
    m = np.asarray(m, dtype=float)
    if not lam > 0:
        raise ValueError("RPCA lambda must be positive.")

    low = np.zeros_like(m)
    sparse = np.zeros_like(m)
    dual = np.zeros_like(m)
    rho = cfg.rho
    scale = max(1.0, float(np.linalg.norm(m)))
    primal_res = dual_res = float("inf")
    converged = False

    it = 0
    for it in range(1, cfg.max_iters + 1):
        low = svt(m - sparse + dual, 1.0 / rho)
        previous = sparse
        sparse = shrink(m - low + dual, lam / rho)
        residual = m - low - sparse
        dual = dual + residual

        primal_res = float(np.linalg.norm(residual))
        dual_res = rho * float(np.linalg.norm(sparse - previous))
        if primal_res <= eps and dual_res <= cfg.dual_tol * scale:
            converged = True
            break
        new_rho = balance_penalty(rho, primal_res, dual_res, cfg)
        dual *= rho / new_rho
        rho = new_rho

    if not converged:
        logger.warning("Matrix RPCA stopped after %d iterations (primal %.2e, dual %.2e)", it, primal_res, dual_res)
    return BaselineResult(low, sparse, it, converged, primal_res, dual_res, method="matrix")


def _level_set_inner(m, tau, lam, low, sparse, iters, tol):
    """Minimize 1/2 ||L + S - M||^2 over ||L||_* <= tau, lam ||S||_1 <= tau."""
    y_low, y_sparse = low, sparse
    t = 1.0
    for _ in range(iters):
        residual = y_low + y_sparse - m
        new_low = project_nuclear_ball(y_low - 0.5 * residual, tau)
        new_sparse = project_l1_ball(y_sparse - 0.5 * residual, tau / lam)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        momentum = (t - 1.0) / t_next
        y_low = new_low + momentum * (new_low - low)
        y_sparse = new_sparse + momentum * (new_sparse - sparse)
        change = np.sqrt(np.sum((new_low - low) ** 2) + np.sum((new_sparse - sparse) ** 2))
        low, sparse, t = new_low, new_sparse, t_next
        if change <= tol * max(1.0, float(np.linalg.norm(low))):
            break
    return low, sparse


def variational_rpca(m, lam, eps=MATRIX_RPCA_EPS, max_outer=LEVEL_SET_MAX_OUTER,
                     inner_iters=LEVEL_SET_INNER_ITERS, inner_tol=LEVEL_SET_INNER_TOL):
    m = np.asarray(m, dtype=float)
    if not lam > 0:
        raise ValueError("RPCA lambda must be positive.")

    low = np.zeros_like(m)
    sparse = np.zeros_like(m)
    tau = 0.0
    value = 0.5 * float(np.sum(m ** 2))
    converged = value <= eps
    outer = 0
    while not converged and outer < max_outer:
        outer += 1
        residual = m - low - sparse
        slope = linalg.norm(residual, 2) + (np.max(np.abs(residual)) / lam if np.isfinite(lam) else 0.0)
        if slope == 0.0:
            break
        step = (value - eps) / slope
        tau += step
        low, sparse = _level_set_inner(m, tau, lam, low, sparse, inner_iters, inner_tol)
        value = 0.5 * float(np.sum((m - low - sparse) ** 2))
        logger.debug("Level set %d: tau=%.6e value=%.3e", outer, tau, value)
        converged = value <= eps
        if step <= 1e-12 * max(tau, 1.0):
            break

    if not converged:
        logger.warning("Variational RPCA stopped after %d level sets (value %.2e > %.2e)", outer, value, eps)
    primal = float(np.sqrt(2.0 * value))
    return BaselineResult(low, sparse, outer, converged, primal, 0.0, method="matrix")


def default_lambda(z, mode, truth=None):
    """||X_(k)||_* / ||S_(k)||_1 from a known split, else 1 / sqrt(max matricized dim)."""
    if truth is not None:
        x_true, s_true = truth
        l1 = float(np.sum(np.abs(s_true)))
        if l1 == 0.0:
            return float("inf")
        return nuclear_norm(matricize(x_true, mode)) / l1
    shape = matricize(z, mode).shape
    return 1.0 / np.sqrt(max(shape))


def matrix_rpca(z, mode=1, lam=None, eps=MATRIX_RPCA_EPS, cfg=None, truth=None, method="alm"):
    z = np.asarray(z, dtype=float)
    if lam is None:
        lam = default_lambda(z, mode, truth)
    m = matricize(z, mode)
    if method == "alm":
        result = rpca_admm(m, lam, eps, cfg)
    elif method == "variational":
        result = variational_rpca(m, lam, eps)
    else:
        raise ValueError(f"Unknown matrix RPCA method '{method}' (expected 'alm' or 'variational').")
    result.lowrank = fold(result.lowrank, mode, z.shape)
    result.sparse = fold(result.sparse, mode, z.shape)
    return result


def lagrangian_rpca(m, lambda_x, lambda_s, max_iters=PROX_GRAD_MAX_ITERS, tol=PROX_GRAD_TOL):
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("lagrangian_rpca works on matrices.")
    low = np.zeros_like(m)
    y = low
    t = 1.0
    it = 0
    converged = False
    for it in range(1, max_iters + 1):
        grad = y + shrink(m - y, lambda_s) - m
        new_low = svt(y - grad, lambda_x)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = new_low + (t - 1.0) / t_next * (new_low - low)
        change = float(np.linalg.norm(new_low - low))
        low, t = new_low, t_next
        if change <= tol * max(1.0, float(np.linalg.norm(low))):
            converged = True
            break

    value, sparse = phi_eval(low, m, lambda_s)
    objective = lambda_x * nuclear_norm(low) + value
    return BaselineResult(low, sparse, it, converged, float(np.linalg.norm(low + sparse - m)), 0.0,
                          method="lagrangian", objective=objective)
