"""
Atomic-Norm Tensor RPCA Solver

Purpose:
Split an observed tensor Z into a low-CP-rank part X and a sparse part S by
minimizing the factorized, smoothed objective over R rank-one terms with
L-BFGS.

Design choices:
- Random Gaussian initialization, default scale (||Z||_F / R)^(1/K) / sqrt(d_k)
  per mode, so the initial reconstruction has the magnitude of Z.
- The returned factors are balanced; S is recomputed from them by shrinkage.
- Non-convergence never raises: the report carries a status string and the
  last iterate.
- `global_cert` is the zero-column sufficient condition, checked after the fact.
"""

import logging
import time
from dataclasses import replace

import numpy as np

from src.solver.balancing import balance_factors, global_optimality_check
from src.solver.config import SolveReport
from src.solver.lbfgs import minimize_lbfgs
from src.solver.objective import reconstruct, shrink, symmetric_value_and_gradient, value_and_gradient
from src.tensor_core.dense import as_tensor
from src.tensor_core.errors import DimensionMismatchError
from src.tensor_core.kruskal import KruskalTensor

logger = logging.getLogger(__name__)


def _pack(factors):
    return np.concatenate([f.ravel() for f in factors])


def _unpack(vector, dims, rank):
    factors = []
    offset = 0
    for d in dims:
        factors.append(vector[offset:offset + d * rank].reshape(d, rank))
        offset += d * rank
    return factors


def _init_scale(z, cfg, d):
    if cfg.init_scale is not None:
        return cfg.init_scale
    size = float(np.linalg.norm(z))
    return (size / cfg.rank_bound) ** (1.0 / z.ndim) / np.sqrt(d)


def initial_factors(z, cfg):
    dims = z.shape[:1] if cfg.symmetric else z.shape
    if cfg.init_factors is not None:
        factors = [np.array(f, dtype=float) for f in cfg.init_factors]
        shapes = tuple(f.shape for f in factors)
        if shapes != tuple((d, cfg.rank_bound) for d in dims):
            raise DimensionMismatchError(
                f"Initial factor shapes {shapes} do not fit dims {dims} with R={cfg.rank_bound}."
            )
        return factors
    rng = np.random.default_rng(cfg.seed)
    return [_init_scale(z, cfg, d) * rng.standard_normal((d, cfg.rank_bound)) for d in dims]


def _check_order(z, cfg):
    if z.ndim != cfg.order:
        raise DimensionMismatchError(f"Config order {cfg.order} does not match a {z.ndim}-way tensor.")


def _finish(z, factors, result, cfg, started):
    balanced = balance_factors(factors)
    lowrank = reconstruct(balanced)
    sparse = shrink(z - lowrank, cfg.lambda_s)
    grad_norm = float(result.g_trace[-1])
    report = SolveReport(
        factors=KruskalTensor(tuple(balanced)),
        sparse=sparse,
        lowrank=lowrank,
        objective_trace=list(result.f_trace),
        grad_norm_trace=list(result.g_trace),
        final_grad_norm=grad_norm,
        iterations=result.iterations,
        global_cert=global_optimality_check(balanced, grad_norm, cfg.zero_tol, cfg.grad_tol),
        wall_time=time.perf_counter() - started,
        status=result.status,
        threads=cfg.threads,
    )
    log = logger.info if report.status in ("converged", "max_iters") else logger.warning
    log(
        "Solve finished: status=%s iterations=%d objective=%.6e |grad|=%.3e global_cert=%s",
        report.status, report.iterations, report.objective, grad_norm, report.global_cert,
    )
    return report


def lbfgs_solve(z, cfg):
    z = as_tensor(z)
    _check_order(z, cfg)
    if cfg.symmetric:
        return symmetric_solve(z, cfg)

    started = time.perf_counter()
    dims, rank = z.shape, cfg.rank_bound

    def fun_and_grad(vector):
        value, grads, _ = value_and_gradient(_unpack(vector, dims, rank), z, cfg)
        return value, _pack(grads)

    logger.debug("Solving %s tensor with rank bound %d", dims, rank)
    result = minimize_lbfgs(
        fun_and_grad, _pack(initial_factors(z, cfg)),
        max_iters=cfg.max_iters, memory=cfg.memory, grad_tol=cfg.grad_tol,
    )
    return _finish(z, _unpack(result.x, dims, rank), result, cfg, started)


def symmetric_solve(z, cfg):
    """Solve with one shared factor per term, a_r^(1) = ... = a_r^(K)."""
    z = as_tensor(z)
    _check_order(z, cfg)
    if len(set(z.shape)) != 1:
        raise DimensionMismatchError(f"Symmetric solve needs a cubic tensor, got dims {z.shape}.")
    if not cfg.symmetric:
        cfg = replace(cfg, symmetric=True)

    started = time.perf_counter()
    d, rank = z.shape[0], cfg.rank_bound

    def fun_and_grad(vector):
        value, grad, _ = symmetric_value_and_gradient(vector.reshape(d, rank), z, cfg)
        return value, grad.ravel()

    result = minimize_lbfgs(
        fun_and_grad, initial_factors(z, cfg)[0].ravel(),
        max_iters=cfg.max_iters, memory=cfg.memory, grad_tol=cfg.grad_tol,
    )
    shared = result.x.reshape(d, rank)
    return _finish(z, [shared] * z.ndim, result, cfg, started)
