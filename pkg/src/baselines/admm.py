"""
Shared plumbing for the splitting-method baselines: the config object, the
result record and residual-balancing penalty updates.
"""

from dataclasses import dataclass

import numpy as np

from config.settings import (
    ADMM_BALANCE_FACTOR,
    ADMM_BALANCE_RATIO,
    ADMM_DUAL_TOL,
    ADMM_MAX_ITERS,
    ADMM_PRIMAL_TOL,
    ADMM_RHO,
)


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = ADMM_RHO
    max_iters: int = ADMM_MAX_ITERS
    primal_tol: float = ADMM_PRIMAL_TOL
    dual_tol: float = ADMM_DUAL_TOL
    mode_weights: tuple | None = None
    lambda_s: float = 1.0
    balance_ratio: float = ADMM_BALANCE_RATIO
    balance_factor: float = ADMM_BALANCE_FACTOR

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("ADMM penalty rho must be positive.")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive.")
        if self.primal_tol <= 0 or self.dual_tol <= 0:
            raise ValueError("ADMM tolerances must be positive.")
        if self.lambda_s <= 0:
            raise ValueError("lambda_s must be positive.")
        if self.mode_weights is not None and any(w <= 0 for w in self.mode_weights):
            raise ValueError("Nuclear-norm mode weights must be positive.")
        if self.balance_ratio <= 1 or self.balance_factor <= 1:
            raise ValueError("Residual balancing needs ratio and factor above 1.")


@dataclass(eq=False)
class BaselineResult:
    lowrank: np.ndarray
    sparse: np.ndarray
    iterations: int
    converged: bool
    primal_residual: float
    dual_residual: float
    method: str = ""
    objective: float = float("nan")

    def __iter__(self):
        yield self.lowrank
        yield self.sparse

    def feasibility(self, z):
        return float(np.linalg.norm(self.lowrank + self.sparse - np.asarray(z, dtype=float)))


def balance_penalty(rho, primal, dual, cfg):
    """Residual balancing: grow rho when the primal residual lags, shrink it when the dual lags."""
    if primal > cfg.balance_ratio * dual:
        return rho * cfg.balance_factor
    if dual > cfg.balance_ratio * primal:
        return rho / cfg.balance_factor
    return rho
