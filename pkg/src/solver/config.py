from dataclasses import dataclass, field

import numpy as np

from config.settings import (
    GRAD_TOL,
    LAMBDA_S,
    LAMBDA_X,
    LBFGS_MEMORY,
    MAX_ITERS,
    SOLVER_THREADS,
    TENSOR_ORDER,
    ZERO_COLUMN_TOL,
)

STATUSES = ("converged", "max_iters", "line_search_failed", "diverged")


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the factorized atomic-norm RPCA solve. `rank_bound` is the number of terms R.

    `init_factors` warm-starts the solve from given factor matrices (one shared
    matrix when symmetric) instead of the seeded random draw.
    """

    rank_bound: int
    lambda_x: float = LAMBDA_X
    lambda_s: float = LAMBDA_S
    order: int = TENSOR_ORDER
    max_iters: int = MAX_ITERS
    memory: int = LBFGS_MEMORY
    grad_tol: float = GRAD_TOL
    init_scale: float | None = None
    symmetric: bool = False
    seed: int = 0
    zero_tol: float = ZERO_COLUMN_TOL
    threads: int = SOLVER_THREADS
    init_factors: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.rank_bound < 1:
            raise ValueError(f"Rank bound must be at least 1, got {self.rank_bound}.")
        if self.lambda_x < 0:
            raise ValueError("lambda_x must be nonnegative.")
        if self.lambda_s < 0:
            raise ValueError("lambda_s must be nonnegative.")
        if self.lambda_s == 0:
            raise ValueError("lambda_s = 0 lets the sparse part absorb everything; the split is unidentifiable.")
        if self.order < 2:
            raise ValueError("Tensor order must be at least 2.")
        if self.max_iters < 0 or self.memory < 1:
            raise ValueError("max_iters must be nonnegative and memory positive.")
        if self.grad_tol <= 0 or self.zero_tol <= 0:
            raise ValueError("Tolerances must be positive.")
        if self.init_scale is not None and self.init_scale < 0:
            raise ValueError("init_scale must be nonnegative.")
        if self.threads < 1:
            raise ValueError("threads must be positive.")


@dataclass(eq=False)
class SolveReport:
    factors: object
    sparse: np.ndarray
    lowrank: np.ndarray
    objective_trace: list = field(default_factory=list)
    grad_norm_trace: list = field(default_factory=list)
    final_grad_norm: float = float("nan")
    iterations: int = 0
    global_cert: bool = False
    wall_time: float = 0.0
    status: str = "max_iters"
    threads: int = SOLVER_THREADS

    @property
    def converged(self):
        return self.status == "converged"

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")
