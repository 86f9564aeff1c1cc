"""
Phase-Transition Experiment

Purpose:
Sweep (rank, sparsity) cells, run seeded trials through one recovery method
and record which trials recover the low-rank part.

Methods:
- atomic:       factorized atomic-norm solver, rank bound R + RANK_BOUND_SLACK
- matrix:       matrix RPCA on the mode-1 unfolding (variational form,
                lambda from the true split)
- snn:          HoRPCA-S, nuclear weights equal to the side lengths
- constrained:  HoRPCA-C with Tucker ranks min(R + CONSTRAINED_RANK_SLACK, d_k)

Design choices:
- One row per trial; recovery means rel_error < RECOVERY_TOLERANCE.
- A trial that raises or returns non-finite output is a non-recovery with
  rel_error = FAILED_TRIAL_ERROR. A diverged atomic solve counts the same
  way. The grid always completes.
- Tasks are listed in grid order and results collected in that order, so the
  table does not depend on the worker count.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from config.settings import (
    CONSTRAINED_RANK_SLACK,
    DEFAULT_DIMS,
    FAILED_TRIAL_ERROR,
    LAMBDA_S,
    LAMBDA_X,
    LBFGS_MEMORY,
    MAX_ITERS,
    RANK_BOUND_SLACK,
    RECOVERY_TOLERANCE,
    SOLVER_THREADS,
    TRIALS_PER_CELL,
)
from src.baselines.horpca import horpca_c, horpca_s
from src.baselines.matrix_rpca import matrix_rpca
from src.harness.metrics import rel_error
from src.harness.synth import SynthSpec, check_tucker_rank, gen_instance, sparsity_to_support_size, trial_seed
from src.solver.atomic import lbfgs_solve
from src.solver.config import SolverConfig

logger = logging.getLogger(__name__)

METHODS = ("atomic", "matrix", "snn", "constrained")
TRIAL_COLUMNS = [
    "method", "rank", "sparsity_fraction", "trial", "seed",
    "rel_error", "recovered", "iterations", "seconds",
]


def _recover(method, instance, rank, seed):
    z = instance.observed
    if method == "atomic":
        cfg = SolverConfig(
            rank_bound=rank + RANK_BOUND_SLACK, lambda_x=LAMBDA_X, lambda_s=LAMBDA_S,
            memory=LBFGS_MEMORY, max_iters=MAX_ITERS, seed=seed, order=z.ndim,
        )
        report = lbfgs_solve(z, cfg)
        if report.status == "diverged":
            raise FloatingPointError(f"solver diverged after {report.iterations} iterations")
        return report.lowrank, report.iterations
    if method == "matrix":
        result = matrix_rpca(z, mode=1, truth=(instance.lowrank, instance.sparse), method="variational")
    elif method == "snn":
        result = horpca_s(z)
    elif method == "constrained":
        ranks = tuple(min(rank + CONSTRAINED_RANK_SLACK, d) for d in z.shape)
        result = horpca_c(z, ranks)
    else:
        raise ValueError(f"Unknown method '{method}' (expected one of {', '.join(METHODS)}).")
    return result.lowrank, result.iterations


def run_trial(method, rank, sparsity, trial, seed, dims=DEFAULT_DIMS):
    """One seeded instance through one method; returns a trial row."""
    started = time.perf_counter()
    error, iterations = FAILED_TRIAL_ERROR, 0
    try:
        spec = SynthSpec(r_true=rank, m=sparsity_to_support_size(sparsity, dims), dims=dims, seed=seed)
        instance = gen_instance(spec)
        check_tucker_rank(instance)
        estimate, iterations = _recover(method, instance, rank, seed)
        if np.all(np.isfinite(estimate)):
            error = rel_error(estimate, instance.lowrank)
    except Exception as exc:
        logger.warning("Trial %s R=%d s=%.3f #%d failed: %s", method, rank, sparsity, trial, exc)

    return {
        "method": method,
        "rank": rank,
        "sparsity_fraction": sparsity,
        "trial": trial,
        "seed": seed,
        "rel_error": error,
        "recovered": bool(error < RECOVERY_TOLERANCE),
        "iterations": int(iterations),
        "seconds": time.perf_counter() - started,
    }


def _run_task(task):
    return run_trial(*task)


@dataclass(eq=False)
class PhaseGrid:
    method: str
    ranks: list
    sparsities: list
    trials: int
    records: pd.DataFrame

    def summary(self):
        grouped = self.records.groupby(["rank", "sparsity_fraction"], sort=False)
        frame = grouped.agg(
            trials=("trial", "size"),
            recoveries=("recovered", "sum"),
            failures=("rel_error", lambda e: int(np.sum(~np.isfinite(e)))),
            mean_error=("rel_error", lambda e: float(np.mean(e[np.isfinite(e)])) if np.isfinite(e).any() else np.inf),
        ).reset_index()
        frame.insert(0, "method", self.method)
        frame["recoveries"] = frame["recoveries"].astype(int)
        return frame

    def recovery_counts(self):
        """Counts as a (len(ranks), len(sparsities)) array in grid order."""
        table = self.summary().pivot(index="rank", columns="sparsity_fraction", values="recoveries")
        return table.loc[self.ranks, self.sparsities].to_numpy(dtype=int)


def run_phase(ranks, sparsities, trials=TRIALS_PER_CELL, method="atomic", base_seed=0,
              dims=DEFAULT_DIMS, threads=SOLVER_THREADS, progress=True):
    ranks = [int(r) for r in ranks]
    sparsities = [float(s) for s in sparsities]
    if not ranks or not sparsities:
        raise ValueError("Phase grid needs at least one rank and one sparsity.")
    if trials < 1 or threads < 1:
        raise ValueError("trials and threads must be positive.")
    if method not in METHODS:
        raise ValueError(f"Unknown method '{method}' (expected one of {', '.join(METHODS)}).")

    dims = tuple(int(d) for d in dims)
    tasks = [
        (method, rank, sparsity, trial, trial_seed(base_seed, ri, si, trial), dims)
        for ri, rank in enumerate(ranks)
        for si, sparsity in enumerate(sparsities)
        for trial in range(trials)
    ]
    logger.info("Running %s phase grid: %d cells x %d trials on %s", method, len(ranks) * len(sparsities), trials, dims)

    bar = dict(total=len(tasks), desc=f"phase[{method}]", disable=not progress)
    if threads == 1:
        rows = [_run_task(task) for task in tqdm(tasks, **bar)]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(tqdm(pool.map(_run_task, tasks), **bar))

    records = pd.DataFrame(rows, columns=TRIAL_COLUMNS)
    grid = PhaseGrid(method, ranks, sparsities, trials, records)
    logger.info("Phase grid done: %d/%d trials recovered", int(records["recovered"].sum()), len(records))
    return grid


def write_phase_csv(grid, path, timestamp=True):
    """
    Write the per-trial table to `path` and the per-cell table next to it
    (`<stem>.summary.csv`). Without a timestamp the wall-clock column is
    zeroed so reruns are byte-identical.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = grid.records.copy()
    if not timestamp:
        records["seconds"] = 0.0
    summary_path = path.with_name(path.stem + ".summary.csv")

    for frame, target in ((records, path), (grid.summary(), summary_path)):
        with target.open("w", newline="") as handle:
            if timestamp:
                handle.write(f"# generated {datetime.now(timezone.utc).isoformat(timespec='seconds')}\n")
            frame.to_csv(handle, index=False, float_format="%.10g")
    logger.info("Wrote phase results to %s and %s", path, summary_path)
    return path, summary_path
