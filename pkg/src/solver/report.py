"""
Solve reporting: trace CSV, TNSR outputs and a flat summary.

Files written for a prefix P:
    P.lowrank.tnsr   X
    P.sparse.tnsr    S
    P.factors.tnsr   factor matrices stacked vertically, (d1 + ... + dK) x R
    P.trace.csv      iteration, objective, grad_norm
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from src.harness.metrics import degrees_of_freedom
from src.solver.balancing import numerical_rank
from src.tensor_core.errors import DimensionMismatchError
from src.tensor_core.kruskal import KruskalTensor
from src.tensor_core.tnsr_io import read_tnsr, write_tnsr

logger = logging.getLogger(__name__)


def stack_factors(kruskal):
    return np.vstack(kruskal.factors)


def split_factors(stacked, dims):
    stacked = np.asarray(stacked, dtype=float)
    if stacked.ndim != 2 or stacked.shape[0] != sum(dims):
        raise DimensionMismatchError(
            f"Stacked factors of shape {stacked.shape} do not match dims {tuple(dims)}."
        )
    bounds = np.cumsum((0,) + tuple(dims))
    return KruskalTensor(tuple(stacked[a:b] for a, b in zip(bounds[:-1], bounds[1:])))


def read_factors(path, dims):
    return split_factors(read_tnsr(path), dims)


def trace_frame(report):
    return pd.DataFrame({
        "iteration": np.arange(len(report.objective_trace)),
        "objective": report.objective_trace,
        "grad_norm": report.grad_norm_trace,
    })


def summarize(report, z):
    z = np.asarray(z, dtype=float)
    rank = numerical_rank(report.factors.factors)
    nonzero = int(np.count_nonzero(report.sparse))
    return {
        "status": report.status,
        "iterations": report.iterations,
        "objective": report.objective,
        "grad_norm": report.final_grad_norm,
        "global_cert": report.global_cert,
        "numerical_rank": rank,
        "sparsity_percent": 100.0 * nonzero / z.size,
        "degrees_of_freedom": degrees_of_freedom(z.shape, rank),
        "residual": float(np.linalg.norm(report.lowrank + report.sparse - z)),
        "threads": report.threads,
    }


def format_summary(summary):
    def fmt(value):
        if isinstance(value, bool):
            return str(value).lower()
        if isinstance(value, float):
            return f"{value:.10g}"
        return str(value)
    return "\n".join(f"{key}={fmt(value)}" for key, value in summary.items())


def write_report(report, prefix):
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = {
        "lowrank": prefix.with_name(prefix.name + ".lowrank.tnsr"),
        "sparse": prefix.with_name(prefix.name + ".sparse.tnsr"),
        "factors": prefix.with_name(prefix.name + ".factors.tnsr"),
        "trace": prefix.with_name(prefix.name + ".trace.csv"),
    }
    write_tnsr(paths["lowrank"], report.lowrank)
    write_tnsr(paths["sparse"], report.sparse)
    write_tnsr(paths["factors"], stack_factors(report.factors))
    trace_frame(report).to_csv(paths["trace"], index=False, float_format="%.17g")
    logger.info("Wrote solve outputs with prefix %s", prefix)
    return paths
