"""
Coherence Measures

Purpose:
How strongly the factor subspaces of a low-rank tensor concentrate on
coordinate axes. Low coherence is what lets a low-rank tensor be told apart
from a sparse one.

Definitions:
- Subspace coherence of an r-dimensional subspace of R^d:
      mu(U) = (d / r) * max_i ||P_U e_i||^2, which lies in [1, d / r].
- mu(X) is the maximum over modes.
- alpha(X) = sqrt(d1 d2 d3 / r_bar) * ||W||_max for the dual tensor W of X.
  W has no closed form, so `alpha_estimate` uses the candidate
  sum_r u_r ⊗ v_r ⊗ w_r, projected by P_X0 and scaled to unit spectral norm.
  For orthogonally decomposable tensors this candidate is the exact dual.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from config.settings import BASIS_TOL, COHERENCE_SAMPLES, SPECTRAL_ITERS, SPECTRAL_RESTARTS
from src.analysis.projections import bases_from_kruskal, project_px, project_px0
from src.tensor_core.dense import rank_one
from src.tensor_core.kruskal import KruskalTensor, dense_from_kruskal
from src.tensor_core.norms import frobenius, max_norm, spectral_norm_estimate
from src.tensor_core.tucker import r_bar

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    alpha_estimate: float
    mode_coherences: tuple
    ranks: tuple
    r_bar: float
    extra: dict = field(default_factory=dict)

    def to_text(self):
        lines = [
            f"mu={self.mu:.10g}",
            f"alpha_estimate={self.alpha_estimate:.10g}",
        ]
        for k, value in enumerate(self.mode_coherences, start=1):
            lines.append(f"mu_mode{k}={value:.10g}")
        lines.append("tucker_rank=" + ",".join(str(r) for r in self.ranks))
        lines.append(f"r_bar={self.r_bar:.10g}")
        for key, value in self.extra.items():
            lines.append(f"{key}={value}")
        return "\n".join(lines)


def subspace_coherence(basis):
    basis = np.asarray(basis, dtype=float)
    d, r = basis.shape
    if r == 0:
        raise ValueError("Coherence of an empty subspace is undefined.")
    row_norms = np.sum(basis ** 2, axis=1)
    return float(d / r * np.max(row_norms))


def _as_bases(k, tol):
    if isinstance(k, KruskalTensor):
        return bases_from_kruskal(k, tol)
    return k


def coherence_mu(k, tol=BASIS_TOL):
    """max over modes of the subspace coherence. Accepts a KruskalTensor or SubspaceBases."""
    bases = _as_bases(k, tol)
    return max(subspace_coherence(b) for b in bases.bases)


def _candidate_dual(k):
    unit = k.normalize()
    keep = unit.term_weights() > 0
    if not np.any(keep):
        raise ValueError("alpha is undefined for the zero tensor.")
    factors = tuple(f[:, keep] for f in unit.factors)
    return dense_from_kruskal(KruskalTensor(factors))


def alpha_estimate(k, tol=BASIS_TOL, restarts=SPECTRAL_RESTARTS, iters=SPECTRAL_ITERS, seed=0):
    bases = bases_from_kruskal(k, tol)
    candidate = project_px0(_candidate_dual(k), bases)
    scale = spectral_norm_estimate(candidate, restarts=restarts, iters=iters, seed=seed)
    if scale == 0.0:
        raise ValueError("alpha is undefined: the projected dual candidate vanished.")
    candidate = candidate / scale
    bar = r_bar(bases.dims, bases.ranks)
    return float(np.sqrt(np.prod(bases.dims) / bar) * max_norm(candidate))


def coherence_report(k, tol=BASIS_TOL, seed=0):
    bases = bases_from_kruskal(k, tol)
    modes = tuple(subspace_coherence(b) for b in bases.bases)
    return CoherenceReport(
        mu=max(modes),
        alpha_estimate=alpha_estimate(k, tol, seed=seed),
        mode_coherences=modes,
        ranks=bases.ranks,
        r_bar=r_bar(bases.dims, bases.ranks),
    )


@dataclass(frozen=True)
class ProjectionCoherenceCheck:
    max_value: float
    bound: float
    samples: int

    @property
    def holds(self):
        return self.max_value <= self.bound + 1e-8


def coherence_projection_check(bases, samples=COHERENCE_SAMPLES, seed=None):
    """
    Sample basis tensors e_i ⊗ e_j ⊗ e_k and compare max ||P_X(e_ijk)||_F^2
    against r_bar^2 (d1 + d2 + d3) mu^2 / (d1 d2 d3).
    """
    rng = np.random.default_rng(seed)
    dims = bases.dims
    mu = coherence_mu(bases)
    bar = r_bar(dims, bases.ranks)
    bound = bar ** 2 * sum(dims) * mu ** 2 / np.prod(dims)

    worst = 0.0
    for _ in range(samples):
        idx = [rng.integers(d) for d in dims]
        vectors = [np.eye(d)[i] for d, i in zip(dims, idx)]
        worst = max(worst, frobenius(project_px(rank_one(vectors), bases)) ** 2)
    logger.debug("Projection coherence: max %.6g vs bound %.6g", worst, bound)
    return ProjectionCoherenceCheck(max_value=float(worst), bound=float(bound), samples=samples)
