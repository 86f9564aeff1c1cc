"""
Tucker Rank

Purpose:
Multilinear rank of a dense tensor from the singular values of its
matricizations, plus the weighted average r_bar used by the recovery bounds.

Design choices:
- r_i counts singular values of t_(i) above tol * sigma_max of that mode.
- The zero tensor has Tucker rank (0, ..., 0).
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import svdvals

from config.settings import TUCKER_RANK_TOL
from src.tensor_core.dense import matricize
from src.tensor_core.errors import DimensionMismatchError


@dataclass(frozen=True, eq=False)
class TuckerRankReport:
    ranks: tuple
    singular_values: tuple
    r_bar: float

    def tails(self):
        """Singular values below the cutoff, per mode."""
        return tuple(s[r:] for s, r in zip(self.singular_values, self.ranks))


def tucker_rank(t, tol=TUCKER_RANK_TOL):
    if tol <= 0:
        raise ValueError("Tucker rank tolerance must be positive.")
    t = np.asarray(t, dtype=float)

    ranks = []
    spectra = []
    for mode in range(1, t.ndim + 1):
        s = svdvals(matricize(t, mode))
        spectra.append(s)
        if s.size == 0 or s[0] == 0.0:
            ranks.append(0)
        else:
            ranks.append(int(np.sum(s > tol * s[0])))

    ranks = tuple(ranks)
    bar = r_bar(t.shape, ranks) if t.ndim == 3 else float("nan")
    return TuckerRankReport(ranks=ranks, singular_values=tuple(spectra), r_bar=bar)


def r_bar(dims, ranks):
    """sqrt((r1 r2 d3 + r1 r3 d2 + r2 r3 d1) / (d1 + d2 + d3))."""
    if len(dims) != 3 or len(ranks) != 3:
        raise DimensionMismatchError("r_bar is defined for order-3 dims and ranks.")
    d1, d2, d3 = dims
    r1, r2, r3 = ranks
    for r, d in zip(ranks, dims):
        if not (0 <= r <= d):
            raise ValueError(f"Tucker rank component {r} out of range for side length {d}.")
    return float(np.sqrt((r1 * r2 * d3 + r1 * r3 * d2 + r2 * r3 * d1) / (d1 + d2 + d3)))
