"""
Kruskal (CP) Tensors

Purpose:
Factored representation X = sum_r gamma_r a_r^(1) ⊗ ... ⊗ a_r^(K) and its
conversion to dense form.

Design choices:
- Factors are stored as a tuple of d_k x R matrices; all share R.
- Weights are optional. When present the factor columns must be unit norm,
  which is the normalized view [[gamma; U, V, W]].
- R = 0 is allowed and represents the zero tensor of the factor dims.
"""

from dataclasses import dataclass

import numpy as np

from src.tensor_core.dense import fold, khatri_rao_chain
from src.tensor_core.errors import DimensionMismatchError

UNIT_NORM_TOL = 1e-10


def _as_factor(f):
    f = np.asarray(f, dtype=float)
    if f.ndim == 1:
        return f.reshape(-1, 1)
    if f.ndim != 2:
        raise ValueError(f"Factor matrices must be 2-D, got {f.ndim}-D.")
    return f


@dataclass(frozen=True, eq=False)
class KruskalTensor:
    factors: tuple
    weights: np.ndarray | None = None

    def __post_init__(self):
        factors = tuple(_as_factor(f) for f in self.factors)
        if len(factors) == 0:
            raise ValueError("A Kruskal tensor needs at least one factor matrix.")
        ranks = {f.shape[1] for f in factors}
        if len(ranks) != 1:
            raise DimensionMismatchError(
                f"All factor matrices must share a column count, got {sorted(ranks)}."
            )
        object.__setattr__(self, "factors", factors)

        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float).ravel()
            if weights.shape[0] != factors[0].shape[1]:
                raise DimensionMismatchError(
                    f"Expected {factors[0].shape[1]} weights, got {weights.shape[0]}."
                )
            if np.any(weights < 0):
                raise ValueError("Kruskal weights must be nonnegative.")
            for f in factors:
                norms = np.linalg.norm(f, axis=0)
                if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
                    raise ValueError("Weighted Kruskal tensors need unit-norm factor columns.")
            object.__setattr__(self, "weights", weights)

    @property
    def rank(self):
        return self.factors[0].shape[1]

    @property
    def order(self):
        return len(self.factors)

    @property
    def shape(self):
        return tuple(f.shape[0] for f in self.factors)

    def column_norms(self):
        """K x R array of ||a_r^(k)||."""
        return np.vstack([np.linalg.norm(f, axis=0) for f in self.factors])

    def term_weights(self):
        """gamma_r, with weights folded in when present."""
        gamma = np.prod(self.column_norms(), axis=0)
        if self.weights is not None:
            gamma = gamma * self.weights
        return gamma

    def normalize(self):
        """Return the [[gamma; U, V, W]] view. Zero terms keep a zero weight."""
        norms = self.column_norms()
        gamma = self.term_weights()
        unit = []
        for k, f in enumerate(self.factors):
            scale = np.where(norms[k] > 0, norms[k], 1.0)
            u = f / scale
            # zero columns get the first basis vector so the unit-norm invariant holds
            dead = norms[k] == 0
            if np.any(dead):
                u = u.copy()
                u[:, dead] = 0.0
                u[0, dead] = 1.0
            unit.append(u)
        return KruskalTensor(tuple(unit), gamma)

    def with_factors(self, factors):
        return KruskalTensor(tuple(factors), self.weights)


def dense_from_kruskal(k):
    dims = k.shape
    if k.rank == 0:
        return np.zeros(dims)
    first = k.factors[0]
    if k.weights is not None:
        first = first * k.weights
    if k.order == 1:
        return first.sum(axis=1)
    others = khatri_rao_chain(list(reversed(k.factors[1:])))
    return fold(first @ others.T, 1, dims)


def atomic_norm_surrogate(k):
    """sum_r prod_k ||a_r^(k)||: the weight of this decomposition, an upper bound on ||X||_*."""
    if k.rank == 0:
        return 0.0
    return float(np.sum(k.term_weights()))
