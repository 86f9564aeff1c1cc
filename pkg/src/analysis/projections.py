"""
Subspace Projections

Purpose:
Orthonormal bases for the factor column spaces of a tensor, and the
projection operators built from them:

    P_X0      = P_{U,V,W}
    P_X       = P_{U,V,W} + P_{U⊥,V,W} + P_{U,V⊥,W} + P_{U,V,W⊥}
    P_X_perp  = I - P_X

where P_{A,B,C} t = (P_A, P_B, P_C) · t is a mode product with the
orthogonal projectors onto (or off) each basis.

Design choices:
- Bases are computed from a thresholded SVD (or pivoted QR) so rank
  deficient factors lose their null directions instead of failing.
- Everything works for general order K; P_X is the sum of the terms with
  at most one complemented mode.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import linalg

from config.settings import BASIS_TOL
from src.tensor_core.dense import matricize, mode_multiply
from src.tensor_core.errors import DimensionMismatchError

ORTHONORMAL_TOL = 1e-10


def _orthonormal_basis(matrix, tol, method):
    matrix = np.asarray(matrix, dtype=float)
    if method == "svd":
        u, s, _ = linalg.svd(matrix, full_matrices=False)
        if s.size == 0 or s[0] == 0.0:
            return np.zeros((matrix.shape[0], 0))
        return u[:, s > tol * s[0]]
    if method == "qr":
        q, r, _ = linalg.qr(matrix, mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        if diag.size == 0 or diag[0] == 0.0:
            return np.zeros((matrix.shape[0], 0))
        return q[:, diag > tol * diag[0]]
    raise ValueError(f"Unknown basis method '{method}' (expected 'svd' or 'qr').")


@dataclass(frozen=True, eq=False)
class SubspaceBases:
    bases: tuple

    def __post_init__(self):
        bases = tuple(np.asarray(b, dtype=float) for b in self.bases)
        for k, b in enumerate(bases):
            if b.ndim != 2:
                raise ValueError(f"Basis {k + 1} must be a matrix.")
            gram = b.T @ b
            if np.max(np.abs(gram - np.eye(b.shape[1])), initial=0.0) > ORTHONORMAL_TOL:
                raise ValueError(f"Basis {k + 1} is not orthonormal.")
        object.__setattr__(self, "bases", bases)

    @property
    def U(self):
        return self.bases[0]

    @property
    def V(self):
        return self.bases[1]

    @property
    def W(self):
        return self.bases[2]

    @property
    def dims(self):
        return tuple(b.shape[0] for b in self.bases)

    @property
    def ranks(self):
        return tuple(b.shape[1] for b in self.bases)

    def projectors(self):
        return [b @ b.T for b in self.bases]

    def complements(self):
        return [np.eye(b.shape[0]) - b @ b.T for b in self.bases]


def bases_from_kruskal(k, tol=BASIS_TOL, method="svd"):
    bases = []
    for mode, factor in enumerate(k.factors, start=1):
        basis = _orthonormal_basis(factor, tol, method)
        if basis.shape[1] == 0:
            raise ValueError(f"Factor {mode} is zero; its column space is empty.")
        bases.append(basis)
    return SubspaceBases(tuple(bases))


def bases_from_tensor(t, tol=BASIS_TOL):
    """Bases for the column spaces of each matricization of a dense tensor."""
    t = np.asarray(t, dtype=float)
    bases = []
    for mode in range(1, t.ndim + 1):
        basis = _orthonormal_basis(matricize(t, mode), tol, "svd")
        if basis.shape[1] == 0:
            raise ValueError("Cannot take subspace bases of the zero tensor.")
        bases.append(basis)
    return SubspaceBases(tuple(bases))


def _check(t, b):
    t = np.asarray(t, dtype=float)
    if t.shape != b.dims:
        raise DimensionMismatchError(f"Tensor dims {t.shape} do not match bases dims {b.dims}.")
    return t


def project_px0(t, b):
    t = _check(t, b)
    return mode_multiply(t, *b.projectors())


def projection_terms(t, b):
    """
    All 2^K component projections P_{A1,...,AK} t, keyed by a tuple of
    booleans (True where the mode uses the complement).
    """
    t = _check(t, b)
    inside = b.projectors()
    outside = b.complements()
    terms = {}
    for pattern in product((False, True), repeat=t.ndim):
        mats = [outside[k] if perp else inside[k] for k, perp in enumerate(pattern)]
        terms[pattern] = mode_multiply(t, *mats)
    return terms


def project_px(t, b):
    t = _check(t, b)
    inside = b.projectors()
    outside = b.complements()
    result = mode_multiply(t, *inside)
    for k in range(t.ndim):
        mats = list(inside)
        mats[k] = outside[k]
        result = result + mode_multiply(t, *mats)
    return result


def project_px_perp(t, b):
    t = _check(t, b)
    return t - project_px(t, b)


def operator_matrix(op, dims):
    """Materialize a linear map on tensors of shape `dims` as an n x n matrix (F-order vectorization)."""
    dims = tuple(int(d) for d in dims)
    n = int(np.prod(dims))
    matrix = np.empty((n, n))
    basis = np.zeros(n)
    for i in range(n):
        basis[i] = 1.0
        matrix[:, i] = np.asarray(op(basis.reshape(dims, order="F"))).ravel(order="F")
        basis[i] = 0.0
    return matrix
