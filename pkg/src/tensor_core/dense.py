"""
Dense Tensor Kernels

Purpose:
This module holds the algebra every other layer is written against:
matricization, its inverse, Khatri-Rao products and mode products.

Design choices:
- A dense tensor is a float64 numpy array; its shape is its dims.
- Storage order is first-index-fastest (Fortran order). The mode-k
  unfolding orders its columns with the remaining modes ascending, first
  fastest, so that X_(1) = A (C ⊙ B)^T for X = [[A, B, C]].
- Modes are 1-based in the public API, matching the notation X_(k).
"""

from functools import reduce

import numpy as np

from src.tensor_core.errors import DimensionMismatchError

DenseTensor = np.ndarray


def as_tensor(data):
    tensor = np.asarray(data, dtype=float)
    if tensor.ndim < 1:
        raise ValueError("A tensor needs at least one mode.")
    if not np.all(np.isfinite(tensor)):
        raise ValueError("Tensor entries must be finite (no NaN/Inf).")
    return tensor


def zeros(dims):
    return np.zeros(tuple(int(d) for d in dims))


def _check_mode(ndim, mode):
    if not (1 <= mode <= ndim):
        raise ValueError(f"Mode must be in 1..{ndim}, got {mode}.")


def matricize(tensor, mode):
    tensor = np.asarray(tensor, dtype=float)
    _check_mode(tensor.ndim, mode)
    moved = np.moveaxis(tensor, mode - 1, 0)
    return moved.reshape(tensor.shape[mode - 1], -1, order="F")


def fold(matrix, mode, dims):
    """Inverse of `matricize` for a tensor of shape `dims`."""
    dims = tuple(int(d) for d in dims)
    _check_mode(len(dims), mode)
    rest = dims[:mode - 1] + dims[mode:]
    expected = (dims[mode - 1], int(np.prod(rest)))
    if matrix.shape != expected:
        raise DimensionMismatchError(
            f"Cannot fold a {matrix.shape} matrix along mode {mode} into {dims}."
        )
    moved = np.reshape(matrix, (dims[mode - 1],) + rest, order="F")
    return np.moveaxis(moved, 0, mode - 1)


def khatri_rao(a, b):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"Khatri-Rao needs equal column counts, got {a.shape[1]} and {b.shape[1]}."
        )
    n_cols = a.shape[1]
    return np.einsum("ir,jr->ijr", a, b).reshape(a.shape[0] * b.shape[0], n_cols)


def khatri_rao_chain(matrices):
    """A_1 ⊙ A_2 ⊙ ... ⊙ A_n, left to right."""
    if len(matrices) == 0:
        raise ValueError("Khatri-Rao chain needs at least one matrix.")
    return reduce(khatri_rao, matrices)


def mode_product(tensor, matrix, mode):
    tensor = np.asarray(tensor, dtype=float)
    _check_mode(tensor.ndim, mode)
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[1] != tensor.shape[mode - 1]:
        raise DimensionMismatchError(
            f"Mode-{mode} product needs {tensor.shape[mode - 1]} columns, got {matrix.shape[1]}."
        )
    dims = list(tensor.shape)
    dims[mode - 1] = matrix.shape[0]
    return fold(matrix @ matricize(tensor, mode), mode, dims)


def mode_multiply(tensor, *matrices):
    """(M_1, ..., M_K) · T. A `None` entry leaves that mode untouched."""
    tensor = np.asarray(tensor, dtype=float)
    if len(matrices) != tensor.ndim:
        raise DimensionMismatchError(
            f"Expected {tensor.ndim} matrices, got {len(matrices)}."
        )
    result = tensor
    for mode, matrix in enumerate(matrices, start=1):
        if matrix is not None:
            result = mode_product(result, matrix, mode)
    return result


def rank_one(vectors):
    """Outer product v_1 ⊗ v_2 ⊗ ... ⊗ v_K."""
    vectors = [np.asarray(v, dtype=float).ravel() for v in vectors]
    return reduce(np.multiply.outer, vectors)


def contract_except(tensor, vectors, skip):
    """Contract every mode except `skip` (0-based) against the given vectors."""
    result = np.asarray(tensor, dtype=float)
    for axis in reversed(range(result.ndim)):
        if axis == skip:
            continue
        result = np.tensordot(result, vectors[axis], axes=([axis], [0]))
    return result
