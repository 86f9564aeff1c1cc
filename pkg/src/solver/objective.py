"""
Smoothed Objective

Purpose:
The factorized problem

    f(a) = (lambda_x / K) sum_r sum_k ||a_r^(k)||^K + phi(X(a))
    phi(X) = min_S  1/2 ||X + S - Z||_F^2 + lambda_s ||S||_1

and its gradient. The inner minimization has the closed form
S* = shrink(Z - X, lambda_s), which turns phi into an elementwise Huber loss
of the residual Z - X.

Design choices:
- Factors are a list of K matrices (d_k x R). The symmetric variant ties them
  to one d x R matrix repeated K times.
- S* is held fixed while differentiating: the partial minimum is C^1 and its
  gradient is the gradient of the inner objective at S*.
- The mode-k chain term uses the Khatri-Rao product of the other factors in
  descending mode order, matching the unfolding layout.
"""

import numpy as np

from src.tensor_core.dense import khatri_rao_chain, matricize
from src.tensor_core.errors import DimensionMismatchError
from src.tensor_core.kruskal import KruskalTensor, dense_from_kruskal


def shrink(t, lam):
    if lam < 0:
        raise ValueError("Shrinkage threshold must be nonnegative.")
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.maximum(np.abs(t) - lam, 0.0)


def phi_eval(x, z, lambda_s):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DimensionMismatchError(f"Low-rank dims {x.shape} do not match data dims {z.shape}.")
    s_star = shrink(z - x, lambda_s)
    residual = x + s_star - z
    value = 0.5 * float(np.sum(residual ** 2)) + lambda_s * float(np.sum(np.abs(s_star)))
    return value, s_star


def _check_factors(factors, z):
    if len(factors) != z.ndim:
        raise DimensionMismatchError(f"Expected {z.ndim} factor matrices, got {len(factors)}.")
    ranks = {f.shape[1] for f in factors}
    if len(ranks) != 1:
        raise DimensionMismatchError(f"Factor matrices disagree on the rank: {sorted(ranks)}.")
    dims = tuple(f.shape[0] for f in factors)
    if dims != z.shape:
        raise DimensionMismatchError(f"Factor dims {dims} do not match data dims {z.shape}.")


def factorized_regularizer(factors, lambda_x):
    order = len(factors)
    total = sum(np.sum(np.linalg.norm(f, axis=0) ** order) for f in factors)
    return lambda_x / order * float(total)


def reconstruct(factors):
    return dense_from_kruskal(KruskalTensor(tuple(factors)))


def objective_eval(factors, z, cfg):
    z = np.asarray(z, dtype=float)
    factors = [np.asarray(f, dtype=float) for f in factors]
    _check_factors(factors, z)
    value, _ = phi_eval(reconstruct(factors), z, cfg.lambda_s)
    return factorized_regularizer(factors, cfg.lambda_x) + value


def _chain_except(factors, k):
    others = [factors[j] for j in reversed(range(len(factors))) if j != k]
    return khatri_rao_chain(others)


def _modal_gradients(factors, residual, lambda_x):
    order = len(factors)
    grads = []
    for k, f in enumerate(factors):
        norms = np.linalg.norm(f, axis=0)
        reg = lambda_x * f * norms ** (order - 2)
        grads.append(reg + matricize(residual, k + 1) @ _chain_except(factors, k))
    return grads


def value_and_gradient(factors, z, cfg):
    """Objective value, gradient list and the optimal sparse part S* in one pass."""
    z = np.asarray(z, dtype=float)
    factors = [np.asarray(f, dtype=float) for f in factors]
    _check_factors(factors, z)
    x = reconstruct(factors)
    value, s_star = phi_eval(x, z, cfg.lambda_s)
    value += factorized_regularizer(factors, cfg.lambda_x)
    grads = _modal_gradients(factors, x + s_star - z, cfg.lambda_x)
    return value, grads, s_star


def gradient(factors, z, cfg):
    return value_and_gradient(factors, z, cfg)[1]


def symmetric_value_and_gradient(shared, z, cfg):
    """Tied parameterization a_r^(1) = ... = a_r^(K): the gradient sums the K modal terms."""
    z = np.asarray(z, dtype=float)
    shared = np.asarray(shared, dtype=float)
    value, grads, s_star = value_and_gradient([shared] * z.ndim, z, cfg)
    return value, sum(grads), s_star
