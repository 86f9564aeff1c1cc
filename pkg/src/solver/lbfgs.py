"""
Limited-memory BFGS with a strong-Wolfe line search.

The inverse-Hessian approximation is applied by the standard two-loop
recursion over the last `memory` (s, y) pairs, with the initial scaling
theta = s.y / y.y from the newest pair. Step lengths come from
scipy.optimize.line_search (strong Wolfe, c1/c2 from settings).

When the line search fails the memory is cleared and one steepest-descent
step is tried before giving up.
"""

import logging
import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import line_search

from config.settings import LINE_SEARCH_MAX_ITERS, WOLFE_C1, WOLFE_C2

logger = logging.getLogger(__name__)

CURVATURE_EPS = 1e-12


class LbfgsMemory:
    def __init__(self, size):
        self._pairs = deque(maxlen=size)

    def __len__(self):
        return len(self._pairs)

    def append(self, s, y, s_dot_y):
        self._pairs.append((s, y, 1.0 / s_dot_y))

    def reset(self):
        self._pairs.clear()

    def inverse_action(self, g):
        """Apply the inverse-Hessian approximation to g."""
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(self._pairs):
            a = rho * (s @ q)
            q -= a * y
            alphas.append(a)
        s, y, _ = self._pairs[-1]
        r = (s @ y) / (y @ y) * q
        for (s, y, rho), a in zip(self._pairs, reversed(alphas)):
            b = rho * (y @ r)
            r += s * (a - b)
        return r


@dataclass
class LbfgsResult:
    x: np.ndarray
    f: float
    g: np.ndarray
    iterations: int
    status: str
    f_trace: list = field(default_factory=list)
    g_trace: list = field(default_factory=list)


class _Memo:
    """Caches the last (f, g) pair so line_search's separate f/g calls cost one evaluation."""

    def __init__(self, fun_and_grad):
        self._fun_and_grad = fun_and_grad
        self._x = None
        self._value = None

    def __call__(self, x):
        if self._x is None or not np.array_equal(x, self._x):
            self._value = self._fun_and_grad(x)
            self._x = np.array(x, copy=True)
        return self._value

    def f(self, x):
        return self(x)[0]

    def g(self, x):
        return self(x)[1]


def minimize_lbfgs(fun_and_grad, x0, max_iters, memory, grad_tol, c1=WOLFE_C1, c2=WOLFE_C2):
    memo = _Memo(fun_and_grad)
    x = np.asarray(x0, dtype=float).copy()
    f, g = memo(x)
    g_norm = float(np.linalg.norm(g))
    result = LbfgsResult(x=x, f=f, g=g, iterations=0, status="max_iters", f_trace=[f], g_trace=[g_norm])
    if not np.isfinite(f):
        result.status = "diverged"
        return result

    pairs = LbfgsMemory(memory)
    it = 0
    while it < max_iters:
        if g_norm <= grad_tol:
            result.status = "converged"
            break

        if len(pairs):
            p = -pairs.inverse_action(g)
        else:
            p = -g * min(1.0, 1.0 / max(np.sum(np.abs(g)), 1e-300))

        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            alpha = line_search(
                memo.f, memo.g, x, p, gfk=g, old_fval=f,
                c1=c1, c2=c2, maxiter=LINE_SEARCH_MAX_ITERS,
            )[0]

        if alpha is None:
            if len(pairs):
                logger.debug("Line search failed at iteration %d; restarting from steepest descent", it)
                pairs.reset()
                continue
            result.status = "line_search_failed"
            break

        x_new = x + alpha * p
        f_new, g_new = memo(x_new)
        if not np.isfinite(f_new):
            result.status = "diverged"
            break

        s = x_new - x
        y = g_new - g
        s_dot_y = float(s @ y)
        if s_dot_y > CURVATURE_EPS * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append(s, y, s_dot_y)

        x, f, g = x_new, f_new, g_new
        g_norm = float(np.linalg.norm(g))
        it += 1
        result.f_trace.append(f)
        result.g_trace.append(g_norm)
        if it % 100 == 0:
            logger.debug("L-BFGS iteration %d: f=%.6e |g|=%.3e", it, f, g_norm)
    else:
        if g_norm <= grad_tol:
            result.status = "converged"

    result.x, result.f, result.g, result.iterations = x, f, g, it
    return result
