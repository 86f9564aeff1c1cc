"""
Recovery Certificates

Purpose:
Verification utilities around exact recovery of (X, S) from Z = X + S:

- the hypothesis check of the main recovery theorem (rank and sparsity
  bounds, plus the recommended lambda),
- the operator norm |||P_Omega P_X|||,
- the four inequalities a dual certificate W_perp must satisfy,
- a Monte-Carlo check of the spectral-norm tail bound for random sign tensors.

Design choices:
- Nothing here constructs certificates; everything checks stated
  inequalities on supplied objects.
- |||P_Omega P_X|||^2 = |||P_X P_Omega P_X|||, so the operator norm comes
  from the dominant eigenvalue of a self-adjoint PSD map.
- rho_r and rho_s are unspecified numerical constants; they default to 1,
  which makes the theorem check a diagnostic rather than a guarantee.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from config.settings import POWER_ITERS, POWER_TOL, RHO_R, RHO_S
from src.analysis.projections import project_px, project_px_perp
from src.analysis.support import project_support, project_support_complement
from src.tensor_core.norms import frobenius, max_norm, spectral_norm_estimate

logger = logging.getLogger(__name__)

CERT_RESIDUAL_TOL = 1e-8


def _lanczos_top(apply, dims, iters, seed):
    n = int(np.prod(dims))

    def matvec(x):
        return apply(np.reshape(x, dims, order="F")).ravel(order="F")

    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    rng = np.random.default_rng(seed)
    return float(eigsh(op, k=1, which="LA", v0=rng.standard_normal(n), maxiter=iters * 10, tol=0)[0][0])


def opnorm_pomega_px(b, s, iters=POWER_ITERS, seed=None, tol=POWER_TOL, method="power"):
    """
    |||P_Omega P_X||| as the square root of the top eigenvalue of P_X P_Omega P_X.

    `method="power"` runs power iteration until the eigen-residual
    ||Ax - theta x|| drops below `tol`; if the cap is reached first (close top
    eigenvalues), it warns and switches to Lanczos. `method="lanczos"` hands
    the operator to ARPACK directly.
    """
    if iters < 1:
        raise ValueError("Operator norm estimation needs at least one iteration.")
    if method not in ("power", "lanczos"):
        raise ValueError(f"Unknown method '{method}' (expected 'power' or 'lanczos').")
    if b.dims != s.dims:
        raise ValueError(f"Bases dims {b.dims} do not match support dims {s.dims}.")
    if s.m == 0:
        return 0.0

    dims = b.dims

    def apply(t):
        return project_px(project_support(project_px(t, b), s), b)

    if method == "lanczos":
        return float(np.sqrt(max(_lanczos_top(apply, dims, iters, seed), 0.0)))

    rng = np.random.default_rng(seed)
    x = project_px(rng.standard_normal(dims), b)
    size = frobenius(x)
    if size == 0.0:
        return 0.0
    x = x / size
    for _ in range(iters):
        y = apply(x)
        eigenvalue = float(np.sum(x * y))
        residual = frobenius(y - eigenvalue * x)
        size = frobenius(y)
        if size == 0.0:
            return 0.0
        if residual <= tol:
            break
        x = y / size
    else:
        logger.warning(
            "Operator-norm power iteration did not converge in %d iterations (residual %.2e); using Lanczos",
            iters, residual,
        )
        eigenvalue = _lanczos_top(apply, dims, iters, seed)
    return float(np.sqrt(max(eigenvalue, 0.0)))


@dataclass(frozen=True)
class Theorem1Report:
    rank_ok: bool
    sparsity_ok: bool
    rank_bound: float
    rank_margin: float
    sparsity_bound: float
    sparsity_margin: float
    n: int
    lambda_: float

    @property
    def holds(self):
        return self.rank_ok and self.sparsity_ok

    def to_text(self):
        return "\n".join([
            f"theorem1_rank_ok={str(self.rank_ok).lower()}",
            f"theorem1_sparsity_ok={str(self.sparsity_ok).lower()}",
            f"theorem1_rank_bound={self.rank_bound:.10g}",
            f"theorem1_rank_margin={self.rank_margin:.10g}",
            f"theorem1_sparsity_bound={self.sparsity_bound:.10g}",
            f"theorem1_sparsity_margin={self.sparsity_margin:.10g}",
            f"theorem1_lambda={self.lambda_:.10g}",
        ])


def recommended_lambda(dims):
    return float(1.0 / np.sqrt(sum(dims)))


def theorem1_check(dims, r_bar, m, mu0, alpha0, rho_r=RHO_R, rho_s=RHO_S):
    """
    r_bar <= rho_r * sqrt(n / ((d1+d2+d3) log(n) alpha0^4 mu0^2))  and  m <= rho_s d1 d2 d3,
    with n = d1 d2 d3 - m.
    """
    if min(mu0, alpha0, rho_r, rho_s) <= 0 or r_bar < 0 or m < 0:
        raise ValueError("Theorem check parameters must be positive.")
    total = int(np.prod(dims))
    n = total - int(m)
    if n <= 1:
        raise ValueError(f"Need more than one unobserved entry, got n = {n}.")

    rank_bound = rho_r * np.sqrt(n / (sum(dims) * np.log(n) * alpha0 ** 4 * mu0 ** 2))
    sparsity_bound = rho_s * total
    return Theorem1Report(
        rank_ok=bool(r_bar <= rank_bound),
        sparsity_ok=bool(m <= sparsity_bound),
        rank_bound=float(rank_bound),
        rank_margin=float(rank_bound - r_bar),
        sparsity_bound=float(sparsity_bound),
        sparsity_margin=float(sparsity_bound - m),
        n=n,
        lambda_=recommended_lambda(dims),
    )


@dataclass(frozen=True)
class DualCertReport:
    in_complement: bool
    spectral_small: bool
    support_match: bool
    off_support_small: bool
    complement_residual: float
    spectral_norm: float
    support_residual: float
    off_support_max: float

    @property
    def conditions(self):
        return (self.in_complement, self.spectral_small, self.support_match, self.off_support_small)

    @property
    def holds(self):
        return all(self.conditions)


def dual_cert_check(wperp, w, s_signs, b, supp, lam, seed=0):
    """
    Check, for a candidate W_perp:
      (i)   P_X_perp W_perp = W_perp
      (ii)  ||W_perp|| < 1/4
      (iii) ||P_Omega(W - lam sgn(S) + W_perp)||_F <= lam / 8
      (iv)  ||P_Omega_perp(W + W_perp)||_max < lam / 4
    """
    wperp = np.asarray(wperp, dtype=float)
    w = np.asarray(w, dtype=float)
    s_signs = np.sign(np.asarray(s_signs, dtype=float))
    if not (wperp.shape == w.shape == s_signs.shape):
        raise ValueError("Certificate tensors must share dims.")

    complement_residual = frobenius(project_px_perp(wperp, b) - wperp)
    spectral = spectral_norm_estimate(wperp, seed=seed)
    support_residual = frobenius(project_support(w - lam * s_signs + wperp, supp))
    off_support = max_norm(project_support_complement(w + wperp, supp))

    return DualCertReport(
        in_complement=bool(complement_residual <= CERT_RESIDUAL_TOL * max(1.0, frobenius(wperp))),
        spectral_small=bool(spectral < 0.25),
        support_match=bool(support_residual <= lam / 8),
        off_support_small=bool(off_support < lam / 4),
        complement_residual=complement_residual,
        spectral_norm=spectral,
        support_residual=support_residual,
        off_support_max=off_support,
    )


def sign_tail_bound(dims, delta):
    return float(np.sqrt(8 * sum(dims) * np.log(6 / np.log(1.5)) + np.log(2 / delta)))


def sample_sign_tensor(dims, rho, rng):
    """Entries +1 and -1 with probability rho/2 each, 0 otherwise."""
    u = rng.random(dims)
    g = np.zeros(dims)
    g[u < rho / 2] = 1.0
    g[(u >= rho / 2) & (u < rho)] = -1.0
    return g


def random_sign_spectral_check(dims, rho, delta, trials, seed=None, restarts=8):
    """Returns (fraction of trials with ||G|| within the tail bound, bound)."""
    if not (0 <= rho < 1):
        raise ValueError("rho must lie in [0, 1).")
    if not (0 < delta < 1):
        raise ValueError("delta must lie in (0, 1).")
    if trials < 1:
        raise ValueError("Need at least one trial.")

    dims = tuple(int(d) for d in dims)
    bound = sign_tail_bound(dims, delta)
    within = 0
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([0 if seed is None else seed, trial]))
        g = sample_sign_tensor(dims, rho, rng)
        value = spectral_norm_estimate(g, restarts=restarts, seed=rng.integers(2 ** 32))
        within += value <= bound
    rate = within / trials
    logger.info("Sign-tensor tail check: %d/%d within bound %.4g", within, trials, bound)
    return rate, bound
