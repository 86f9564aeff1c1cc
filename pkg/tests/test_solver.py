import numpy as np
import pandas as pd
import pytest
from scipy.optimize import minimize_scalar, rosen, rosen_der

from src.baselines.matrix_rpca import lagrangian_rpca
from src.harness.metrics import rel_error
from src.solver.atomic import lbfgs_solve, symmetric_solve
from src.solver.balancing import balance_factors, global_optimality_check, numerical_rank
from src.solver.config import SolverConfig
from src.solver.lbfgs import minimize_lbfgs
from src.solver.objective import (
    factorized_regularizer,
    gradient,
    objective_eval,
    phi_eval,
    reconstruct,
    shrink,
    symmetric_value_and_gradient,
    value_and_gradient,
)
from src.solver.report import format_summary, read_factors, summarize, write_report
from src.tensor_core.dense import rank_one
from src.tensor_core.errors import DimensionMismatchError
from src.tensor_core.kruskal import KruskalTensor, atomic_norm_surrogate
from src.tensor_core.tnsr_io import read_tnsr


def random_factors(rng, dims, rank):
    return [rng.standard_normal((d, rank)) for d in dims]


def numeric_gradient(fun, x, h=1e-6):
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        step = np.zeros_like(x)
        step[idx] = h
        grad[idx] = (fun(x + step) - fun(x - step)) / (2 * h)
    return grad


# --- shrink / phi ---

def test_shrink_examples():
    out = shrink(np.array([1.5, -0.3, -2.0, 0.0]), 1.0)
    np.testing.assert_allclose(out, [0.5, 0.0, -1.0, 0.0])


def test_shrink_rejects_negative_threshold():
    with pytest.raises(ValueError):
        shrink(np.ones(3), -0.1)


def test_phi_at_exact_fit_is_zero():
    z = np.arange(8.0).reshape(2, 2, 2)
    value, s_star = phi_eval(z, z, 0.5)
    assert value == 0.0
    assert not np.any(s_star)


def test_phi_single_residual():
    z = np.array([2.0])
    value, s_star = phi_eval(np.zeros(1), z, 1.0)
    assert value == pytest.approx(1.5)
    np.testing.assert_allclose(s_star, [1.0])


def test_phi_matches_entrywise_scalar_minimization(rng):
    x = rng.standard_normal((3, 3, 2))
    z = rng.standard_normal((3, 3, 2)) * 2
    lam = 0.4
    value, _ = phi_eval(x, z, lam)

    total = 0.0
    for xi, zi in zip(x.ravel(), z.ravel()):
        res = minimize_scalar(
            lambda s: 0.5 * (xi + s - zi) ** 2 + lam * abs(s),
            bounds=(-20.0, 20.0), method="bounded", options={"xatol": 1e-12},
        )
        total += res.fun
    assert value == pytest.approx(total, abs=1e-8)


def test_phi_with_stale_sparse_part_is_never_lower(rng):
    lam = 0.3
    z = rng.standard_normal((4, 3, 5))
    for _ in range(20):
        x = rng.standard_normal(z.shape)
        _, stale = phi_eval(rng.standard_normal(z.shape), z, lam)
        refreshed, _ = phi_eval(x, z, lam)
        stale_value = 0.5 * np.sum((x + stale - z) ** 2) + lam * np.sum(np.abs(stale))
        assert stale_value >= refreshed - 1e-12


def test_phi_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        phi_eval(np.zeros((2, 2)), np.zeros((2, 3)), 1.0)


# --- objective ---

def test_objective_zero_factors_zero_data():
    cfg = SolverConfig(rank_bound=2)
    factors = [np.zeros((3, 2)) for _ in range(3)]
    assert objective_eval(factors, np.zeros((3, 3, 3)), cfg) == 0.0


def test_objective_large_lambda_s_is_half_squared_norm(rng):
    z = rng.standard_normal((3, 4, 2))
    cfg = SolverConfig(rank_bound=1, lambda_s=1e6)
    factors = [np.zeros((d, 1)) for d in z.shape]
    assert objective_eval(factors, z, cfg) == pytest.approx(0.5 * np.sum(z ** 2))


def test_objective_ground_truth_without_regularizer(rng):
    factors = random_factors(rng, (3, 4, 5), 2)
    z = reconstruct(factors)
    cfg = SolverConfig(rank_bound=2, lambda_x=0.0)
    assert objective_eval(factors, z, cfg) == pytest.approx(0.0, abs=1e-20)


def test_objective_rejects_mismatched_factors(rng):
    cfg = SolverConfig(rank_bound=2)
    factors = random_factors(rng, (3, 4, 5), 2)
    with pytest.raises(DimensionMismatchError):
        objective_eval(factors, np.zeros((3, 4, 6)), cfg)
    factors[1] = factors[1][:, :1]
    with pytest.raises(DimensionMismatchError):
        objective_eval(factors, np.zeros((3, 4, 5)), cfg)


def test_regularizer_of_balanced_factors_equals_surrogate(rng):
    factors = balance_factors(random_factors(rng, (3, 4, 5), 3))
    kt = KruskalTensor(tuple(factors))
    assert factorized_regularizer(factors, 1.0) == pytest.approx(atomic_norm_surrogate(kt))


# --- gradient ---

DIMS_BY_ORDER = ((4, 5), (3, 4, 5), (2, 3, 2, 3))


@pytest.mark.parametrize("seed", range(20))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    dims = DIMS_BY_ORDER[seed % 3]
    rank = 1 + seed % 2
    cfg = SolverConfig(rank_bound=rank, lambda_x=0.1, lambda_s=0.1, order=len(dims))
    factors = random_factors(rng, dims, rank)
    z = reconstruct(random_factors(rng, dims, rank)) + rng.standard_normal(dims)
    grads = gradient(factors, z, cfg)

    for k in range(len(dims)):
        def fun(fk, k=k):
            trial = list(factors)
            trial[k] = fk
            return objective_eval(trial, z, cfg)
        numeric = numeric_gradient(fun, factors[k])
        assert np.max(np.abs(numeric - grads[k])) <= 1e-5 * np.max(np.abs(grads[k]))


def test_symmetric_gradient_matches_finite_differences(rng):
    cfg = SolverConfig(rank_bound=2, lambda_x=0.1, lambda_s=0.1, symmetric=True)
    shared = rng.standard_normal((4, 2))
    z = rng.standard_normal((4, 4, 4))
    _, grad, _ = symmetric_value_and_gradient(shared, z, cfg)
    numeric = numeric_gradient(lambda a: objective_eval([a] * 3, z, cfg), shared)
    assert np.max(np.abs(numeric - grad)) <= 1e-5 * np.max(np.abs(grad))


def test_gradient_vanishes_at_exact_fit(rng):
    factors = random_factors(rng, (3, 4, 5), 2)
    z = reconstruct(factors)
    cfg = SolverConfig(rank_bound=2, lambda_x=0.0, lambda_s=1e3)
    for g in gradient(factors, z, cfg):
        np.testing.assert_allclose(g, 0.0, atol=1e-12)


def test_gradient_of_zero_column_has_no_regularizer_part(rng):
    factors = random_factors(rng, (3, 3, 3), 2)
    factors[0][:, 1] = 0.0
    z = np.zeros((3, 3, 3))
    cfg = SolverConfig(rank_bound=2, lambda_x=1.0, lambda_s=1e3)
    value, grads, s_star = value_and_gradient(factors, z, cfg)
    assert np.all(np.isfinite(grads[0]))
    assert not np.any(s_star)


# --- balancing ---

def test_balance_equalizes_column_norms():
    factors = [np.array([[2.0]]), np.array([[1.0]]), np.array([[0.0], [1.0]])]
    balanced = balance_factors(factors)
    for f in balanced:
        assert np.linalg.norm(f) == pytest.approx(2 ** (1 / 3))
    np.testing.assert_allclose(reconstruct(balanced), reconstruct(factors), atol=1e-14)


@pytest.mark.parametrize("seed", range(100))
def test_balance_keeps_tensor_and_surrogate(seed):
    rng = np.random.default_rng(seed)
    dims = DIMS_BY_ORDER[seed % 3]
    factors = [f * rng.uniform(0.1, 10.0) for f in random_factors(rng, dims, 1 + seed % 4)]
    balanced = balance_factors(factors)
    before = reconstruct(factors)
    assert np.linalg.norm(reconstruct(balanced) - before) <= 1e-10 * np.linalg.norm(before)

    surrogate = atomic_norm_surrogate(KruskalTensor(tuple(factors)))
    assert atomic_norm_surrogate(KruskalTensor(tuple(balanced))) == pytest.approx(surrogate, rel=1e-12)
    assert factorized_regularizer(balanced, 1.0) == pytest.approx(surrogate, rel=1e-12)
    assert factorized_regularizer(balanced, 1.0) <= factorized_regularizer(factors, 1.0) * (1 + 1e-12)


def test_balance_is_idempotent(rng):
    once = balance_factors(random_factors(rng, (3, 4, 5), 3))
    twice = balance_factors(once)
    for a, b in zip(once, twice):
        np.testing.assert_allclose(a, b, atol=1e-14)


def test_balance_zeroes_dead_terms(rng):
    factors = random_factors(rng, (3, 4, 5), 2)
    factors[2][:, 0] = 0.0
    balanced = balance_factors(factors)
    for f in balanced:
        assert not np.any(f[:, 0])
    np.testing.assert_allclose(reconstruct(balanced), reconstruct(factors), atol=1e-12)


def test_global_check_needs_a_zero_column(rng):
    factors = random_factors(rng, (3, 4, 5), 2)
    assert not global_optimality_check(factors, 0.0)
    factors[1][:, 0] = 0.0
    assert global_optimality_check(factors, 1e-12, grad_tol=1e-9)
    assert not global_optimality_check(factors, 1e-3, grad_tol=1e-9)


def test_global_check_all_zero_factors():
    assert global_optimality_check([np.zeros((2, 3))] * 3, 0.0)


def test_numerical_rank_counts_live_terms(rng):
    factors = random_factors(rng, (3, 4, 5), 4)
    factors[0][:, 2] = 0.0
    assert numerical_rank(factors) == 3
    assert numerical_rank([np.zeros((2, 2))] * 3) == 0


# --- L-BFGS ---

def test_lbfgs_minimizes_rosenbrock():
    result = minimize_lbfgs(
        lambda x: (rosen(x), rosen_der(x)), np.array([-1.2, 1.0, -0.5, 0.8]),
        max_iters=1000, memory=10, grad_tol=1e-6,
    )
    assert result.status == "converged"
    np.testing.assert_allclose(result.x, np.ones(4), atol=1e-4)
    assert all(b <= a + 1e-12 for a, b in zip(result.f_trace, result.f_trace[1:]))


def test_lbfgs_reports_divergence_on_nonfinite_start():
    result = minimize_lbfgs(lambda x: (np.inf, x), np.ones(2), max_iters=10, memory=3, grad_tol=1e-8)
    assert result.status == "diverged"
    assert result.iterations == 0


def test_lbfgs_zero_iterations_keeps_start():
    x0 = np.array([3.0, -1.0])
    result = minimize_lbfgs(lambda x: (x @ x, 2 * x), x0, max_iters=0, memory=3, grad_tol=1e-12)
    np.testing.assert_array_equal(result.x, x0)
    assert result.status == "max_iters"


# --- solves ---

def test_solve_recovers_clean_rank_one(rng):
    vectors = [rng.standard_normal(d) for d in (6, 5, 4)]
    truth = rank_one(vectors)
    cfg = SolverConfig(rank_bound=1, lambda_x=1e-5, lambda_s=1e-3, seed=3)
    report = lbfgs_solve(truth, cfg)
    assert rel_error(report.lowrank, truth) < 1e-3
    assert report.status in ("converged", "max_iters", "line_search_failed")
    assert len(report.objective_trace) == report.iterations + 1


def test_solve_zero_input_gives_zero_factors():
    cfg = SolverConfig(rank_bound=3)
    report = lbfgs_solve(np.zeros((3, 4, 5)), cfg)
    assert report.converged
    assert report.objective == 0.0
    for f in report.factors.factors:
        assert not np.any(f)
    assert report.global_cert


def test_solve_objective_trace_is_monotone(rng):
    z = reconstruct(random_factors(rng, (6, 5, 4), 2))
    z[0, 0, 0] += 5.0
    cfg = SolverConfig(rank_bound=4, lambda_x=1e-2, lambda_s=0.5, max_iters=300, seed=2)
    report = lbfgs_solve(z, cfg)
    trace = report.objective_trace
    assert len(trace) == report.iterations + 1
    assert all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(trace, trace[1:]))
    np.testing.assert_allclose(report.sparse, shrink(z - report.lowrank, cfg.lambda_s), atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_surplus_terms_left_at_zero_certify_global_optimum(seed):
    rng = np.random.default_rng(seed)
    truth = random_factors(rng, (4, 3, 5), 1)
    z = reconstruct(truth)
    start = tuple(
        np.hstack([f + 0.05 * rng.standard_normal(f.shape), np.zeros((f.shape[0], 3))]) for f in truth
    )
    cfg = SolverConfig(
        rank_bound=4, lambda_x=0.1, lambda_s=10.0, grad_tol=1e-6, max_iters=500, init_factors=start,
    )
    report = lbfgs_solve(z, cfg)
    assert report.converged
    assert report.global_cert
    assert numerical_rank(report.factors.factors) == 1
    assert rel_error(report.lowrank, z) < 0.1


def test_random_start_with_live_columns_is_not_certified(rng):
    z = reconstruct(random_factors(rng, (4, 3, 5), 1))
    report = lbfgs_solve(z, SolverConfig(rank_bound=3, lambda_x=0.1, lambda_s=10.0, max_iters=5, seed=0))
    assert not report.global_cert


def test_warm_start_shape_is_checked():
    start = (np.zeros((4, 2)), np.zeros((3, 2)), np.zeros((5, 3)))
    with pytest.raises(DimensionMismatchError):
        lbfgs_solve(np.zeros((4, 3, 5)), SolverConfig(rank_bound=2, init_factors=start))


def test_solve_rejects_wrong_order():
    with pytest.raises(DimensionMismatchError):
        lbfgs_solve(np.zeros((3, 3)), SolverConfig(rank_bound=1))


def test_symmetric_solve_aligns_with_generator(rng):
    nu = rng.standard_normal(5)
    nu *= 2.0 / np.linalg.norm(nu)
    z = rank_one([nu, nu, nu])
    report = symmetric_solve(z, SolverConfig(rank_bound=1, lambda_x=1e-5, lambda_s=1e-3, seed=1))
    a = report.factors.factors[0][:, 0]
    cosine = abs(a @ nu) / (np.linalg.norm(a) * np.linalg.norm(nu))
    assert cosine > 0.999
    assert all(np.array_equal(f, report.factors.factors[0]) for f in report.factors.factors)


def test_symmetric_solve_zero_input():
    report = symmetric_solve(np.zeros((4, 4, 4)), SolverConfig(rank_bound=2))
    assert not np.any(report.factors.factors[0])


def test_symmetric_solve_needs_cubic_tensor():
    with pytest.raises(DimensionMismatchError):
        symmetric_solve(np.zeros((3, 4, 3)), SolverConfig(rank_bound=1, symmetric=True))


def test_order_two_matches_nuclear_norm_rpca(rng):
    m = rng.standard_normal((5, 5))
    cfg = SolverConfig(rank_bound=6, lambda_x=0.1, lambda_s=0.3, order=2, grad_tol=1e-10, max_iters=3000)
    report = lbfgs_solve(m, cfg)
    reference = lagrangian_rpca(m, 0.1, 0.3)
    assert report.objective == pytest.approx(reference.objective, rel=1e-4)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rank_bound=0)
    with pytest.raises(ValueError):
        SolverConfig(rank_bound=2, lambda_s=0.0)
    with pytest.raises(ValueError):
        SolverConfig(rank_bound=2, memory=0)


# --- reporting ---

def test_write_report_outputs(rng, tmp_path):
    vectors = [rng.standard_normal(d) for d in (4, 3, 5)]
    z = rank_one(vectors)
    report = lbfgs_solve(z, SolverConfig(rank_bound=2, max_iters=50))
    paths = write_report(report, tmp_path / "out" / "run")

    np.testing.assert_array_equal(read_tnsr(paths["lowrank"]), report.lowrank)
    np.testing.assert_array_equal(read_tnsr(paths["sparse"]), report.sparse)
    factors = read_factors(paths["factors"], z.shape)
    for a, b in zip(factors.factors, report.factors.factors):
        np.testing.assert_array_equal(a, b)

    trace = pd.read_csv(paths["trace"])
    assert list(trace.columns) == ["iteration", "objective", "grad_norm"]
    assert len(trace) == report.iterations + 1


def test_summary_fields(rng):
    z = rank_one([rng.standard_normal(d) for d in (3, 3, 3)])
    report = lbfgs_solve(z, SolverConfig(rank_bound=2, max_iters=20))
    summary = summarize(report, z)
    assert summary["degrees_of_freedom"] == summary["numerical_rank"] * 9
    assert 0.0 <= summary["sparsity_percent"] <= 100.0
    text = format_summary(summary)
    assert f"status={report.status}" in text.splitlines()
    assert "global_cert=" in text
