import numpy as np
import pytest

from src.baselines.admm import AdmmConfig, BaselineResult, balance_penalty
from src.baselines.horpca import horpca_c, horpca_s, hosvd_truncate
from src.baselines.matrix_rpca import (
    default_lambda,
    lagrangian_rpca,
    matrix_rpca,
    nuclear_norm,
    project_l1_ball,
    project_nuclear_ball,
    rpca_admm,
    svt,
)
from src.harness.metrics import rel_error
from src.tensor_core.dense import matricize, mode_multiply, rank_one
from src.tensor_core.errors import DimensionMismatchError


def sparse_corruption(rng, dims, fraction, magnitude=1.0):
    size = int(np.prod(dims))
    s = np.zeros(size)
    picks = rng.choice(size, size=int(round(fraction * size)), replace=False)
    s[picks] = magnitude * rng.uniform(-1.0, 1.0, picks.size)
    return s.reshape(dims, order="F")


# --- svt and projections ---

def test_svt_zero_threshold_reproduces(rng):
    m = rng.standard_normal((6, 4))
    np.testing.assert_allclose(svt(m, 0.0), m, atol=1e-10)


def test_svt_large_threshold_kills_everything(rng):
    m = rng.standard_normal((5, 5))
    sigma_max = np.linalg.norm(m, 2)
    assert not np.any(np.abs(svt(m, sigma_max)) > 1e-12)


def test_svt_shifts_rank_one_singular_value(rng):
    u = rng.standard_normal(5)
    v = rng.standard_normal(4)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    np.testing.assert_allclose(svt(5 * np.outer(u, v), 2.0), 3 * np.outer(u, v), atol=1e-12)


def test_svt_rejects_negative_threshold():
    with pytest.raises(ValueError):
        svt(np.eye(2), -1.0)


def test_svt_is_the_nuclear_prox(rng):
    m = rng.standard_normal((6, 5))
    tau = 0.8

    def prox_objective(y):
        return 0.5 * np.sum((y - m) ** 2) + tau * nuclear_norm(y)

    best = svt(m, tau)
    value = prox_objective(best)
    for _ in range(100):
        assert value <= prox_objective(best + 0.1 * rng.standard_normal(m.shape)) + 1e-12


def test_l1_ball_projection(rng):
    x = rng.standard_normal(20) * 3
    p = project_l1_ball(x, 2.0)
    assert np.sum(np.abs(p)) == pytest.approx(2.0)
    assert np.all(np.sign(p[p != 0]) == np.sign(x[p != 0]))
    inside = np.array([0.1, -0.2])
    np.testing.assert_array_equal(project_l1_ball(inside, 1.0), inside)
    assert not np.any(project_l1_ball(x, 0.0))
    np.testing.assert_array_equal(project_l1_ball(x, np.inf), x)


def test_nuclear_ball_projection(rng):
    m = rng.standard_normal((5, 4)) * 4
    p = project_nuclear_ball(m, 1.5)
    assert nuclear_norm(p) == pytest.approx(1.5)


# --- config and result plumbing ---

def test_admm_config_validation():
    with pytest.raises(ValueError):
        AdmmConfig(rho=0.0)
    with pytest.raises(ValueError):
        AdmmConfig(mode_weights=(1.0, -1.0, 1.0))
    with pytest.raises(ValueError):
        AdmmConfig(balance_ratio=1.0)


def test_balance_penalty_rules():
    cfg = AdmmConfig()
    assert balance_penalty(1.0, 100.0, 1.0, cfg) == 2.0
    assert balance_penalty(1.0, 1.0, 100.0, cfg) == 0.5
    assert balance_penalty(1.0, 1.0, 2.0, cfg) == 1.0


def test_baseline_result_unpacks():
    x, s = BaselineResult(np.ones(2), np.zeros(2), 1, True, 0.0, 0.0)
    np.testing.assert_array_equal(x, np.ones(2))
    np.testing.assert_array_equal(s, np.zeros(2))


# --- matrix RPCA ---

def test_default_lambda_rules(random_lowrank):
    x = random_lowrank((4, 5, 6), 2)
    assert default_lambda(x, 1) == pytest.approx(1 / np.sqrt(30))
    assert default_lambda(x, 1, truth=(x, np.zeros_like(x))) == np.inf
    s = np.zeros_like(x)
    s[0, 0, 0] = 2.0
    assert default_lambda(x, 1, truth=(x, s)) == pytest.approx(nuclear_norm(matricize(x, 1)) / 2.0)


@pytest.mark.parametrize("method", ["alm", "variational"])
def test_matrix_rpca_recovers_clean_lowrank(random_lowrank, method):
    x = random_lowrank((10, 10, 10), 2)
    result = matrix_rpca(x, mode=1, truth=(x, np.zeros_like(x)), method=method)
    assert rel_error(result.lowrank, x) < 1e-3
    assert result.lowrank.shape == x.shape


@pytest.mark.parametrize("method", ["alm", "variational"])
def test_matrix_rpca_zero_input(method):
    result = matrix_rpca(np.zeros((3, 4, 5)), method=method)
    assert not np.any(result.lowrank)
    assert not np.any(result.sparse)
    assert result.converged


def test_matrix_rpca_on_flat_tensor_matches_matrix_solve(rng):
    z = rng.standard_normal((6, 5, 1))
    lam = 0.5
    folded = matrix_rpca(z, mode=1, lam=lam)
    direct = rpca_admm(z[:, :, 0], lam)
    np.testing.assert_allclose(folded.lowrank[:, :, 0], direct.lowrank, atol=1e-10)
    np.testing.assert_allclose(folded.sparse[:, :, 0], direct.sparse, atol=1e-10)


def test_matrix_rpca_rejects_bad_inputs(rng):
    z = rng.standard_normal((3, 3, 3))
    with pytest.raises(ValueError):
        matrix_rpca(z, lam=-1.0)
    with pytest.raises(ValueError):
        matrix_rpca(z, method="unknown")


def test_rpca_admm_meets_feasibility(rng):
    m = np.outer(rng.standard_normal(8), rng.standard_normal(8))
    m[2, 3] += 5.0
    result = rpca_admm(m, 1 / np.sqrt(8), eps=1e-6, cfg=AdmmConfig(max_iters=5000))
    assert result.feasibility(m) <= 1e-6


def test_lagrangian_rpca_is_stationary(rng):
    m = rng.standard_normal((5, 4))
    result = lagrangian_rpca(m, 0.2, 0.3)
    low = result.lowrank
    # optimality: low = svt(low - grad, lambda_x) for the Huber gradient
    grad = low + result.sparse - m
    np.testing.assert_allclose(svt(low - grad, 0.2), low, atol=1e-6)


# --- HoRPCA ---

def test_hosvd_truncate_keeps_tucker_tensor(rng):
    core = rng.standard_normal((2, 2, 2))
    bases = [np.linalg.qr(rng.standard_normal((d, 2)))[0] for d in (5, 4, 6)]
    t = mode_multiply(core, *bases)
    np.testing.assert_allclose(hosvd_truncate(t, (2, 2, 2)), t, atol=1e-10)
    with pytest.raises(DimensionMismatchError):
        hosvd_truncate(t, (2, 2))


def test_horpca_s_recovers_rank_one(rng):
    x = rank_one([rng.standard_normal(d) for d in (6, 5, 4)])
    result = horpca_s(x, nuclear_weight=0.1, cfg=AdmmConfig(max_iters=3000))
    assert rel_error(result.lowrank, x) < 1e-3
    assert result.method == "snn"


def test_horpca_s_sparse_only_input(rng):
    z = sparse_corruption(rng, (6, 6, 6), 10 / 216, magnitude=5.0)
    result = horpca_s(z, cfg=AdmmConfig(max_iters=3000))
    assert np.linalg.norm(result.lowrank) <= 1e-3 * np.linalg.norm(z)
    assert rel_error(result.sparse, z) < 1e-3


def test_horpca_s_weight_validation():
    with pytest.raises(ValueError):
        horpca_s(np.zeros((2, 2, 2)), nuclear_weight=-1.0)
    with pytest.raises(DimensionMismatchError):
        horpca_s(np.zeros((2, 2, 2)), cfg=AdmmConfig(mode_weights=(1.0, 1.0)))


def test_horpca_c_recovers_tucker_one_tensor(rng):
    x = rank_one([rng.standard_normal(d) for d in (5, 6, 4)])
    result = horpca_c(x, (1, 1, 1))
    assert result.converged
    assert rel_error(result.lowrank, x) < 1e-3
    assert result.method == "constrained"


def test_horpca_c_full_ranks_absorb_everything(rng):
    z = rng.standard_normal((3, 4, 5))
    result = horpca_c(z, z.shape)
    np.testing.assert_allclose(result.lowrank, z, atol=1e-10)
    assert np.linalg.norm(result.sparse) <= 1e-10


def test_horpca_c_rank_validation():
    with pytest.raises(ValueError):
        horpca_c(np.zeros((3, 3, 3)), (0, 1, 1))
    with pytest.raises(ValueError):
        horpca_c(np.zeros((3, 3, 3)), (4, 1, 1))
    with pytest.raises(DimensionMismatchError):
        horpca_c(np.zeros((3, 3, 3)), (1, 1))


# --- beyond the side length ---

@pytest.fixture
def high_rank_instance(rng, random_lowrank):
    x = random_lowrank((20, 20, 20), 25)
    s = sparse_corruption(rng, x.shape, 0.05, magnitude=np.abs(x).max())
    return x, x + s


@pytest.mark.slow
def test_matrix_rpca_fails_past_side_length(high_rank_instance):
    x, z = high_rank_instance
    s = z - x
    result = matrix_rpca(z, truth=(x, s), method="variational")
    assert rel_error(result.lowrank, x) > 1e-3


@pytest.mark.slow
def test_horpca_s_fails_past_side_length(high_rank_instance):
    x, z = high_rank_instance
    assert rel_error(horpca_s(z).lowrank, x) > 1e-3


@pytest.mark.slow
def test_horpca_c_fails_past_side_length(high_rank_instance):
    x, z = high_rank_instance
    assert rel_error(horpca_c(z, (20, 20, 20)).lowrank, x) > 1e-3
