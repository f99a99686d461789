import numpy as np
import pytest

from helpers import frame_of, random_bank, random_instance
from subband_adapt import oracle
from subband_adapt.core import UpdateParams, gptnsaf_direction, regularized_update
from subband_adapt.core import SubbandFrame

SEEDS = range(100)


def small_instance(seed, length=8, bands=2, filter_len=4):
    rng = np.random.default_rng(seed)
    U, h, d, s, w = random_instance(rng, length, bands, filter_len)
    tau = rng.choice([0.0, 1e-4, 0.1])
    return U, h, d, s, w, tau


def test_ast_state_round_trip(rng):
    s = rng.standard_normal(10)
    w = rng.uniform(0.1, 2.0, 10)
    state = oracle.AstState.from_taps(s, w)
    np.testing.assert_allclose(state.q, s / np.sqrt(w), rtol=1e-12)
    np.testing.assert_allclose(state.taps, s, rtol=1e-12)


# cost


def test_cost_zero_point():
    U = np.ones((6, 3))
    h = random_bank(np.random.default_rng(0), 3, 2)
    assert oracle.cost(np.zeros(6), U, np.zeros(3), h, np.ones(6), 0.5) == 0.0


def test_cost_zero_at_matching_taps(rng):
    U, h, _, s, w = random_instance(rng)
    d = U.T @ s
    q = s / np.sqrt(w)
    assert oracle.cost(q, U, d, h, w, 0.0) == pytest.approx(0.0, abs=1e-24)


@pytest.mark.parametrize("seed", range(10))
def test_cost_loop_and_vector_forms_agree(seed):
    U, h, d, s, w, tau = small_instance(seed)
    q = s / np.sqrt(w)
    e = h.T @ (d - U.T @ s)
    direct = float(e @ e + tau * q @ q)
    assert oracle.cost(q, U, d, h, w, tau) == pytest.approx(direct, rel=1e-12)
    assert oracle.cost_function(U, d, h, w, tau)(q) == pytest.approx(direct, rel=1e-12)


# gradient and Hessian


def test_gradient_matches_finite_differences():
    for seed in SEEDS:
        U, h, d, s, w, tau = small_instance(seed)
        q = s / np.sqrt(w)
        analytic = oracle.analytic_gradient(q, U, d, h, w, tau)
        numeric = oracle.numeric_gradient(oracle.cost_function(U, d, h, w, tau), q)
        tol = max(1e-6, 1e-4 * np.linalg.norm(analytic))
        assert np.max(np.abs(analytic - numeric)) <= tol, seed


def test_gradient_vanishes_at_stationary_point(rng):
    U, h, _, s, w = random_instance(rng)
    q = s / np.sqrt(w)
    d = U.T @ s
    assert np.max(np.abs(oracle.analytic_gradient(q, U, d, h, w, 0.0))) < 1e-12
    numeric = oracle.numeric_gradient(oracle.cost_function(U, d, h, w, 0.0), q)
    assert np.max(np.abs(numeric)) < 1e-6


def test_gradient_pure_regularizer(rng):
    q = rng.standard_normal(8)
    h = random_bank(rng, 4, 2)
    grad = oracle.analytic_gradient(q, np.zeros((8, 4)), np.zeros(4), h, np.ones(8), 0.3)
    assert np.array_equal(grad, 2 * 0.3 * q)


def test_hessian_matches_finite_differences():
    for seed in SEEDS:
        U, h, d, s, w, tau = small_instance(seed)
        q = s / np.sqrt(w)
        analytic = oracle.analytic_hessian(U, h, w, tau)
        numeric = oracle.numeric_hessian(oracle.cost_function(U, d, h, w, tau), q)
        tol = max(1e-4, 1e-3 * np.linalg.norm(analytic))
        assert np.max(np.abs(analytic - numeric)) <= tol, seed


def test_hessian_pure_regularizer(rng):
    h = random_bank(rng, 4, 2)
    hess = oracle.analytic_hessian(np.zeros((8, 4)), h, np.ones(8), 0.25)
    np.testing.assert_array_equal(hess, 0.5 * np.eye(8))
    numeric = oracle.numeric_hessian(oracle.cost_function(np.zeros((8, 4)), np.zeros(4), h, np.ones(8), 0.25),
                                     rng.standard_normal(8))
    np.testing.assert_allclose(numeric, 0.5 * np.eye(8), atol=1e-6)


def test_hessian_is_positive_definite(rng):
    U, h, _, _, w = random_instance(rng)
    hess = oracle.analytic_hessian(U, h, w, 1e-3)
    np.testing.assert_array_equal(hess, hess.T)
    assert np.linalg.eigvalsh(hess).min() >= 2e-3 * (1 - 1e-6)


# Newton step vs engine


def test_newton_trivial_cases(rng):
    q = rng.standard_normal(6)
    hess = np.eye(6)
    assert np.array_equal(oracle.dense_newton_step(q, np.zeros(6), hess, 0.5, 1e-6), q)
    assert np.array_equal(oracle.dense_newton_step(q, rng.standard_normal(6), hess, 0.0, 1e-6), q)


def test_engine_matches_dense_newton():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        U, h, d, s, w = random_instance(rng, 12, 3, 5)
        mu = rng.uniform(0.05, 1.0)
        got = regularized_update(s, frame_of(U, h, d, s), w, UpdateParams(mu, 1e-6, 1e-4))
        want = oracle.newton_update_s(s, U, d, h, w, mu, 1e-6, 1e-4)
        assert np.max(np.abs(got - want)) <= 1e-8 * max(1.0, np.max(np.abs(want))), seed


def test_engine_matches_q_domain_update():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        L = int(rng.integers(4, 17))
        M = int(rng.integers(1, 5))
        U, h, d, s, w = random_instance(rng, L, M, M + 2)
        got = regularized_update(s, frame_of(U, h, d, s), w, UpdateParams(0.3, 1e-6, 1e-4))
        q_next = oracle.q_domain_update(s / np.sqrt(w), U, d, h, w, 0.3, 1e-6, 1e-4)
        want = np.sqrt(w) * q_next
        assert np.max(np.abs(got - want)) <= 1e-9 * max(1.0, np.max(np.abs(want))), seed


def test_tau_zero_matches_direction_exactly():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        U, h, d, s, w = random_instance(rng, 12, 3, 5)
        frame = frame_of(U, h, d, s)
        got = regularized_update(s, frame, w, UpdateParams(0.2, 1e-6, 0.0))
        assert np.array_equal(got, s + 0.2 * gptnsaf_direction(frame, w, 1e-6)), seed


def test_engine_step_decreases_cost():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        U, h, _, s, w = random_instance(rng, 12, 3, 5)
        d = U.T @ rng.standard_normal(12)
        got = regularized_update(s, frame_of(U, h, d, s), w, UpdateParams(0.01, 1e-6, 0.0))
        J = oracle.cost_function(U, d, h, w, 0.0)
        assert J(got / np.sqrt(w)) < J(s / np.sqrt(w)), seed


# sum form


def test_sum_form_single_band_is_ptnlms(rng):
    u = rng.standard_normal(12)
    w = rng.uniform(0.1, 2.0, 12)
    np.testing.assert_allclose(
        oracle.ptnsaf_sum_direction(u[:, None], np.array([0.7]), w, 1e-6),
        oracle.ptnlms_direction(u, 0.7, w, 1e-6),
        rtol=1e-14,
    )


def test_sum_form_matches_matrix_form_when_w_orthogonal():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        w = rng.uniform(0.1, 2.0, 12)
        u_b = oracle.w_orthogonal_inputs(rng, 12, 3, w)
        e_b = rng.standard_normal(3)
        g = gptnsaf_direction(SubbandFrame(u_b, e_b), w, 1e-6)
        want = oracle.ptnsaf_sum_direction(u_b, e_b, w, 1e-6)
        np.testing.assert_allclose(g, want, rtol=1e-10, atol=1e-12, err_msg=str(seed))


def test_dense_direction_matches_engine_across_seeds():
    for seed in SEEDS:
        rng = np.random.default_rng(seed)
        L = int(rng.integers(4, 17))
        M = int(rng.integers(1, min(L, 4) + 1))
        U, h, d, s, w = random_instance(rng, L, M, M + 3)
        frame = frame_of(U, h, d, s)
        g = gptnsaf_direction(frame, w, 1e-3)
        want = oracle.dense_direction(frame.u_b, frame.e_b, w, 1e-3)
        assert np.linalg.norm(g - want) <= 1e-9 * max(1.0, np.linalg.norm(want)), seed


# brute-force helpers


def test_gaussian_elimination_agrees_with_numpy(rng):
    a = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    b = rng.standard_normal(6)
    np.testing.assert_allclose(oracle.gaussian_elimination_solve(a, b), np.linalg.solve(a, b), rtol=1e-10)


def test_eigen_bank_is_orthonormal(rng):
    U = rng.standard_normal((10, 5))
    h = oracle.eigen_bank(U, rng.uniform(0.5, 1.5, 10), 3)
    np.testing.assert_allclose(h.T @ h, np.eye(3), atol=1e-12)
