import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from backflow import (
    BudgetExceededError,
    ConvergenceControl,
    ConvergenceError,
    DomainError,
    OperatorSpec,
    converge_lambda_max,
    discretize,
    largest_eigenpair,
)
from backflow.eigensolve import _tail_extrapolate, lanczos_top


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return (a + a.T) / 2


def test_scalar_matrix():
    res = largest_eigenpair(np.array([[0.3]]))
    assert res.lambda_max == 0.3
    np.testing.assert_array_equal(res.top_eigenvector, [1.0])


def test_diagonal_matrix():
    res = largest_eigenpair(np.diag([0.1, 0.3, -0.5]), k=3)
    np.testing.assert_allclose(res.top_eigenvalues, [0.3, 0.1, -0.5])
    assert res.lambda_max == res.top_eigenvalues[0]


def test_eigenvector_sign_and_norm():
    res = largest_eigenpair(-np.diag([0.1, 0.3, -0.5]))
    assert res.top_eigenvector[np.argmax(np.abs(res.top_eigenvector))] > 0
    assert np.linalg.norm(res.top_eigenvector) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("k", [0, 4])
def test_k_out_of_range(k):
    with pytest.raises(DomainError):
        largest_eigenpair(np.eye(3), k=k)


@settings(max_examples=12, deadline=None)
@given(st.integers(50, 400), st.integers(0, 10_000))
def test_dense_and_lanczos_agree(n, seed):
    a = random_symmetric(n, seed)
    dense = largest_eigenpair(a, k=3, method="dense")
    lanczos = largest_eigenpair(a, k=3, method="lanczos")
    assert abs(dense.lambda_max - lanczos.lambda_max) <= 1e-9
    assert abs(abs(dense.top_eigenvector @ lanczos.top_eigenvector) - 1) <= 1e-8


def test_lanczos_path_on_operator():
    op = discretize(OperatorSpec(u0=-1.0, u_max=12.0, n=1500))
    auto = largest_eigenpair(op, k=2)
    assert auto.method == "lanczos"
    dense = largest_eigenpair(op, k=2, method="dense")
    assert abs(auto.lambda_max - dense.lambda_max) <= 1e-9
    norm = np.linalg.norm(op.matrix, 2)
    assert auto.residual <= 1e-10 * norm


def test_lanczos_budget_error():
    a = random_symmetric(200, 1)
    with pytest.raises(ConvergenceError) as info:
        lanczos_top(a, k=1, max_iter=6)
    assert info.value.best_residual > 0


@pytest.mark.parametrize("u0", [-2.0, 0.0, 1.0])
def test_top_pair_residual_and_rayleigh(u0):
    op = discretize(OperatorSpec(u0=u0, u_max=u0 + 10, n=500))
    res = largest_eigenpair(op, k=4)
    psi = res.top_eigenvector
    m = op.matrix
    assert np.linalg.norm(m @ psi - res.lambda_max * psi) <= 1e-10 * np.linalg.norm(m, 2)
    assert abs(psi @ m @ psi - res.lambda_max) <= 1e-12
    assert np.all(np.diff(res.top_eigenvalues) <= 0)
    assert np.all(np.abs(res.top_eigenvalues) <= 1.001)


def test_tail_extrapolation_exact_for_model():
    values = [1.0 - 0.3 / L - 0.2 / L**2 for L in (8, 16, 32)]
    est, err = _tail_extrapolate(values)
    assert est == pytest.approx(1.0, abs=1e-14)
    assert err >= 0


def test_converge_at_zero():
    est = converge_lambda_max(0.0, ConvergenceControl(tol=1e-4))
    assert abs(est.lambda_max - 0.0384517) <= 1e-4
    assert est.error_estimate < 1e-4
    last, prev = est.history[-1][2], est.history[-2][2]
    assert est.error_estimate >= abs(last - prev) / 3
    assert est.n_final == est.history[-1][0]


def test_converge_at_three_vs_oracle(oracle):
    est = converge_lambda_max(3.0, ConvergenceControl(tol=1e-4))
    assert 0 < est.lambda_max < 0.005
    assert est.lambda_max - est.error_estimate > 0
    # both are ~1e-13; agreement to well within the tolerance
    assert abs(est.lambda_max - oracle[3.0]) < 1e-4


def test_converge_deep_negative_vs_oracle(oracle):
    est = converge_lambda_max(-4.0, ConvergenceControl(tol=1e-4))
    assert 0.9 < est.lambda_max < 1
    assert abs(est.lambda_max - oracle[-4.0]) <= 1e-4


@pytest.mark.parametrize("u0", [-2.0, 0.0, 2.0])
def test_truncation_changes_within_declared_delta(u0):
    # raw window values at fixed density; each widening moves lambda by no
    # more than the change declared at the previous level
    ctrl = ConvergenceControl(tol=1e-4)
    length = ctrl.initial_window(u0)
    base = ctrl.n_init / length
    vals = []
    for k in range(4):
        L = length * 2**k
        op = discretize(OperatorSpec(u0=u0, u_max=u0 + L, n=ctrl.node_count(u0, L, base)))
        vals.append(largest_eigenpair(op, dense_limit=5000).lambda_max)
    deltas = [abs(b - a) for a, b in zip(vals, vals[1:])]
    for prev, nxt in zip(deltas, deltas[1:]):
        assert nxt <= prev + 1e-12


def test_reproducible_history():
    from backflow.eigensolve import _converge_cached
    ctrl = ConvergenceControl(tol=1e-3)
    first = converge_lambda_max(-0.7, ctrl)
    _converge_cached.cache_clear()
    second = converge_lambda_max(-0.7, ctrl)
    assert first == second


def test_budget_exceeded_carries_estimate():
    ctrl = ConvergenceControl(tol=1e-6, max_n=2000)
    with pytest.raises(BudgetExceededError) as info:
        converge_lambda_max(0.0, ctrl)
    assert math.isfinite(info.value.best_estimate)
    assert info.value.error_estimate > 0


def test_control_validation():
    with pytest.raises(DomainError):
        ConvergenceControl(tol=0)
    with pytest.raises(DomainError):
        ConvergenceControl(n_init=500, max_n=600)
    with pytest.raises(DomainError):
        converge_lambda_max(math.nan)


def test_gauss_legendre_cross_check():
    ctrl = ConvergenceControl(tol=1e-4, scheme="composite-gauss-legendre")
    est = converge_lambda_max(0.0, ctrl)
    mid = converge_lambda_max(0.0, ConvergenceControl(tol=1e-4))
    assert abs(est.lambda_max - mid.lambda_max) <= est.error_estimate + mid.error_estimate + 1e-4
