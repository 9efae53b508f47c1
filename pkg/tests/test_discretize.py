import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from backflow import DomainError, OperatorSpec, assemble_operator, build_grid, kernel_eval, largest_eigenpair
from backflow.discretize import GAUSS_LEGENDRE, UNIFORM
from backflow.kernel import kernel_matrix


def test_uniform_grid_example():
    grid = build_grid(OperatorSpec(u0=0, u_max=10, n=5))
    np.testing.assert_array_equal(grid.nodes, [1, 3, 5, 7, 9])
    np.testing.assert_array_equal(grid.weights, [2, 2, 2, 2, 2])


def test_two_point_gauss_legendre_panel():
    grid = build_grid(OperatorSpec(u0=-1, u_max=1, n=2, scheme=GAUSS_LEGENDRE, panel_order=2))
    np.testing.assert_allclose(grid.nodes, [-1 / math.sqrt(3), 1 / math.sqrt(3)], rtol=1e-15)
    np.testing.assert_allclose(grid.weights, [1, 1], rtol=1e-15)


@given(st.floats(-10, 10), st.floats(0.1, 60), st.integers(1, 400),
       st.sampled_from([UNIFORM, GAUSS_LEGENDRE]))
def test_grid_invariants(u0, length, n, scheme):
    spec = OperatorSpec(u0=u0, u_max=u0 + length, n=n, scheme=scheme)
    grid = build_grid(spec)
    assert np.all(np.diff(grid.nodes) > 0)
    assert np.all(grid.weights > 0)
    assert grid.nodes[0] > spec.u0 and grid.nodes[-1] < spec.u_max
    assert math.isclose(grid.weights.sum(), spec.u_max - spec.u0, rel_tol=1e-12)
    if scheme == GAUSS_LEGENDRE:
        assert n <= len(grid) < n + spec.panel_order


@pytest.mark.parametrize("kwargs", [
    dict(u0=0, u_max=1, n=0),
    dict(u0=1, u_max=1, n=4),
    dict(u0=2, u_max=1, n=4),
    dict(u0=0, u_max=1, n=4, scheme="trapezoid"),
])
def test_spec_rejects_bad_input(kwargs):
    with pytest.raises(DomainError):
        OperatorSpec(**kwargs)


def test_single_node_operator():
    spec = OperatorSpec(u0=0, u_max=2, n=1)
    op = assemble_operator(build_grid(spec), spec)
    assert op.matrix.shape == (1, 1)
    assert op.matrix[0, 0] == pytest.approx(-4 / math.pi, rel=1e-15)
    assert op.matrix[0, 0] == pytest.approx(-1.2732395, abs=1e-7)


def test_two_node_operator():
    spec = OperatorSpec(u0=0, u_max=2, n=2)
    op = assemble_operator(build_grid(spec), spec)
    assert op.matrix[0, 1] == op.matrix[1, 0]
    assert op.matrix[0, 1] == pytest.approx(-math.sin(2) / math.pi, rel=1e-14)
    assert op.matrix[0, 1] == pytest.approx(-0.2894384, abs=1e-7)
    assert op.matrix[0, 1] == kernel_eval(0.5, 1.5)


@pytest.mark.parametrize("scheme", [UNIFORM, GAUSS_LEGENDRE])
@pytest.mark.parametrize("u0", [-3.0, 0.0, 1.7])
def test_assembly_exactly_symmetric_and_diagonal(scheme, u0):
    spec = OperatorSpec(u0=u0, u_max=u0 + 9, n=600, scheme=scheme)
    grid = build_grid(spec)
    op = assemble_operator(grid, spec)
    assert np.max(np.abs(op.matrix - op.matrix.T)) == 0.0
    diag = np.diag(op.matrix)
    np.testing.assert_array_equal(diag, grid.weights * (-2 * grid.nodes / math.pi))
    np.testing.assert_array_equal(diag, [w * kernel_eval(u, u) for u, w in zip(grid.nodes, grid.weights)])


def test_matrix_entries_match_definition():
    spec = OperatorSpec(u0=-0.5, u_max=4, n=37, scheme=GAUSS_LEGENDRE)
    grid = build_grid(spec)
    op = assemble_operator(grid, spec)
    i, j = 5, 22
    expected = math.sqrt(grid.weights[i] * grid.weights[j]) * kernel_eval(grid.nodes[i], grid.nodes[j])
    assert op.matrix[i, j] == expected


def test_assembly_is_read_only():
    spec = OperatorSpec(u0=0, u_max=1, n=3)
    op = assemble_operator(build_grid(spec), spec)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_similarity_to_plain_nystrom(n, seed):
    rng = np.random.default_rng(seed)
    nodes = np.sort(rng.uniform(-3, 3, n))
    if np.any(np.diff(nodes) <= 0):
        return
    weights = rng.uniform(0.05, 1.0, n)
    plain = kernel_matrix(nodes, nodes) * weights[None, :]
    from backflow.discretize import QuadratureGrid
    spec = OperatorSpec(u0=-3, u_max=3, n=n)
    sym = assemble_operator(QuadratureGrid(nodes, weights), spec).matrix
    a = np.sort(np.linalg.eigvals(plain).real)
    b = np.linalg.eigvalsh(sym)
    np.testing.assert_allclose(a, b, atol=1e-10)


def test_midpoint_refinement_is_second_order():
    # errors against a high-n reference shrink by ~4 per doubling
    def top(n):
        return largest_eigenpair(assemble_operator(*_pair(n)), dense_limit=5000).lambda_max

    def _pair(n):
        spec = OperatorSpec(u0=0.0, u_max=8.0, n=n)
        return build_grid(spec), spec

    ref = top(3200)
    errs = [abs(top(n) - ref) for n in (100, 200, 400, 800)]
    ratios = [errs[k] / errs[k + 1] for k in range(3)]
    for r in ratios:
        assert 2.0 <= r <= 8.0, ratios
