import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st
from scipy.integrate import trapezoid
from scipy.sparse.linalg import spsolve

from gridlimit.gridfunction import (EdgeQuadrature, GridFunction, axpy, discretization,
                                    kirchhoff_residual, norm, per_edge_norms, rescale_to_mass,
                                    sample_on_grid, zeros)
from helpers import grid, random_function

seeds = st.integers(0, 2 ** 31)


@pytest.mark.parametrize("kw", [dict(n=1), dict(n=3), dict(rule="gauss"), dict(n=2.5)])
def test_quadrature_validation(kw):
    with pytest.raises(ValueError):
        EdgeQuadrature(**kw)


@pytest.mark.parametrize("rule", ["trapezoid", "simpson"])
def test_weights_integrate_constants(rule):
    q = EdgeQuadrature(8, rule)
    assert q.unit_weights().sum() == pytest.approx(8.0)
    # constants have no energy
    assert np.allclose(q.stiffness() @ np.ones(9), 0.0)


def _edge_integral(g, f, n=2000):
    """Fine trapezoid reference for sum_e int_e f."""
    t = np.linspace(0, 1, n + 1)
    tail = g.coords[g.edges[:, 0]]
    step = g.coords[g.edges[:, 1]] - tail
    pts = tail[:, None, :] + t[None, :, None] * step[:, None, :]
    vals = f(pts)
    return float(np.sum(trapezoid(vals, dx=g.epsilon / n, axis=1)))


def test_simpson_exact_on_quadratics():
    g = grid("cubic", 2, 0.5, 3)
    u = sample_on_grid(lambda x: x[:, 0] * x[:, 1] + x[:, 0], g, EdgeQuadrature(2), dirichlet=False)
    exact_mass = _edge_integral(g, lambda x: (x[..., 0] * x[..., 1] + x[..., 0]) ** 2, 20000)
    assert u.mass() == pytest.approx(exact_mass, rel=1e-7)
    # derivative along x-edges is y + 1, along y-edges it is x
    dirs = g.directions
    grad = lambda x: np.stack([x[..., 1] + 1, x[..., 0]], axis=-1)  # noqa: E731
    t = np.linspace(0, 1, 4001)
    tail = g.coords[g.edges[:, 0]]
    pts = tail[:, None, :] + t[None, :, None] * (g.epsilon * dirs)[:, None, :]
    du = np.einsum("etk,ek->et", grad(pts), dirs)
    exact = float(np.sum(trapezoid(du ** 2, dx=g.epsilon / 4000, axis=1)))
    assert u.dirichlet() == pytest.approx(exact, rel=1e-9)


def test_w11_of_piecewise_linear():
    g = grid("cubic", 2, 1.0, 3)
    u = sample_on_grid(lambda x: x[:, 0] + 2 * x[:, 1], g, EdgeQuadrature(4, "trapezoid"),
                       dirichlet=False)
    # |u'| is 1 on x-edges and 2 on y-edges
    nx = np.sum(np.abs(g.directions[:, 0]) == 1)
    assert norm(u, "w11_semi") == pytest.approx(nx + 2 * (g.n_edges - nx))


def test_sampled_functions_are_admissible():
    g = grid("triangular", 2, 0.5, 4)
    u = sample_on_grid(lambda x: np.exp(-np.sum(x ** 2, axis=1)), g, EdgeQuadrature(4))
    assert u.is_vertex_consistent() and u.satisfies_dirichlet()
    v = sample_on_grid(lambda x: np.ones(len(x)), g, EdgeQuadrature(4), dirichlet=False)
    assert not v.satisfies_dirichlet()


def test_sample_rejects_nonfinite():
    g = grid("cubic", 2, 1.0, 2)
    with pytest.raises(ValueError, match="finite"), np.errstate(divide="ignore"):
        sample_on_grid(lambda x: 1.0 / x[:, 0], g, EdgeQuadrature(2), dirichlet=False)


def test_values_shape_checked_and_read_only():
    g = grid("cubic", 2, 1.0, 2)
    with pytest.raises(ValueError):
        GridFunction(g, np.zeros((3, 3)), EdgeQuadrature(2))
    u = zeros(g, EdgeQuadrature(2))
    with pytest.raises(ValueError):
        u.values[0, 0] = 1.0


@pytest.mark.parametrize("lattice", ["cubic", "triangular", "hexagonal"])
@given(seed=seeds)
def test_dof_quadratic_forms_reproduce_norms(lattice, seed):
    g = grid(lattice, 2, 0.7, 3)
    u = random_function(g, EdgeQuadrature(6), np.random.default_rng(seed))
    D = discretization(g, u.quad)
    x = u.dofs()
    assert np.array_equal(D.to_values(x), u.values)
    assert x @ (D.mass_weights * x) == pytest.approx(u.mass(), rel=1e-12)
    assert x @ (D.stiffness @ x) == pytest.approx(u.dirichlet(), rel=1e-12)
    np.testing.assert_allclose(per_edge_norms(u).sum(axis=0), [u.mass(), u.dirichlet()],
                               rtol=1e-12)


@given(seed=seeds, c=st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity(seed, c):
    g = grid("cubic", 2, 0.5, 3)
    u = random_function(g, EdgeQuadrature(4), np.random.default_rng(seed))
    assert (c * u).dirichlet() == pytest.approx(c * c * u.dirichlet(), rel=1e-12)
    assert (c * u).lp_power(3.5) == pytest.approx(abs(c) ** 3.5 * u.lp_power(3.5), rel=1e-12)
    assert norm(c * u, "w11_semi") == pytest.approx(abs(c) * norm(u, "w11_semi"), rel=1e-12)


@pytest.mark.parametrize("rule", ["trapezoid", "simpson"])
def test_condensed_solver_matches_direct_solve(rule):
    g = grid("hexagonal", 2, 0.5, 4)
    quad = EdgeQuadrature(4, rule)
    D = discretization(g, quad)
    alpha, beta = 0.8, 2.5
    r = np.random.default_rng(3).normal(size=D.n_dofs)
    r[~D.free] = 0.0
    x = D.solver(alpha, beta).solve(r)
    A = (alpha * D.stiffness + beta * sp.diags(D.mass_weights)).tocsc()
    f = np.flatnonzero(D.free)
    ref = np.zeros(D.n_dofs)
    ref[f] = spsolve(A[f][:, f], r[f])
    np.testing.assert_allclose(x, ref, rtol=1e-10, atol=1e-12)


def test_linear_algebra_helpers():
    g = grid("cubic", 2, 1.0, 3)
    rng = np.random.default_rng(0)
    u, v = random_function(g, rng=rng), random_function(g, rng=rng)
    np.testing.assert_allclose(axpy(u, v, 2.0).values, 2 * u.values + v.values)
    assert rescale_to_mass(u, 3.0).mass() == pytest.approx(3.0)
    with pytest.raises(ValueError):
        rescale_to_mass(zeros(g, u.quad), 1.0)
    with pytest.raises(ValueError):
        u + random_function(grid("cubic", 2, 1.0, 2))


def test_norm_kinds():
    g = grid("cubic", 2, 1.0, 3)
    u = random_function(g)
    assert norm(u, "h1") ** 2 == pytest.approx(u.mass() + u.dirichlet())
    assert norm(u, "lp", 2) == pytest.approx(norm(u))
    assert norm(u, "linf") == np.abs(u.values).max()
    with pytest.raises(ValueError):
        norm(u, "lp")
    with pytest.raises(ValueError):
        norm(u, "sup")


def test_kirchhoff_balances_for_linear_function():
    g = grid("cubic", 2, 0.5, 3)
    u = sample_on_grid(lambda x: 2 * x[:, 0] - x[:, 1], g, EdgeQuadrature(4), dirichlet=False)
    vert, edge = kirchhoff_residual(u, 3.0, 0.0, 0.0)
    assert np.abs(vert).max() < 1e-12 and np.abs(edge).max() < 1e-9
    with pytest.raises(ValueError):
        kirchhoff_residual(random_function(g, EdgeQuadrature(2)), 3.0, 1.0, 1.0)


def test_dict_round_trip():
    g = grid("triangular", 2, 0.5, 3)
    u = random_function(g, EdgeQuadrature(4))
    v = GridFunction.from_dict(u.to_dict())
    assert np.array_equal(v.values, u.values) and v.quad == u.quad
    assert v.grid.spec == g.spec
