import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gridlimit.extension import (ExtendedFunction, cube_masses, eval_slice, extend,
                                 grundmann_moeller, h1_distance_to_profile, nearest_translation,
                                 rd_norms, recenter, refined_rule, tilde_restrict, translate)
from gridlimit.gridfunction import EdgeQuadrature, sample_on_grid
from gridlimit.radial import solve_rd_ground_state
from helpers import grid, random_function

seeds = st.integers(0, 2 ** 31)
# grad identity factor relative to eps^{d-1} ||u~'||^2
GRAD_FACTOR = {"cubic": 1.0, "triangular": 1 / math.sqrt(3), "hexagonal": math.sqrt(3)}


@pytest.mark.parametrize("lattice, dim", [("cubic", 2), ("cubic", 3), ("cubic", 4),
                                          ("triangular", 2), ("hexagonal", 2)])
@given(seed=seeds, eps=st.sampled_from([0.1, 0.5, 1.0, 3.0]))
def test_gradient_identity(lattice, dim, seed, eps):
    g = grid(lattice, dim, eps, 2 if dim > 2 else 4)
    u = random_function(g, EdgeQuadrature(2), np.random.default_rng(seed), interior=True)
    assert np.any(u.vertex_values())
    lhs = rd_norms(extend(u), "grad_l2")
    rhs = GRAD_FACTOR[lattice] * eps ** (dim - 1) * tilde_restrict(u).dirichlet()
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("lattice", ["cubic", "triangular", "hexagonal"])
def test_extension_interpolates_vertices(lattice):
    g = grid(lattice, 2, 0.5, 3)
    u = random_function(g)
    Au = extend(u)
    inner = ~g.boundary
    np.testing.assert_allclose(Au(g.coords[inner]), u.vertex_values()[inner], atol=1e-12)


def test_extension_reproduces_affine_functions():
    g = grid("cubic", 3, 0.5, 2)
    f = lambda x: 1 + x[:, 0] - 2 * x[:, 1] + 0.5 * x[:, 2]  # noqa: E731
    u = sample_on_grid(f, g, EdgeQuadrature(2), dirichlet=False)
    Au = extend(u)
    x = np.random.default_rng(0).uniform(-0.9, 0.9, size=(200, 3))
    np.testing.assert_allclose(Au(x), f(x), atol=1e-12)
    np.testing.assert_allclose(Au.gradients(), np.tile([1.0, -2.0, 0.5], (g.n_simplexes, 1)),
                               atol=1e-12)
    with pytest.raises(ValueError):
        Au([[5.0, 0.0, 0.0]])


def test_tilde_restrict_is_edgewise_linear():
    g = grid("triangular", 2, 1.0, 3)
    u = random_function(g, EdgeQuadrature(4))
    ut = tilde_restrict(u)
    np.testing.assert_array_equal(ut.vertex_values(), u.vertex_values())
    assert np.allclose(np.diff(ut.values, 2, axis=1), 0.0, atol=1e-14)


@pytest.mark.parametrize("n, s", [(2, 2), (3, 2), (4, 1)])
def test_simplex_rules_integrate_monomials(n, s):
    pts, wts = grundmann_moeller(n, s)
    assert wts.sum() == pytest.approx(1.0, rel=1e-13)
    # int over the unit simplex of lambda_0^a lambda_1^b = a! b! n! / (a + b + n)!
    for a, b in [(2, 1), (3, 2), (1, 1)]:
        if a + b > 2 * s + 1:
            continue
        exact = math.factorial(a) * math.factorial(b) * math.factorial(n) / math.factorial(a + b + n)
        assert np.dot(wts, pts[:, 0] ** a * pts[:, 1] ** b) == pytest.approx(exact, rel=1e-12)
        rp, rw = refined_rule(n, s)
        assert np.dot(rw, rp[:, 0] ** a * rp[:, 1] ** b) == pytest.approx(exact, rel=1e-12)


@given(seed=seeds)
def test_lq_rule_agrees_with_exact_l2(seed):
    g = grid("cubic", 2, 0.5, 3)
    Au = extend(random_function(g, EdgeQuadrature(2), np.random.default_rng(seed)))
    val, err = rd_norms(Au, "lq", 2.0, return_error=True)
    assert val == pytest.approx(rd_norms(Au, "l2"), rel=1e-12)
    assert err < 1e-12
    with pytest.raises(ValueError):
        rd_norms(Au, "lq")
    with pytest.raises(ValueError):
        rd_norms(Au, "h2")


def test_lq_of_constant_over_window():
    g = grid("hexagonal", 2, 1.0, 3)
    Au = ExtendedFunction(g, np.ones(g.n_vertices))
    area = Au.volumes().sum()
    assert rd_norms(Au, "lq", 5.0) == pytest.approx(area, rel=1e-13)


def test_translation_and_recentering():
    g = grid("cubic", 2, 0.5, 8)
    bump = lambda c: (lambda x: np.exp(-4 * np.sum((x - c) ** 2, axis=1)))  # noqa: E731
    quad = EdgeQuadrature(4)
    u = sample_on_grid(bump(np.array([1.0, -1.0])), g, quad)
    v, shift = recenter(u)
    assert np.array_equal(shift, [2, -2])
    centred = sample_on_grid(bump(np.zeros(2)), g, quad)
    np.testing.assert_allclose(v.values, centred.values, atol=1e-12)
    back = translate(v, shift)
    np.testing.assert_allclose(back.values, u.values, atol=1e-12)
    assert v.is_vertex_consistent() and v.satisfies_dirichlet()


def test_hex_translation_must_be_symmetry():
    g = grid("hexagonal", 2, 1.0, 4)
    u = random_function(g)
    with pytest.raises(ValueError):
        translate(u, [1, 0])
    assert g.is_translation(nearest_translation(g, np.array([2.3, -0.7])))


@given(seed=seeds)
def test_cube_masses_partition_the_mass(seed):
    g = grid("triangular", 2, 0.3, 6)
    u = random_function(g, EdgeQuadrature(4), np.random.default_rng(seed))
    keys, mass = cube_masses(u)
    assert mass.sum() == pytest.approx(u.mass(), rel=1e-12)
    assert len({tuple(k) for k in keys}) == len(keys)


def test_recenter_rejects_zero():
    from gridlimit.gridfunction import zeros
    with pytest.raises(ValueError):
        recenter(zeros(grid("cubic", 2, 1.0, 2)))


def test_h1_distance_of_restricted_profile_shrinks():
    prof = solve_rd_ground_state(2, 3.0)
    dists = []
    for eps in (0.5, 0.25):
        g = grid("cubic", 2, eps, int(round(10 / eps)))
        u = sample_on_grid(lambda x: prof.value(np.linalg.norm(x, axis=1)), g, EdgeQuadrature(2))
        dists.append(h1_distance_to_profile(extend(u), prof))
    assert dists[1] < 0.6 * dists[0]
    assert dists[1] < 0.5


def test_eval_slice_and_round_trip():
    g = grid("cubic", 3, 0.5, 2)
    Au = extend(random_function(g, EdgeQuadrature(2)))
    x, vals = eval_slice(Au, 2, 0.1, 11)
    assert x.shape == (121, 3) and np.all(x[:, 2] == 0.1)
    np.testing.assert_allclose(vals, Au(x))
    with pytest.raises(ValueError):
        eval_slice(Au, 3, 0.0, 5)
    Bu = ExtendedFunction.from_dict(Au.to_dict())
    assert np.array_equal(Bu.vertex_values, Au.vertex_values)
    tri = extend(random_function(grid("triangular", 2, 1.0, 3)))
    _, v = eval_slice(tri, 0, 0.0, 21)
    assert np.isfinite(v).any()
