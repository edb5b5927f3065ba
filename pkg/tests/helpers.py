"""Shared builders for the test suite."""
from functools import lru_cache

import numpy as np

from gridlimit.gridfunction import EdgeQuadrature, GridFunction
from gridlimit.lattice import GridSpec, build_grid


@lru_cache(maxsize=64)
def grid(lattice="cubic", dim=2, eps=1.0, window=3):
    return build_grid(GridSpec(lattice, dim, eps, window))


def random_function(g, quad=None, rng=None, wiggle=0.3, positive=False, interior=False):
    """Random grid function vanishing on the window boundary.

    With ``interior`` the vertex values also vanish at every vertex touching an
    edge whose cells are not all inside the window.

    Vertex values are Gaussian; each edge carries the linear interpolant plus a
    few random sine modes, so the samples describe a smooth edge profile.
    """
    quad = quad or EdgeQuadrature(8)
    rng = rng if rng is not None else np.random.default_rng(0)
    vv = rng.normal(size=g.n_vertices)
    if positive:
        vv = np.abs(vv)
    vv[g.boundary] = 0.0
    if interior:
        vv[np.unique(g.edges[~g.interior_edges()])] = 0.0
    t = np.linspace(0.0, 1.0, quad.n + 1)
    a, b = vv[g.edges[:, 0]], vv[g.edges[:, 1]]
    vals = a[:, None] * (1 - t) + b[:, None] * t
    modes = rng.normal(size=(g.n_edges, 3)) * wiggle
    vals = vals + modes @ np.sin(np.pi * np.outer(np.arange(1, 4), t))
    vals[:, 0], vals[:, -1] = a, b  # sin(k pi) is not exactly zero
    if positive:
        vals = np.abs(vals)
    return GridFunction(g, vals, quad)
