"""Finite truncations of periodic metric grids.

Three lattices are supported: the cubic grid in any dimension d >= 2 and the
regular triangular and hexagonal grids in the plane.  Vertices are identified
by integer lattice coordinates; floating coordinates are derived from them so
that gluing never relies on float equality.

Triangular and hexagonal vertices use the basis e1 = (1, 0), e2 = (1/2, √3/2)
(times epsilon).  The hexagonal grid is the triangular lattice with the index-3
sublattice {a - b = 0 mod 3} removed; the removed points are hexagon centres.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Lattice = Literal["cubic", "triangular", "hexagonal"]

SQRT3 = math.sqrt(3.0)
DEFAULT_MAX_VERTICES = 4_000_000

# neighbour offsets in (a, b) coordinates, oriented tail -> head
_TRI_OFFSETS = np.array([[1, 0], [0, 1], [-1, 1]])
# from a class-1 vertex (a - b = 1 mod 3) to its three class-2 neighbours
_HEX_OFFSETS = np.array([[1, 0], [0, -1], [-1, 1]])
# hexagon corners around a centre, counterclockwise from angle 0
_HEX_RING = np.array([[1, 0], [0, 1], [-1, 1], [-1, 0], [0, -1], [1, -1]])
# T1..T4 as positions in _HEX_RING: leftmost, bottom-left + two top,
# two bottom + top-right, rightmost
_HEX_SPLIT = ((2, 3, 4), (4, 1, 2), (4, 5, 1), (5, 0, 1))

_ALIASES = {"cubic": "cubic", "tri": "triangular", "triangular": "triangular",
            "hex": "hexagonal", "hexagonal": "hexagonal"}


@dataclass(frozen=True)
class GridSpec:
    """Parameters of a truncated grid.

    ``window`` is the number of cells per half-side of the box centred at the
    origin, so cubic vertices satisfy max|x_i| <= window * epsilon.
    """

    lattice: Lattice = "cubic"
    dim: int = 2
    epsilon: float = 1.0
    window: int = 4
    truncation: str = "dirichlet_zero"
    max_vertices: int = DEFAULT_MAX_VERTICES

    def __post_init__(self):
        lat = _ALIASES.get(self.lattice)
        if lat is None:
            raise ValueError(f"unknown lattice {self.lattice!r}")
        object.__setattr__(self, "lattice", lat)
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.window) != self.window or self.window < 1:
            raise ValueError("window must be a positive integer")
        object.__setattr__(self, "window", int(self.window))
        if lat == "cubic" and self.dim < 2:
            raise ValueError("cubic grids need dim >= 2")
        if lat != "cubic" and self.dim != 2:
            raise ValueError(f"{lat} grids are planar (dim = 2)")
        if self.truncation != "dirichlet_zero":
            raise ValueError("only dirichlet_zero truncation is supported")

    @property
    def half_width(self) -> float:
        return self.window * self.epsilon

    def with_epsilon(self, epsilon: float) -> "GridSpec":
        return GridSpec(self.lattice, self.dim, epsilon, self.window,
                        self.truncation, self.max_vertices)

    def estimated_vertices(self) -> int:
        W = self.window
        if self.lattice == "cubic":
            return (2 * W + 1) ** self.dim
        rows = 2 * int(2 * W / SQRT3) + 1
        return rows * (2 * W + 2)


@dataclass(eq=False)
class MetricGrid:
    """Immutable truncated metric grid.

    Attributes
    ----------
    lattice_coords : (V, k) int
        Integer lattice coordinates (k = d for cubic, k = 2 otherwise).
    coords : (V, d) float
    edges : (E, 2) int
        Tail and head vertex ids.
    edge_kind : (E,) int
        Index of the lattice offset tail -> head.
    boundary : (V,) bool
        Vertices on the truncation boundary (value pinned to zero).
    cells : (C, m) int
        Ordered vertex ids of each periodicity cell.
    simplexes : (S, d+1) int
        Vertex ids of each simplex of the piecewise-affine decomposition.
    simplex_cell : (S,) int
    simplex_edges : (S, k) int
        Grid edges contained in each simplex, padded with -1.
    """

    spec: GridSpec
    lattice_coords: np.ndarray
    coords: np.ndarray
    edges: np.ndarray
    edge_kind: np.ndarray
    offsets: np.ndarray
    boundary: np.ndarray
    cells: np.ndarray
    simplexes: np.ndarray
    simplex_cell: np.ndarray
    simplex_edges: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    # -- basic properties -------------------------------------------------
    @property
    def lattice(self) -> str:
        return self.spec.lattice

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def epsilon(self) -> float:
        return self.spec.epsilon

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_simplexes(self) -> int:
        return len(self.simplexes)

    @property
    def interior_degree(self) -> int:
        return {"cubic": 2 * self.dim, "triangular": 6, "hexagonal": 3}[self.lattice]

    @property
    def directions(self) -> np.ndarray:
        d = self.coords[self.edges[:, 1]] - self.coords[self.edges[:, 0]]
        return d / self.epsilon

    @property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def incidence(self):
        """Vertex -> (edge ids, orientation signs) in CSR form.

        Sign is -1 when the vertex is the tail (the edge leaves it) and +1
        when it is the head.  Returns (indptr, edge_ids, signs).
        """
        if "incidence" not in self._cache:
            v = self.edges.ravel()
            e = np.repeat(np.arange(self.n_edges), 2)
            s = np.tile([-1, 1], self.n_edges)
            order = np.argsort(v, kind="stable")
            indptr = np.concatenate([[0], np.cumsum(np.bincount(v, minlength=self.n_vertices))])
            self._cache["incidence"] = (indptr, e[order], s[order])
        return self._cache["incidence"]

    # -- lookups ----------------------------------------------------------
    def _lookup_table(self):
        if "lookup" not in self._cache:
            lo = self.lattice_coords.min(axis=0)
            hi = self.lattice_coords.max(axis=0)
            shape = tuple(hi - lo + 1)
            table = np.full(shape, -1, dtype=np.int64)
            table[tuple((self.lattice_coords - lo).T)] = np.arange(self.n_vertices)
            self._cache["lookup"] = (lo, hi, table)
        return self._cache["lookup"]

    def vertex_index(self, lattice_points) -> np.ndarray:
        """Vertex ids for integer lattice coordinates; -1 if absent."""
        pts = np.atleast_2d(np.asarray(lattice_points, dtype=np.int64))
        lo, hi, table = self._lookup_table()
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        out = np.full(len(pts), -1, dtype=np.int64)
        out[inside] = table[tuple((pts[inside] - lo).T)]
        return out

    def edge_table(self) -> np.ndarray:
        """(V, n_kinds) array: edge id leaving vertex v along offset k, or -1."""
        if "edge_table" not in self._cache:
            t = np.full((self.n_vertices, len(self.offsets)), -1, dtype=np.int64)
            t[self.edges[:, 0], self.edge_kind] = np.arange(self.n_edges)
            self._cache["edge_table"] = t
        return self._cache["edge_table"]

    def lattice_to_cartesian(self, lattice_points) -> np.ndarray:
        pts = np.asarray(lattice_points, dtype=float)
        if self.lattice == "cubic":
            return self.epsilon * pts
        a, b = pts[..., 0], pts[..., 1]
        return self.epsilon * np.stack([a + 0.5 * b, 0.5 * SQRT3 * b], axis=-1)

    def cartesian_to_lattice(self, x) -> np.ndarray:
        """Real-valued lattice coordinates of Cartesian points."""
        x = np.asarray(x, dtype=float) / self.epsilon
        if self.lattice == "cubic":
            return x
        b = x[..., 1] * 2.0 / SQRT3
        return np.stack([x[..., 0] - 0.5 * b, b], axis=-1)

    def is_translation(self, shift) -> bool:
        """Whether an integer lattice vector maps the infinite grid to itself."""
        shift = np.asarray(shift, dtype=np.int64)
        if self.lattice == "hexagonal":
            return int(shift[0] - shift[1]) % 3 == 0
        return True

    def interior_edges(self) -> np.ndarray:
        """Mask of edges whose full set of cells lies inside the window."""
        if "interior_edges" not in self._cache:
            full = _cells_per_edge(self.lattice, self.dim)
            cnt = np.zeros(self.n_edges, dtype=np.int64)
            cell_edges = self._cell_edges()
            np.add.at(cnt, cell_edges[cell_edges >= 0], 1)
            self._cache["interior_edges"] = cnt == full
        return self._cache["interior_edges"]

    def _cell_edges(self) -> np.ndarray:
        """(C, k) edges on the boundary of each cell (cube: all cube edges)."""
        if "cell_edges" in self._cache:
            return self._cache["cell_edges"]
        et = self.edge_table()
        offs = self.offsets
        lc = self.lattice_coords
        rows = []
        if self.lattice == "cubic":
            d = self.dim
            corners = np.array(list(itertools.product((0, 1), repeat=d)))
            for ci, c in enumerate(corners):
                for j in range(d):
                    if c[j] == 0:
                        rows.append((ci, j))
            out = np.stack([et[self.cells[:, ci], j] for ci, j in rows], axis=1)
        else:
            m = self.cells.shape[1]
            cols = []
            for i in range(m):
                u, v = self.cells[:, i], self.cells[:, (i + 1) % m]
                cols.append(_edge_between(et, offs, lc, u, v))
            out = np.stack(cols, axis=1)
        self._cache["cell_edges"] = out
        return out


def _cells_per_edge(lattice: str, d: int) -> int:
    if lattice == "cubic":
        return 2 ** (d - 1)
    return 2


def _edge_between(et, offs, lc, u, v):
    """Edge id joining vertex arrays u and v (either orientation), -1 if none."""
    out = np.full(len(u), -1, dtype=np.int64)
    diff = lc[v] - lc[u]
    for k, off in enumerate(offs):
        fwd = np.all(diff == off, axis=1)
        out[fwd] = et[u[fwd], k]
        bwd = np.all(diff == -off, axis=1)
        out[bwd] = et[v[bwd], k]
    return out


# -- construction ----------------------------------------------------------

def build_grid(spec: GridSpec) -> MetricGrid:
    """Build the truncated grid described by ``spec``."""
    if spec.estimated_vertices() > spec.max_vertices:
        raise ValueError(
            f"grid would have about {spec.estimated_vertices()} vertices, "
            f"above the cap of {spec.max_vertices}")
    if spec.lattice == "cubic":
        return _build_cubic(spec)
    return _build_planar(spec)


def _build_cubic(spec: GridSpec) -> MetricGrid:
    d, W = spec.dim, spec.window
    side = 2 * W + 1
    lc = np.stack(np.meshgrid(*([np.arange(-W, W + 1)] * d), indexing="ij"), axis=-1)
    lc = lc.reshape(-1, d)
    ids = np.arange(side ** d).reshape((side,) * d)
    offsets = np.eye(d, dtype=np.int64)

    tails, heads, kinds = [], [], []
    for j in range(d):
        sl_t = [slice(None)] * d
        sl_h = [slice(None)] * d
        sl_t[j] = slice(0, side - 1)
        sl_h[j] = slice(1, side)
        tails.append(ids[tuple(sl_t)].ravel())
        heads.append(ids[tuple(sl_h)].ravel())
        kinds.append(np.full(tails[-1].size, j))
    edges = np.stack([np.concatenate(tails), np.concatenate(heads)], axis=1)
    kind = np.concatenate(kinds)

    # cells: corners k in [-W, W-1]^d, vertices in binary order of the offset
    base = ids[(slice(0, side - 1),) * d].ravel()
    strides = np.array([side ** (d - 1 - i) for i in range(d)])
    corners = np.array(list(itertools.product((0, 1), repeat=d)))
    cells = base[:, None] + (corners @ strides)[None, :]

    # Kuhn simplexes, permutations in lexicographic order.  With fractional
    # parts ordered f_s(1) <= ... <= f_s(d) the path from the corner adds
    # e_s(d) first and e_s(1) last.
    perms = list(itertools.permutations(range(d)))
    nc = len(cells)
    simp = np.empty((nc, len(perms), d + 1), dtype=np.int64)
    sedges = np.empty((nc, len(perms), d), dtype=np.int64)
    ekind_stride = _cubic_edge_offsets(side, d)
    for si, sigma in enumerate(perms):
        cur = base.copy()
        simp[:, si, 0] = cur
        for step, j in enumerate(reversed(sigma)):
            sedges[:, si, step] = _cubic_edge_id(cur, j, side, d, ekind_stride)
            cur = cur + strides[j]
            simp[:, si, step + 1] = cur
    simplexes = simp.reshape(-1, d + 1)
    simplex_cell = np.repeat(np.arange(nc), len(perms))
    simplex_edges = sedges.reshape(-1, d)

    boundary = np.any(np.abs(lc) == W, axis=1)
    coords = spec.epsilon * lc.astype(float)
    return MetricGrid(spec, lc, coords, edges, kind, offsets, boundary, cells,
                      simplexes, simplex_cell, simplex_edges)


def _cubic_edge_offsets(side, d):
    counts = [side ** (d - 1) * (side - 1)] * d
    return np.concatenate([[0], np.cumsum(counts)])


def _cubic_edge_id(tail, j, side, d, start):
    """Id of the edge leaving vertex ``tail`` along +e_j (tail flat index)."""
    idx = np.array(np.unravel_index(tail, (side,) * d))
    shape = [side] * d
    shape[j] = side - 1
    return start[j] + np.ravel_multi_index(tuple(idx), tuple(shape))


def _build_planar(spec: GridSpec) -> MetricGrid:
    W = spec.window
    tol = 1e-9
    bmax = int(math.floor(2 * W / SQRT3 + tol))
    amax = 2 * W + bmax
    a, b = np.meshgrid(np.arange(-amax, amax + 1), np.arange(-bmax, bmax + 1), indexing="ij")
    a, b = a.ravel(), b.ravel()
    inside = np.abs(a + 0.5 * b) <= W + tol
    hexagonal = spec.lattice == "hexagonal"
    if hexagonal:
        inside &= (a - b) % 3 != 0
    lc = np.stack([a[inside], b[inside]], axis=1)

    offsets = _HEX_OFFSETS if hexagonal else _TRI_OFFSETS
    lookup = _PlanarLookup(lc)
    tails, heads, kinds = [], [], []
    for k, off in enumerate(offsets):
        src = np.arange(len(lc))
        if hexagonal:
            src = src[(lc[:, 0] - lc[:, 1]) % 3 == 1]
        dst = lookup(lc[src] + off)
        ok = dst >= 0
        tails.append(src[ok])
        heads.append(dst[ok])
        kinds.append(np.full(ok.sum(), k))
    edges = np.stack([np.concatenate(tails), np.concatenate(heads)], axis=1)
    kind = np.concatenate(kinds)

    # drop isolated vertices (corners of the hexagonal window)
    deg = np.bincount(edges.ravel(), minlength=len(lc))
    keep = deg > 0
    if not keep.all():
        remap = np.cumsum(keep) - 1
        lc = lc[keep]
        edges = remap[edges]
        lookup = _PlanarLookup(lc)
        deg = deg[keep]

    if hexagonal:
        cells, simplexes, simplex_cell = _hex_cells(lc, lookup)
    else:
        cells, simplexes, simplex_cell = _tri_cells(lc, lookup)

    full = 3 if hexagonal else 6
    boundary = deg < full
    eps = spec.epsilon
    coords = eps * np.stack([lc[:, 0] + 0.5 * lc[:, 1], 0.5 * SQRT3 * lc[:, 1]], axis=1)

    grid = MetricGrid(spec, lc, coords, edges, kind, offsets, boundary, cells,
                      simplexes, simplex_cell, np.empty((0, 3), dtype=np.int64))
    et = grid.edge_table()
    cols = []
    for i, j in ((0, 1), (1, 2), (2, 0)):
        cols.append(_edge_between(et, offsets, lc, simplexes[:, i], simplexes[:, j]))
    sedges = np.stack(cols, axis=1)
    # keep only real grid edges, packed to the left
    order = np.argsort(sedges < 0, axis=1, kind="stable")
    grid.simplex_edges = np.take_along_axis(sedges, order, axis=1)
    _check_connected(grid)
    return grid


class _PlanarLookup:
    def __init__(self, lc):
        self.lo = lc.min(axis=0)
        hi = lc.max(axis=0)
        self.table = np.full(tuple(hi - self.lo + 1), -1, dtype=np.int64)
        self.table[tuple((lc - self.lo).T)] = np.arange(len(lc))
        self.hi = hi

    def __call__(self, pts):
        pts = np.asarray(pts)
        ok = np.all((pts >= self.lo) & (pts <= self.hi), axis=1)
        out = np.full(len(pts), -1, dtype=np.int64)
        out[ok] = self.table[tuple((pts[ok] - self.lo).T)]
        return out


def _tri_cells(lc, lookup):
    v0 = np.arange(len(lc))
    va = lookup(lc + [1, 0])
    vb = lookup(lc + [0, 1])
    vab = lookup(lc + [1, 1])
    up_ok = (va >= 0) & (vb >= 0)
    dn_ok = up_ok & (vab >= 0)
    up = np.stack([v0, va, vb], axis=1)[up_ok]
    down = np.stack([va, vab, vb], axis=1)[dn_ok]
    cells = np.concatenate([up, down])
    return cells, cells.copy(), np.arange(len(cells))


def _hex_cells(lc, lookup):
    lo = lc.min(axis=0) - 1
    hi = lc.max(axis=0) + 1
    a, b = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1), indexing="ij")
    centres = np.stack([a.ravel(), b.ravel()], axis=1)
    centres = centres[(centres[:, 0] - centres[:, 1]) % 3 == 0]
    ring = np.stack([lookup(centres + off) for off in _HEX_RING], axis=1)
    cells = ring[np.all(ring >= 0, axis=1)]
    simplexes = np.concatenate([cells[:, list(t)][:, None, :] for t in _HEX_SPLIT], axis=1)
    simplex_cell = np.repeat(np.arange(len(cells)), 4)
    return cells, simplexes.reshape(-1, 3), simplex_cell


def _check_connected(grid: MetricGrid):
    n = grid.n_vertices
    adj = coo_matrix((np.ones(grid.n_edges), (grid.edges[:, 0], grid.edges[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(adj, directed=False)
    if ncomp != 1:
        raise RuntimeError(f"truncated grid has {ncomp} components")


def edge_simplex_count(grid: MetricGrid, edge: int) -> int:
    """Number of simplexes (over all cells) whose grid edges include ``edge``.

    Only defined for interior edges of cubic grids, where every cell that
    could contain the edge lies inside the window.
    """
    if grid.lattice != "cubic":
        raise ValueError("edge_simplex_count is defined for cubic grids")
    if not 0 <= edge < grid.n_edges:
        raise IndexError(edge)
    if not grid.interior_edges()[edge]:
        raise ValueError(f"edge {edge} touches the truncation boundary")
    if "edge_simplex_counts" not in grid._cache:
        se = grid.simplex_edges
        grid._cache["edge_simplex_counts"] = np.bincount(se[se >= 0], minlength=grid.n_edges)
    return int(grid._cache["edge_simplex_counts"][edge])


def locate(grid: MetricGrid, x) -> np.ndarray:
    """Simplex ids containing the points ``x`` (shape (N, d)); -1 outside."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if grid.lattice == "cubic":
        return _locate_cubic(grid, x)
    if grid.lattice == "triangular":
        return _locate_tri(grid, x)
    return _locate_hex(grid, x)


def _locate_cubic(grid, x):
    d, W = grid.dim, grid.spec.window
    y = x / grid.epsilon
    corner = np.floor(y).astype(np.int64)
    corner = np.clip(corner, -W, W - 1)
    frac = y - corner
    out = np.full(len(x), -1, dtype=np.int64)
    ok = np.all((y >= -W - 1e-12) & (y <= W + 1e-12), axis=1)
    side = 2 * W
    cell = np.ravel_multi_index(tuple((corner + W).T), (side,) * d)
    sigma = np.argsort(frac, axis=1, kind="stable")
    perm_index = _perm_rank(sigma)
    nperm = math.factorial(d)
    out[ok] = (cell * nperm + perm_index)[ok]
    return out


def _perm_rank(sigma: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row permutation."""
    n = sigma.shape[1]
    rank = np.zeros(len(sigma), dtype=np.int64)
    for i in range(n):
        smaller = np.sum(sigma[:, i + 1:] < sigma[:, i:i + 1], axis=1)
        rank += smaller * math.factorial(n - 1 - i)
    return rank


def _barycentric(grid, simp_ids, x):
    X = grid.coords[grid.simplexes[simp_ids]]
    T = X[:, 1:, :] - X[:, :1, :]
    lam = np.linalg.solve(np.transpose(T, (0, 2, 1)), (x - X[:, 0, :])[..., None])[..., 0]
    return np.concatenate([1 - lam.sum(axis=1, keepdims=True), lam], axis=1)


def _dense_table(keys, values):
    lo = keys.min(axis=0)
    hi = keys.max(axis=0)
    table = np.full(tuple(hi - lo + 1), -1, dtype=np.int64)
    table[tuple((keys - lo).T)] = values
    return lo, hi, table


def _dense_get(lo, hi, table, keys):
    ok = np.all((keys >= lo) & (keys <= hi), axis=1)
    out = np.full(len(keys), -1, dtype=np.int64)
    out[ok] = table[tuple((keys[ok] - lo).T)]
    return out


def _locate_tri(grid, x):
    if "tri_locate" not in grid._cache:
        lc = grid.lattice_coords
        c = grid.cells
        v0 = lc[c[:, 0]]
        is_up = np.all(lc[c[:, 1]] - v0 == [1, 0], axis=1)
        base = np.where(is_up[:, None], v0, v0 - [1, 0])
        keys = np.concatenate([base, (~is_up)[:, None].astype(np.int64)], axis=1)
        grid._cache["tri_locate"] = _dense_table(keys, np.arange(len(c)))
    ab = grid.cartesian_to_lattice(x)
    base = np.floor(ab + 1e-12).astype(np.int64)
    fr = ab - base
    down = (fr.sum(axis=1) > 1 + 1e-12).astype(np.int64)
    return _dense_get(*grid._cache["tri_locate"], np.concatenate([base, down[:, None]], axis=1))


def _locate_hex(grid, x):
    if "hex_locate" not in grid._cache:
        centre = grid.lattice_coords[grid.cells[:, 0]] - _HEX_RING[0]
        grid._cache["hex_locate"] = _dense_table(centre, np.arange(len(centre)))
    ab = grid.cartesian_to_lattice(x)
    # the hexagon is the Voronoi cell of its centre within the centre sublattice
    base = np.floor(ab).astype(np.int64)
    best = np.full(len(x), np.inf)
    best_c = np.zeros((len(x), 2), dtype=np.int64)
    for da in range(-1, 3):
        for db in range(-1, 3):
            c = base + [da, db]
            ok = (c[:, 0] - c[:, 1]) % 3 == 0
            dist = np.sum((grid.lattice_to_cartesian(c) - x) ** 2, axis=1)
            better = ok & (dist < best)
            best[better] = dist[better]
            best_c[better] = c[better]
    cell = _dense_get(*grid._cache["hex_locate"], best_c)
    out = np.full(len(x), -1, dtype=np.int64)
    ok = cell >= 0
    if not ok.any():
        return out
    idx = np.flatnonzero(ok)
    sids = 4 * cell[idx, None] + np.arange(4)[None, :]
    lam = _barycentric(grid, sids.ravel(), np.repeat(x[idx], 4, axis=0)).reshape(len(idx), 4, 3)
    j = np.argmax(lam.min(axis=2), axis=1)
    inside = lam[np.arange(len(idx)), j].min(axis=1) >= -1e-9
    out[idx[inside]] = sids[np.arange(len(idx)), j][inside]
    return out


def grid_to_dict(grid: MetricGrid) -> dict:
    s = grid.spec
    return {
        "spec": {"lattice": s.lattice, "dim": s.dim, "epsilon": s.epsilon,
                 "window": s.window, "truncation": s.truncation},
        "vertices": grid.coords.tolist(),
        "lattice_coords": grid.lattice_coords.tolist(),
        "boundary": np.flatnonzero(grid.boundary).tolist(),
        "edges": grid.edges.tolist(),
        "cells": grid.cells.tolist(),
        "simplexes": grid.simplexes.tolist(),
        "simplex_cell": grid.simplex_cell.tolist(),
        "simplex_edges": grid.simplex_edges.tolist(),
    }


def spec_from_dict(data: dict) -> GridSpec:
    s = data["spec"] if "spec" in data else data
    return GridSpec(s["lattice"], int(s.get("dim", 2)), float(s["epsilon"]), int(s["window"]),
                    s.get("truncation", "dirichlet_zero"))
