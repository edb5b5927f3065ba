"""Action, energy, Nehari projection, multipliers and quotients on grids.

Each lattice carries two densities (a, b) relating grid sums to integrals over
the plane or space: for a smooth u restricted to a grid of edgelength eps,

    eps^{d-1} int_G |u|^q  ~  a int |u|^q,     eps^{d-1} int_G |u'|^2  ~  b int |grad u|^2.

    cubic        a = d        b = 1
    triangular   a = 2√3      b = √3
    hexagonal    a = 2/√3     b = 1/√3

The functional coefficients are chosen so that eps^{d-1} times a grid
functional approximates its continuum counterpart:

    c_grad = 1/(2b)    c_nl = 1/(p a)    c_mass = omega/(2a)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gridfunction import GridFunction
from .lattice import GridSpec, MetricGrid, SQRT3, build_grid


def lattice_densities(lattice: str, dim: int = 2) -> tuple[float, float]:
    if lattice == "cubic":
        return float(dim), 1.0
    if lattice == "triangular":
        return 2 * SQRT3, SQRT3
    if lattice == "hexagonal":
        return 2 / SQRT3, 1 / SQRT3
    raise ValueError(f"unknown lattice {lattice!r}")


def sobolev_exponent(d: int) -> float:
    """2* = 2d/(d-2), infinite for d <= 2."""
    return math.inf if d <= 2 else 2.0 * d / (d - 2)


def mass_critical_exponent(d: int) -> float:
    return 2.0 + 4.0 / d


def rate_threshold(d: int) -> float:
    """2*/2 + 1, where the convergence rate changes regime."""
    return sobolev_exponent(d) / 2 + 1


def scaling_exponents(p: float) -> tuple[float, float]:
    """(alpha, beta) of the transform t^alpha u(t^beta x)."""
    if p == 6:
        raise ValueError("the scaling transform is undefined at p = 6")
    return 2.0 / (6.0 - p), (p - 2.0) / (6.0 - p)


def lattice_gn_factor(lattice: str, dim: int, q: float) -> float:
    """Ratio between the sharp GN constant on the unit grid and on the plane/space."""
    if lattice == "cubic":
        return dim ** ((dim - 2) * (q - 2) / 4.0)
    if lattice == "triangular":
        return 3.0 ** ((2 - q) / 4.0)
    if lattice == "hexagonal":
        return 3.0 ** ((q - 2) / 4.0)
    raise ValueError(f"unknown lattice {lattice!r}")


@dataclass(frozen=True)
class ProblemParams:
    """Nonlinearity, frequency or mass, and lattice coefficients.

    ``omega`` is used by action problems and ``mass`` (the grid L2 mass) by
    energy problems.  Coefficients default to the lattice values; pass
    ``c_grad``/``c_nl``/``c_mass`` to override.
    """

    p: float
    dim: int = 2
    lattice: str = "cubic"
    omega: float | None = None
    mass: float | None = None
    c_grad: float | None = None
    c_nl: float | None = None
    c_mass: float | None = None

    def __post_init__(self):
        if not self.p > 2:
            raise ValueError("p must exceed 2")
        if self.lattice != "cubic" and self.dim != 2:
            raise ValueError("triangular and hexagonal lattices are planar")
        a, b = lattice_densities(self.lattice, self.dim)
        if self.c_grad is None:
            object.__setattr__(self, "c_grad", 1.0 / (2 * b))
        if self.c_nl is None:
            object.__setattr__(self, "c_nl", 1.0 / (self.p * a))
        if self.c_mass is None:
            object.__setattr__(self, "c_mass", 0.0 if self.omega is None else self.omega / (2 * a))
        for name in ("c_grad", "c_nl"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.omega is not None and not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.mass is not None and not self.mass > 0:
            raise ValueError("mass must be positive")

    @classmethod
    def for_grid(cls, grid: MetricGrid, p: float, **kw) -> "ProblemParams":
        return cls(p=p, dim=grid.dim, lattice=grid.lattice, **kw)

    @property
    def kappa(self) -> float:
        return 0.5 - 1.0 / self.p

    @property
    def k_nl(self) -> float:
        """Coefficient of |u|^{p-2}u in the edge equation u'' + k|u|^{p-2}u = c u."""
        return self.p * self.c_nl / (2 * self.c_grad)

    @property
    def c_lin(self) -> float:
        """Linear coefficient of the edge equation for the action problem."""
        return self.c_mass / self.c_grad

    def check_action_range(self):
        if not 2 < self.p < sobolev_exponent(self.dim):
            raise ValueError(f"action problems need 2 < p < 2* = {sobolev_exponent(self.dim)}")

    def check_energy_range(self):
        if not 2 < self.p < mass_critical_exponent(self.dim):
            raise ValueError(
                f"energy problems need 2 < p < 2 + 4/d = {mass_critical_exponent(self.dim)}")


def _norms(u: GridFunction, p: float):
    return u.dirichlet(), u.mass(), u.lp_power(p)


def energy_tilde(u: GridFunction, params: ProblemParams) -> float:
    G, _, P = _norms(u, params.p)
    return params.c_grad * G - params.c_nl * P


def action_tilde(u: GridFunction, params: ProblemParams) -> float:
    G, M, P = _norms(u, params.p)
    return params.c_grad * G + params.c_mass * M - params.c_nl * P


def nehari_functional(G: float, M: float, P: float, params: ProblemParams) -> float:
    """Derivative of the action along u itself."""
    return 2 * params.c_grad * G + 2 * params.c_mass * M - params.p * params.c_nl * P


def nehari_factor(u: GridFunction, params: ProblemParams) -> float:
    G, M, P = _norms(u, params.p)
    if P == 0:
        raise ValueError("nehari projection of the zero function")
    quad = 2 * params.c_grad * G + 2 * params.c_mass * M
    return (quad / (params.p * params.c_nl * P)) ** (1.0 / (params.p - 2))


def nehari_project(u: GridFunction, params: ProblemParams) -> GridFunction:
    return u * nehari_factor(u, params)


def nehari_residual(u: GridFunction, params: ProblemParams) -> float:
    """Relative defect of the Nehari identity."""
    G, M, P = _norms(u, params.p)
    return abs(nehari_functional(G, M, P, params)) / (params.p * params.c_nl * P)


def action_on_manifold(u: GridFunction, params: ProblemParams) -> float:
    """Value of the action at a Nehari point, written through the L^p term only."""
    return params.c_nl * (params.p - 2) / 2 * u.lp_power(params.p)


def lagrange_multiplier(u: GridFunction, params: ProblemParams) -> float:
    G, M, P = _norms(u, params.p)
    if M == 0:
        raise ValueError("multiplier of a zero-mass function")
    return (params.k_nl * P - G) / M


def lagrange_multiplier_from_energy(u: GridFunction, params: ProblemParams) -> float:
    """Same multiplier expressed through the energy (independent evaluation path)."""
    M = u.mass()
    P = u.lp_power(params.p)
    if M == 0:
        raise ValueError("multiplier of a zero-mass function")
    E = energy_tilde(u, params)
    return params.c_nl / params.c_grad * (params.p / 2 - 1) * P / M - E / (params.c_grad * M)


def gn_quotient(Pq: float, M: float, G: float, q: float, d: int) -> float:
    """Scale-invariant GN quotient from int|u|^q, int|u|^2 and int|grad u|^2."""
    a = d + (2 - d) * q / 2
    b = (q / 2 - 1) * d
    return Pq / (M ** (a / 2) * G ** (b / 2))


def gn_quotient_grid(u: GridFunction, q: float) -> float:
    G = u.dirichlet()
    if G == 0:
        raise ValueError("GN quotient undefined for constant functions")
    return gn_quotient(u.lp_power(q), u.mass(), G, q, u.grid.dim)


@lru_cache(maxsize=16)
def _cached_grid(spec: GridSpec) -> MetricGrid:
    return build_grid(spec)


def scale_between_grids(u: GridFunction, p: float, direction: str = "to_unit",
                        epsilon: float | None = None) -> GridFunction:
    """Transport u on the eps-grid to the unit grid (or back) by t^alpha u(t^beta x).

    With t = eps^{1/beta} the change of variables maps grid samples one to one,
    so only the amplitude changes: u_hat = eps^{2/(p-2)} u.  ``from_unit``
    needs the target ``epsilon``.
    """
    scaling_exponents(p)
    spec = u.grid.spec
    if direction == "to_unit":
        eps = spec.epsilon
        target = spec.with_epsilon(1.0)
        factor = eps ** (2.0 / (p - 2))
    elif direction == "from_unit":
        if spec.epsilon != 1.0:
            raise ValueError("from_unit expects a function on the unit grid")
        if epsilon is None or not epsilon > 0:
            raise ValueError("from_unit needs a positive target epsilon")
        eps = epsilon
        target = spec.with_epsilon(eps)
        factor = eps ** (-2.0 / (p - 2))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    grid = u.grid if target == spec else _cached_grid(target)
    return GridFunction(grid, factor * u.values, u.quad)
