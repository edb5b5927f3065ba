"""Energy and action ground states on truncated grids.

Both problems are solved by preconditioned projected gradient descent with
Armijo backtracking, working on the degree-of-freedom vector of
:class:`~gridlimit.gridfunction.Discretization`.

* Energy (mass constraint): the preconditioner is 2 c_grad K + σ M with σ
  tied to the current Lagrange multiplier, the search direction is the
  preconditioned gradient projected onto the tangent space of the mass sphere,
  and the retraction rescales to the prescribed mass.
* Action (Nehari constraint): the preconditioner is the Hessian of the
  quadratic part, 2 c_grad K + 2 c_mass M, and the retraction is the Nehari
  projection.  Since the action is stationary along rays at Nehari points,
  the plain preconditioned gradient is a descent direction for the projected
  functional.

Iterates are kept nonnegative by replacing them with their absolute value.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .functionals import (ProblemParams, action_tilde, energy_tilde, lagrange_multiplier,
                          lattice_densities, nehari_residual)
from .gridfunction import EdgeQuadrature, GridFunction, discretization, kirchhoff_residual
from .lattice import MetricGrid

log = logging.getLogger(__name__)

INIT_KINDS = ("gaussian_bump", "restriction_of_reference", "random")


@dataclass(frozen=True)
class SolveConfig:
    step: float = 1.0
    tol_grad: float = 1e-7
    tol_level: float = 1e-12
    max_iters: int = 2000
    seed: int = 0
    init: str = "gaussian_bump"
    init_width: float | None = None
    init_center: tuple | None = None
    armijo: float = 1e-4
    patience: int = 3
    refactor_drift: float = 0.3

    def __post_init__(self):
        if not (self.tol_grad > 0 and self.tol_level > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}")
        if not self.step > 0:
            raise ValueError("step must be positive")

    @classmethod
    def from_dict(cls, data: dict | None) -> "SolveConfig":
        data = dict(data or {})
        if data.get("init_center") is not None:
            data["init_center"] = tuple(data["init_center"])
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveResult:
    u: GridFunction
    level: float
    converged: bool
    iterations: int
    grad_norm: float
    multiplier: float
    history: list = field(default_factory=list)
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        out = {"level": self.level, "converged": self.converged, "iterations": self.iterations,
               "grad_norm": self.grad_norm, "multiplier": self.multiplier, "reason": self.reason}
        out.update(self.diagnostics)
        return out


class NonConvergence(RuntimeError):
    def __init__(self, result: SolveResult):
        super().__init__(f"solver stopped without converging: {result.reason}")
        self.result = result


# -- initial guesses --------------------------------------------------------

def _reference_omega(grid: MetricGrid, params: ProblemParams, problem: str) -> float | None:
    from .functionals import mass_critical_exponent
    from .radial import omega_of_mass

    if problem == "action":
        return params.omega
    if params.p >= mass_critical_exponent(grid.dim):
        return None
    a, _ = lattice_densities(grid.lattice, grid.dim)
    mu = params.mass * grid.epsilon ** (grid.dim - 1) / a
    return omega_of_mass(grid.dim, params.p, mu)


def initial_guess(grid: MetricGrid, params: ProblemParams, cfg: SolveConfig,
                  quad: EdgeQuadrature, problem: str) -> np.ndarray:
    """Nonnegative initial dof vector vanishing on the boundary."""
    from .gridfunction import sample_on_grid
    from .radial import solve_rd_ground_state

    d = grid.dim
    centre = np.zeros(d) if cfg.init_center is None else np.asarray(cfg.init_center, dtype=float)
    om = _reference_omega(grid, params, problem)
    width = cfg.init_width or (1.0 / math.sqrt(om) if om else 1.0)
    disc = discretization(grid, quad)

    if cfg.init == "restriction_of_reference":
        if om is None:
            raise ValueError("no reference profile available for this problem")
        prof = solve_rd_ground_state(d, params.p, om)
        f = lambda x: prof.value(np.linalg.norm(x - centre, axis=1))  # noqa: E731
    else:
        f = lambda x: np.exp(-np.sum((x - centre) ** 2, axis=1) / (2 * width ** 2))  # noqa: E731
    x = sample_on_grid(f, grid, quad).dofs()
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        x = x * rng.uniform(0.5, 1.5, size=x.shape)
    x[~disc.free] = 0.0
    return np.abs(x)


# -- generic descent ------------------------------------------------------

@dataclass
class _Problem:
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    direction: Callable[[np.ndarray, np.ndarray], np.ndarray]
    retract: Callable[[np.ndarray], np.ndarray]
    scale: Callable[[np.ndarray], float]
    refresh: Callable[[np.ndarray], None]
    # sum of the absolute values of the terms in value(x), for the round-off floor
    magnitude: Callable[[np.ndarray], float]


def _noise(size: int) -> float:
    """Relative resolution of a sum of ``size`` floating point terms (random-walk estimate)."""
    return 16 * np.finfo(float).eps * math.sqrt(size)


def _descend(x, prob: _Problem, cfg: SolveConfig, free: np.ndarray):
    x = prob.retract(x)
    level = prob.value(x)
    history = [level]
    streak = 0
    tau0 = cfg.step
    gnorm = math.inf
    reason = "max_iters"
    it = 0
    for it in range(1, cfg.max_iters + 1):
        prob.refresh(x)
        g = prob.gradient(x)
        g[~free] = 0.0
        dvec = prob.direction(x, g)
        slope = float(g @ dvec)
        sc = prob.scale(x)
        gnorm = math.sqrt(max(slope, 0.0) / sc)
        # below this floor the Armijo test cannot see a decrease any more
        tol = max(cfg.tol_grad, math.sqrt(_noise(x.size) * prob.magnitude(x) / sc))
        if slope <= 0:
            reason = "stationary"
            history.append(level)
            break
        tau = tau0
        while True:
            y = x - tau * dvec
            if np.any(y < 0):
                y = np.abs(y)
            y = prob.retract(y)
            new = prob.value(y)
            if new <= level - cfg.armijo * tau * slope:
                break
            tau *= 0.5
            if tau < 1e-14:
                y = None
                break
        if y is None:
            # no representable decrease left: accept only if already stationary
            reason = "converged" if gnorm <= tol else "line_search_stalled"
            break
        change = abs(level - new)
        x, level = y, new
        history.append(level)
        tau0 = min(cfg.step, 2 * tau)
        if gnorm <= tol and change <= cfg.tol_level * max(abs(level), 1e-300):
            streak += 1
            if streak >= cfg.patience:
                reason = "converged"
                break
        else:
            streak = 0
    return x, level, history, it, gnorm, reason


def _finish(disc, x, level, history, it, gnorm, reason, params, cfg, extra) -> SolveResult:
    u = disc.function(x)
    converged = reason == "converged"
    res = SolveResult(u=u, level=level, converged=converged, iterations=it, grad_norm=gnorm,
                      multiplier=lagrange_multiplier(u, params), history=history, reason=reason,
                      diagnostics=extra)
    if not converged:
        log.warning("ground-state solve stopped: %s after %d iterations", reason, it)
    return res


def _kirchhoff_report(u: GridFunction, params: ProblemParams, c_lin: float) -> dict:
    if u.quad.n < 4:
        return {}
    vert, edge = kirchhoff_residual(u, params.p, params.k_nl, c_lin)
    scale = max(float(np.max(np.abs(u.values))), 1e-300)
    return {"kirchhoff_max": float(np.max(np.abs(vert))) / scale,
            "pde_mean": float(np.mean(edge)) / scale}


def solve_energy_ground_state(grid: MetricGrid, params: ProblemParams,
                              cfg: SolveConfig | None = None,
                              quad: EdgeQuadrature | None = None,
                              x0: np.ndarray | None = None,
                              allow_supercritical: bool = False) -> SolveResult:
    """Minimise the grid energy at fixed mass ``params.mass``."""
    cfg = cfg or SolveConfig()
    quad = quad or EdgeQuadrature()
    if params.mass is None or not params.mass > 0:
        raise ValueError("energy problems need a positive mass")
    if not allow_supercritical:
        params.check_energy_range()
    disc = discretization(grid, quad)
    K, w, free = disc.stiffness, disc.mass_weights, disc.free
    cg, cn, p, m = params.c_grad, params.c_nl, params.p, params.mass
    k = params.k_nl

    if x0 is None:
        x0 = initial_guess(grid, params, cfg, quad, "energy")
    x0 = np.where(free, np.abs(x0), 0.0)
    if not np.any(x0):
        raise ValueError("initial guess vanishes")

    def value(x):
        return cg * float(x @ (K @ x)) - cn * float(w @ np.abs(x) ** p)

    def gradient(x):
        return 2 * cg * (K @ x) - cn * p * w * np.abs(x) ** (p - 2) * x

    def retract(x):
        return x * math.sqrt(m / float(x @ (w * x)))

    def multiplier(x):
        G = float(x @ (K @ x))
        return (k * float(w @ np.abs(x) ** p) - G) / float(x @ (w * x))

    state = {}

    def refresh(x):
        L = max(multiplier(x), 1e-8)
        if "L" not in state or abs(L - state["L"]) > cfg.refactor_drift * state["L"]:
            state["L"] = L
            state["S"] = disc.solver(2 * cg, 2 * cg * L)
            state["sigma"] = 2 * cg * L

    def direction(x, g):
        S = state["S"]
        pg = S.solve(g)
        pm = S.solve(w * x)
        t = float(x @ (w * pg)) / float(x @ (w * pm))
        return pg - t * pm

    def scale(x):
        return 2 * cg * float(x @ (K @ x)) + state["sigma"] * float(x @ (w * x))

    def magnitude(x):
        return cg * float(x @ (K @ x)) + cn * float(w @ np.abs(x) ** p)

    prob = _Problem(value, gradient, direction, retract, scale, refresh, magnitude)
    x, level, history, it, gnorm, reason = _descend(x0, prob, cfg, free)
    u = disc.function(x)
    extra = {"mass_error": abs(u.mass() - m) / m}
    extra.update(_kirchhoff_report(u, params, lagrange_multiplier(u, params)))
    return _finish(disc, x, level, history, it, gnorm, reason, params, cfg, extra)


def solve_action_ground_state(grid: MetricGrid, params: ProblemParams,
                              cfg: SolveConfig | None = None,
                              quad: EdgeQuadrature | None = None,
                              x0: np.ndarray | None = None) -> SolveResult:
    """Minimise the grid action on the Nehari manifold at frequency ``params.omega``."""
    cfg = cfg or SolveConfig()
    quad = quad or EdgeQuadrature()
    if params.omega is None:
        raise ValueError("action problems need omega")
    params.check_action_range()
    disc = discretization(grid, quad)
    K, w, free = disc.stiffness, disc.mass_weights, disc.free
    cg, cm, cn, p = params.c_grad, params.c_mass, params.c_nl, params.p

    if x0 is None:
        x0 = initial_guess(grid, params, cfg, quad, "action")
    x0 = np.where(free, np.abs(x0), 0.0)
    if not np.any(x0):
        raise ValueError("initial guess vanishes")

    def quadratic(x):
        return 2 * cg * float(x @ (K @ x)) + 2 * cm * float(x @ (w * x))

    def value(x):
        return 0.5 * quadratic(x) - cn * float(w @ np.abs(x) ** p)

    def gradient(x):
        return 2 * cg * (K @ x) + 2 * cm * w * x - cn * p * w * np.abs(x) ** (p - 2) * x

    def retract(x):
        P = float(w @ np.abs(x) ** p)
        return x * (quadratic(x) / (p * cn * P)) ** (1.0 / (p - 2))

    S = disc.solver(2 * cg, 2 * cm)

    def magnitude(x):
        return 0.5 * quadratic(x) + cn * float(w @ np.abs(x) ** p)

    prob = _Problem(value, gradient, lambda x, g: S.solve(g), retract, quadratic, lambda x: None,
                    magnitude)
    x, level, history, it, gnorm, reason = _descend(x0, prob, cfg, free)
    u = disc.function(x)
    extra = {"nehari_residual": nehari_residual(u, params)}
    extra.update(_kirchhoff_report(u, params, params.c_lin))
    return _finish(disc, x, level, history, it, gnorm, reason, params, cfg, extra)
