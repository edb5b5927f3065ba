"""Nonlinear Schrödinger ground states on metric grids and their ℝ^d limits."""
__version__ = "0.1.0"

from .lattice import GridSpec, MetricGrid, build_grid, edge_simplex_count

__all__ = ["__version__", "GridSpec", "MetricGrid", "build_grid", "edge_simplex_count"]
