#!/usr/bin/env python3
"""Compare grid GN quotients with the sharp planar constant.

Prints the quotient of scaled restrictions of the planar optimiser and the
end point of a quotient ascent for several edge sub-sample counts, each as a
multiple of K_q(R^2).  Sub-sample refinement shows whether an excess over the
planar constant is a quadrature artefact.

    python3 scripts/gn_ascent_probe.py --q 6 --iters 300
"""
import argparse

import numpy as np

from gridlimit.experiments import quotient_ascent
from gridlimit.functionals import gn_quotient_grid
from gridlimit.gridfunction import EdgeQuadrature, sample_on_grid
from gridlimit.lattice import GridSpec, build_grid
from gridlimit.radial import estimate_k_q_rd, solve_rd_ground_state


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q", type=float, default=6.0)
    ap.add_argument("--window", type=int, default=24)
    ap.add_argument("--iters", type=int, default=300)
    ap.add_argument("--width", type=float, default=2.0)
    ap.add_argument("--n", type=int, nargs="+", default=[4, 8, 16])
    args = ap.parse_args(argv)

    q = args.q
    K = estimate_k_q_rd(2, q)
    prof = solve_rd_ground_state(2, q)
    print(f"K_q(R^2) = {K:.8f}")
    for s in (1.0, 2.0, 4.0):
        grid = build_grid(GridSpec("cubic", 2, 1.0, max(4, int(np.ceil(prof.r_max * s)))))
        u = sample_on_grid(lambda x: prof.value(np.linalg.norm(x, axis=1) / s), grid,
                           EdgeQuadrature(8))
        print(f"restriction, scale {s:4.1f}: Q/K = {gn_quotient_grid(u, q) / K:.5f}")
    grid = build_grid(GridSpec("cubic", 2, 1.0, args.window))
    for n in args.n:
        quad = EdgeQuadrature(n)
        x0 = sample_on_grid(lambda x: np.exp(-np.sum(x ** 2, axis=1) / (2 * args.width ** 2)),
                            grid, quad).dofs()
        u, hist = quotient_ascent(grid, q, x0, quad, args.iters)
        print(f"ascent, n = {n:3d}: Q/K = {hist[-1][0] / K:.5f}, "
              f"|u'|^2/|u|^2 = {hist[-1][1]:.4f}")


if __name__ == "__main__":
    main()
