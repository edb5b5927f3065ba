"""Command-line interface: ``gridlimit <subcommand> ...``.

Exit codes: 0 on success (or every experiment check passing), 1 when an
experiment check fails, 2 when a solver stops at max_iters or on any
infrastructure error (bad input, I/O, exceptions).
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _read_json(path):
    return json.loads(Path(path).read_text())


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=1))


def cmd_build_grid(args) -> int:
    from .lattice import GridSpec, build_grid, grid_to_dict

    grid = build_grid(GridSpec(args.lattice, args.dim, args.eps, args.window))
    _write_json(args.out, grid_to_dict(grid))
    print(f"{grid.lattice} d={grid.dim} eps={grid.epsilon}: {grid.n_vertices} vertices, "
          f"{grid.n_edges} edges, {grid.n_simplexes} simplexes")
    return EXIT_OK


def cmd_extend(args) -> int:
    from .extension import extend
    from .gridfunction import GridFunction

    u = GridFunction.from_dict(_read_json(args.inp))
    _write_json(args.out, extend(u).to_dict())
    return EXIT_OK


def cmd_rd_norms(args) -> int:
    from .extension import ExtendedFunction, rd_norms

    Au = ExtendedFunction.from_dict(_read_json(args.inp))
    out = {"l2": rd_norms(Au, "l2"), "grad_l2": rd_norms(Au, "grad_l2")}
    if args.q is not None:
        val, err = rd_norms(Au, "lq", args.q, return_error=True)
        out.update({"lq": val, "q": args.q, "lq_rel_error": err})
    print(json.dumps(out))
    return EXIT_OK


def cmd_eval_slice(args) -> int:
    from .extension import ExtendedFunction, eval_slice

    Au = ExtendedFunction.from_dict(_read_json(args.inp))
    x, vals = eval_slice(Au, args.axis, args.value, args.resolution)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i}" for i in range(x.shape[1])] + ["value"])
        for row, v in zip(x, vals):
            w.writerow(list(row) + ["" if np.isnan(v) else v])
    return EXIT_OK


def _solve(args, problem: str) -> int:
    from .functionals import ProblemParams
    from .gridfunction import EdgeQuadrature
    from .lattice import build_grid, spec_from_dict
    from .solvers import SolveConfig, solve_action_ground_state, solve_energy_ground_state

    grid = build_grid(spec_from_dict(_read_json(args.grid)))
    cfg = SolveConfig.from_dict(_read_json(args.cfg) if args.cfg else None)
    quad = EdgeQuadrature(args.n_quad, args.rule)
    if problem == "energy":
        params = ProblemParams.for_grid(grid, args.p, mass=args.mass)
        res = solve_energy_ground_state(grid, params, cfg, quad,
                                        allow_supercritical=args.allow_supercritical)
    else:
        params = ProblemParams.for_grid(grid, args.p, omega=args.omega)
        res = solve_action_ground_state(grid, params, cfg, quad)
    summary = res.summary()
    scale = grid.epsilon ** (grid.dim - 1)
    summary["scaled_level"] = scale * res.level
    _write_json(args.out, {"summary": summary, "config": cfg.to_dict(),
                           "function": res.u.to_dict()})
    print(json.dumps(summary))
    return EXIT_OK if res.converged else EXIT_ERROR


def cmd_solve_energy(args) -> int:
    return _solve(args, "energy")


def cmd_solve_action(args) -> int:
    return _solve(args, "action")


def cmd_reference_rd(args) -> int:
    from .radial import solve_rd_ground_state

    prof = solve_rd_ground_state(args.dim, args.p, args.omega)
    _write_json(args.out, prof.to_dict())
    print(json.dumps({"u0": prof.u0, "mass": prof.mass(), "action": prof.action(),
                      "energy": prof.energy()}))
    return EXIT_OK


def cmd_experiment(args) -> int:
    from .experiments import ExperimentConfig, run

    cfg = ExperimentConfig.from_json(args.config)
    res = run(cfg)
    out = args.out or cfg.out
    if out:
        res.write_csv(out)
    if args.json:
        res.write_json(args.json)
    for name, ok in res.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {cfg.kind}:{name}")
    if "verdict" in res.summary:
        print(f"verdict: {res.summary['verdict']}")
    return EXIT_OK if res.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridlimit", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-grid", help="build a truncated grid and write it as JSON")
    p.add_argument("--lattice", choices=["cubic", "tri", "hex", "triangular", "hexagonal"],
                   default="cubic")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--window", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_grid)

    p = sub.add_parser("extend", help="piecewise-affine extension of a grid function")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("rd-norms", help="integrals of an extended function over R^d")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--q", type=float)
    p.set_defaults(func=cmd_rd_norms)

    p = sub.add_parser("eval-slice", help="sample an extended function on a hyperplane")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--axis", type=int, required=True)
    p.add_argument("--value", type=float, required=True)
    p.add_argument("--resolution", type=int, default=101)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval_slice)

    for name, func in (("solve-energy", cmd_solve_energy), ("solve-action", cmd_solve_action)):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} ground state on a grid")
        p.add_argument("--grid", required=True)
        p.add_argument("--p", type=float, required=True)
        if name == "solve-energy":
            p.add_argument("--mass", type=float, required=True)
            p.add_argument("--allow-supercritical", action="store_true")
        else:
            p.add_argument("--omega", type=float, required=True)
        p.add_argument("--cfg", help="SolveConfig as JSON")
        p.add_argument("--n-quad", type=int, default=4)
        p.add_argument("--rule", choices=["simpson", "trapezoid"], default="simpson")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("reference-rd", help="radial ground state on R^d by shooting")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reference_rd)

    p = sub.add_parser("experiment", help="run a configured experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", help="optional JSON output path")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Exception as exc:  # reported as an infrastructure error
        logging.getLogger("gridlimit").error("%s: %s", type(exc).__name__, exc,
                                             exc_info=args.verbose)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
