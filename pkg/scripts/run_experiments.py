#!/usr/bin/env python3
"""Run experiment configs and write one CSV per config.

    python3 scripts/run_experiments.py                  # every config in scripts/configs
    python3 scripts/run_experiments.py energy_cubic gn_d2_q6 --outdir results
"""
import argparse
import logging
import sys
from pathlib import Path

from gridlimit.experiments import ExperimentConfig, run

CONFIGS = Path(__file__).resolve().parent / "configs"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="config names (default: all)")
    ap.add_argument("--outdir", default="results")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    paths = [CONFIGS / f"{n.removesuffix('.json')}.json" for n in args.names] \
        or sorted(CONFIGS.glob("*.json"))
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for path in paths:
        cfg = ExperimentConfig.from_json(path)
        res = run(cfg)
        csv_path = out / f"{path.stem}.csv"
        res.write_csv(csv_path)
        status = "PASS" if res.passed else "FAIL"
        failed += not res.passed
        print(f"{status} {path.stem} ({res.metadata['wall_seconds']:.0f}s) -> {csv_path}")
        for name, ok in res.checks.items():
            print(f"    {'ok  ' if ok else 'FAIL'} {name}")
        if "verdict" in res.summary:
            print(f"    {res.summary['verdict']}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
