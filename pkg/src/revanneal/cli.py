"""Command-line interface.

    revanneal <experiment> --config cfg.json [--set key=value ...]
              --out results/ [--workers N] [--seed S]

The config file is a flat JSON object; ``--set`` overrides individual keys
(values are parsed as JSON, falling back to strings).  Outputs are
``<out>/manifest.json`` plus one CSV (or JSON-lines) file per table.

Exit codes: 0 success, 2 configuration error, 3 numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from ._backend import BACKEND
from .errors import ConfigError, NumericalFailure
from .experiments import EXPERIMENTS, run_experiment
from .serialize import write_manifest, write_tables


def _parse_set(item: str):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        return key, json.loads(raw)
    except json.JSONDecodeError:
        return key, raw


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="revanneal",
        description="Reverse-annealing experiments for the fully connected p-spin model")
    ap.add_argument("experiment", choices=sorted(EXPERIMENTS))
    ap.add_argument("--config", help="flat JSON config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="override a config key")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    cfg = json.load(fh)
            except FileNotFoundError:
                raise ConfigError(f"config file not found: {args.config}")
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}")
            if not isinstance(cfg, dict):
                raise ConfigError("config file must hold a JSON object")
        for item in args.set:
            key, value = _parse_set(item)
            cfg[key] = value
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")

        t0 = time.perf_counter()
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                def map_fn(fn, items):
                    return pool.map(fn, items)
                resolved, tables, details = run_experiment(
                    args.experiment, cfg, args.seed, map_fn)
        else:
            resolved, tables, details = run_experiment(
                args.experiment, cfg, args.seed, map)
        wall = time.perf_counter() - t0

        manifest = {
            "experiment": args.experiment,
            "config": resolved,
            "version": __version__,
            "backend": BACKEND,
            "seed": args.seed,
            "workers": args.workers,
            "wall_time_s": wall,
            "tables": sorted(tables),
            "details": details,
        }
        os.makedirs(args.out, exist_ok=True)
        write_tables(args.out, tables, resolved.get("format", "csv"))
        write_manifest(os.path.join(args.out, "manifest.json"), manifest)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
