"""Batch command-line interface.

Exit codes: 0 success, 1 input/validation error, 2 generation or analysis
error. Tables go to stdout, logs to stderr; ``--json`` additionally writes
the machine-readable report next to the input file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .geodata import TransportError, fetch_overpass, parse_osm
from .metrics import metrics_report, metrics_to_json, metrics_to_text
from .model import ModelError, load, save, to_geojson
from .pipeline import GenerationError, GenerationParams, ParamsError, generate
from .profiles import (estimate_cf, generate_pool, pool_to_csv,
                       table_to_json)
from .solver import (fault_report_to_dict, fault_report_to_text, power_flow,
                     short_circuit, solve_report_to_dict, solve_report_to_text)

logger = logging.getLogger("syngrid")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_GENERATION = 2


def _fail(code: int, message: str) -> int:
    print(f"syngrid: {message}", file=sys.stderr)
    return code


def _load_grid(path: str):
    return load(Path(path).read_bytes())


def cmd_generate(args) -> int:
    try:
        params_doc = json.loads(Path(args.params).read_text())
        params = GenerationParams.from_dict(params_doc)
    except FileNotFoundError as exc:
        return _fail(EXIT_VALIDATION, f"cannot read params: {exc}")
    except (json.JSONDecodeError, ParamsError, TypeError) as exc:
        return _fail(EXIT_VALIDATION, f"invalid params: {exc}")
    if args.seed is not None:
        params.seed = args.seed

    if args.osm:
        try:
            raw = Path(args.osm).read_bytes()
        except FileNotFoundError as exc:
            return _fail(EXIT_VALIDATION, f"cannot read OSM file: {exc}")
    else:
        try:
            raw = fetch_overpass(params.boundary, endpoint=args.overpass)
        except (TransportError, Exception) as exc:
            return _fail(EXIT_GENERATION, f"no map source: {exc}")

    try:
        dataset = parse_osm(raw, params.boundary, params.crs_code)
        grid, report = generate(params, dataset, debug_dir=args.debug_dir)
    except (ParamsError, ModelError, ValueError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except GenerationError as exc:
        return _fail(EXIT_GENERATION, str(exc))

    Path(args.out).write_bytes(save(grid))
    print(f"wrote {args.out}: {len(grid.buses)} buses, {len(grid.lines)} lines, "
          f"{len(grid.transformers)} transformers, {len(grid.loads)} loads")
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=1))
        print(f"wrote {args.report}")
    if args.geojson:
        Path(args.geojson).write_bytes(to_geojson(grid))
        print(f"wrote {args.geojson}")
    return EXIT_OK


def cmd_powerflow(args) -> int:
    try:
        grid = _load_grid(args.grid)
    except (OSError, ModelError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    report = power_flow(grid, tolerance=args.tolerance, max_iter=args.max_iter)
    print(solve_report_to_text(report))
    if args.json:
        out = Path(args.grid).with_suffix(".powerflow.json")
        out.write_text(json.dumps(solve_report_to_dict(report), indent=1))
        print(f"wrote {out}")
    return EXIT_OK if report.converged else EXIT_GENERATION


def cmd_shortcircuit(args) -> int:
    try:
        grid = _load_grid(args.grid)
    except (OSError, ModelError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    report = short_circuit(grid)
    print(fault_report_to_text(report))
    if args.json:
        out = Path(args.grid).with_suffix(".shortcircuit.json")
        out.write_text(json.dumps(fault_report_to_dict(report), indent=1))
        print(f"wrote {out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        grid = _load_grid(args.grid)
    except (OSError, ModelError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    report = metrics_report(grid)
    print(metrics_to_text(report))
    if args.json:
        out = Path(args.grid).with_suffix(".stats.json")
        out.write_text(metrics_to_json(report))
        print(f"wrote {out}")
    return EXIT_OK


def cmd_cf(args) -> int:
    if args.pool_size < 64:
        return _fail(EXIT_VALIDATION, "--pool-size must be >= 64")
    pool = generate_pool(args.pool_size, args.s_r, args.seed)
    table = estimate_cf(pool, args.s_r, k=args.repetitions, seed=args.seed)
    print("n\tCF(n)")
    print("1\t1.000000")
    for n, v in zip(table.anchor_n, table.cf_values):
        print(f"{n}\t{v:.6f}")
    if args.json:
        Path(args.json).write_text(table_to_json(table))
        print(f"wrote {args.json}")
    if args.csv:
        Path(args.csv).write_text(pool_to_csv(pool))
        print(f"wrote {args.csv}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syngrid",
        description="Synthetic distribution grids from OpenStreetMap data")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a grid from params + OSM XML")
    g.add_argument("--params", required=True, help="generation params JSON")
    g.add_argument("--osm", help="OSM XML extract (fetched via Overpass if omitted)")
    g.add_argument("--out", default="grid.json", help="output grid JSON")
    g.add_argument("--report", help="write the generation report JSON here")
    g.add_argument("--geojson", help="write a GeoJSON export here")
    g.add_argument("--seed", type=int, help="override the params seed")
    g.add_argument("--overpass", default="https://overpass-api.de/api/interpreter")
    g.add_argument("--debug-dir",
                   help="dump tessellation, LV trees and sizing tables here")
    g.set_defaults(func=cmd_generate)

    p = sub.add_parser("powerflow", help="run the radial power flow")
    p.add_argument("grid")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_powerflow)

    s = sub.add_parser("shortcircuit", help="three-phase fault currents per bus")
    s.add_argument("grid")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_shortcircuit)

    m = sub.add_parser("stats", help="topological statistics")
    m.add_argument("grid")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_stats)

    c = sub.add_parser("cf", help="estimate the coincidence-factor table")
    c.add_argument("--pool-size", type=int, default=256)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--s-r", type=float, default=5.0, dest="s_r")
    c.add_argument("--repetitions", type=int, default=200)
    c.add_argument("--json", help="write the CF table JSON here")
    c.add_argument("--csv", help="write the profile pool CSV here")
    c.set_defaults(func=cmd_cf)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr)
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
