"""Command-line front end.

Exit status: 0 when every check passes, 1 when any check fails, 2 on a
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from .errors import DomainError
from .report import Report
from .suites import COMMANDS, DEFAULT_SEED, RunConfig, Tolerances, growth_table, region_table, run_command

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

TOL_FLAGS = {
    "identity": "relative tolerance of exact pointwise identities (default 1e-9)",
    "fd": "relative tolerance of identities needing finite differences (default 1e-5)",
    "quad": "relative tolerance of the cutoff identity; the divergence-theorem check uses 100x (default 1e-6)",
    "slope": "tolerance on fitted log-log slopes (default 0.05)",
    "ode": "local tolerance of the shooting integrator (default 1e-10)",
}
CSV_COMMANDS = ("growth", "exponents")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_grid(text: str) -> tuple:
    """``"4:2,3:1.5"`` or ``"4:2:1,3:1.5:0.5"`` into tuples."""
    out = []
    for item in text.split(","):
        parts = item.strip().split(":")
        if len(parts) not in (2, 3):
            raise ConfigError(f"--grid: entry {item!r} is not n:p or n:p:lambda")
        try:
            out.append((int(parts[0]),) + tuple(float(x) for x in parts[1:]))
        except ValueError as exc:
            raise ConfigError(f"--grid: entry {item!r}: {exc}") from None
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="plapaudit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS + ("all",):
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON file with option values; flags override it")
        sp.add_argument("--n", type=int, help="dimension (with --p selects a single case)")
        sp.add_argument("--p", type=float, help="exponent (with --n selects a single case)")
        sp.add_argument("--lam", type=float, help="bubble scale for a single --n/--p case")
        sp.add_argument("--grid", type=str, help="comma list of n:p or n:p:lambda")
        sp.add_argument("--seed", type=int, help=f"random seed (default {DEFAULT_SEED})")
        for key, text in TOL_FLAGS.items():
            sp.add_argument(f"--tol-{key}", type=float, dest=f"tol_{key}", help=text)
        sp.add_argument("--resolution", type=float, help="p spacing of the exponent scan (default 1e-3)")
        sp.add_argument("--fields", type=int, help="random fields per case (default 10)")
        sp.add_argument("--points", type=int, help="points per field (default 200)")
        sp.add_argument("--jobs", type=int, help="worker processes (default 1)")
        sp.add_argument("--out", type=Path, help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("json", "csv"), help="json report, or csv table for growth/exponents")
        sp.add_argument("--canonical", action="store_true", help="omit the wall-clock duration from JSON")
    return parser


OPTION_KEYS = ("n", "p", "lam", "grid", "seed", "resolution", "fields", "points", "jobs", "out", "format") + tuple(
    f"tol_{k}" for k in TOL_FLAGS
)


def merge_options(args: argparse.Namespace) -> dict:
    """Config-file values overridden by explicitly given flags."""
    opts: dict = {}
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"--config {args.config}: top level must be an object")
        for key, val in data.items():
            k = key.replace("-", "_")
            if k not in OPTION_KEYS:
                raise ConfigError(f"--config {args.config}: unknown key {key!r}")
            opts[k] = val
    for k in OPTION_KEYS:
        val = getattr(args, k, None)
        if val is not None:
            opts[k] = val
    return opts


def make_config(command: str, opts: dict) -> RunConfig:
    grid = opts.get("grid")
    if isinstance(grid, str):
        grid = parse_grid(grid)
    elif isinstance(grid, list):
        grid = tuple(tuple(g) for g in grid)
    n, p, lam = opts.get("n"), opts.get("p"), opts.get("lam")
    if (n is None) != (p is None):
        raise ConfigError("--n and --p must be given together")
    if n is not None:
        if grid is not None:
            raise ConfigError("use either --n/--p or --grid")
        grid = ((int(n), float(p)) + ((float(lam),) if lam is not None else ()),)
    elif lam is not None:
        raise ConfigError("--lam needs --n and --p")
    if lam is not None and not float(lam) > 0:
        raise ConfigError(f"--lam: bubble scale must be positive, got {lam}")
    source = "--n/--p" if n is not None else "--grid"
    try:
        tol = Tolerances(**{k: float(opts[f"tol_{k}"]) for k in TOL_FLAGS if f"tol_{k}" in opts})
        cfg = RunConfig(
            command=command,
            grid=grid,
            seed=int(opts.get("seed", DEFAULT_SEED)),
            tol=tol,
            jobs=int(opts.get("jobs", 1)),
            resolution=float(opts.get("resolution", 1e-3)),
            fields=int(opts.get("fields", 10)),
            points=int(opts.get("points", 200)),
        )
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    try:
        for c in COMMANDS if command == "all" else (command,):
            cfg.grid_for(c)
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return cfg


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = merge_options(args)
        cfg = make_config(args.command, opts)
        fmt = opts.get("format", "json")
        if fmt == "csv" and args.command not in CSV_COMMANDS:
            raise ConfigError(f"--format csv is only available for {' and '.join(CSV_COMMANDS)}")
    except ConfigError as exc:
        print(f"plapaudit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = opts.get("out")
    start = time.perf_counter()
    records = run_command(cfg)
    report = Report(args.command, cfg.echo(), records, duration=time.perf_counter() - start)
    if fmt == "csv":
        text = region_table(cfg) if args.command == "exponents" else _csv(growth_table(cfg))
    else:
        text = report.to_json(canonical=args.canonical)
    _emit(text, out)
    print(report.text_summary(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
