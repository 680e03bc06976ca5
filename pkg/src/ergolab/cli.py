"""Command-line runner.

    ergolab list [--json]
    ergolab run <id> [--config path] [--seed u64] [--out dir] [--backend exact|float]
                     [--param key=value ...]

Precedence: experiment defaults < config file < command-line flags.
Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 internal error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
import traceback

from . import __version__, kernels
from .config import BACKENDS, ConfigError, load_file, resolve
from .experiments import REGISTRY, catalog, csv_text, _plain
from .rng import GENERATOR_NAME

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": message}, sort_keys=True), file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser():
    p = _Parser(prog="ergolab", description="Nonsingular actions laboratory: run reproducible experiments.")
    p.add_argument("--version", action="version", version=f"ergolab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    ls = sub.add_parser("list", help="list experiments")
    ls.add_argument("--json", action="store_true", help="machine-readable output")
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("id", help="experiment id (see `ergolab list`)")
    run.add_argument("--config", help="YAML config file")
    run.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    run.add_argument("--out", help="output directory (default runs/<id>)")
    run.add_argument("--backend", choices=BACKENDS, help="arithmetic backend")
    run.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="override one parameter")
    return p


def cmd_list(args):
    entries = [{"id": e.id, "anchor": e.anchor, "description": e.description} for e in catalog()]
    if args.json:
        print(json.dumps(entries, sort_keys=True, indent=2))
    else:
        width = max(len(e["id"]) for e in entries)
        for e in entries:
            print(f"{e['id']:<{width}}  {e['description']}")
            print(f"{'':<{width}}  [{e['anchor']}]")
    return EXIT_PASS


def build_report(exp, cfg, outcome):
    return {
        "experiment": exp.id,
        "anchor": exp.anchor,
        "description": exp.description,
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
        "seed": cfg.seed,
        "generator": GENERATOR_NAME,
        "backend": cfg.backend,
        "kernel_backend": kernels.BACKEND,
        "version": __version__,
        "checks": [c.to_dict() for c in outcome.checks],
        "passed": outcome.passed,
        "verdict": "pass" if outcome.passed else "fail",
        "truncation": _plain(outcome.truncation),
        "data": _plain(outcome.data),
        "csv": sorted(outcome.tables),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def dump_report(report):
    return json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def write_outputs(out_dir, report, tables):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_report(report))
    for name, (header, rows) in tables.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(header, rows))


def cmd_run(args):
    exp = REGISTRY.get(args.id)
    if exp is None:
        print(json.dumps({"error": "usage", "message": f"unknown experiment {args.id!r}"}, sort_keys=True), file=sys.stderr)
        return EXIT_USAGE
    try:
        file_data = load_file(args.config) if args.config else {}
        cfg = resolve(exp.id, exp.defaults, file_data, args.seed, args.backend, args.out, args.param)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_USAGE
    out_dir = cfg.out or os.path.join("runs", exp.id)
    try:
        outcome = exp.run(cfg)
        report = build_report(exp, cfg, outcome)
        write_outputs(out_dir, report, outcome.tables)
    except Exception as exc:  # structured report for anything unexpected
        err = {
            "error": "internal",
            "experiment": exp.id,
            "type": type(exc).__name__,
            "message": str(exc),
            "traceback": traceback.format_exc(),
        }
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        try:
            os.makedirs(out_dir, exist_ok=True)
            with open(os.path.join(out_dir, "error.json"), "w", encoding="utf-8") as fh:
                fh.write(json.dumps(err, sort_keys=True, indent=2) + "\n")
        except OSError:
            pass
        return EXIT_INTERNAL
    for c in outcome.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}")
    print(f"{exp.id}: {'pass' if outcome.passed else 'fail'} -> {os.path.join(out_dir, 'report.json')}")
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.command == "list":
        return cmd_list(args)
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
