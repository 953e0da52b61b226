"""Command line entry point: run, list, oracle, validate.

Exit codes: 0 success, 1 hard error (including usage errors and failed
expectations), 2 inconclusive (numerically flagged) scenario.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, PshlabError
from .scenarios import (CATALOGUE, ScenarioConfig, load_config, oracle_table, run_scenario,
                        validate_config)

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; 2 means inconclusive
    here, so usage errors exit with 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out-dir", help="output root (default: $PSHLAB_OUT or ./pshlab_out)")
    common.add_argument("--t-points", type=int, help="override grid.points")
    common.add_argument("--basis-max", type=int,
                        help="override basis.n_max (and n_min = -n_max on Laurent bases)")

    p = _Parser(prog="pshlab", description="Minimal L2 integral experiments")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True
    r = sub.add_parser("run", parents=[common], help="run a scenario config")
    r.add_argument("config")
    r.add_argument("--quiet", action="store_true", help="only print the status line")
    sub.add_parser("list", help="list the scenario catalogue")
    o = sub.add_parser("oracle", parents=[common], help="print analytic oracle values")
    o.add_argument("scenario")
    v = sub.add_parser("validate", parents=[common], help="validate a config file")
    v.add_argument("config")
    return p


def _overrides(args, base: dict) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = str(args.seed)
    if args.out_dir is not None:
        out["output.dir"] = args.out_dir
    if args.t_points is not None:
        out["grid.points"] = str(args.t_points)
    if args.basis_max is not None:
        out["basis.n_max"] = str(args.basis_max)
        if base.get("basis.n_min", "auto") not in ("auto", "", "0"):
            out["basis.n_min"] = str(-args.basis_max)
    return out


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    ov = _overrides(args, cfg.values)
    return load_config(args.config, ov) if ov else cfg


def cmd_list(args) -> int:
    for e in CATALOGUE.values():
        print(f"{e.name}\n    checks: {e.statement}\n    expects: {e.expectation}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    problems = validate_config(cfg)
    if problems:
        for msg in problems:
            print(f"invalid: {msg}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{args.config}: valid ({cfg.scenario})")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if args.scenario not in CATALOGUE:
        print(f"unknown scenario {args.scenario!r}", file=sys.stderr)
        return EXIT_ERROR
    cfg = ScenarioConfig.build({"scenario": args.scenario}, _overrides(args, {}))
    table = oracle_table(cfg)
    if not table:
        print(f"{args.scenario}: no analytic oracle")
        return EXIT_OK
    print("label,axis,value")
    for label, (x, vals) in table.items():
        for xi, vi in zip(x, vals):
            print(f"{label},{float(xi):.17g},{float(vi):.17g}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    result = run_scenario(cfg)
    if not args.quiet:
        for c in result.checks:
            mark = "PASS" if c.passed else ("FAIL" if c.expected else "info")
            print(f"[{mark}] {c.name}: {c.detail}")
        for f in result.flags[:20]:
            print(f"flag: {f}")
        if len(result.flags) > 20:
            print(f"... {len(result.flags) - 20} more flags")
    print(f"{cfg.scenario}: {result.status} in {result.wall_clock:.1f} s, "
          f"{len(result.files)} files under {cfg.out_root()}")
    if result.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK if result.status == "ok" else EXIT_ERROR


COMMANDS = {"run": cmd_run, "list": cmd_list, "oracle": cmd_oracle, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PshlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
