"""Command-line front end: parse, run, check.

Exit codes: 0 success / property holds, 1 property violation (check),
2 usage, parse or validation errors. No interactive input; behaviour is
fully determined by argv and files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ast import Call, Expr, Lit, TupleLit
from .corpus import check_entry, list_entries, load_entry
from .desugar import desugar
from .errors import FcError, ParseError, ScenarioError
from .loader import load_core_program
from .netsim import World, run
from .parser import parse as parse_program
from .parser import tokenize, _Parser
from .pretty import pretty_print
from .scenario import load_scenario
from .trace import render_events, render_exports, render_trace, render_trace_text
from .values import Constructor, LocalValue


def _parse_constant(text: str) -> LocalValue:
    """Parse a --set value as a literal (number, string, True/False/Null,
    constructor, or tuple of literals)."""
    expr = _Parser(tokenize(text)).expr()

    def lit(e: Expr) -> LocalValue:
        if isinstance(e, Lit):
            return e.value
        if isinstance(e, TupleLit):
            return Constructor("Tuple", tuple(lit(x) for x in e.elems))
        if isinstance(e, Call) and e.fname[0].isupper():
            return Constructor(e.fname, tuple(lit(a) for a in e.args))
        raise FcError(f"--set values must be literals, got {text!r}")

    return lit(expr)


def _collect_sets(pairs: list[str]) -> dict[str, LocalValue]:
    out = {}
    for p in pairs:
        if "=" not in p:
            raise FcError(f"--set expects NAME=VALUE, got {p!r}")
        name, _, value = p.partition("=")
        out[name.strip()] = _parse_constant(value.strip())
    return out


def cmd_parse(args) -> int:
    try:
        source = Path(args.program).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    try:
        program = desugar(parse_program(source))
    except ParseError as err:
        for d in err.diagnostics:
            print(str(d), file=sys.stderr)
        return 2
    print(pretty_print(program), end="")
    return 0


def cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
        if args.seed is not None:
            scenario.seed = args.seed
        if args.rounds is not None:
            scenario.stop.rounds = args.rounds
        overrides = _collect_sets(args.set or [])
        if args.program:
            source = Path(args.program).read_text(encoding="utf-8")
        else:
            source = scenario.read_program_source()
        program = load_core_program(source, scenario, overrides)
        scenario.constants.update(overrides)
        world = World(scenario, program, keep_exports=args.dump_exports)
        world.run_to_completion()
    except (ParseError, ScenarioError, FcError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    trace, es = world.trace, world.event_structure
    rendered = render_trace(trace) if args.format == "line-records" \
        else render_trace_text(trace)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)
    if args.dump_events:
        target = Path(args.out).with_suffix(Path(args.out).suffix + ".events") \
            if args.out else None
        out = render_events(es)
        if target:
            target.write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    if args.dump_exports:
        out = render_exports(trace, world.exports)
        if args.out:
            Path(args.out + ".exports").write_text(out, encoding="utf-8")
        else:
            sys.stdout.write(out)
    return 0


def cmd_check(args) -> int:
    try:
        entry = load_entry(args.entry)
        overrides = _collect_sets(args.set or [])
        source = Path(args.program).read_text(encoding="utf-8") if args.program else None
        report = check_entry(entry, source=source, seed=args.seed,
                             rounds=args.rounds,
                             extra_constants=overrides or None)
    except (ParseError, ScenarioError, FcError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    out = report.to_lines()
    if args.out:
        Path(args.out).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return 0 if report.passed else 1


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fieldcalc",
        description="Field-calculus interpreter, network simulator and monitor corpus.")
    sub = ap.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse, desugar and pretty-print a program")
    p_parse.add_argument("program", help="path to a .fc file")
    p_parse.set_defaults(fn=cmd_parse)

    p_run = sub.add_parser("run", help="simulate a scenario and write the trace")
    p_run.add_argument("--program", help="program path (defaults to the scenario's)")
    p_run.add_argument("--scenario", required=True, help="scenario YAML path")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument("--rounds", type=int, help="override the stop round count")
    p_run.add_argument("--out", help="trace output path (default: stdout)")
    p_run.add_argument("--format", choices=["line-records", "text"],
                       default="line-records")
    p_run.add_argument("--dump-events", action="store_true",
                       help="also write the event structure with its edges")
    p_run.add_argument("--dump-exports", action="store_true",
                       help="also write every round's full export tree")
    p_run.add_argument("--set", action="append", metavar="NAME=VALUE",
                       help="override a constant (repeatable)")
    p_run.set_defaults(fn=cmd_run)

    p_check = sub.add_parser(
        "check", help="run a corpus entry and compare it against its oracle")
    p_check.add_argument("entry",
                         help="corpus entry name or path to a .meta.yaml "
                              f"(shipped: {', '.join(list_entries())})")
    p_check.add_argument("--program", help="override the entry's program source")
    p_check.add_argument("--seed", type=int)
    p_check.add_argument("--rounds", type=int)
    p_check.add_argument("--out", help="report output path (default: stdout)")
    p_check.add_argument("--set", action="append", metavar="NAME=VALUE")
    p_check.set_defaults(fn=cmd_check)
    return ap


def main(argv=None) -> int:
    try:
        args = build_arg_parser().parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
