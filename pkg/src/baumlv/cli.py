"""Command-line front end: analyze, verify, ground, encode-2cm, run-2cm.

Exit codes: 0 ok / property holds, 1 property violated, 2 unknown (a grounding
budget ran out), 3 undecidable class and no explicit bound given, 4 usage,
parse, or model error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from pathlib import Path

from . import __version__, kernels
from .analysis import THM3 as V_THM3, THM6 as V_THM6, analyze
from .errors import BadInput, BaumlError, BudgetExceeded, DslSyntaxError, ValidationError
from .grounder import THM3, THM6, ground
from .model.dsl import parse_model
from .mucheck import check
from .mulp import navigationally_compatible, parse_property, termination_property
from .twocm import ENCODERS, encode_source, format_machine, normalize_input, parse_machine, random_machine, run

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_UNKNOWN = 2
EXIT_UNDECIDABLE = 3
EXIT_ERROR = 4

OUTCOME_EXIT = {
    "ok": EXIT_OK,
    "holds": EXIT_OK,
    "violated": EXIT_VIOLATED,
    "unknown": EXIT_UNKNOWN,
    "undecidable": EXIT_UNDECIDABLE,
    "error": EXIT_ERROR,
}

ENCODER_NAMES = {"unrestricted": 1, "unidirectional": 2, "bidirectional": 3, "shared": 4}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _use_color() -> bool:
    env = os.environ.get("BAUMLV_COLOR")
    if env is not None:
        return env != "0"
    return sys.stdout.isatty()


def _paint(text: str, colour: str) -> str:
    if not _use_color():
        return text
    codes = {"green": "32", "red": "31", "yellow": "33", "bold": "1"}
    return f"\033[{codes[colour]}m{text}\033[0m"


def _load_model(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc.strerror}") from None
    return parse_model(text, source=path)


def _load_machine(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BadInput(f"cannot read {path}: {exc.strerror}") from None
    return parse_machine(text, source=path)


def _inputs(text):
    if text is None:
        return None
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--input expects comma-separated integers, got {text!r}") from None
    return values


def _emit(args, payload: dict, human: str):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(human)


# --- analyze -------------------------------------------------------------------------


def _analysis_text(path, report) -> str:
    lines = [f"{path}: {_paint(report.verdict, 'green' if report.decidable else 'red')}",
             f"  {report.citation}"]
    lines.append(f"  read-only: {', '.join(sorted(report.partition.read_only)) or '-'}")
    lines.append(f"  read-write: {', '.join(sorted(report.partition.read_write)) or '-'}")
    nav = report.navigational
    lines.append(f"  navigational: {'yes' if nav.navigational else 'no'}")
    for site, text in nav.witnesses[:3]:
        lines.append(f"    {site}: {text}")
    d = report.directionality
    lines.append(f"  directionality: {d.kind}" + (f" (cycle {d.cycle})" if d.cycle else ""))
    c = report.cardinality
    lines.append(f"  cardinality: {c.kind}" + (f", N={c.n}" if c.kind == "BOUNDED" else "")
                 + (f" (unbounded role {c.role})" if c.role else ""))
    lines.append(f"  shared instances: {report.shared_instances.kind}")
    if report.bounds:
        b = report.bounds
        lines.append(f"  object bound: {b.system} (k={b.k}, N={b.n}, l={b.l}, per instance {b.per_instance})")
    for w in report.warnings:
        lines.append(_paint(f"  warning: {w}", "yellow"))
    return "\n".join(lines)


def cmd_analyze(args) -> str:
    model = _load_model(args.model)
    report = analyze(model, args.instances)
    payload = {"command": "analyze", "model": args.model, "outcome": "ok", **report.to_json()}
    _emit(args, payload, _analysis_text(args.model, report))
    return "ok"


# --- verify / ground -------------------------------------------------------------------


def _grounding_options(args, report):
    """(mode, instances, object bound) for a model, or a refusal message."""
    explicit = args.mode == THM6 and args.instances is not None and args.budget is not None
    if report.verdict == V_THM3:
        mode = args.mode or THM3
        if mode == THM3:
            return mode, 0, report.bounds.system if report.bounds else None
        if args.instances is None:
            raise UsageError("--mode thm6 needs --instances")
        return mode, args.instances, None
    if report.verdict == V_THM6 or explicit:
        if not explicit:
            return None
        return THM6, args.instances, None
    return None


def _refusal(report) -> str:
    return (f"refusing to ground: verdict {report.verdict} ({report.citation}). "
            f"Pass --mode thm6 --instances B --budget K to explore a bounded fragment.")


def _property(args, model):
    if args.termination and args.property:
        raise UsageError("give either --termination or --property, not both")
    if args.termination:
        return termination_property(model)
    if args.property:
        try:
            text = Path(args.property).read_text(encoding="utf-8")
        except OSError as exc:
            raise BadInput(f"cannot read {args.property}: {exc.strerror}") from None
        return parse_property(text, source=args.property)
    raise UsageError("verify needs --termination or --property FILE")


def _ground_for(args, model, report):
    opts = _grounding_options(args, report)
    if opts is None:
        return None
    mode, instances, bound = opts
    return ground(model, mode=mode, instances=instances or 1, budget=args.budget or 16,
                  max_states=args.max_states, max_depth=args.max_steps, object_bound=bound)


def cmd_verify(args) -> str:
    model = _load_model(args.model)
    phi = _property(args, model)
    report = analyze(model, args.instances)
    base = {"command": "verify", "model": args.model, "verdict": report.verdict, "property": str(phi)}
    try:
        nav = navigationally_compatible(phi, model, report.roles)
        base["navigationally_compatible"] = nav.compatible
    except BaumlError:
        base["navigationally_compatible"] = False
    try:
        ts = _ground_for(args, model, report)
    except BudgetExceeded as exc:
        payload = dict(base, outcome="unknown", reason=str(exc), resource=exc.resource)
        _emit(args, payload, _paint(f"UNKNOWN: {exc}", "yellow"))
        return "unknown"
    if ts is None:
        message = _refusal(report)
        _emit(args, dict(base, outcome="undecidable", reason=message), _paint(message, "red"))
        return "undecidable"
    result = check(ts, phi)
    outcome = "holds" if result.holds else "violated"
    payload = dict(base, outcome=outcome, states=len(ts), deadlocks=len(ts.deadlocks),
                   backend=kernels.BACKEND,
                   counterexample=result.counterexample.to_json() if result.counterexample else None)
    lines = [f"{args.model}: property {_paint('HOLDS', 'green') if result.holds else _paint('VIOLATED', 'red')}",
             f"  {len(ts)} states, {len(ts.edges)} edges, {len(ts.deadlocks)} deadlocked"]
    if result.counterexample:
        lines.append(result.counterexample.describe(ts))
    elif not result.holds:
        lines.append("  (no lasso extracted for this property shape)")
    if args.trace and result.counterexample is None and result.holds:
        lines.append(f"  checked with {result.stats['iterations']} fixpoint iterations")
    _emit(args, payload, "\n".join(lines))
    return outcome


def cmd_ground(args) -> str:
    model = _load_model(args.model)
    report = analyze(model, args.instances)
    base = {"command": "ground", "model": args.model, "verdict": report.verdict}
    try:
        ts = _ground_for(args, model, report)
    except BudgetExceeded as exc:
        _emit(args, dict(base, outcome="unknown", reason=str(exc), resource=exc.resource),
              _paint(f"UNKNOWN: {exc}", "yellow"))
        return "unknown"
    if ts is None:
        message = _refusal(report)
        _emit(args, dict(base, outcome="undecidable", reason=message), _paint(message, "red"))
        return "undecidable"
    if args.dump:
        Path(args.dump).write_text(json.dumps(ts.to_json(), indent=1), encoding="utf-8")
    payload = dict(base, outcome="ok", states=len(ts), edges=len(ts.edges), deadlocks=len(ts.deadlocks),
                   max_objects=ts.max_objects)
    _emit(args, payload, f"{args.model}: {len(ts)} states, {len(ts.edges)} edges, "
                         f"{len(ts.deadlocks)} deadlocked, at most {ts.max_objects} objects")
    return "ok"


# --- counter machines ----------------------------------------------------------------------


def _machine_from_args(args):
    if args.machine and args.random:
        raise UsageError("give either a machine file or --random, not both")
    if args.random:
        return random_machine(random.Random(args.seed), args.random)
    if not args.machine:
        raise UsageError("a machine file or --random N is required")
    return _load_machine(args.machine)


def cmd_encode(args) -> str:
    machine = _machine_from_args(args)
    inputs = _inputs(args.input)
    if inputs is not None:
        machine = normalize_input(machine, inputs)
    table = args.table or ENCODER_NAMES[args.encoder]
    text = encode_source(machine, table)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        if not args.json:
            print(f"wrote {args.output}")
    if args.json:
        print(json.dumps({"command": "encode-2cm", "outcome": "ok", "table": table,
                          "machine": format_machine(machine, "; "), "model": text}, indent=2, sort_keys=True))
    elif not args.output:
        print(text, end="")
    return "ok"


def cmd_run(args) -> str:
    machine = _machine_from_args(args)
    result = run(machine, _inputs(args.input), step_limit=args.step_limit, trace=args.trace)
    payload = {"command": "run-2cm", "outcome": "ok", "result": result.outcome, "steps": result.steps,
               "counters": list(result.counters), "pc": result.pc, "max_counter": result.max_counter}
    if args.trace:
        payload["trace"] = [[pc, list(c)] for pc, c in result.trace]
    lines = [f"{result.outcome} after {result.steps} steps at command {result.pc}, counters {list(result.counters)}"]
    if args.trace:
        lines += [f"  {pc}: {list(c)}" for pc, c in result.trace]
    _emit(args, payload, "\n".join(lines))
    return "ok"


# --- wiring -------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="baumlv", description="Verify artifact-centric BAUML process models.")
    p.add_argument("--version", action="version", version=f"baumlv {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    a = sub.add_parser("analyze", help="classify a model against the decidability conditions")
    a.add_argument("model")
    a.add_argument("--instances", type=int, help="an instance bound b, if one is known")
    a.add_argument("--json", action="store_true")
    a.set_defaults(func=cmd_analyze)

    for name, func, helptext in (("verify", cmd_verify, "ground a model and check a property"),
                                 ("ground", cmd_ground, "build the finite transition system")):
        g = sub.add_parser(name, help=helptext)
        g.add_argument("model")
        g.add_argument("--mode", choices=[THM3, THM6])
        g.add_argument("--instances", type=int)
        g.add_argument("--budget", type=int, help="size of the fresh-value pool")
        g.add_argument("--max-states", type=int, default=1_000_000)
        g.add_argument("--max-steps", type=int, help="breadth-first depth limit")
        g.add_argument("--json", action="store_true")
        if name == "verify":
            g.add_argument("--termination", action="store_true", help="check artifact termination")
            g.add_argument("--property", help="a .mulp property file")
            g.add_argument("--trace", action="store_true")
        else:
            g.add_argument("--dump", help="write the system as JSON to this path")
        g.set_defaults(func=func)

    for name, func in (("encode-2cm", cmd_encode), ("run-2cm", cmd_run)):
        c = sub.add_parser(name)
        c.add_argument("machine", nargs="?")
        c.add_argument("--random", type=int, metavar="N", help="use a random machine with N commands")
        c.add_argument("--seed", type=int, default=0)
        c.add_argument("--input", help="counter inputs, e.g. 2,1")
        c.add_argument("--json", action="store_true")
        if name == "encode-2cm":
            c.add_argument("--table", type=int, choices=sorted(ENCODERS))
            c.add_argument("--encoder", choices=sorted(ENCODER_NAMES), default="unidirectional")
            c.add_argument("-o", "--output")
        else:
            c.add_argument("--step-limit", type=int, default=10_000)
            c.add_argument("--trace", action="store_true")
        c.set_defaults(func=func)
    return p


def _validate(args):
    for flag in ("instances", "budget", "max_states", "max_steps", "random", "step_limit"):
        value = getattr(args, flag, None)
        if value is not None and value < (0 if flag == "step_limit" else 1):
            raise UsageError(f"--{flag.replace('_', '-')} must be positive")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("missing subcommand (analyze, verify, ground, encode-2cm, run-2cm)")
        _validate(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"baumlv: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        outcome = args.func(args)
    except UsageError as exc:
        print(f"baumlv: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (DslSyntaxError, ValidationError) as exc:
        print(f"baumlv: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except BudgetExceeded as exc:
        print(f"baumlv: unknown: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except BaumlError as exc:
        print(f"baumlv: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return OUTCOME_EXIT[outcome]


if __name__ == "__main__":
    sys.exit(main())
