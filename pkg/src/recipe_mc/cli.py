"""Command-line front end: ``recipe-mc {check,sat,simulate,equiv,show}``.

Exit codes: 0 success (holds / sat / equivalent / trace written), 1 negative
verdict (fails / unsat / divergence), 2 usage, input or validation error, 3
deadlock reached while simulating.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from . import automata as A
from . import ltol as L
from .cts import ComposedCts, StateLimitExceeded, compose_all, system_cts, to_dot
from .model import ModelError, ValidationError, format_assertion
from .parser import SpecSyntaxError, load_formula, load_system, print_system
from .symbolic import DeadEnd, SymbolicSystem, full_abstraction_check, trace_json, trace_stream

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR, EXIT_DEADLOCK = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _env_max_states():
    raw = os.environ.get("RECIPE_MC_MAX_STATES")
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"RECIPE_MC_MAX_STATES must be an integer, got {raw!r}")
    if value <= 0:
        raise UsageError("RECIPE_MC_MAX_STATES must be positive")
    return value


def _non_negative(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


# ---------------------------------------------------------------------------
# Text rendering


def _state_text(js: dict) -> str:
    return " ".join(f"{a}({', '.join(f'{k}={v}' for k, v in vs.items())})" for a, vs in js.items())


def _message_text(m) -> str:
    d = ", ".join(f"{k}={v}" for k, v in m.data)
    return f"{m.sender} -> {m.ch} {{{d}}} pi: {format_assertion(m.pi)}"


def _witness_text(verdict) -> list:
    lines = []
    i = 0
    for title, part in (("stem", verdict.stem), ("loop", verdict.loop)):
        lines.append(f"{title}:")
        for state, m in part:
            lines.append(f"  [{i}] {_state_text(state)}")
            lines.append(f"      {_message_text(m)}")
            i += 1
    return lines


def _emit(args, text: str):
    if not args.quiet:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


# ---------------------------------------------------------------------------
# Commands


def _load(args, path):
    return load_system(path, validate=not args.no_validate)


def cmd_check(args) -> int:
    system = _load(args, args.system)
    formula = load_formula(args.formula, system)
    if args.format == "dot":
        nbw = A.formula_to_nbw(L.dual(formula), system)
        _emit(args, A.export_automaton(nbw if args.automaton == "nbw" else nbw.abw))
        return EXIT_OK
    sym = SymbolicSystem(system)
    verdict = A.model_check(system, formula, max_states=args.max_states, sym=sym)
    if verdict.deadlock is not None:
        print(f"warning: reachable deadlock in state {_state_text(verdict.deadlock)}",
              file=sys.stderr)
    if args.format == "json":
        _emit(args, _dump(verdict.to_json()))
    else:
        lines = [verdict.result]
        if verdict.result == "fails":
            lines.append("counterexample:")
            lines += ["  " + x for x in _witness_text(verdict)]
        _emit(args, "\n".join(lines))
    return EXIT_OK if verdict.result == "holds" else EXIT_NEGATIVE


def cmd_sat(args) -> int:
    system = _load(args, args.vocabulary)
    formula = load_formula(args.formula, system)
    if args.format == "dot":
        nbw = A.formula_to_nbw(formula, system)
        _emit(args, A.export_automaton(nbw if args.automaton == "nbw" else nbw.abw))
        return EXIT_OK
    verdict = A.satisfiable(formula, system)
    if args.format == "json":
        _emit(args, _dump(verdict.to_json()))
    else:
        lines = [verdict.result]
        if verdict.result == "sat":
            lines.append("witness:")
            lines += ["  " + x for x in _witness_text(verdict)]
        _emit(args, "\n".join(lines))
    return EXIT_OK if verdict.result == "sat" else EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    system = _load(args, args.system)
    sym = SymbolicSystem(system)
    initial = sorted(sym.initial_states())
    if not initial:
        raise UsageError("the system has no initial state")
    # the initial state gets its own generator so traces of different
    # lengths share their prefixes
    s0 = initial[random.Random(args.seed).randrange(len(initial))]
    try:
        steps = trace_stream(sym, s0, args.steps, seed=args.seed)
        dead = None
    except DeadEnd as e:
        dead = e
        steps = trace_stream(sym, s0, e.step, seed=args.seed)
    if args.format == "json":
        out = {"trace": trace_json(sym, steps)}
        if dead is not None:
            out["deadlock"] = {"step": dead.step, "state": sym.state_json(dead.state)}
        _emit(args, _dump(out))
    else:
        lines = []
        for i, st in enumerate(steps):
            lines.append(f"[{i}] {_state_text(sym.state_json(st.state))}")
            lines.append(f"    {_message_text(st.message)}")
        if dead is not None:
            lines.append(f"deadlock at step {dead.step}: {_state_text(sym.state_json(dead.state))}")
        if lines:
            _emit(args, "\n".join(lines))
    if dead is not None:
        print(f"deadlock at step {dead.step}", file=sys.stderr)
        return EXIT_DEADLOCK
    return EXIT_OK


def cmd_equiv(args) -> int:
    system = _load(args, args.system)
    rules = ComposedCts.RULES
    if args.drop_rule:
        rules = tuple(r for r in rules if r not in args.drop_rule)
    if args.format == "dot":
        _emit(args, to_dot(system_cts(system, rules), max_states=args.max_states, name=system.name or "cts"))
        return EXIT_OK
    report = full_abstraction_check(system, compose_fn=lambda parts: compose_all(parts, rules),
                                    exhaustive=True if args.exhaustive else None,
                                    max_states=args.max_states)
    if args.format == "json":
        _emit(args, _dump(report.to_json()))
    else:
        head = "equivalent" if report.equivalent else "diverges"
        lines = [f"{head} ({report.scope}: {report.states_checked} states, "
                 f"{report.transitions} transitions, {report.initial} initial)"]
        if report.divergence is not None:
            lines.append(_dump(report.divergence))
        _emit(args, "\n".join(lines))
    return EXIT_OK if report.equivalent else EXIT_NEGATIVE


def cmd_show(args) -> int:
    system = _load(args, args.system)
    if args.formula:
        formula = load_formula(args.formula, system)
        _emit(args, L.format_formula(formula))
    else:
        _emit(args, print_system(system))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="print nothing on standard output")
    common.add_argument("--no-validate", action="store_true",
                        help="skip the guard and input-enabledness checks on agents")
    common.add_argument("--max-states", type=_positive, default=None,
                        help="abort when exploration exceeds N states "
                             "(default: $RECIPE_MC_MAX_STATES, else unbounded)")

    parser = argparse.ArgumentParser(prog="recipe-mc",
                                     description="Model checking for reconfigurable communicating programs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="model check a formula against a system")
    p.add_argument("system")
    p.add_argument("formula")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--automaton", choices=("abw", "nbw"), default="nbw",
                   help="automaton exported with --format dot (built for the negated formula)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sat", parents=[common], help="satisfiability over a system's vocabulary")
    p.add_argument("formula")
    p.add_argument("vocabulary", help="system file supplying variables, channels and agents")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--automaton", choices=("abw", "nbw"), default="nbw")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("simulate", parents=[common], help="print a seeded random trace prefix")
    p.add_argument("system")
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--steps", type=_non_negative, default=20)
    p.add_argument("--format", choices=("text", "json"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("equiv", parents=[common],
                       help="compare the global relation with the composed transition system")
    p.add_argument("system")
    p.add_argument("--format", choices=("text", "json", "dot"), default="text")
    p.add_argument("--exhaustive", action="store_true", help="compare every product state")
    p.add_argument("--drop-rule", action="append", choices=ComposedCts.RULES,
                   help="remove a composition rule (builds a deliberately broken composition)")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("show", parents=[common], help="pretty-print a system or formula")
    p.add_argument("system")
    p.add_argument("--formula")
    p.set_defaults(func=cmd_show)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        if args.max_states is None:
            args.max_states = _env_max_states()
        return args.func(args)
    except SpecSyntaxError as e:
        for err in e.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, UsageError, ValidationError, ModelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except StateLimitExceeded as e:
        print(f"error: {e}; raise --max-states", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
