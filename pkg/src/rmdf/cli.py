"""``rmdf`` command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 negative verdict,
3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as rp
from .analysis import InvariantBreach, analyze_rmdf
from .desugar import DesugarError, remove_routing_actors
from .examples import EXAMPLES
from .execution import (
    ExecutionError,
    PreprocessError,
    check_mcp_properties,
    port_policy,
    preprocess,
    simulate,
)
from .model import ActorKind, SpecError, format_rational, load_spec, parse_rational, serialize_spec, validate_structure
from .modes import ModeAnalysisError, check_mode_coherence, compute_control_areas
from .rates import NotGenerable, rate_init_from_consumption_sequence, rate_init_from_production_sequence, tokens_at_job
from .timing import TimingAnalysis, TimingError, feasibility, max_feasible_wcet

OK, USAGE, NEGATIVE, INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _add_format(p):
    p.add_argument("--format", choices=rp.FORMATS, default="table")


def _emit(text: str, out: str | None = None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    spec = load_spec(args.spec)
    violations = validate_structure(spec)
    if not violations:
        violations = check_mode_coherence(spec)
    _emit(rp.render_violations(violations, args.format))
    return NEGATIVE if violations else OK


def cmd_desugar(args) -> int:
    spec = load_spec(args.spec)
    try:
        out = remove_routing_actors(spec)
    except DesugarError as exc:
        raise UsageError(str(exc)) from None
    _emit(serialize_spec(out), args.output)
    return OK


def cmd_analyze(args) -> int:
    report = analyze_rmdf(load_spec(args.spec))
    _emit(rp.render_analysis(report, args.format))
    return OK if report.ok else NEGATIVE


def _parse_policy(spec, text: str):
    """``port:K`` for every decider, or ``Decider=port:K`` pairs separated by commas."""
    deciders = [a.id for a in spec.actors if a.kind is ActorKind.MODE_DECIDER]
    policies = {}
    for part in text.split(","):
        target, _, rule = part.rpartition("=")
        kind, _, value = rule.partition(":")
        if kind != "port" or not value.isdigit():
            raise UsageError(f"malformed policy {part!r}; expected port:K or Decider=port:K")
        names = [target] if target else deciders
        for d in names:
            if d not in deciders:
                raise UsageError(f"{d} is not a mode decider")
            try:
                policies[d] = port_policy(spec, d, int(value))
            except ValueError as exc:
                raise UsageError(str(exc)) from None
    return policies


def cmd_preprocess(args) -> int:
    spec = load_spec(args.spec)
    policy = _parse_policy(spec, args.policy) if args.policy else None
    try:
        out, report = preprocess(spec, policy)
    except PreprocessError as exc:
        sys.stderr.write(f"rmdf: {exc}\n")
        return NEGATIVE
    if args.output:
        Path(args.output).write_text(serialize_spec(out), encoding="utf-8")
        sys.stdout.write(rp.render_preprocess(report, args.format))
    else:
        sys.stdout.write(serialize_spec(out))
        sys.stderr.write(rp.render_preprocess(report, "table"))
    return OK


def cmd_simulate(args) -> int:
    spec = load_spec(args.spec)
    modes = []
    if args.modes:
        try:
            modes = [int(x) - 1 for x in args.modes.split(",")]
        except ValueError:
            raise UsageError(f"malformed mode list {args.modes!r}") from None
    try:
        trace = simulate(spec, args.hyperperiods, modes)
    except ExecutionError as exc:
        raise UsageError(str(exc)) from None
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            trace.write_jsonl(fh)
    areas = compute_control_areas(spec)
    mcp = check_mcp_properties(trace, areas)
    fired = {a: trace.final.job_counters[a] - trace.initial.job_counters[a] for a in spec.actor_ids}
    _emit(rp.render_mcp(mcp, args.format, fired))
    if trace.deadlock is not None:
        sys.stderr.write("rmdf: deadlock before all targets were reached\n")
        return NEGATIVE
    return OK if mcp.ok else NEGATIVE


def cmd_timing(args) -> int:
    ta = TimingAnalysis(load_spec(args.spec))
    actors = [args.actor] if args.actor else sorted(ta.q)
    if args.actor and args.actor not in ta.q:
        raise UsageError(f"unknown actor {args.actor!r}")
    if args.job is not None and args.job < 1:
        raise UsageError("--job must be >= 1")
    ta.window_table()  # cyclicity check
    windows = []
    for a in actors:
        jobs = [args.job] if args.job is not None else range(1, args.hyperperiods * ta.q[a] + 1)
        windows += [ta.window(a, n) for n in jobs]
    _emit(rp.render_windows(windows, args.format, ta.H))
    return OK


def cmd_feasibility(args) -> int:
    spec = load_spec(args.spec)
    result = feasibility(spec)
    text = rp.render_feasibility(result, args.format)
    if args.bounds:
        text += "\n" + rp.render_bounds(max_feasible_wcet(spec), args.format)
    _emit(text)
    return OK if result.feasible else NEGATIVE


def cmd_rate(args) -> int:
    if args.seq:
        try:
            seq = [int(x) for x in args.seq.split(",")]
        except ValueError:
            raise UsageError(f"malformed sequence {args.seq!r}") from None
        fn = rate_init_from_production_sequence if args.direction == "prod" else rate_init_from_consumption_sequence
        try:
            rate, init = fn(seq)
        except NotGenerable as exc:
            sys.stdout.write(f"not generable: {exc}\n")
            return NEGATIVE
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.format == "json":
            _emit(rp._json({"kind": "rate", "rate": format_rational(rate), "initial_tokens": format_rational(init)}))
        else:
            _emit(f"rate {format_rational(rate)} initial_tokens {format_rational(init)}\n")
        return OK
    if args.rate is None:
        raise UsageError("give --seq or --rate")
    rate = parse_rational(args.rate)
    init = parse_rational(args.init)
    n = args.jobs or rate.denominator
    sign = 1 if args.direction == "prod" else -1
    seq = [tokens_at_job(j, sign * rate, init) for j in range(1, n + 1)]
    _emit(",".join(map(str, seq)) + "\n")
    return OK


def cmd_examples(args) -> int:
    out = Path(args.directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, build in sorted(EXAMPLES.items()):
        (out / f"{name}.json").write_text(serialize_spec(build()), encoding="utf-8")
        sys.stdout.write(f"{out / (name + '.json')}\n")
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rmdf", description="Static analysis of RMDF dataflow specifications.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="structural and mode-coherence checks")
    s.add_argument("spec")
    _add_format(s)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("desugar", help="remove splitters, joiners, duplicaters and discards")
    s.add_argument("spec")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_desugar)

    s = sub.add_parser("analyze", help="consistency and liveness in every mode")
    s.add_argument("spec")
    _add_format(s)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("preprocess", help="execute offline jobs and rewrite initial tokens")
    s.add_argument("spec")
    s.add_argument("-o", "--output")
    s.add_argument("--policy", help="port:K, or Decider=port:K,... for offline mode decisions")
    _add_format(s)
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("simulate", help="symbolic execution over several hyperperiods")
    s.add_argument("spec")
    s.add_argument("--hyperperiods", type=int, default=1)
    s.add_argument("--modes", help="1-based mode indices, cycled over decider firings")
    s.add_argument("--trace", help="write token movements as JSON lines")
    _add_format(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("timing", help="release/deadline windows")
    s.add_argument("spec")
    s.add_argument("--actor")
    s.add_argument("--job", type=int)
    s.add_argument("--hyperperiods", type=int, default=1)
    _add_format(s)
    s.set_defaults(func=cmd_timing)

    s = sub.add_parser("feasibility", help="window length versus WCET")
    s.add_argument("spec")
    s.add_argument("--bounds", action="store_true", help="also print the largest feasible WCET per actor")
    _add_format(s)
    s.set_defaults(func=cmd_feasibility)

    s = sub.add_parser("rate", help="rate/sequence conversions")
    s.add_argument("--seq", help="comma-separated token counts")
    s.add_argument("--direction", choices=("prod", "cons"), default="prod")
    s.add_argument("--rate")
    s.add_argument("--init", default="0")
    s.add_argument("--jobs", type=int)
    s.add_argument("--format", choices=("table", "json"), default="table")
    s.set_defaults(func=cmd_rate)

    s = sub.add_parser("examples", help="write the bundled example specs")
    s.add_argument("directory")
    s.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, UsageError, TimingError, ModeAnalysisError, FileNotFoundError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"rmdf: {exc}\n")
        return USAGE
    except (InvariantBreach, ExecutionError) as exc:
        sys.stderr.write(f"rmdf: internal invariant breach: {exc}\n")
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
