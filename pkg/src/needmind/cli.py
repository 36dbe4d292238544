"""Command line: run a scenario, fit parameters, or digest a trace.

Exit status is 0 on success, 1 when the input fails validation and 2 when
something breaks while running.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from needmind import calibration as cal
from needmind.engine import run
from needmind.errors import ConfigurationError
from needmind.scenario import ScenarioConfig, apply_params_fragment, bundled_names, load_scenario, print_params
from needmind.trace import emit_trace, format_digest, read_trace, summarize

OK, INVALID, FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code is taken by runtime failures
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="needmind", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, scenario_required=True):
        p.add_argument(
            "--scenario",
            required=scenario_required,
            help=f"scenario file, or a bundled name ({', '.join(bundled_names())})",
        )
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--out", type=Path, help="output file (default: stdout)")
        p.add_argument("--horizon", type=int, help="override the scenario horizon")
        p.add_argument("--params", type=Path, help="params fragment applied over the scenario")

    common(commands.add_parser("run", help="simulate and write the trace CSV"))

    p = commands.add_parser("calibrate", help="fit params to generated labeled samples")
    common(p, scenario_required=False)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--candidates", type=Path, help="per-candidate CSV")

    p = commands.add_parser("survival", help="search params for the longest survival")
    common(p)
    p.add_argument("--budget", type=int, default=20)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--candidates", type=Path, help="per-candidate CSV")

    p = commands.add_parser("summarize", help="salient events of a run or of a trace CSV")
    common(p, scenario_required=False)
    p.add_argument("--trace", type=Path, help="trace CSV to digest instead of running")
    return parser


def configure(args) -> ScenarioConfig:
    try:
        config = load_scenario(args.scenario)
    except FileNotFoundError:
        raise ConfigurationError(f"no scenario file or bundled scenario named {args.scenario!r}") from None
    if args.params is not None:
        config = apply_params_fragment(config, args.params.read_text(encoding="utf-8"))
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    if args.horizon is not None:
        config = config.replace(horizon=args.horizon)
    return config


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _positive(name: str, value: int) -> None:
    if value <= 0:
        raise ConfigurationError(f"--{name} must be positive")


def cmd_run(args) -> None:
    trace = run(configure(args))
    if args.out is None:
        sys.stdout.write(emit_trace(trace))
    else:
        emit_trace(trace, args.out)


def cmd_calibrate(args) -> None:
    _positive("samples", args.samples)
    _positive("budget", args.budget)
    hierarchy = configure(args).hierarchy if args.scenario else None
    samples = cal.generate_samples(args.seed or 0, args.samples)
    result = cal.calibrate(samples, budget=args.budget, seed=args.seed or 0, hierarchy=hierarchy)
    if args.candidates is not None:
        cal.write_candidates(result.history, args.candidates)
    _write(f"# score {result.score}/{len(samples)}\n" + print_params(result.params), args.out)


def cmd_survival(args) -> None:
    _positive("budget", args.budget)
    _positive("repeats", args.repeats)
    config = configure(args)
    result = cal.survival_optimize(config, budget=args.budget, repeats=args.repeats, seed=config.seed)
    if args.candidates is not None:
        cal.write_candidates(result.history, args.candidates)
    _write(f"# mean survival {result.score:g} of {config.horizon} slots\n" + print_params(result.params), args.out)


def cmd_summarize(args) -> None:
    if args.trace is not None:
        events = read_trace(args.trace)
    elif args.scenario:
        events = run(configure(args)).events
    else:
        raise UsageError("summarize needs --trace or --scenario")
    _write(format_digest(summarize(events)), args.out)


COMMANDS = {"run": cmd_run, "calibrate": cmd_calibrate, "survival": cmd_survival, "summarize": cmd_summarize}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        COMMANDS[args.command](args)
    except (UsageError, ConfigurationError, ValueError) as exc:
        print(f"needmind: {exc}", file=sys.stderr)
        return INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"needmind: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILED
    return OK


if __name__ == "__main__":
    sys.exit(main())
