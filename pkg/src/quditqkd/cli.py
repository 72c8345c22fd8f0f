"""Command-line front end: curves, thresholds, experiment, simulate.

Exit codes: 0 on success (and positive key rate), 1 on input errors,
2 when an analysis concludes there is no positive key rate.  All
subcommands are deterministic functions of their inputs, including the
seed, so outputs are byte-identical across repeated runs.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cww4 import rate_cww4_der
from .pipeline import (
    Bb84Analysis,
    Cww4Analysis,
    ExperimentInput,
    analyze_bb84,
    analyze_cww4,
    experiment_input_from_json,
    experiment_input_to_json,
)
from .protocol_rates import (
    DEFAULT_PROTOCOLS,
    RateCurveSpec,
    SS4_SIFT_UNBIASED,
    emit_curve,
    find_threshold,
    rate_bb84,
    rate_six_state_core,
    rate_ss4,
)
from .simulator import load_sim_config, run_campaign, tally_to_records

NO_KEY_EXIT = 2


def _fmt(value: float) -> str:
    return f"{value:.6g}"


class _CliError(ValueError):
    """Input or usage problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # "no positive key", so route usage problems through _CliError.
    def error(self, message):
        raise _CliError(message)


def _parse_grid(spec: str) -> tuple[float, ...]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise _CliError(f"grid must be lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise _CliError(f"invalid grid {spec!r}: {exc}") from exc
    if step <= 0.0 or hi < lo:
        raise _CliError(f"invalid grid {spec!r}: need step > 0 and hi >= lo")
    count = int((hi - lo) / step + 1e-9) + 1
    return tuple(lo + i * step for i in range(count))


def cmd_curves(args: argparse.Namespace) -> int:
    grid = _parse_grid(args.grid)
    protocols = [p for p in (args.protocol or []) if p]
    if args.protocol is not None and not protocols:
        raise _CliError("empty protocol set")
    if not protocols:
        protocols = list(DEFAULT_PROTOCOLS[args.axis])
    columns = []
    for protocol in protocols:
        spec = RateCurveSpec(protocol=protocol, axis=args.axis, grid=grid)
        columns.append(emit_curve(spec)[:, 1])
    lines = ["error_rate," + ",".join(protocols)]
    for i, x in enumerate(grid):
        lines.append(",".join([_fmt(x)] + [_fmt(col[i]) for col in columns]))
    text = "\n".join(lines) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    return 0


def cmd_thresholds(args: argparse.Namespace) -> int:
    rows = (
        ("six_state", "ber", lambda e: rate_six_state_core(e, clamp=False), 0.3),
        ("bb84", "ber", lambda e: rate_bb84(e, clamp=False), 0.4),
        ("ss4_unbiased", "der", lambda x: rate_ss4(x, SS4_SIFT_UNBIASED, clamp=False), 0.4),
        ("cww4", "der", lambda x: rate_cww4_der(x, clamp=False), 0.3),
        # BER expression of the same worst case, through e = 2 e* / 3.
        ("cww4", "ber", lambda e: rate_cww4_der(1.5 * e, clamp=False), 0.2),
    )
    print(f"{'protocol':<14} {'axis':<5} threshold")
    for name, axis, rate, hi in rows:
        value = find_threshold(rate, 1e-6, hi, tol=1e-7)
        print(f"{name:<14} {axis:<5} {value:.4f}")
    return 0


def _print_cww4(analysis: Cww4Analysis) -> None:
    bounds, key = analysis.bounds, analysis.key
    print("protocol: cww4")
    print(f"Y0 lower bound: {_fmt(bounds.y0)}")
    print(f"Y1 lower bound: {_fmt(bounds.y1)}")
    for g in (1, 2, 3):
        print(f"e1^{g} upper bound: {_fmt(bounds.e1.as_tuple()[g])}")
    print(f"single-photon fraction Omega: {_fmt(analysis.omega)}")
    print(f"observed BER: {_fmt(analysis.ber)}")
    print(f"observed DER: {_fmt(analysis.der)}")
    print(f"secret key rate per packet: {_fmt(key.rate)}")
    print(f"raw (unclamped) rate: {_fmt(key.raw_rate)}")


def _print_bb84(analysis: Bb84Analysis) -> None:
    print("protocol: bb84")
    print(f"Y0 lower bound: {_fmt(analysis.y0)}")
    print(f"Y1 lower bound: {_fmt(analysis.y1)}")
    print(f"e1 upper bound (sign channel): {_fmt(analysis.e1)}")
    print(f"observed error: {_fmt(analysis.observed_error)}")
    print(f"single-photon fraction Omega: {_fmt(analysis.omega)}")
    print(f"secret key rate per packet: {_fmt(analysis.rate)}")
    print(f"raw (unclamped) rate: {_fmt(analysis.raw_rate)}")


def cmd_experiment(args: argparse.Namespace) -> int:
    try:
        text = Path(args.input).read_text()
    except OSError as exc:
        raise _CliError(f"cannot read {args.input!r}: {exc}") from exc
    inp = experiment_input_from_json(text)
    if args.protocol == "bb84":
        bb84 = analyze_bb84(inp)
        _print_bb84(bb84)
        return 0 if bb84.raw_rate > 0.0 else NO_KEY_EXIT
    cww4 = analyze_cww4(inp)
    _print_cww4(cww4)
    return 0 if cww4.key.raw_rate > 0.0 else NO_KEY_EXIT


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_sim_config(args.config, seed_override=args.seed)
    sheet = run_campaign(config)
    print(f"{'intensity':<10} {'sent':>10} {'detected':>9} {'sifted':>8} {'multi':>6}")
    for i, mu in enumerate(sheet.intensities):
        print(
            f"{mu:<10g} {sheet.sent[i]:>10} {sheet.detected[i]:>9} "
            f"{sheet.sifted[i]:>8} {sheet.multi_click[i]:>6}"
        )
    records = tally_to_records(sheet)
    inp = ExperimentInput(records=tuple(records))
    Path(args.output).write_text(experiment_input_to_json(inp))
    print(f"records written to {args.output}")
    try:
        analysis = analyze_cww4(inp)
    except ValueError as exc:
        print(f"analysis failed: {exc}")
        return NO_KEY_EXIT
    _print_cww4(analysis)
    return 0 if analysis.key.raw_rate > 0.0 else NO_KEY_EXIT


def _build_parser() -> _Parser:
    parser = _Parser(prog="quditqkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    curves = sub.add_parser("curves", help="emit key-rate curve CSV")
    curves.add_argument("--axis", choices=("ber", "der"), required=True)
    curves.add_argument("--grid", required=True, help="error-rate grid lo:hi:step")
    curves.add_argument(
        "--protocol",
        action="append",
        help="protocol to include (repeatable; default: the standard set per axis)",
    )
    curves.add_argument("--output", help="CSV output path (default: stdout)")
    curves.set_defaults(func=cmd_curves)

    thresholds = sub.add_parser("thresholds", help="print canonical noise thresholds")
    thresholds.set_defaults(func=cmd_thresholds)

    experiment = sub.add_parser("experiment", help="analyze decoy records JSON")
    experiment.add_argument("input", help="ExperimentInput JSON path")
    experiment.add_argument("--protocol", choices=("cww4", "bb84"), default="cww4")
    experiment.set_defaults(func=cmd_experiment)

    simulate = sub.add_parser("simulate", help="run a Monte Carlo campaign")
    simulate.add_argument("config", help="campaign config file")
    simulate.add_argument("--output", required=True, help="records JSON output path")
    simulate.add_argument("--seed", type=int, help="override the config seed")
    simulate.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
