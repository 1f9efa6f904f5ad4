"""Command line entry point.

Verbs::

    simulate        run a configured experiment and write its artifacts
    verify-game     print the potential certificate, MPD and closeness checks
    reproduce-fig1  run the target-assignment preset on ring and star
    analyze         recheck the runs stored under an output directory

Exit status is 0 on success, 1 on I/O failure, and 2 on a configuration,
parse or strict-mode assumption failure.
"""

from argparse import ArgumentParser, Namespace
from typing import List, Optional

from .exc import DfpError
from .experiment import (
    analyze,
    load_config,
    preset,
    PRESETS,
    reproduce_fig1,
    simulate,
    verify_game,
)
from .network import KINDS
from .normal_form.fileio import load_game
from .util import echo, err, set_verbosity


def cmd_simulate(args: Namespace) -> int:
    config = load_config(args.config) if args.config else preset(args.preset)
    config.override(
        seed=args.seed,
        runs=args.runs,
        networks=args.network,
        strict=args.strict_assumptions,
        out=args.out,
        workers=args.workers,
    )
    if args.log:
        config.output.log = True
    if args.charts:
        config.output.charts = True
    simulate(config)
    return 0


def cmd_verify_game(args: Namespace) -> int:
    game = load_game(args.game)
    reference = load_game(args.reference) if args.reference else None
    report = verify_game(
        game,
        reference,
        alpha_bar=args.alpha_bar,
        eps_bar=args.eps_bar,
        n_samples=args.samples,
        seed=args.seed,
        q_out=args.q_csv,
    )
    report.print()
    if args.json:
        print(report)
    return 0


def cmd_reproduce_fig1(args: Namespace) -> int:
    reproduce_fig1(
        args.out, runs=args.runs, seed=args.seed, horizon=args.horizon, workers=args.workers
    )
    return 0


def cmd_analyze(args: Namespace) -> int:
    report = analyze(args.dir, final_window=args.final_window)
    report.print()
    return 0


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="dfplay",
        description="Decentralized fictitious play in near-potential games.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="Print more.")
    parser.add_argument("-q", "--quiet", action="count", default=0, help="Print less.")
    verbs = parser.add_subparsers(dest="verb", required=True)

    sim = verbs.add_parser("simulate", help="Run a configured experiment.")
    source = sim.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", help="Path to a JSON experiment configuration.")
    source.add_argument("--preset", choices=sorted(PRESETS), help="Built-in configuration.")
    sim.add_argument("--out", help="Output directory.")
    sim.add_argument("--seed", type=int, help="Master seed.")
    sim.add_argument("--runs", type=int, help="Number of replications.")
    sim.add_argument(
        "--network",
        action="append",
        choices=sorted(KINDS),
        help="Network kind; repeat for several.",
    )
    sim.add_argument(
        "--strict-assumptions",
        action="store_true",
        help="Fail on the first assumption check that does not hold.",
    )
    sim.add_argument("--workers", type=int, help="Worker processes for replications.")
    sim.add_argument("--log", action="store_true", help="Mirror events to events.log.")
    sim.add_argument("--charts", action="store_true", help="Write SVG charts.")
    sim.set_defaults(func=cmd_simulate)

    ver = verbs.add_parser("verify-game", help="Check a game file.")
    ver.add_argument("game", help="Path to a JSON game file.")
    ver.add_argument("--reference", help="Potential game to measure the MPD against.")
    ver.add_argument("--alpha-bar", type=float, default=0.1)
    ver.add_argument("--eps-bar", type=float, default=1e-3)
    ver.add_argument("--samples", type=int, default=2000, help="Profiles sampled for q.")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--q-csv", help="Write q over an alpha grid to this CSV.")
    ver.add_argument("--json", action="store_true", help="Also print the report as JSON.")
    ver.set_defaults(func=cmd_verify_game)

    fig = verbs.add_parser("reproduce-fig1", help="Target assignment on ring and star.")
    fig.add_argument("--out", default="out/fig1", help="Output directory.")
    fig.add_argument("--runs", type=int)
    fig.add_argument("--seed", type=int)
    fig.add_argument("--horizon", type=int)
    fig.add_argument("--workers", type=int)
    fig.set_defaults(func=cmd_reproduce_fig1)

    ana = verbs.add_parser("analyze", help="Recheck stored runs.")
    ana.add_argument("dir", help="Output directory of a previous run.")
    ana.add_argument("--final-window", type=int, default=50)
    ana.set_defaults(func=cmd_analyze)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_verbosity(2 + args.verbose - args.quiet)

    try:
        return args.func(args)
    except DfpError as e:
        err("Failed:", e)
        return 2
    except OSError as e:
        err("I/O failure:", e)
        return 1
    except KeyboardInterrupt:
        echo("", "")
        err("Interrupted.")
        return 130
