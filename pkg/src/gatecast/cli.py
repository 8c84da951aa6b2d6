"""Command-line entry point.

Exit codes: 0 success, 1 a correlation check found a violation,
2 configuration error, 3 I/O error, 4 enumeration budget exceeded.
"""

import argparse
import math
import sys
from dataclasses import asdict

from . import bounds
from .errors import ConfigurationError, EnumerationBudgetError
from .harness import TrialConfig, compare_bounds, render, run_trials
from .lists import build_adversarial_lists, build_random_lists, load_lists, save_lists
from .marking import (
    MarkingConfig,
    negative_correlation_oracle,
    run_marking_experiment,
    spread_positions,
    two_phase_simulation,
)
from .protocol import make_protocol
from ._rng import trial_seed

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO, EXIT_BUDGET = 0, 1, 2, 3, 4


def _common(p, *names):
    if "n" in names:
        p.add_argument("--n", type=int, required=True, help="node count / sequence length")
    if "ell" in names:
        p.add_argument("--ell", type=int, default=1, help="gate spacing")
    if "protocol" in names:
        p.add_argument("--protocol", choices=["push-random", "quasi", "gate"], default="gate")
    if "lists" in names:
        p.add_argument("--lists", default="adversarial", help="adversarial | random | file:PATH")
    if "source" in names:
        p.add_argument("--source", default="random", help="node id or 'random'")
    if "trials" in names:
        p.add_argument("--trials", type=int, default=1)
    if "seed" in names:
        p.add_argument("--seed", type=int, default=0)
    if "epsilon" in names:
        p.add_argument("--epsilon", type=float, default=0.0)
    if "out" in names:
        p.add_argument("--format", choices=["csv", "json"], default="json")
        p.add_argument("--out", help="output path (stdout when omitted)")
    if "nondiv" in names:
        p.add_argument("--allow-nondivisible", action="store_true",
                       help="permit gate spacings that do not divide n")


def build_parser():
    parser = argparse.ArgumentParser(prog="gatecast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run_flags = ("n", "ell", "protocol", "lists", "source", "seed", "epsilon", "out", "nondiv")

    p = sub.add_parser("simulate", help="run one broadcast")
    _common(p, *run_flags)

    p = sub.add_parser("trials", help="run a seeded batch of broadcasts")
    _common(p, *run_flags, "trials")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("bounds", help="print every closed-form bound")
    _common(p, "n", "ell", "epsilon", "out")
    p.add_argument("--i", type=int, default=0, help="random markings")
    p.add_argument("--m", type=int, default=0, help="pre-marked elements")

    p = sub.add_parser("lemma", help="batch of marking experiments")
    _common(p, "n", "trials", "seed", "epsilon", "out")
    p.add_argument("--i", type=int, required=True, help="random markings")
    p.add_argument("--m", type=int, default=0, help="pre-marked elements (evenly spread)")

    p = sub.add_parser("two-phase", help="batch of two-phase pessimistic processes")
    _common(p, "n", "ell", "trials", "seed", "epsilon", "out")

    p = sub.add_parser("correlation-check", help="exact negative-correlation enumeration")
    _common(p, "n", "out")
    p.add_argument("--k", type=int, required=True, help="block length")
    p.add_argument("--i", type=int, required=True, help="draw count")

    p = sub.add_parser("gen-lists", help="write a list family to a file")
    _common(p, "n", "lists", "seed")
    p.add_argument("--out", required=True)
    return parser


def _emit(obj, args):
    text = render(obj, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_source(raw):
    if raw == "random":
        return "random"
    try:
        return int(raw)
    except ValueError:
        raise ConfigurationError(f"--source must be a node id or 'random', got {raw!r}") from None


def _trial_config(args, trials=1):
    protocol = make_protocol(args.protocol, args.ell)
    return TrialConfig(
        n=args.n,
        protocol=protocol,
        list_source=args.lists,
        source_node=_parse_source(args.source),
        trials=trials,
        master_seed=args.seed,
        epsilon=args.epsilon,
        allow_nondivisible=args.allow_nondivisible,
    )


def cmd_simulate(args):
    config = _trial_config(args)
    summary = run_trials(config, keep_results=True)
    result = summary.results[0]
    record = summary.records[0]
    _emit({
        "rounds": result.rounds,
        "informed_counts": list(result.informed_counts),
        "protocol": result.protocol.variant,
        "ell": result.protocol.ell,
        "source": record.source,
        "seed": result.seed,
        "master_seed": args.seed,
    }, args)


def cmd_trials(args):
    summary = run_trials(_trial_config(args, args.trials), n_jobs=args.jobs)
    if args.format == "json":
        payload = summary.to_dict()
        payload["comparison"] = asdict(compare_bounds(
            summary, bounds.BoundParams(args.n, summary.config.protocol.ell, args.epsilon)
        ))
        _emit(payload, args)
    else:
        _emit(summary, args)


def cmd_bounds(args):
    _emit(bounds.all_bounds(bounds.BoundParams(args.n, args.ell, args.epsilon, args.i, args.m)), args)


def cmd_lemma(args):
    k = bounds.lemma_threshold(args.n, args.i, args.epsilon)
    threshold = math.floor(k)
    pre = spread_positions(args.n, args.m)
    rows = []
    for t in range(1, args.trials + 1):
        seed = trial_seed(args.seed, t)
        outcome = run_marking_experiment(MarkingConfig(args.n, pre, args.i, seed))
        rows.append({
            "trial_index": t,
            "seed": seed,
            "largest_gap": outcome.largest_gap,
            "distinct_random_marks": outcome.distinct_random_marks,
            "reaches_threshold": outcome.largest_gap >= threshold,
        })
    if args.format == "csv":
        _emit(rows, args)
        return
    _emit({
        "n": args.n, "m": args.m, "i": args.i, "epsilon": args.epsilon,
        "lemma_threshold": k,
        "threshold_floor": threshold,
        "fraction_at_or_above_threshold": sum(r["reaches_threshold"] for r in rows) / len(rows),
        "failure_bound": bounds.lemma_failure_bound(args.n, args.m, args.i, args.epsilon, warn=False),
        "trials": rows,
    }, args)


def cmd_two_phase(args):
    traces = [
        two_phase_simulation(args.n, args.ell, args.epsilon, trial_seed(args.seed, t))
        for t in range(1, args.trials + 1)
    ]
    _emit(traces, args)


def cmd_correlation(args):
    report = negative_correlation_oracle(args.n, args.k, args.i)
    _emit(report.to_dict() if args.format == "json" else [
        {"block": b, "given": " ".join(map(str, sorted(g))), "probability": str(p)}
        for (b, g), p in sorted(report.conditionals.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1])))
    ], args)
    return EXIT_OK if report.holds else EXIT_CHECK_FAILED


def cmd_gen_lists(args):
    if args.lists == "adversarial":
        lists = build_adversarial_lists(args.n)
    elif args.lists == "random":
        lists = build_random_lists(args.n, args.seed)
    elif args.lists.startswith("file:"):
        lists = load_lists(args.lists[len("file:"):])
    else:
        raise ConfigurationError(f"unknown list source {args.lists!r}")
    save_lists(lists, args.out)


COMMANDS = {
    "simulate": cmd_simulate,
    "trials": cmd_trials,
    "bounds": cmd_bounds,
    "lemma": cmd_lemma,
    "two-phase": cmd_two_phase,
    "correlation-check": cmd_correlation,
    "gen-lists": cmd_gen_lists,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = COMMANDS[args.command](args)
    except EnumerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
