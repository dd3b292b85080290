"""Command-line front end: run sweeps, compare agents, emit plot series."""

import argparse
import sys

from .harness import (
    AGENTS,
    DEFAULT_EPISODES,
    DEFAULT_STEP_CAP,
    SweepSpec,
    aggregate,
    compare_groups,
    read_records_csv,
    run_sweep,
    write_records_csv,
    write_reports_csv,
    write_series_csv,
)


def _parse_probs(text: str) -> tuple[float, ...]:
    try:
        probs = tuple(float(piece) for piece in text.split(",") if piece.strip())
    except ValueError:
        raise ValueError(f"could not parse probabilities from {text!r}")
    if not probs:
        raise ValueError("at least one probability is required")
    return probs


def _cmd_run(args) -> int:
    agents = [a for a in args.agent.split(",") if a]
    episodes = args.episodes if args.episodes is not None else DEFAULT_EPISODES[args.domain]
    records = []
    for agent in agents:
        spec = SweepSpec(
            domain=args.domain,
            agent=agent,
            probabilities=_parse_probs(args.probs),
            episodes_per_point=episodes,
            base_seed=args.seed,
            step_cap=args.step_cap,
        )
        records.extend(run_sweep(spec, jobs=args.jobs))
    write_records_csv(records, args.out)
    return 0


def _cmd_stats(args) -> int:
    records = read_records_csv(args.in_path)
    reports = compare_groups(records, args.group_a, args.group_b, by_probability=args.by_prob)
    write_reports_csv(reports, args.out)
    return 0


def _cmd_plot_data(args) -> int:
    records = read_records_csv(args.in_path)
    write_series_csv(aggregate(records), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="planact",
        description="Seeded agent-comparison experiments on the rainy grid and minefield worlds.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a sweep and write one CSV record per episode")
    run_p.add_argument("--domain", required=True, choices=sorted(AGENTS))
    run_p.add_argument(
        "--agent",
        required=True,
        help="agent name, or a comma-separated list (tm, baseline1, baseline2, none, random)",
    )
    run_p.add_argument("--probs", required=True, help="comma-separated event probabilities")
    run_p.add_argument("--episodes", type=int, default=None, help="episodes per probability point")
    run_p.add_argument("--seed", type=int, default=0, help="base seed for the sweep")
    run_p.add_argument("--step-cap", type=int, default=DEFAULT_STEP_CAP)
    run_p.add_argument("--jobs", type=int, default=1, help="worker processes (output is identical)")
    run_p.add_argument("--out", required=True, help="output CSV path")
    run_p.set_defaults(func=_cmd_run)

    stats_p = sub.add_parser("stats", help="Welch t-tests between two agents in a records CSV")
    stats_p.add_argument("--in", dest="in_path", required=True, help="records CSV from `run`")
    stats_p.add_argument("--group-a", required=True)
    stats_p.add_argument("--group-b", required=True)
    stats_p.add_argument("--by-prob", action="store_true", help="one test per probability point")
    stats_p.add_argument("--out", required=True)
    stats_p.set_defaults(func=_cmd_stats)

    plot_p = sub.add_parser("plot-data", help="aggregate a records CSV into plot series")
    plot_p.add_argument("--in", dest="in_path", required=True, help="records CSV from `run`")
    plot_p.add_argument("--out", required=True)
    plot_p.set_defaults(func=_cmd_plot_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"planact: error: {exc}", file=sys.stderr)
        return 1


def run_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run_main()
