"""Command-line entry point.

Subcommands: ``simulate`` (one seeded episode), ``benchmark`` (paired-seed
policy comparison), ``stats`` (initial-fire statistics), ``export-lp``
(fluid model as fixed MPS), ``weights`` (distance-weighted heuristic map as
CSV).  All randomness flows from the scenario seed (overridable with
``--seed``); replication r uses seed + r.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace

from . import harness
from .fluid import build_model, calibrate
from .heuristics import all_pairs_distances, fw_weights
from .mpsio import write_mps


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _load(args) -> harness.ScenarioConfig:
    config = harness.load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    return config


def _cmd_simulate(args) -> int:
    config = _load(args)
    policy = config.make_policy(args.policy)
    if args.trace is not None and hasattr(policy, "trace"):
        policy.trace = []
    result = harness.run_episode(config, policy, config.seed, args.policy)
    print(f"policy={result.policy} seed={result.seed} reward={result.reward} "
          f"steps={result.steps} flags={result.flags() or '-'}")
    if args.trace is not None:
        rows = getattr(policy, "trace", None) or []
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iteration", "bound", "incumbent", "gap"])
        for row in rows:
            writer.writerow(list(row))
        _write(args.trace, out.getvalue())
    if args.out is not None:
        _write(args.out, harness.results_to_csv([result]))
    return 0


def _cmd_benchmark(args) -> int:
    config = _load(args)
    policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    if not policies:
        raise harness.ScenarioError("field 'policies': none given")
    results, summary = harness.run_benchmark(
        config, policies, reps=args.reps, jobs=args.jobs)
    _write(args.out, harness.results_to_csv(results))
    _write(args.summary_out, harness.summary_to_csv(summary))
    for ps in summary.policies:
        rel = ("-" if ps.improvement_vs_random is None
               else f"{ps.improvement_vs_random:+.2f}%")
        print(f"{ps.policy}: mean={ps.mean:.3f} median={ps.median:.3f} "
              f"vs-random={rel}")
    return 0


def _cmd_stats(args) -> int:
    config = _load(args)
    text = harness.stats_to_csv(config, reps=args.reps)
    _write(args.out, text)
    if args.out not in (None, "-"):
        print(text, end="")
    return 0


def _cmd_export_lp(args) -> int:
    config = _load(args)
    rng = harness.episode_rng(config.seed)
    state = config.initial_state(rng)
    calibration = calibrate(config.spread(), state, args.horizon,
                            delta=args.delta)
    model = build_model(calibration, state, config.reward_model(), config.teams)
    _write(args.out, write_mps(model.problem, model.integer_mask))
    return 0


def _cmd_weights(args) -> int:
    config = _load(args)
    spec = config.spec()
    weights = fw_weights(all_pairs_distances(config.spread()),
                         config.reward_model())
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["row", "col", "w", "priority"])
    for cell in range(spec.n_cells):
        col, row = spec.coords(cell)
        writer.writerow([row, col, repr(float(weights.w[cell])),
                         repr(float(weights.priority[cell]))])
    _write(args.out, out.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="firegrid",
        description="Wildfire-suppression planning benchmark toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")

    p = sub.add_parser("simulate", help="run one seeded episode")
    common(p)
    p.add_argument("--policy", default="fw",
                   choices=sorted(harness.POLICY_NAMES))
    p.add_argument("--out", default=None, help="episode result CSV")
    p.add_argument("--trace", default=None,
                   help="planner diagnostics CSV (mcts/mo policies)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("benchmark", help="paired-seed policy comparison")
    common(p)
    p.add_argument("--policies", default="random,fw",
                   help="comma-separated policy list")
    p.add_argument("--reps", type=int, default=None,
                   help="replications (default: scenario reps)")
    p.add_argument("--out", default="results.csv", help="per-episode CSV")
    p.add_argument("--summary-out", default="summary.csv",
                   help="per-policy summary CSV")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("stats", help="initial-fire statistics")
    common(p)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--out", default=None, help="stats CSV (default stdout)")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("export-lp", help="write the fluid model as fixed MPS")
    common(p)
    p.add_argument("--out", required=True, help="output MPS path")
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=_cmd_export_lp)

    p = sub.add_parser("weights", help="export the heuristic weight map")
    common(p)
    p.add_argument("--out", default=None, help="weights CSV (default stdout)")
    p.set_defaults(func=_cmd_weights)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except harness.ScenarioError as exc:
        print(f"firegrid: scenario error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"firegrid: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
