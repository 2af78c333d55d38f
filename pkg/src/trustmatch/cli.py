"""Command-line front end: simulate, sweep, bootstrap, oracle-check."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    compare_with_oracle,
    emit_results,
    emit_trust_trajectories,
    load_experiment_spec,
    run_scenario,
    run_sweep,
)
from .model import builtin_ics_catalog, load_scenario
from .rng import SplitMix64
from .trust import TrustLedger, bootstrap_trust


def _load_scenario_arg(ref: str):
    if ref == "ics":
        return builtin_ics_catalog()
    return load_scenario(ref)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help="override the spec's base seed")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--solvers", default=None,
                   help="comma-separated subset of ttr,one_to_one,nn,random,oracle")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock runtime_ms in CSV (breaks byte-identical reruns)")


def _prepare_spec(args, require_sweep: bool):
    spec = load_experiment_spec(args.spec, scenario_override=getattr(args, "scenario", None))
    if args.seed is not None:
        spec.seed = args.seed
    if args.solvers:
        spec.solvers = tuple(s.strip() for s in args.solvers.split(",") if s.strip())
    if require_sweep and spec.sweep is None:
        raise SystemExit("spec has no sweep section; use 'simulate' instead")
    return spec


def _emit(artifacts, args, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    suffix = "csv" if args.format == "csv" else "json"
    path = emit_results(artifacts, args.format, out_dir / f"results.{suffix}",
                        include_runtime=args.timing)
    print(f"wrote {path} ({len(artifacts.rows)} rows)")
    if artifacts.trust_trajectories:
        tpath = emit_trust_trajectories(artifacts, out_dir / "trust_trajectories.csv")
        print(f"wrote {tpath} ({len(artifacts.trust_trajectories)} snapshots)")


def cmd_simulate(args) -> int:
    spec = _prepare_spec(args, require_sweep=False)
    artifacts = run_scenario(spec)
    _emit(artifacts, args, Path(args.out))
    return 0


def cmd_sweep(args) -> int:
    spec = _prepare_spec(args, require_sweep=True)
    artifacts = run_sweep(spec)
    _emit(artifacts, args, Path(args.out))
    return 0


def cmd_bootstrap(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    seed = args.seed if args.seed is not None else scenario.rng_seed
    ledger = TrustLedger()
    bootstrap_trust(scenario, ledger, args.tasks, SplitMix64(seed))
    ledger.save_jsonl(args.out)
    print(f"wrote {args.out} ({len(ledger)} interaction records)")
    return 0


def cmd_oracle_check(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    seed = args.seed if args.seed is not None else scenario.rng_seed
    report = compare_with_oracle(args.instances, seed, base=scenario,
                                 max_subtasks=args.max_subtasks,
                                 max_devices=args.max_devices)
    print(f"instances:             {report.instances}")
    print(f"mean optimality gap:   {report.mean_gap:.4%}")
    print(f"max optimality gap:    {report.max_gap:.4%}")
    print(f"within 5% of optimum:  {report.within_5pct:.1%}")
    print(f"feasibility failures:  {report.feasibility_failures}")
    print(f"value regressions:     {report.value_regressions}")
    if not report.ok:
        print("FAIL: solver violated feasibility or exceeded the optimum")
        return 1
    print("OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustmatch",
        description="Trusted task-resource matching simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the spec's task batch on one scenario")
    p.add_argument("--scenario", default=None,
                   help="scenario file or 'ics' (overrides the spec)")
    p.add_argument("--spec", required=True, help="experiment spec JSON")
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the spec's parameter sweep")
    p.add_argument("--scenario", default=None)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bootstrap", help="warm a trust ledger with random tasks")
    p.add_argument("--scenario", default="ics")
    p.add_argument("--tasks", type=int, default=500)
    p.add_argument("--out", required=True, help="output ledger (JSON lines)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("oracle-check",
                       help="compare the game solver against exhaustive search")
    p.add_argument("--scenario", default="ics")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--max-subtasks", type=int, default=3)
    p.add_argument("--max-devices", type=int, default=8)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
