"""Command-line front end: gen, plan, simulate and sweep subcommands.

Machine-readable outputs (JSON documents, CSV) go to files or stdout;
human-oriented summaries go to stderr.  Exit codes: 0 on success, 2 when a
taskset cannot meet its minimum QoS requirements, 1 for any other failure
including usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import experiments, game, planner, simulator, workload
from .model import load_taskset, save_taskset, validate

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; remap to the generic failure code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _workload_spec(args, scenario: str, bucket: int) -> workload.WorkloadSpec:
    doc = {}
    if getattr(args, "spec", None):
        doc = json.loads(Path(args.spec).read_text())
    overhead_preset = None
    if getattr(args, "preset", None) and args.preset != "custom":
        overhead_preset = args.preset
    return workload.WorkloadSpec(
        num_cores=doc.get("num_cores", 4),
        utilization_bucket=bucket,
        scenario=scenario,
        n_fixed=doc.get("n_fixed"),
        tasks_min=doc.get("tasks_min"),
        tasks_max=doc.get("tasks_max"),
        period_min_us=doc.get("period_min_us", 10_000),
        period_max_us=doc.get("period_max_us", 1_000_000),
        min_checks_fraction=doc.get("min_checks_fraction", 0.2),
        overhead_fraction=doc.get("overhead_fraction", 0.1),
        overhead_preset=doc.get("overhead_preset", overhead_preset),
        tasksets_per_bucket=args.tasksets_per_bucket,
        seed=args.seed,
    )


def cmd_gen(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = json.loads(Path(args.spec).read_text()) if args.spec else {}
    scenario = doc.get("scenario", "medium")
    buckets = doc.get("buckets", list(range(workload.NUM_BUCKETS)))
    scenario_idx = {"medium": 0, "high": 1}.get(scenario, 2)

    manifest = {"seed": args.seed, "scenario": scenario, "tasksets": []}
    for bucket in buckets:
        spec = _workload_spec(args, scenario, bucket)
        for index in range(args.tasksets_per_bucket):
            path = (args.seed, 0, scenario_idx, bucket, index)
            rng = workload.taskset_rng(*path)
            taskset = workload.gen_taskset(spec, rng)
            name = f"taskset_{scenario}_b{bucket}_{index:04d}.json"
            save_taskset(taskset, out_dir / name)
            manifest["tasksets"].append(
                {"file": name, "bucket": bucket, "index": index, "seed_path": list(path)}
            )
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    _info(f"wrote {len(manifest['tasksets'])} tasksets to {out_dir}")
    return EXIT_OK


def cmd_plan(args) -> int:
    taskset = load_taskset(args.taskset)
    violations = validate(taskset)
    if violations:
        for v in violations:
            _info(f"invalid taskset: {v}")
        return EXIT_ERROR
    result = planner.plan(taskset, big_m=args.big_m, epsilon=args.epsilon)
    if isinstance(result, planner.Infeasible):
        _info(f"infeasible: {result.reason}")
        return EXIT_INFEASIBLE
    _emit(json.dumps(planner.plan_to_dict(result), indent=2) + "\n", args.out)
    if args.report_csv:
        from .schedulability import analyze, report_csv

        assignment = {e.task_id: e.k_star for e in result.tasks.values()}
        Path(args.report_csv).write_text(report_csv(analyze(taskset, assignment)))
    covered = simulator.coverage_ratio(result) if result.coverage_pairs() else 1.0
    _info(f"feasible plan for {len(result.tasks)} tasks; coverage ratio {covered:.4f}")
    return EXIT_OK


def _parse_commands(text: str):
    if text == "random":
        return "random"
    return tuple(int(c) for c in text.split(","))


def _parse_trigger(text: str):
    return "random" if text == "random" else int(text)


def cmd_simulate(args) -> int:
    plan = planner.load_plan(args.plan)
    victim = args.victim
    if victim is None:
        nondet = [e.task_id for e in plan.tasks.values() if not e.deterministic]
        pool = nondet or [e.task_id for e in plan.tasks.values() if e.num_commands > 0]
        if not pool:
            _info("plan contains no attackable task")
            return EXIT_ERROR
        victim = pool[0]
    elif victim not in plan.tasks:
        _info(f"victim {victim!r} not in plan")
        return EXIT_ERROR
    attack = simulator.AttackSpec(
        victim=victim,
        commands=_parse_commands(args.commands),
        trigger=_parse_trigger(args.trigger),
        mode=args.mode,
    )
    result = simulator.run_detection_experiment(
        plan,
        attack,
        trials=args.trials,
        max_jobs=args.max_jobs,
        seed=args.seed,
        detection_accuracy=args.accuracy,
    )
    _emit(simulator.result_csv(result), args.out)
    _info(
        f"victim {victim}: {args.trials} trials, mean delay {result.mean_delay:.3f} jobs, "
        f"p99 {result.p99_delay}, undetected {result.undetected}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    base = _workload_spec(args, "medium", 0)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.fig == 6:
        result = experiments.sweep_coverage(base, args.tasksets_per_bucket, jobs=args.jobs)
        path = out_dir / "fig6_coverage.csv"
    elif args.fig == 7:
        result = experiments.sweep_detection_tradeoff(
            base,
            tasksets_per_bucket=args.tasksets_per_bucket,
            trials=args.trials,
            jobs=args.jobs,
            big_m=args.big_m,
            epsilon=args.epsilon,
        )
        path = out_dir / "fig7_tradeoff.csv"
    else:
        result = experiments.sweep_acceptance(base, args.tasksets_per_bucket, jobs=args.jobs)
        path = out_dir / "fig8_acceptance.csv"
    path.write_text(result.to_csv())
    _info(f"wrote {path} ({len(result.rows)} rows)")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="selcheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", help="generate random taskset files")
    p_gen.add_argument("--spec", help="workload spec JSON (cores, scenario, buckets, ...)")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--tasksets-per-bucket", type=int, default=50)
    p_gen.add_argument("--preset", choices=["linux-optee", "freertos", "custom"], default="custom",
                       help="per-command overhead: platform constant, or 'custom' for 10%% of wcet")
    p_gen.set_defaults(func=cmd_gen)

    p_plan = sub.add_parser("plan", help="compute check budgets and distributions for a taskset")
    p_plan.add_argument("--taskset", required=True, help="taskset JSON file")
    p_plan.add_argument("--out", help="plan JSON output (default stdout)")
    p_plan.add_argument("--big-m", type=float, default=game.DEFAULT_BIG_M)
    p_plan.add_argument("--epsilon", type=float, default=game.DEFAULT_EPSILON)
    p_plan.add_argument("--report-csv", help="also write the response-time report CSV here")
    p_plan.set_defaults(func=cmd_plan)

    p_sim = sub.add_parser("simulate", help="run attack-injection trials against a plan")
    p_sim.add_argument("--plan", required=True, help="plan JSON file")
    p_sim.add_argument("--victim", help="victim task id (default: first randomized task)")
    p_sim.add_argument("--commands", default="random",
                       help="compromised commands, e.g. '1,3', or 'random' (default)")
    p_sim.add_argument("--mode", choices=["persistent", "one-shot"], default="persistent")
    p_sim.add_argument("--trigger", default="random", help="0-based trigger job index or 'random'")
    p_sim.add_argument("--trials", type=int, default=1000)
    p_sim.add_argument("--max-jobs", type=int, default=100_000)
    p_sim.add_argument("--accuracy", type=float, default=1.0,
                       help="per-command detection probability (default 1.0)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", help="result CSV output (default stdout)")
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a utilization sweep and write its CSV")
    p_sweep.add_argument("--fig", type=int, choices=[6, 7, 8], required=True,
                         help="6 coverage, 7 delay tradeoff, 8 acceptance ratio")
    p_sweep.add_argument("--spec", help="workload spec JSON overriding defaults")
    p_sweep.add_argument("--out", help="output directory (default .)")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--trials", type=int, default=1000)
    p_sweep.add_argument("--tasksets-per-bucket", type=int, default=50)
    p_sweep.add_argument("--big-m", type=float, default=game.DEFAULT_BIG_M)
    p_sweep.add_argument("--epsilon", type=float, default=game.DEFAULT_EPSILON)
    p_sweep.add_argument("--preset", choices=["linux-optee", "freertos", "custom"], default="custom")
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            workload.GenerationError, game.GameInfeasibleError) as exc:
        _info(f"error: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
