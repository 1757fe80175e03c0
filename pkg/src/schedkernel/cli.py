"""Command-line front end.

Exit codes: 0 schedulable (or success), 1 unschedulable, 2 usage error,
3 internal inconsistency between solvers.
"""

import argparse
from importlib import resources
import json
import os
from pathlib import Path
import sys
from typing import List, Optional, Sequence

from schedkernel.bench import (ExperimentConfig, InconsistencyError, run_experiment,
                               summary_table, to_csv, to_jsonl)
from schedkernel.demand import Task, TaskSystem
from schedkernel.kernel import solve_cp_kern, solve_fp_kern, solve_oracle
from schedkernel.sched import edf_test, fp_analyze
from schedkernel.taskgen import GenConfig, gen_system, make_rng, random_kernel_instance

EXIT_OK = 0
EXIT_UNSCHEDULABLE = 1
EXIT_USAGE = 2
EXIT_INCONSISTENT = 3

SEED_ENV = "SCHEDKERNEL_SEED"
GENERATOR_NAME = "schedkernel.taskgen"
FIXTURE_PREFIX = "fixture:"
VERIFY_RANGE_LIMIT = 10**7


class UsageError(Exception):
    pass


# --- task-set files -------------------------------------------------------

def system_to_json(system: TaskSystem, seed: int = 0, generator: str = GENERATOR_NAME) -> dict:
    return {"kind": system.order,
            "tasks": [{"C": t.C, "T": t.T, "D": t.D, "J": t.J} for t in system],
            "meta": {"seed": seed, "generator": generator}}


def system_from_json(doc: dict) -> TaskSystem:
    """Parse a task-set document. EDF task lists may come in any order."""
    try:
        kind = doc["kind"]
        tasks = [Task(C=int(t["C"]), T=int(t["T"]), D=int(t["D"]), J=int(t.get("J", 0)))
                 for t in doc["tasks"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed task-set file: {exc}") from None
    if kind == "fp":
        return TaskSystem.fp(tasks)
    if kind == "edf":
        return TaskSystem.edf(tasks)
    raise UsageError(f"unknown task-set kind {kind!r}")


def fixture_names() -> List[str]:
    root = resources.files("schedkernel") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_task_file(source: str) -> TaskSystem:
    """Load a task set from a path, or ``fixture:NAME`` for a bundled one."""
    if source.startswith(FIXTURE_PREFIX):
        name = source[len(FIXTURE_PREFIX):]
        if name not in fixture_names():
            raise UsageError(f"no fixture {name!r}; have {', '.join(fixture_names())}")
        text = (resources.files("schedkernel") / "fixtures" / f"{name}.json").read_text()
    else:
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source} is not valid JSON: {exc}") from None
    return system_from_json(doc)


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _fmt_bounds(trace) -> str:
    return ", ".join(str(b) for b in trace.bounds)


# --- commands -------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be positive")
    seed = resolve_seed(args.seed)
    try:
        cfg = GenConfig(n=args.n, total_util=args.total_util,
                        total_density=args.total_density, flavor=args.flavor, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rng = make_rng(seed)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        system = gen_system(cfg, rng)
        path = outdir / f"{args.flavor}-n{args.n}-s{seed}-{i:04d}.json"
        path.write_text(json.dumps(system_to_json(system, seed), indent=1) + "\n")
        print(path)
    return EXIT_OK


def cmd_fp(args) -> int:
    system = load_task_file(args.file)
    if system.order != "fp":
        raise UsageError("fp analysis needs a task set of kind 'fp'")
    try:
        res = fp_analyze(system, solver=args.solver, reduction=args.reduction)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for i, r in enumerate(res.response_times, start=1):
        print(f"task {i}: response time {r}")
        if args.trace:
            print(f"  bounds: {_fmt_bounds(res.traces[i - 1])}")
    if res.schedulable:
        print("Schedulable")
        return EXIT_OK
    if args.trace and len(res.traces) == res.failed_level:
        print(f"  bounds: {_fmt_bounds(res.traces[-1])}")
    print(f"Unschedulable at level {res.failed_level}")
    return EXIT_UNSCHEDULABLE


def _parse_bound(text: str):
    if text in ("lb", "hyp"):
        return text
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"--bound must be lb, hyp or an integer, got {text!r}") from None


def cmd_edf(args) -> int:
    system = load_task_file(args.file)
    res = edf_test(system, solver=args.solver, bound=_parse_bound(args.bound),
                   improved=args.improved)
    if args.trace:
        if res.L is not None:
            print(f"L = {res.L}")
        for k, tr in enumerate(res.traces, start=1):
            print(f"  branch {k}: bounds: {_fmt_bounds(tr)}")
    if res.schedulable:
        print("Schedulable")
        return EXIT_OK
    if res.overloaded:
        print("Unschedulable (utilization exceeds 1)")
    else:
        print(f"deadline miss at {res.miss}")
    return EXIT_UNSCHEDULABLE


def cmd_bench(args) -> int:
    try:
        cfg = ExperimentConfig(args.experiment, samples=args.samples,
                               seed=resolve_seed(args.seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        results = run_experiment(cfg, keep_raw=bool(args.raw))
    except InconsistencyError as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        print(json.dumps(system_to_json(exc.system)), file=sys.stderr)
        return EXIT_INCONSISTENT
    text = to_csv(results)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.raw:
        Path(args.raw).write_text(to_jsonl(results))
    # Keep stdout clean for the CSV when it goes there.
    print(summary_table(results), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.count < 1:
        raise UsageError("--count must be positive")
    if not 0 <= args.max_range <= VERIFY_RANGE_LIMIT:
        raise UsageError(f"--max-range must lie in [0, {VERIFY_RANGE_LIMIT}]")
    seed = resolve_seed(args.seed)
    rng = make_rng(seed)
    for i in range(args.count):
        inst = random_kernel_instance(rng, max_n=args.max_n, max_range=args.max_range)
        want = solve_oracle(inst, max_range=args.max_range + 2)
        got_fp, _ = solve_fp_kern(inst)
        got_cp, _ = solve_cp_kern(inst)
        if not want == got_fp == got_cp:
            print(f"MISMATCH on instance {i}: oracle={want} fp={got_fp} cp={got_cp}")
            print(json.dumps(inst.to_dict()))
            return EXIT_INCONSISTENT
    print(f"{args.count} instances, 0 inconsistencies (seed {seed})")
    return EXIT_OK


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schedkernel",
                                description="Exact FP and EDF schedulability analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate random task sets")
    g.add_argument("--flavor", choices=("fp", "edf"), default="fp")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--total-util", type=float, required=True)
    g.add_argument("--total-density", type=float)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fp", help="fixed-priority response time analysis")
    f.add_argument("file", help="task-set JSON, or fixture:NAME")
    f.add_argument("--solver", choices=("fp", "cp"), default="cp")
    f.add_argument("--reduction", choices=("basic", "improved"), default="improved")
    f.add_argument("--trace", action="store_true", help="print dual bounds per level")
    f.set_defaults(func=cmd_fp)

    e = sub.add_parser("edf", help="EDF processor demand analysis")
    e.add_argument("file", help="task-set JSON, or fixture:NAME")
    e.add_argument("--solver", choices=("fp", "cp"), default="cp")
    e.add_argument("--bound", default="lb", help="lb, hyp or an explicit integer L")
    e.add_argument("--improved", action="store_true", help="use the improved initial value")
    e.add_argument("--trace", action="store_true", help="print dual bounds per branch")
    e.set_defaults(func=cmd_edf)

    b = sub.add_parser("bench", help="run one of the experiments I-IV")
    b.add_argument("--experiment", choices=("I", "II", "III", "IV"), required=True)
    b.add_argument("--samples", type=int, default=10_000)
    b.add_argument("--seed", type=int)
    b.add_argument("--out", help="CSV output path (default stdout)")
    b.add_argument("--raw", help="write per-sample JSONL to this path")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="cross-check both solvers against the oracle")
    v.add_argument("--count", type=int, default=10_000)
    v.add_argument("--seed", type=int)
    v.add_argument("--max-range", type=int, default=10_000)
    v.add_argument("--max-n", type=int, default=6)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"schedkernel: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
