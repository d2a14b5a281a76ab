"""Command line interface: gen, solve, experiment, check, plot."""

from __future__ import annotations

import argparse
import os
import random
import sys

from . import cnf, verify
from .engine import trace_to_lines
from .harness import (
    STRATEGY_NAMES,
    TABLE1_NAMES,
    default_workers,
    emit_plot_data,
    generate_instance,
    parse_plan,
    records_from_csv,
    records_to_csv,
    run_experiment,
    run_one,
    strategy_config,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="restartlab",
        description="CDCL/DPLL solver laboratory for restart-policy experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a CNF instance plus metadata sidecar")
    p_gen.add_argument("--family", required=True,
                       choices=["ladder", "tseitin", "pitfall", "random-cnf"])
    p_gen.add_argument("--n", type=int, help="size parameter (ladder/tseitin/pitfall)")
    p_gen.add_argument("--k", type=int, help="block count (pitfall) or clause width")
    p_gen.add_argument("--degree", type=int, help="graph degree knob")
    p_gen.add_argument("--num-vars", type=int, help="variables (random-cnf)")
    p_gen.add_argument("--num-clauses", type=int, help="clauses (random-cnf)")
    p_gen.add_argument("--parity", type=int, choices=[0, 1], help="tseitin labelling parity")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("-o", "--out", required=True,
                       help="output DIMACS path; sidecar written next to it as .meta")

    p_solve = sub.add_parser("solve", help="solve one instance with one configuration")
    p_solve.add_argument("cnf", help="DIMACS CNF path")
    p_solve.add_argument("--meta", help="metadata sidecar (default: <cnf>.meta if present)")
    p_solve.add_argument("--config", required=True,
                         help="configuration name: %s or %s"
                              % (", ".join(TABLE1_NAMES), ", ".join(STRATEGY_NAMES)))
    p_solve.add_argument("--seed", type=int, default=0)
    p_solve.add_argument("--engine", default="fixed", choices=["fixed", "scan", "watched"])
    p_solve.add_argument("--max-conflicts", type=int, default=1_000_000)
    p_solve.add_argument("--max-decisions", type=int)
    p_solve.add_argument("--max-restarts", type=int)
    p_solve.add_argument("--max-seconds", type=float)
    p_solve.add_argument("--trace-out", help="write the event trace to this path")

    p_exp = sub.add_parser("experiment", help="run a plan file, emit a CSV of run records")
    p_exp.add_argument("plan", help="plan file (key=value lines, repeated keys sweep)")
    p_exp.add_argument("--workers", type=int,
                       help=f"worker processes (default: ${os.path.basename('RESTARTLAB_WORKERS')} or CPU count)")
    p_exp.add_argument("--output", help="override the plan's output path")

    p_check = sub.add_parser("check", help="run verification suites")
    check_sub = p_check.add_subparsers(dest="check_command", required=True)

    c_backdoor = check_sub.add_parser("backdoor", help="strong backdoor check")
    c_backdoor.add_argument("cnf")
    c_backdoor.add_argument("--meta")
    c_backdoor.add_argument("--set", default="V", help="backdoor name in the sidecar")

    c_ladder = check_sub.add_parser("ladder", help="ladder weak-backdoor check")
    c_ladder.add_argument("cnf")
    c_ladder.add_argument("--meta")

    c_pairs = check_sub.add_parser("pitfall-pairs", help="pairwise trap-conflict check")
    c_pairs.add_argument("cnf")
    c_pairs.add_argument("--meta")

    c_eq = check_sub.add_parser("equivalence",
                                help="static-selector restart equivalence on random CNFs")
    c_eq.add_argument("--count", type=int, default=50)
    c_eq.add_argument("--num-vars", type=int, default=20)
    c_eq.add_argument("--seed", type=int, default=0)

    c_dpll = check_sub.add_parser("dpll-invariance",
                                  help="DPLL value-order invariance on UNSAT CNFs")
    c_dpll.add_argument("--count", type=int, default=10)
    c_dpll.add_argument("--num-vars", type=int, default=12)
    c_dpll.add_argument("--scripts", type=int, default=10)
    c_dpll.add_argument("--seed", type=int, default=0)

    c_audit = check_sub.add_parser("audit", help="replay a trace against its formula")
    c_audit.add_argument("cnf")
    c_audit.add_argument("trace")
    c_audit.add_argument("--learning", default="1UIP", choices=["1UIP", "WDLS", "none"])

    p_plot = sub.add_parser("plot", help="summarize a run CSV into plot data and a figure")
    p_plot.add_argument("csv")
    p_plot.add_argument("--kind", default="scaling", choices=["scaling", "survival"])
    p_plot.add_argument("--x", default="n", help="swept parameter for the x axis")
    p_plot.add_argument("--data", help="write plot-ready CSV here")
    p_plot.add_argument("--figure", help="write a static vector figure here (.svg/.pdf)")

    args = parser.parse_args(argv)
    return _dispatch(args)


def _dispatch(args) -> int:
    if args.command == "gen":
        return _cmd_gen(args)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "experiment":
        return _cmd_experiment(args)
    if args.command == "check":
        return _cmd_check(args)
    if args.command == "plot":
        return _cmd_plot(args)
    raise AssertionError


def _gen_params(args) -> dict:
    params = {}
    if args.n is not None:
        params["n"] = args.n
    if args.k is not None:
        params["k"] = args.k
    if args.degree is not None:
        params["degree"] = args.degree
    if args.num_vars is not None:
        params["num_vars"] = args.num_vars
    if args.num_clauses is not None:
        params["num_clauses"] = args.num_clauses
    if args.parity is not None:
        params["parity"] = args.parity
    return params


def _cmd_gen(args) -> int:
    instance = generate_instance(args.family, _gen_params(args), args.seed)
    with open(args.out, "w") as fh:
        fh.write(cnf.write_dimacs(
            instance.formula,
            comments=[f"family={instance.family}", f"seed={args.seed}"],
        ))
    with open(args.out + ".meta", "w") as fh:
        fh.write(cnf.write_sidecar(instance))
    print(f"wrote {args.out} ({instance.formula.num_variables} vars, "
          f"{len(instance.formula.clauses)} clauses) and {args.out}.meta")
    return 0


def _load_instance(cnf_path: str, meta_path: str | None) -> cnf.CnfInstance:
    with open(cnf_path) as fh:
        formula = cnf.parse_dimacs(fh.read())
    if meta_path is None and os.path.exists(cnf_path + ".meta"):
        meta_path = cnf_path + ".meta"
    if meta_path:
        with open(meta_path) as fh:
            return cnf.read_sidecar(fh.read(), formula)
    return cnf.CnfInstance(formula)


def _cmd_solve(args) -> int:
    instance = _load_instance(args.cnf, args.meta)
    budgets = {"max_conflicts": args.max_conflicts}
    if args.max_decisions is not None:
        budgets["max_decisions"] = args.max_decisions
    if args.max_restarts is not None:
        budgets["max_restarts"] = args.max_restarts
    if args.max_seconds is not None:
        budgets["max_seconds"] = args.max_seconds
    config = strategy_config(args.config, instance, args.seed,
                             engine=args.engine, trace=bool(args.trace_out),
                             **budgets)
    from .engine import solve as engine_solve
    import time as _time
    t0 = _time.monotonic()
    report = engine_solve(instance, config)
    elapsed = _time.monotonic() - t0
    if args.trace_out:
        with open(args.trace_out, "w") as fh:
            fh.write(trace_to_lines(report.trace))
    status = report.status if report.status != "BUDGET" else f"BUDGET-{report.budget}"
    print(f"status={status} decisions={report.stats.decisions} "
          f"propagations={report.stats.propagations} conflicts={report.stats.conflicts} "
          f"restarts={report.stats.restarts} learned={report.stats.learned} "
          f"wall_time_s={elapsed:.4f}")
    return 0 if report.status in ("SAT", "UNSAT") else 2


def _cmd_experiment(args) -> int:
    with open(args.plan) as fh:
        plan = parse_plan(fh.read())
    if args.output:
        plan.output = args.output
    workers = args.workers if args.workers else default_workers()
    records = run_experiment(plan, workers=workers)
    if not plan.output:
        sys.stdout.write(records_to_csv(records))
    else:
        print(f"wrote {plan.output} ({len(records)} rows)")
    return 0


def _cmd_check(args) -> int:
    if args.check_command == "backdoor":
        instance = _load_instance(args.cnf, args.meta)
        variables = instance.backdoors[getattr(args, "set")]
        ok, counterexample = verify.check_strong_backdoor(instance.formula, variables)
        print(f"strong-backdoor[{getattr(args, 'set')}]: "
              + ("PASS" if ok else f"FAIL counterexample={counterexample}"))
        return 0 if ok else 1
    if args.check_command == "ladder":
        instance = _load_instance(args.cnf, args.meta)
        report = verify.check_ladder_weak_backdoor(instance)
        print(f"ladder-weak-backdoor: {'PASS' if report.ok else 'FAIL'} "
              f"conflicts={report.conflicts} extensions={report.extensions} "
              f"bound={report.bound} {report.detail}")
        return 0 if report.ok else 1
    if args.check_command == "pitfall-pairs":
        instance = _load_instance(args.cnf, args.meta)
        ok = verify.check_pitfall_conflict_pairs(instance)
        print(f"pitfall-conflict-pairs: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else 1
    if args.check_command == "equivalence":
        return _check_equivalence(args)
    if args.check_command == "dpll-invariance":
        return _check_dpll(args)
    if args.check_command == "audit":
        return _check_audit(args)
    raise AssertionError


def _check_equivalence(args) -> int:
    from .engine import trace_from_lines  # noqa: F401  (re-export convenience)
    from .formulas import random_kcnf
    failures = 0
    for i in range(args.count):
        seed = args.seed + i
        rng = random.Random(f"equiv/{seed}")
        num_vars = rng.randint(5, args.num_vars)
        inst = random_kcnf(num_vars, round(4.3 * num_vars), 3, seed)
        order = list(range(1, num_vars + 1))
        rng.shuffle(order)
        mapping = {v: rng.getrandbits(1) for v in range(1, num_vars + 1)}
        schedule = sorted(rng.sample(range(1, 200), rng.randint(1, 8)))
        ok = verify.check_static_restart_equivalence(
            inst.formula, order, mapping, schedule)
        if not ok:
            failures += 1
            print(f"equivalence FAIL at seed {seed}")
    print(f"static-restart-equivalence: {args.count - failures}/{args.count} identical")
    return 0 if failures == 0 else 1


def _check_dpll(args) -> int:
    from .formulas import random_kcnf
    checked = failures = 0
    seed = args.seed
    while checked < args.count:
        seed += 1
        rng = random.Random(f"dpll/{seed}")
        num_vars = rng.randint(6, args.num_vars)
        inst = random_kcnf(num_vars, round(5.5 * num_vars), 3, seed)
        status, _ = verify.brute_force_sat(inst.formula)
        if status != "UNSAT":
            continue
        script = list(range(1, num_vars + 1))
        rng.shuffle(script)
        ok, counts = verify.check_dpll_value_order_invariance(
            inst.formula, script, random_seeds=range(args.scripts - 2))
        checked += 1
        if not ok:
            failures += 1
            print(f"dpll-invariance FAIL at seed {seed}: counts={counts}")
    print(f"dpll-value-order-invariance: {args.count - failures}/{args.count} invariant")
    return 0 if failures == 0 else 1


def _check_audit(args) -> int:
    from .engine import trace_from_lines
    with open(args.cnf) as fh:
        formula = cnf.parse_dimacs(fh.read())
    with open(args.trace) as fh:
        trace = trace_from_lines(fh.read())
    report = verify.audit_run(trace, formula, learning=args.learning)
    if report.passed:
        print("audit: PASS (0 violations)")
        return 0
    for invariant, index, detail in report.violations:
        print(f"audit violation [{invariant}] at event {index}: {detail}")
    return 1


def _cmd_plot(args) -> int:
    with open(args.csv) as fh:
        records = records_from_csv(fh.read())
    text = emit_plot_data(records, kind=args.kind, x_param=args.x,
                          data_path=args.data, figure_path=args.figure)
    if not args.data:
        sys.stdout.write(text)
    if args.figure:
        print(f"wrote {args.figure}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
