"""Experiment planning and execution: solver-configuration registry, plan
files, a multiprocess sweep runner, CSV records, and plot-data emission.

Conflicts are the primary cost metric in all claims; wall time is recorded
but advisory.  Exponential lower bounds are reported as budget-censored
survival data, never fitted exponents.
"""

from __future__ import annotations

import csv
import io
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import median, quantiles
from typing import Optional, Sequence

from .cnf import CnfInstance
from .engine import SolveReport, SolverConfig, solve
from .formulas import (
    ladder_c_first_script,
    make_ladder,
    make_pitfall,
    make_tseitin,
    random_kcnf,
)
from .heuristics import (
    PhaseSaving,
    RandomDynamic,
    ScriptedOrder,
    StaticMap,
    StaticOrder,
    Vsids,
)
from .restarts import AfterEachConflict, CProbe, Never, ScriptedRestarts

CSV_SCHEMA = "restartlab-runrecord-v1"
WORKERS_ENV = "RESTARTLAB_WORKERS"

# Solver configurations in the order they appear in the source table.
# Naming: <model>-<backtrack[R]>-<variable selection>-<value selection>.
TABLE1_NAMES = [
    "C-TR-ND-RD",
    "C-T-ND-RD",
    "C-JR-VS-PS",
    "C-J-VS-PS",
    "C-JR-S-S",
    "C-J-S-S",
    "D-T-ND-any",
    "D-TR-ND-ND",
    "D-T-ND-ND",
    "D-TR-ND-RD",
    "D-T-ND-RD",
    "C-JR-ND-ND",
    "C-J-ND-ND",
]

# Witness strategies for the separation experiments.
STRATEGY_NAMES = [
    "drunk-restart",      # ND->selector-probe script, RD values, T, CProbe restarts
    "drunk-norestart",    # same script and values, no restarts
    "vsids-restart",      # VSIDS + phase saving, J, restart after each conflict
    "vsids-norestart",
]


def _seeded_permutation(num_vars: int, seed_key: str) -> list[int]:
    order = list(range(1, num_vars + 1))
    random.Random(seed_key).shuffle(order)
    return order


def _seeded_map(num_vars: int, seed_key: str) -> dict[int, int]:
    rng = random.Random(seed_key)
    return {v: rng.getrandbits(1) for v in range(1, num_vars + 1)}


def _generic_restart_schedule(seed_key: str, entries: int = 12) -> list[int]:
    # finite schedule so every configuration terminates like its
    # restart-free twin once the schedule is exhausted
    rng = random.Random(seed_key)
    schedule, total = [], 0
    for _ in range(entries):
        total += rng.randint(1, 10)
        schedule.append(total)
    return schedule


def table1_config(name: str, num_vars: int, seed: int, **budgets) -> SolverConfig:
    """Build one of the 13 named solver configurations.

    Non-deterministic selection is realized as a seeded scripted stand-in:
    a random variable permutation and a random static value map, both
    deterministic in (name, seed).
    """
    if name not in TABLE1_NAMES:
        raise ValueError(f"unknown configuration {name!r}")
    model = "CDCL" if name.startswith("C-") else "DPLL"
    restarts = "R" in name.split("-")[1]
    var_kind, val_kind = name.split("-")[2], name.split("-")[3]

    if var_kind == "ND":
        var_sel = ScriptedOrder(_seeded_permutation(num_vars, f"{name}/{seed}/vars"))
    elif var_kind == "VS":
        var_sel = Vsids()
    else:  # S
        var_sel = StaticOrder(_seeded_permutation(num_vars, f"{name}/{seed}/vars"))

    if val_kind == "RD":
        val_sel = RandomDynamic()
    elif val_kind == "PS":
        val_sel = PhaseSaving()
    else:  # S, ND, any: a seeded predetermined mapping
        val_sel = StaticMap(_seeded_map(num_vars, f"{name}/{seed}/vals"))

    policy = (ScriptedRestarts(_generic_restart_schedule(f"{name}/{seed}/restarts"))
              if restarts else Never())
    return SolverConfig(
        variable_selector=var_sel,
        value_selector=val_sel,
        backtrack="J" if "J" in name.split("-")[1] else "T",
        learning="1UIP" if model == "CDCL" else "none",
        model=model,
        restart_policy=policy,
        seed=seed,
        name=name,
        **budgets,
    )


def strategy_config(name: str, instance: CnfInstance, seed: int,
                    **budgets) -> SolverConfig:
    """Witness strategies that need instance structure (probe scripts)."""
    nv = instance.formula.num_variables
    if name in ("drunk-restart", "drunk-norestart"):
        script = ladder_c_first_script(instance)
        policy = (CProbe(instance.backdoors["c-vars"])
                  if name == "drunk-restart" else Never())
        return SolverConfig(
            variable_selector=ScriptedOrder(script),
            value_selector=RandomDynamic(),
            backtrack="T",
            learning="1UIP",
            restart_policy=policy,
            seed=seed,
            name=name,
            **budgets,
        )
    if name in ("vsids-restart", "vsids-norestart"):
        policy = AfterEachConflict() if name == "vsids-restart" else Never()
        return SolverConfig(
            variable_selector=Vsids(reset_on_restart=True),
            value_selector=PhaseSaving(),
            backtrack="J",
            learning="1UIP",
            restart_policy=policy,
            seed=seed,
            name=name,
            **budgets,
        )
    return table1_config(name, nv, seed, **budgets)


# --- plans -------------------------------------------------------------------


@dataclass
class ExperimentPlan:
    family: str
    sweep: dict[str, list] = field(default_factory=dict)  # param -> values
    configs: list[str] = field(default_factory=list)
    seeds: int = 10
    seed_base: int = 0
    instance_seed: int = 0
    max_conflicts: int = 100_000
    max_decisions: Optional[int] = None
    max_restarts: Optional[int] = None
    max_seconds: Optional[float] = None
    engine: str = "fixed"
    output: Optional[str] = None
    exploratory: bool = False

    def __post_init__(self):
        if not self.configs:
            raise ValueError("plan needs at least one config")
        if self.max_conflicts is None:
            raise ValueError("plan budgets must be finite: set max_conflicts")
        if self.seeds < 10 and not self.exploratory:
            raise ValueError("claim-bearing plans need >= 10 seeds per cell "
                             "(set exploratory=true to override)")

    def cells(self) -> list[dict]:
        keys = sorted(self.sweep)
        combos: list[dict] = [{}]
        for key in keys:
            combos = [dict(c, **{key: v}) for c in combos for v in self.sweep[key]]
        return combos


_PLAN_INT_KEYS = {"seeds", "seed_base", "instance_seed", "max_conflicts",
                  "max_decisions", "max_restarts"}
_PLAN_SWEEP_KEYS = {"n", "k", "degree", "num_vars", "num_clauses", "parity",
                    "ratio"}


def parse_plan(text: str) -> ExperimentPlan:
    """Line-oriented key=value plan; repeated keys build parameter sweeps."""
    fields: dict = {"sweep": {}, "configs": []}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ValueError(f"plan line {lineno}: expected key=value")
        key, value = key.strip(), value.strip()
        if key == "family":
            fields["family"] = value
        elif key == "config":
            fields["configs"].append(value)
        elif key == "output":
            fields["output"] = value
        elif key == "engine":
            fields["engine"] = value
        elif key == "exploratory":
            fields["exploratory"] = value.lower() in ("1", "true", "yes")
        elif key == "max_seconds":
            fields["max_seconds"] = float(value)
        elif key in _PLAN_INT_KEYS:
            fields[key] = int(value)
        elif key in _PLAN_SWEEP_KEYS:
            fields["sweep"].setdefault(key, []).append(_scalar(value))
        else:
            raise ValueError(f"plan line {lineno}: unknown key {key!r}")
    if "family" not in fields:
        raise ValueError("plan is missing the family key")
    return ExperimentPlan(**fields)


def _scalar(value: str):
    try:
        return int(value)
    except ValueError:
        try:
            return float(value)
        except ValueError:
            return value


def generate_instance(family: str, params: dict, instance_seed: int) -> CnfInstance:
    if family == "ladder":
        return make_ladder(params["n"], params.get("degree", 4), instance_seed)
    if family == "pitfall":
        return make_pitfall(params["k"], params["n"], params.get("degree", 3),
                            instance_seed)
    if family == "tseitin":
        return make_tseitin(params["n"], params.get("degree", 4), instance_seed,
                            parity=params.get("parity", 1))
    if family in ("random-cnf", "raw"):
        num_vars = params["num_vars"]
        num_clauses = params.get("num_clauses")
        if num_clauses is None:
            num_clauses = round(params.get("ratio", 4.3) * num_vars)
        return random_kcnf(num_vars, num_clauses, params.get("k", 3), instance_seed)
    raise ValueError(f"unknown family {family!r}")


# --- run records & CSV -------------------------------------------------------


@dataclass
class RunRecord:
    config: str
    family: str
    params: str
    seed: int
    status: str
    decisions: int
    propagations: int
    conflicts: int
    restarts: int
    learned: int
    wall_time_s: float

    SORT_KEY = staticmethod(lambda r: (r.family, r.params, r.config, r.seed))


CSV_COLUMNS = ["schema", "family", "params", "config", "seed", "status",
               "decisions", "propagations", "conflicts", "restarts",
               "learned", "wall_time_s"]


def params_string(params: dict) -> str:
    return ";".join(f"{k}={params[k]}" for k in sorted(params))


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(CSV_COLUMNS)
    for r in sorted(records, key=RunRecord.SORT_KEY):
        writer.writerow([CSV_SCHEMA, r.family, r.params, r.config, r.seed,
                         r.status, r.decisions, r.propagations, r.conflicts,
                         r.restarts, r.learned, f"{r.wall_time_s:.6f}"])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    reader = csv.DictReader(io.StringIO(text))
    records = []
    for row in reader:
        if row["schema"] != CSV_SCHEMA:
            raise ValueError(f"unsupported CSV schema {row['schema']!r}")
        records.append(RunRecord(
            config=row["config"], family=row["family"], params=row["params"],
            seed=int(row["seed"]), status=row["status"],
            decisions=int(row["decisions"]), propagations=int(row["propagations"]),
            conflicts=int(row["conflicts"]), restarts=int(row["restarts"]),
            learned=int(row["learned"]), wall_time_s=float(row["wall_time_s"]),
        ))
    return records


def run_one(instance: CnfInstance, config: SolverConfig,
            family: str, params: dict, seed: int) -> RunRecord:
    t0 = time.monotonic()
    report = solve(instance, config)
    elapsed = time.monotonic() - t0
    status = report.status
    if status == "BUDGET":
        status = f"BUDGET-{report.budget}"
    return RunRecord(
        config=config.name, family=family, params=params_string(params),
        seed=seed, status=status,
        decisions=report.stats.decisions, propagations=report.stats.propagations,
        conflicts=report.stats.conflicts, restarts=report.stats.restarts,
        learned=report.stats.learned, wall_time_s=elapsed,
    )


def _run_chunk(args) -> list[RunRecord]:
    family, params, instance_seed, config_name, seeds, budgets, engine = args
    instance = generate_instance(family, params, instance_seed)
    records = []
    for seed in seeds:
        config = strategy_config(config_name, instance, seed,
                                 engine=engine, record_learned=False, **budgets)
        records.append(run_one(instance, config, family, params, seed))
    return records


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return max(1, os.cpu_count() or 1)


def run_experiment(plan: ExperimentPlan, workers: Optional[int] = None,
                   ) -> list[RunRecord]:
    """Execute every (cell, config, seed) run; deterministic per plan."""
    if workers is None:
        workers = default_workers()
    budgets = {"max_conflicts": plan.max_conflicts}
    if plan.max_decisions is not None:
        budgets["max_decisions"] = plan.max_decisions
    if plan.max_restarts is not None:
        budgets["max_restarts"] = plan.max_restarts
    if plan.max_seconds is not None:
        budgets["max_seconds"] = plan.max_seconds
    seed_list = list(range(plan.seed_base, plan.seed_base + plan.seeds))
    chunk = max(1, min(10, plan.seeds // max(1, workers)))
    tasks = []
    for params in plan.cells():
        for config_name in plan.configs:
            for i in range(0, len(seed_list), chunk):
                tasks.append((plan.family, params, plan.instance_seed,
                              config_name, seed_list[i:i + chunk], budgets,
                              plan.engine))
    records: list[RunRecord] = []
    if workers == 1:
        for task in tasks:
            records.extend(_run_chunk(task))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_run_chunk, tasks):
                records.extend(result)
    records.sort(key=RunRecord.SORT_KEY)
    if plan.output:
        with open(plan.output, "w") as fh:
            fh.write(records_to_csv(records))
    return records


# --- plot data emission ------------------------------------------------------


def emit_plot_data(records: Sequence[RunRecord], kind: str, x_param: str = "n",
                   data_path: Optional[str] = None,
                   figure_path: Optional[str] = None) -> str:
    """Summarize runs for plotting; returns the plot-ready CSV text.

    scaling: per-config median and quartiles of conflicts against x_param
    (log-scale figure).  survival: per-config fraction of seeds still
    unfinished as the conflict budget grows.
    """
    if not records:
        raise ValueError("empty record selection")
    if kind not in ("scaling", "survival"):
        raise ValueError(f"unknown plot kind {kind!r}")

    def x_of(record: RunRecord):
        for part in record.params.split(";"):
            key, _, value = part.partition("=")
            if key == x_param:
                return _scalar(value)
        raise ValueError(f"records lack swept parameter {x_param!r}")

    buf = io.StringIO()
    writer = csv.writer(buf)
    series: dict[str, list[tuple]] = {}
    if kind == "scaling":
        writer.writerow([x_param, "config", "median_conflicts", "q1", "q3", "runs"])
        groups: dict[tuple, list[int]] = {}
        for r in records:
            groups.setdefault((r.config, x_of(r)), []).append(r.conflicts)
        for (config, x), conflicts in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            med = median(conflicts)
            if len(conflicts) >= 4:
                q1, _, q3 = quantiles(conflicts, n=4)
            else:
                q1 = min(conflicts)
                q3 = max(conflicts)
            writer.writerow([x, config, med, q1, q3, len(conflicts)])
            series.setdefault(config, []).append((x, med, q1, q3))
    else:
        writer.writerow(["budget", "config", "fraction_unfinished", "runs"])
        by_config: dict[str, list[RunRecord]] = {}
        for r in records:
            by_config.setdefault(r.config, []).append(r)
        top = max(r.conflicts for r in records)
        grid = sorted({0, top} | {r.conflicts for r in records})
        for config, rows in sorted(by_config.items()):
            for budget in grid:
                unfinished = sum(
                    1 for r in rows
                    if r.conflicts > budget or
                    (r.status.startswith("BUDGET") and r.conflicts >= budget)
                )
                frac = unfinished / len(rows)
                writer.writerow([budget, config, f"{frac:.4f}", len(rows)])
                series.setdefault(config, []).append((budget, frac))
    text = buf.getvalue()
    if data_path:
        with open(data_path, "w") as fh:
            fh.write(text)
    if figure_path:
        _render_figure(series, kind, x_param, figure_path)
    return text


def _render_figure(series: dict[str, list[tuple]], kind: str, x_param: str,
                   figure_path: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "scaling":
        for config, points in sorted(series.items()):
            points.sort()
            xs = [p[0] for p in points]
            med = [p[1] for p in points]
            q1 = [p[2] for p in points]
            q3 = [p[3] for p in points]
            ax.plot(xs, med, marker="o", label=config)
            ax.fill_between(xs, q1, q3, alpha=0.2)
        ax.set_xlabel(x_param)
        ax.set_ylabel("conflicts")
        ax.set_yscale("log")
    else:
        for config, points in sorted(series.items()):
            points.sort()
            ax.step([p[0] for p in points], [p[1] for p in points],
                    where="post", label=config)
        ax.set_xlabel("conflict budget")
        ax.set_ylabel("fraction unfinished")
        ax.set_ylim(-0.05, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(figure_path)
    plt.close(fig)
