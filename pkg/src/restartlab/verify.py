"""Independent oracles and run auditors.

The exhaustive SAT oracle evaluates the whole truth table bit-parallel on
big integers, so it stays practical up to its 26-variable cap while being a
genuinely independent check on the search engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .cnf import Clause, CnfFormula, CnfInstance
from .engine import (
    NO_REASON,
    SolveReport,
    Solver,
    SolverConfig,
    UNASSIGNED,
    solve,
)
from .heuristics import RandomDynamic, StaticMap, StaticOrder, ScriptedOrder
from .restarts import Never, ScriptedRestarts

BRUTE_FORCE_CAP = 26
BACKDOOR_CAP = 20


class BudgetExhausted(RuntimeError):
    pass


# --- exhaustive truth-table oracle -----------------------------------------


def _column_masks(n: int) -> list[int]:
    """cols[i] has bit idx set iff variable i is 1 in assignment idx.

    Assignment idx encodes (x_1 .. x_n) with x_1 the most significant bit,
    so the lowest set bit of a satisfying mask is the lexicographically
    first model.
    """
    size = 1 << n
    cols = [0] * (n + 1)
    for i in range(1, n + 1):
        h = 1 << (n - i)
        unit = ((1 << h) - 1) << h
        reps = size // (2 * h)
        cols[i] = unit * (((1 << (2 * h * reps)) - 1) // ((1 << (2 * h)) - 1))
    return cols


def _sat_mask(formula: CnfFormula) -> int:
    n = formula.num_variables
    if n > BRUTE_FORCE_CAP:
        raise ValueError(f"{n} variables exceeds exhaustive cap {BRUTE_FORCE_CAP}")
    size = 1 << n
    full = (1 << size) - 1
    cols = _column_masks(n)
    sat = full
    for clause in formula.clauses:
        cm = 0
        for lit in clause:
            col = cols[lit] if lit > 0 else full ^ cols[-lit]
            cm |= col
            if cm == full:
                break
        sat &= cm
        if sat == 0:
            break
    return sat


def brute_force_sat(formula: CnfFormula) -> tuple[str, Optional[list[int]]]:
    """Exhaustive verdict; on SAT returns the lexicographically first model
    as a values list indexed by variable (index 0 unused)."""
    sat = _sat_mask(formula)
    if sat == 0:
        return "UNSAT", None
    n = formula.num_variables
    idx = (sat & -sat).bit_length() - 1
    model = [0] * (n + 1)
    for i in range(1, n + 1):
        model[i] = (idx >> (n - i)) & 1
    return "SAT", model


def model_count(formula: CnfFormula) -> int:
    """Number of satisfying total assignments (exhaustive)."""
    return _sat_mask(formula).bit_count()


def count_models_blocking(formula: CnfFormula, limit: int = 16,
                          max_conflicts: int = 200_000) -> list[list[int]]:
    """Enumerate models by re-solving with blocking clauses (up to limit)."""
    work = CnfFormula(formula.num_variables,
                      [Clause(c.lits) for c in formula.clauses])
    models: list[list[int]] = []
    while len(models) <= limit:
        report = solve(work, SolverConfig(max_conflicts=max_conflicts))
        if report.status == "BUDGET":
            raise BudgetExhausted("model enumeration ran out of budget")
        if report.status != "SAT":
            break
        model = report.model
        models.append(model)
        work.add_clause(
            Clause([-v if model[v] == 1 else v
                    for v in range(1, work.num_variables + 1)])
        )
    return models


# --- propagation probes ------------------------------------------------------


def _probe(formula: CnfFormula) -> Solver:
    return Solver(formula, SolverConfig(engine="fixed", record_learned=False))


def propagate_assumptions(solver: Solver, lits: Iterable[int]) -> bool:
    """Assert literals in order with saturation in between; True on conflict.

    The solver must be freshly propagated at level 0.  Contradicting an
    already-propagated value counts as a conflict, matching what a flat
    assign-then-propagate of the full set would find.
    """
    for lit in lits:
        v = lit if lit > 0 else -lit
        want = 1 if lit > 0 else 0
        cur = solver.values[v]
        if cur != UNASSIGNED:
            if cur != want:
                return True
            continue
        solver.decide(v, want)
        if solver.propagate() >= 0:
            return True
    return False


def check_strong_backdoor(formula: CnfFormula, variables: Sequence[int],
                          ) -> tuple[bool, Optional[dict[int, int]]]:
    """Is every full assignment of `variables` a unit-propagation conflict?

    Returns (True, None) or (False, counterexample assignment).  Explores
    the assignment tree depth-first, pruning branches whose prefix already
    propagates to a conflict (extending a conflicting prefix stays
    conflicting, so all pruned leaves are conflicting leaves).
    """
    variables = list(variables)
    if len(variables) > BACKDOOR_CAP:
        raise ValueError(f"backdoor set larger than cap {BACKDOOR_CAP}")
    solver = _probe(formula)
    if solver.propagate() >= 0:
        return True, None

    def descend(i: int) -> Optional[dict[int, int]]:
        if i == len(variables):
            return {v: solver.values[v] for v in variables}
        v = variables[i]
        for val in (0, 1):
            cur = solver.values[v]
            if cur != UNASSIGNED:
                if cur != val:
                    continue  # contradicts propagation: conflicting leaf set
                found = descend(i + 1)
                if found is not None:
                    return found
            else:
                level = solver.level
                solver.decide(v, val)
                if solver.propagate() < 0:
                    found = descend(i + 1)
                    if found is not None:
                        return found
                solver._pop_to(level)
        return None

    counterexample = descend(0)
    return (counterexample is None), counterexample


@dataclass
class LadderBackdoorReport:
    ok: bool
    conflicts: int
    extensions: dict[int, int]       # decided value -> trail extensions
    bound: int
    detail: str = ""


def check_ladder_weak_backdoor(instance: CnfInstance) -> LadderBackdoorReport:
    """Restrict the selector variables to all-ones, branch one block variable
    each way, and confirm conflict-free full propagation within n*log2(n)
    trail extensions."""
    if instance.family != "ladder":
        raise ValueError("expected a ladder instance")
    n = instance.parameters["n"]
    logn = instance.parameters["log_n"]
    c_vars = instance.backdoors["c-vars"]
    solver = _probe(instance.formula)
    if solver.propagate() >= 0:
        return LadderBackdoorReport(False, 1, {}, n * logn, "conflict at level 0")
    if propagate_assumptions(solver, c_vars):
        return LadderBackdoorReport(False, 1, {}, n * logn,
                                    "conflict while asserting selector vars")
    base_level = solver.level
    base_trail = len(solver.trail)
    extensions: dict[int, int] = {}
    conflicts = 0
    detail = ""
    for val in (1, 0):
        solver._pop_to(base_level)
        solver.decide(1, val)  # first block variable
        if solver.propagate() >= 0:
            conflicts += 1
            detail = f"conflict after deciding value {val}"
            continue
        extensions[val] = len(solver.trail) - base_trail
        if solver.num_assigned != solver.num_vars:
            detail = f"value {val}: propagation left variables unassigned"
    bound = n * logn
    ok = (conflicts == 0 and len(extensions) == 2
          and all(e <= bound for e in extensions.values())
          and not detail)
    return LadderBackdoorReport(ok, conflicts, extensions, bound, detail)


def check_pitfall_conflict_pairs(instance: CnfInstance) -> bool:
    """Every same-block pair of trap variables set to 0 must propagate to a
    conflict."""
    if instance.family != "pitfall":
        raise ValueError("expected a pitfall instance")
    k = instance.parameters["k"]
    n = instance.parameters["num_vertices"]
    m = instance.parameters["num_edges"]
    block_size = instance.parameters["block_size"]

    def y(j: int, i: int) -> int:
        return (j - 1) * block_size + m + i

    solver = _probe(instance.formula)
    if solver.propagate() >= 0:
        raise RuntimeError("pitfall instance conflicts at level 0")
    for j in range(1, k + 1):
        for i1 in range(1, n + 1):
            for i2 in range(i1 + 1, n + 1):
                solver._pop_to(0)
                if not propagate_assumptions(solver, [-y(j, i1), -y(j, i2)]):
                    return False
    solver._pop_to(0)
    return True


def single_pitfall_zero_conflicts(instance: CnfInstance) -> bool:
    """Sanity inverse: does a single trap zero already conflict? (expected no)"""
    m = instance.parameters["num_edges"]
    block_size = instance.parameters["block_size"]
    solver = _probe(instance.formula)
    solver.propagate()
    return propagate_assumptions(solver, [-(m + 1)])  # y_{1,1}


# --- trace auditing -----------------------------------------------------------


@dataclass
class AuditReport:
    violations: list[tuple[str, int, str]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


class TraceAuditor:
    """Replays solver events with independent bookkeeping.

    Can be fed incrementally (streaming, for long runs) or via audit_run.
    Checks: reason validity, asserting shape (1UIP), WDLS shape, learned
    clause falsification, decision-level bookkeeping, restart contract.
    """

    def __init__(self, formula: CnfFormula, learning: str = "1UIP"):
        if learning not in ("1UIP", "WDLS", "none"):
            raise ValueError(f"bad learning mode {learning!r}")
        self.learning = learning
        nv = formula.num_variables
        self.clauses: list[tuple[int, ...]] = [c.lits for c in formula.clauses]
        self.n_original = len(self.clauses)
        self.values = [UNASSIGNED] * (nv + 1)
        self.levels = [0] * (nv + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.index = 0
        self.report = AuditReport()
        self.last_event: Optional[tuple] = None

    def _flag(self, invariant: str, detail: str) -> None:
        self.report.violations.append((invariant, self.index, detail))

    def _lit_value(self, lit: int) -> int:
        val = self.values[lit if lit > 0 else -lit]
        if val == UNASSIGNED:
            return UNASSIGNED
        return val if lit > 0 else 1 - val

    def _assign(self, var: int, val: int) -> None:
        self.values[var] = val
        self.levels[var] = len(self.trail_lim)
        self.trail.append(var if val else -var)

    def _pop_to(self, target: int) -> None:
        limit = self.trail_lim[target]
        for i in range(len(self.trail) - 1, limit - 1, -1):
            lit = self.trail[i]
            self.values[lit if lit > 0 else -lit] = UNASSIGNED
        del self.trail[limit:]
        del self.trail_lim[target:]

    def feed(self, event: tuple) -> None:
        tag = event[0]
        if tag == "D":
            _, var, val, level = event
            if self.values[var] != UNASSIGNED:
                self._flag("decision-fresh", f"variable {var} already assigned")
            if level != len(self.trail_lim) + 1:
                self._flag("level-increment",
                           f"decision opened level {level}, expected {len(self.trail_lim) + 1}")
            self.trail_lim.append(len(self.trail))
            self._assign(var, val)
        elif tag == "P":
            _, var, val, reason = event
            if not 0 <= reason < len(self.clauses):
                raise ValueError(f"event {self.index}: reason id {reason} out of range")
            if self.values[var] != UNASSIGNED:
                self._flag("propagation-fresh", f"variable {var} already assigned")
            lits = self.clauses[reason]
            forced = var if val else -var
            if forced not in lits:
                self._flag("reason-validity",
                           f"literal {forced} not in reason clause {reason}")
            else:
                for lit in lits:
                    if lit != forced and self._lit_value(lit) != 0:
                        self._flag("reason-validity",
                                   f"reason {reason} not unit: literal {lit} not false")
                        break
            self._assign(var, val)
        elif tag == "C":
            (_, ci) = event
            if not 0 <= ci < len(self.clauses):
                raise ValueError(f"event {self.index}: conflict id {ci} out of range")
            for lit in self.clauses[ci]:
                if self._lit_value(lit) != 0:
                    self._flag("conflict-falsified",
                               f"conflict clause {ci}: literal {lit} not false")
                    break
        elif tag == "L":
            (_, lits) = event
            if self.learning == "none":
                self._flag("no-learning", "learning event in a DPLL run")
            for lit in lits:
                if self._lit_value(lit) != 0:
                    self._flag("learned-falsified",
                               f"learned literal {lit} not false under trail")
                    break
            level = len(self.trail_lim)
            if self.learning == "1UIP":
                at_top = sum(1 for lit in lits
                             if self.values[abs(lit)] != UNASSIGNED
                             and self.levels[abs(lit)] == level)
                if at_top != 1:
                    self._flag("asserting-shape",
                               f"{at_top} literals at conflict level, expected 1")
            elif self.learning == "WDLS":
                decisions = [-self.trail[pos] for pos in self.trail_lim]
                if list(lits) != decisions:
                    self._flag("wdls-shape",
                               "learned clause is not the negated decision sequence")
            self.clauses.append(tuple(lits))
        elif tag == "B":
            (_, target) = event
            if not 0 <= target < len(self.trail_lim):
                self._flag("backtrack-target",
                           f"target {target} not below current level {len(self.trail_lim)}")
            else:
                self._pop_to(target)
        elif tag == "R":
            if self.trail_lim:
                self._pop_to(0)
            # clause database untouched by construction: learned count is
            # monotone in this replay, which is the surviving-database contract
        else:
            raise ValueError(f"event {self.index}: unknown tag {tag!r}")
        self.last_event = event
        self.index += 1

    def finish(self, report: Optional[SolveReport] = None) -> AuditReport:
        if report is not None:
            if report.status == "SAT":
                model = report.model
                for ci in range(self.n_original):
                    lits = self.clauses[ci]
                    if not any((lit > 0) == (model[abs(lit)] == 1) for lit in lits):
                        self._flag("model-soundness",
                                   f"model falsifies original clause {ci}")
                        break
            elif report.status == "UNSAT":
                if self.last_event is None or self.last_event[0] != "C":
                    self._flag("unsat-witness", "UNSAT without a final conflict event")
                elif self.trail_lim:
                    self._flag("unsat-witness",
                               f"final conflict at level {len(self.trail_lim)}, expected 0")
        return self.report


def audit_run(trace: Iterable[tuple], formula: CnfFormula,
              learning: str = "1UIP",
              report: Optional[SolveReport] = None) -> AuditReport:
    """Replay a trace and check every in-trace engine invariant."""
    auditor = TraceAuditor(formula, learning)
    for event in trace:
        auditor.feed(event)
    return auditor.finish(report)


def check_wdls_single_use(trace: Iterable[tuple], formula: CnfFormula,
                          ) -> list[tuple[str, int, str]]:
    """Check the single-use property of decision-negation learning:
    each learned clause propagates at most once and, once its asserted
    literal is set, stays satisfied until the run ends or a restart."""
    nv = formula.num_variables
    values = [UNASSIGNED] * (nv + 1)
    clauses: list[tuple[int, ...]] = [c.lits for c in formula.clauses]
    n_original = len(clauses)
    trail: list[int] = []
    trail_lim: list[int] = []
    used: dict[int, int] = {}
    active: set[int] = set()   # learned clauses that have propagated
    violations: list[tuple[str, int, str]] = []

    def lit_true(lit: int) -> bool:
        val = values[lit if lit > 0 else -lit]
        return val != UNASSIGNED and (val == 1) == (lit > 0)

    for index, event in enumerate(trace):
        tag = event[0]
        if tag == "D":
            _, var, val, _level = event
            trail_lim.append(len(trail))
            values[var] = val
            trail.append(var if val else -var)
        elif tag == "P":
            _, var, val, reason = event
            values[var] = val
            trail.append(var if val else -var)
            if reason >= n_original:
                used[reason] = used.get(reason, 0) + 1
                active.add(reason)
                if used[reason] > 1:
                    violations.append(
                        ("single-use", index,
                         f"learned clause {reason} used {used[reason]} times as reason"))
        elif tag == "L":
            clauses.append(tuple(event[1]))
        elif tag == "B":
            target = event[1]
            limit = trail_lim[target]
            for i in range(len(trail) - 1, limit - 1, -1):
                lit = trail[i]
                values[lit if lit > 0 else -lit] = UNASSIGNED
            del trail[limit:]
            del trail_lim[target:]
        elif tag == "R":
            if trail_lim:
                limit = trail_lim[0]
                for i in range(len(trail) - 1, limit - 1, -1):
                    lit = trail[i]
                    values[lit if lit > 0 else -lit] = UNASSIGNED
                del trail[limit:]
                del trail_lim[:]
            active.clear()
        if tag in ("B", "P", "D"):
            for ci in active:
                if not any(lit_true(lit) for lit in clauses[ci]):
                    violations.append(
                        ("stays-satisfied", index,
                         f"learned clause {ci} unsatisfied while active"))
    return violations


# --- equivalence harnesses -----------------------------------------------------


def check_static_restart_equivalence(formula: CnfFormula, order: Sequence[int],
                                     mapping: dict[int, int],
                                     restart_schedule: Sequence[int],
                                     max_conflicts: int = 500_000) -> bool:
    """Same static selectors with and without a restart schedule must produce
    the identical ordered learned-clause sequence and final status."""

    def config(policy) -> SolverConfig:
        return SolverConfig(
            variable_selector=StaticOrder(list(order)),
            value_selector=StaticMap(dict(mapping)),
            backtrack="J",
            learning="1UIP",
            restart_policy=policy,
            engine="fixed",
            max_conflicts=max_conflicts,
        )

    with_restarts = solve(formula, config(ScriptedRestarts(restart_schedule)))
    without = solve(formula, config(Never()))
    if "BUDGET" in (with_restarts.status, without.status):
        raise BudgetExhausted("equivalence run exceeded its budget")
    return (with_restarts.status == without.status
            and with_restarts.learned_clauses == without.learned_clauses)


def check_dpll_value_order_invariance(formula: CnfFormula,
                                      variable_script: Sequence[int],
                                      random_seeds: Sequence[int] = (0,),
                                      max_conflicts: int = 2_000_000,
                                      ) -> tuple[bool, list[int]]:
    """Search-tree size of a no-learning chronological run on an UNSAT input
    must not depend on value selection.  Returns (ok, node counts)."""
    status, _ = brute_force_sat(formula)
    if status != "UNSAT":
        raise ValueError("formula is satisfiable; invariance claim needs UNSAT")
    value_selectors = [StaticMap(0), StaticMap(1)]
    value_selectors.extend(RandomDynamic() for _ in random_seeds)
    seeds = [0, 0] + list(random_seeds)
    counts: list[int] = []
    for sel, seed in zip(value_selectors, seeds):
        cfg = SolverConfig(
            variable_selector=ScriptedOrder(list(variable_script)),
            value_selector=sel,
            backtrack="T",
            learning="none",
            model="DPLL",
            seed=seed,
            engine="fixed",
            max_conflicts=max_conflicts,
        )
        report = solve(formula, cfg)
        if report.status != "UNSAT":
            raise BudgetExhausted(f"DPLL run ended {report.status}, expected UNSAT")
        counts.append(report.stats.decisions)
    return len(set(counts)) == 1, counts
