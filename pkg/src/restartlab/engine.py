"""CDCL/DPLL search core: trail, greedy BCP, conflict analysis, restarts.

Three interchangeable propagation engines:

* ``fixed`` (default): greedy BCP with the fixed order contract — among all
  clauses currently unit or falsified, the one added to the clause database
  first acts.  Propagation is a pure function of (database, assignment),
  which the static-equivalence experiments depend on.  Implemented with
  occurrence lists, per-clause counters and a lazy min-index heap; tests
  prove it step-equivalent to a naive database rescan.
* ``scan``: the naive rescan reference (slow, used by tests).
* ``watched``: two-watched-literal fast path for large budget-censored
  sweeps.  Same greedy saturation semantics but unit order follows watch
  traversal, not database order, so equivalence harnesses must not use it.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from heapq import heappush, heappop
from typing import Optional

from .cnf import Clause, CnfFormula, CnfInstance
from .heuristics import RandomDynamic, StaticOrder
from .restarts import AFTER_CONFLICT, AFTER_DECISION, Never

UNASSIGNED = -1
NO_REASON = -1  # reason index of decisions

SAT = "SAT"
UNSAT = "UNSAT"
BUDGET = "BUDGET"


@dataclass
class Stats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    restarts: int = 0
    learned: int = 0


@dataclass
class SolverConfig:
    variable_selector: object = None   # selector template with .fresh(num_vars)
    value_selector: object = None
    backtrack: str = "T"               # T (chronological) | J (backjumping)
    learning: str = "1UIP"             # 1UIP | WDLS | none
    model: str = "CDCL"                # CDCL | DPLL
    restart_policy: object = None      # policy template with .fresh()
    seed: int = 0
    max_conflicts: Optional[int] = None
    max_decisions: Optional[int] = None
    max_restarts: Optional[int] = None
    max_seconds: Optional[float] = None
    engine: str = "fixed"              # fixed | scan | watched
    trace: bool = False
    record_learned: bool = True
    name: str = ""

    def __post_init__(self):
        if self.variable_selector is None:
            self.variable_selector = StaticOrder(None)  # natural order 1..n
        if self.value_selector is None:
            self.value_selector = RandomDynamic()
        if self.restart_policy is None:
            self.restart_policy = Never()
        if self.model == "DPLL":
            if self.learning != "none":
                raise ValueError("DPLL model forces learning='none'")
            if self.backtrack != "T":
                raise ValueError("DPLL model forces backtrack='T'")
        elif self.model == "CDCL":
            if self.learning not in ("1UIP", "WDLS"):
                raise ValueError(f"bad learning scheme {self.learning!r}")
        else:
            raise ValueError(f"bad model {self.model!r}")
        if self.backtrack not in ("T", "J"):
            raise ValueError(f"bad backtrack mode {self.backtrack!r}")
        if self.engine not in ("fixed", "scan", "watched"):
            raise ValueError(f"bad engine {self.engine!r}")


@dataclass
class SolveReport:
    status: str                         # SAT | UNSAT | BUDGET
    stats: Stats
    model: Optional[list[int]] = None   # values[1..n] when SAT
    budget: Optional[str] = None        # which budget ran out
    trace: Optional[list[tuple]] = None
    learned_clauses: Optional[list[tuple[int, ...]]] = None


class Solver:
    """One solve run.  Use solve(instance, config) for the plain call."""

    def __init__(self, formula: CnfFormula, config: SolverConfig,
                 event_sink=None):
        self.config = config
        self.num_vars = formula.num_variables
        nv = self.num_vars
        self.clauses: list[list[int]] = [list(c.lits) for c in formula.clauses]
        self.n_original = len(self.clauses)
        # literal-indexed truth: values[lit] is 1/0/UNASSIGNED for that
        # literal (negative literals index from the end); values[v] for a
        # variable v is its positive literal, i.e. the variable's value
        self.values: list[int] = [UNASSIGNED] * (2 * nv + 1)
        self.var_levels: list[int] = [0] * (nv + 1)
        self.reasons: list[int] = [NO_REASON] * (nv + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.flipped: list[bool] = []   # per level, DPLL branch bookkeeping
        self.num_assigned = 0
        self.rng = random.Random(config.seed)
        self.stats = Stats()
        self.var_selector = config.variable_selector.fresh(nv)
        self.val_selector = config.value_selector.fresh(nv)
        self.policy = config.restart_policy.fresh()
        self.trace: Optional[list[tuple]] = [] if config.trace else None
        self.event_sink = event_sink
        self.learned_record: Optional[list[tuple[int, ...]]] = (
            [] if config.record_learned else None
        )
        self._seen = bytearray(nv + 1)  # scratch for conflict analysis
        self._assert_pending: Optional[int] = None
        self._tracing = config.trace or event_sink is not None

        engine = config.engine
        if engine == "fixed":
            self._init_fixed()
            self._propagate = self._propagate_fixed
            self._assign_hook = self._on_assign_fixed
            self._unassign_hook = self._on_unassign_fixed
        elif engine == "scan":
            self._propagate = self._propagate_scan
            self._assign_hook = None
            self._unassign_hook = None
        else:
            self._init_watched()
            self._propagate = self._propagate_watched
            self._assign_hook = None
            self._unassign_hook = None

    # --- event plumbing ---------------------------------------------------

    def _emit(self, event: tuple) -> None:
        if self.trace is not None:
            self.trace.append(event)
        if self.event_sink is not None:
            self.event_sink(event)

    @property
    def level(self) -> int:
        return len(self.trail_lim)

    # --- shared assignment bookkeeping -------------------------------------

    def _assign(self, lit: int, reason: int) -> None:
        v = lit if lit > 0 else -lit
        val = 1 if lit > 0 else 0
        self.values[lit] = 1
        self.values[-lit] = 0
        self.var_levels[v] = len(self.trail_lim)
        self.reasons[v] = reason
        self.trail.append(lit)
        self.num_assigned += 1
        if reason != NO_REASON:
            self.stats.propagations += 1
            if self._tracing:
                self._emit(("P", v, val, reason))
        if self._assign_hook is not None:
            self._assign_hook(lit)

    def _pop_to(self, target: int) -> None:
        """Undo all assignments above decision level target."""
        if target >= len(self.trail_lim):
            return
        limit = self.trail_lim[target]
        trail = self.trail
        values = self.values
        on_unassign = self.val_selector.on_unassign
        unassign_hook = self._unassign_hook
        for i in range(len(trail) - 1, limit - 1, -1):
            lit = trail[i]
            v = lit if lit > 0 else -lit
            on_unassign(v, values[v])
            values[lit] = UNASSIGNED
            values[-lit] = UNASSIGNED
            if unassign_hook is not None:
                unassign_hook(lit)
        self.num_assigned -= len(trail) - limit
        del trail[limit:]
        del self.trail_lim[target:]
        del self.flipped[target:]
        if self.config.engine == "watched":
            self._qhead = limit

    # --- spec operations ----------------------------------------------------

    def decide(self, variable: int, value: int, flipped: bool = False) -> None:
        if self.values[variable] != UNASSIGNED:
            raise ValueError(f"variable {variable} already assigned")
        self.trail_lim.append(len(self.trail))
        self.flipped.append(flipped)
        self.stats.decisions += 1
        self._assign(variable if value else -variable, NO_REASON)
        if self._tracing:
            self._emit(("D", variable, value, len(self.trail_lim)))

    def propagate(self) -> int:
        """Greedy BCP to saturation; returns conflict clause index or -1."""
        return self._propagate()

    def backtrack_step(self) -> None:
        """Undo the most recent decision level."""
        if not self.trail_lim:
            raise RuntimeError("backtrack at level 0")
        target = len(self.trail_lim) - 1
        self._pop_to(target)
        if self._tracing:
            self._emit(("B", target))

    def backjump(self, learned_lits: list[int]) -> None:
        """Jump to the second-highest decision level in the learned clause."""
        level = len(self.trail_lim)
        top = [lit for lit in learned_lits if self.var_levels[abs(lit)] == level
               and self.values[abs(lit)] != UNASSIGNED]
        if len(top) != 1:
            raise ValueError("backjump needs an asserting clause")
        target = 0
        for lit in learned_lits:
            v = abs(lit)
            if self.values[v] != UNASSIGNED:
                lv = self.var_levels[v]
                if lv != level and lv > target:
                    target = lv
        self._pop_to(target)
        if self._tracing:
            self._emit(("B", target))

    def analyze_conflict(self, conflict: int) -> tuple[list[int], list[int]]:
        """Derive the learned clause for a conflict.

        Returns (learned literals, conflict-side variables).  For 1UIP the
        asserting literal comes first; for WDLS literals follow trail order.
        Either clause is falsified by the current trail at return time.
        """
        if self.config.learning == "WDLS":
            lits = [-self.trail[pos] for pos in self.trail_lim]
            side = sorted({abs(l) for l in self.clauses[conflict]}
                          | {abs(l) for l in lits})
            return lits, side
        return self._analyze_1uip(conflict)

    def _analyze_1uip(self, conflict: int) -> tuple[list[int], list[int]]:
        clauses = self.clauses
        var_levels = self.var_levels
        reasons = self.reasons
        trail = self.trail
        seen = self._seen
        cur_level = len(self.trail_lim)
        learned_rest: list[int] = []
        touched: list[int] = []
        counter = 0
        idx = len(trail) - 1
        clause = clauses[conflict]
        skip_lit = 0
        pivot_lit = 0
        while True:
            for q in clause:
                if q == skip_lit:
                    continue
                v = q if q > 0 else -q
                if not seen[v] and var_levels[v] > 0:
                    seen[v] = 1
                    touched.append(v)
                    if var_levels[v] == cur_level:
                        counter += 1
                    else:
                        learned_rest.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            pivot_lit = trail[idx]
            idx -= 1
            pivot_var = pivot_lit if pivot_lit > 0 else -pivot_lit
            seen[pivot_var] = 0
            counter -= 1
            if counter == 0:
                break
            clause = clauses[reasons[pivot_var]]
            skip_lit = pivot_lit
        for v in touched:
            seen[v] = 0
        return [-pivot_lit] + learned_rest, touched

    # --- restart -------------------------------------------------------------

    def _do_restart(self) -> None:
        if self.trail_lim:
            self._pop_to(0)
        self.var_selector.on_restart()
        self.val_selector.on_restart()
        self.stats.restarts += 1
        self._assert_pending = None
        if self._tracing:
            self._emit(("R",))

    # --- learned clause handling ----------------------------------------------

    def _attach_learned(self, lits: list[int]) -> int:
        ci = len(self.clauses)
        self.clauses.append(list(lits))
        self.stats.learned += 1
        if self.learned_record is not None:
            self.learned_record.append(tuple(lits))
        if self._tracing:
            self._emit(("L", tuple(lits)))
        engine = self.config.engine
        if engine == "fixed":
            self._attach_fixed(ci)
        elif engine == "watched":
            self._attach_watched_learned(ci)
        return ci

    # --- main loop --------------------------------------------------------------

    def solve(self) -> SolveReport:
        cfg = self.config
        t_start = time.monotonic()
        dpll = cfg.model == "DPLL"
        self._assert_pending = None
        confl = self._propagate()
        while True:
            if confl >= 0:
                self.stats.conflicts += 1
                if self.trace is not None or self.event_sink is not None:
                    self._emit(("C", confl))
                if not self.trail_lim:
                    return self._report(UNSAT)
                if dpll:
                    refuted = self._dpll_unwind()
                    if refuted:
                        return self._report(UNSAT)
                else:
                    learned, side = self.analyze_conflict(confl)
                    ci = self._attach_learned(learned)
                    self.var_selector.on_conflict(side, self.stats.conflicts)
                    if cfg.backtrack == "J":
                        self.backjump(learned)
                    else:
                        self.backtrack_step()
                    if cfg.engine == "watched":
                        self._assert_pending = ci
                if cfg.max_conflicts is not None and self.stats.conflicts >= cfg.max_conflicts:
                    return self._report(BUDGET, budget="conflicts")
                if (cfg.max_seconds is not None and self.stats.conflicts % 64 == 0
                        and time.monotonic() - t_start > cfg.max_seconds):
                    return self._report(BUDGET, budget="time")
                if self.policy.should_restart(self, AFTER_CONFLICT):
                    if cfg.max_restarts is not None and self.stats.restarts >= cfg.max_restarts:
                        return self._report(BUDGET, budget="restarts")
                    self._do_restart()
            else:
                if self.num_assigned == self.num_vars:
                    return self._report(SAT)
                if self.policy.should_restart(self, AFTER_DECISION):
                    if cfg.max_restarts is not None and self.stats.restarts >= cfg.max_restarts:
                        return self._report(BUDGET, budget="restarts")
                    self._do_restart()
                else:
                    if cfg.max_decisions is not None and self.stats.decisions >= cfg.max_decisions:
                        return self._report(BUDGET, budget="decisions")
                    if (cfg.max_seconds is not None and self.stats.decisions % 64 == 0
                            and time.monotonic() - t_start > cfg.max_seconds):
                        return self._report(BUDGET, budget="time")
                    variable = self.var_selector.next_variable(self)
                    value = self.val_selector.next_value(self, variable)
                    self.decide(variable, value)
            confl = self._propagate()

    def _dpll_unwind(self) -> bool:
        """Chronological unwind with branch flipping; True means refuted."""
        while self.trail_lim:
            was_flipped = self.flipped[-1]
            dec_lit = self.trail[self.trail_lim[-1]]
            self.backtrack_step()
            if not was_flipped:
                variable = dec_lit if dec_lit > 0 else -dec_lit
                old_val = 1 if dec_lit > 0 else 0
                self.decide(variable, 1 - old_val, flipped=True)
                return False
        return True

    def _report(self, status: str, budget: Optional[str] = None) -> SolveReport:
        model = None
        if status == SAT:
            model = self.values[:]
            for lits in self.clauses[: self.n_original]:
                if not any((lit > 0) == (model[abs(lit)] == 1) for lit in lits):
                    raise RuntimeError("internal error: model does not satisfy input")
        return SolveReport(
            status=status,
            stats=self.stats,
            model=model,
            budget=budget,
            trace=self.trace,
            learned_clauses=self.learned_record,
        )

    # --- fixed-order engine -------------------------------------------------

    def _init_fixed(self) -> None:
        nv = self.num_vars
        self.occ_pos: list[list[int]] = [[] for _ in range(nv + 1)]
        self.occ_neg: list[list[int]] = [[] for _ in range(nv + 1)]
        self.n_true: list[int] = []
        self.n_free: list[int] = []
        self.pending: list[int] = []
        for ci in range(len(self.clauses)):
            self._attach_fixed(ci)

    def _attach_fixed(self, ci: int) -> None:
        occ_pos, occ_neg = self.occ_pos, self.occ_neg
        values = self.values
        nt = nf = 0
        for lit in self.clauses[ci]:
            if lit > 0:
                occ_pos[lit].append(ci)
                val = values[lit]
                if val == 1:
                    nt += 1
                elif val == UNASSIGNED:
                    nf += 1
            else:
                occ_neg[-lit].append(ci)
                val = values[-lit]
                if val == 0:
                    nt += 1
                elif val == UNASSIGNED:
                    nf += 1
        self.n_true.append(nt)
        self.n_free.append(nf)
        if nt == 0 and nf <= 1:
            heappush(self.pending, ci)

    def _on_assign_fixed(self, lit: int) -> None:
        n_true, n_free, pending = self.n_true, self.n_free, self.pending
        if lit > 0:
            sat_side = self.occ_pos[lit]
            false_side = self.occ_neg[lit]
        else:
            sat_side = self.occ_neg[-lit]
            false_side = self.occ_pos[-lit]
        for ci in sat_side:
            n_true[ci] += 1
            n_free[ci] -= 1
        for ci in false_side:
            n_free[ci] -= 1
            if n_true[ci] == 0 and n_free[ci] <= 1:
                heappush(pending, ci)

    def _on_unassign_fixed(self, lit: int) -> None:
        n_true, n_free, pending = self.n_true, self.n_free, self.pending
        if lit > 0:
            sat_side = self.occ_pos[lit]
            false_side = self.occ_neg[lit]
        else:
            sat_side = self.occ_neg[-lit]
            false_side = self.occ_pos[-lit]
        for ci in sat_side:
            n_true[ci] -= 1
            n_free[ci] += 1
            if n_true[ci] == 0 and n_free[ci] <= 1:
                heappush(pending, ci)
        for ci in false_side:
            n_free[ci] += 1
            if n_true[ci] == 0 and n_free[ci] <= 1:
                heappush(pending, ci)

    def _propagate_fixed(self) -> int:
        pending = self.pending
        n_true, n_free = self.n_true, self.n_free
        values = self.values
        clauses = self.clauses
        while pending:
            ci = heappop(pending)
            if n_true[ci] > 0:
                continue
            free = n_free[ci]
            if free == 0:
                return ci
            if free != 1:
                continue
            for lit in clauses[ci]:
                if values[lit if lit > 0 else -lit] == UNASSIGNED:
                    self._assign(lit, ci)
                    break
        return -1

    # --- naive rescan engine (reference) -------------------------------------

    def _propagate_scan(self) -> int:
        values = self.values
        while True:
            acted = False
            for ci, lits in enumerate(self.clauses):
                n_free = 0
                free_lit = 0
                satisfied = False
                for lit in lits:
                    val = values[lit if lit > 0 else -lit]
                    if val == UNASSIGNED:
                        n_free += 1
                        free_lit = lit
                    elif (val == 1) == (lit > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if n_free == 0:
                    return ci
                if n_free == 1:
                    self._assign(free_lit, ci)
                    acted = True
                    break
            if not acted:
                return -1

    # --- two-watched-literal engine -------------------------------------------

    def _init_watched(self) -> None:
        nv = self.num_vars
        # literal code: 2v for positive, 2v+1 for negative
        self.watches: list[list[int]] = [[] for _ in range(2 * nv + 2)]
        self._qhead = 0
        self._root_units: list[int] = []
        self._load_conflict = -1
        for ci, lits in enumerate(self.clauses):
            if not lits:
                self._load_conflict = ci
            elif len(lits) == 1:
                self._root_units.append(ci)
            else:
                self._watch(lits[0], ci)
                self._watch(lits[1], ci)

    def _watch(self, lit: int, ci: int) -> None:
        code = 2 * lit if lit > 0 else -2 * lit + 1
        self.watches[code].append(ci)

    def _attach_watched_learned(self, ci: int) -> None:
        lits = self.clauses[ci]
        if len(lits) < 2:
            return
        # watch the asserting literal and the deepest other literal so the
        # clause wakes correctly after the jump
        var_levels = self.var_levels
        best = 1
        best_level = var_levels[abs(lits[1])]
        for t in range(2, len(lits)):
            lv = var_levels[abs(lits[t])]
            if lv > best_level:
                best, best_level = t, lv
        lits[1], lits[best] = lits[best], lits[1]
        self._watch(lits[0], ci)
        self._watch(lits[1], ci)

    def _propagate_watched(self) -> int:
        if self._load_conflict >= 0:
            return self._load_conflict
        values = self.values
        clauses = self.clauses
        for ci in self._root_units:
            lit = clauses[ci][0]
            val = values[lit if lit > 0 else -lit]
            if val == UNASSIGNED:
                self._assign(lit, ci)
            elif (val == 1) != (lit > 0):
                return ci
        pending = self._assert_pending
        if pending is not None:
            self._assert_pending = None
            lits = clauses[pending]
            lit = lits[0]
            val = values[lit if lit > 0 else -lit]
            if val == UNASSIGNED:
                self._assign(lit, pending)
            elif (val == 1) != (lit > 0):
                return pending
        trail = self.trail
        watches = self.watches
        while self._qhead < len(trail):
            p = trail[self._qhead]
            self._qhead += 1
            fcode = 2 * p + 1 if p > 0 else -2 * p  # code of the falsified literal -p
            wl = watches[fcode]
            false_lit = -p
            i = j = 0
            n = len(wl)
            while i < n:
                ci = wl[i]
                i += 1
                lits = clauses[ci]
                if lits[0] == false_lit:
                    lits[0] = lits[1]
                    lits[1] = false_lit
                first = lits[0]
                fval = values[first if first > 0 else -first]
                if fval != UNASSIGNED and (fval == 1) == (first > 0):
                    wl[j] = ci
                    j += 1
                    continue
                moved = False
                for t in range(2, len(lits)):
                    lt = lits[t]
                    val = values[lt if lt > 0 else -lt]
                    if val == UNASSIGNED or (val == 1) == (lt > 0):
                        lits[t] = false_lit
                        lits[1] = lt
                        self._watch(lt, ci)
                        moved = True
                        break
                if moved:
                    continue
                wl[j] = ci
                j += 1
                if fval != UNASSIGNED:  # first is false: conflict
                    while i < n:
                        wl[j] = wl[i]
                        j += 1
                        i += 1
                    del wl[j:]
                    return ci
                self._assign(first, ci)
            del wl[j:]
        return -1


def solve(instance: CnfInstance | CnfFormula, config: SolverConfig,
          event_sink=None) -> SolveReport:
    formula = instance.formula if isinstance(instance, CnfInstance) else instance
    return Solver(formula, config, event_sink=event_sink).solve()


# --- trace serialization ----------------------------------------------------
#
# Line-oriented event records: "D var val level", "P var val reason-id",
# "C clause-id", "L lit lit ...", "B level", "R".


def trace_to_lines(trace: list[tuple]) -> str:
    out = []
    for event in trace:
        tag = event[0]
        if tag == "L":
            out.append("L " + " ".join(str(l) for l in event[1]))
        elif tag == "R":
            out.append("R")
        else:
            out.append(tag + " " + " ".join(str(x) for x in event[1:]))
    return "\n".join(out) + "\n"


def trace_from_lines(text: str) -> list[tuple]:
    events: list[tuple] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "R":
            events.append(("R",))
        elif tag == "L":
            events.append(("L", tuple(int(t) for t in parts[1:])))
        elif tag in ("D", "P"):
            events.append((tag, int(parts[1]), int(parts[2]), int(parts[3])))
        elif tag in ("C", "B"):
            events.append((tag, int(parts[1])))
        else:
            raise ValueError(f"bad trace line {line!r}")
    return events
