"""Pluggable restart decision policies.

A restart erases the assignment trail back to level 0 and nothing else: the
clause database always survives, and whether heuristic state survives is the
selectors' business (see heuristics).  Policies are consulted after every
conflict has been handled and after every decision has been propagated.
"""

from __future__ import annotations

from typing import Sequence

AFTER_CONFLICT = "after-conflict"
AFTER_DECISION = "after-decision"

UNASSIGNED = -1


class Never:
    def fresh(self) -> "Never":
        return Never()

    def should_restart(self, state, event: str) -> bool:
        return False


class AfterEachConflict:
    def fresh(self) -> "AfterEachConflict":
        return AfterEachConflict()

    def should_restart(self, state, event: str) -> bool:
        return event == AFTER_CONFLICT


class CProbe:
    """Probe a fixed variable set; restart unless the probe came out all-ones.

    Fires once every probe variable is assigned and at least one of them is
    0; when all are 1 the run continues without restarting.
    """

    def __init__(self, probe_variables: Sequence[int]):
        if not probe_variables:
            raise ValueError("probe variable set must be nonempty")
        self.probe_variables = list(probe_variables)

    def fresh(self) -> "CProbe":
        return CProbe(self.probe_variables)

    def should_restart(self, state, event: str) -> bool:
        if event != AFTER_DECISION:
            return False
        values = state.values
        saw_zero = False
        for v in self.probe_variables:
            val = values[v]
            if val == UNASSIGNED:
                return False
            if val == 0:
                saw_zero = True
        return saw_zero


class ScriptedRestarts:
    """Restart when the conflict counter crosses the next scheduled count."""

    def __init__(self, schedule: Sequence[int]):
        self.schedule = sorted(schedule)
        self.cursor = 0

    def fresh(self) -> "ScriptedRestarts":
        return ScriptedRestarts(self.schedule)

    def should_restart(self, state, event: str) -> bool:
        if event != AFTER_CONFLICT:
            return False
        fire = False
        while (self.cursor < len(self.schedule)
               and state.stats.conflicts >= self.schedule[self.cursor]):
            self.cursor += 1
            fire = True
        return fire
