"""Variable and value selection schemes.

Non-deterministic selection from the solver models is realized as scripted
selectors: an experiment supplies an explicit sequence, which lets runs
realize a chosen witness strategy deterministically.

Selectors are stateful per run; ``fresh(num_vars)`` returns a clean copy
sized for a formula.  At selection time they read the engine's ``values``
array (-1 unassigned) and ``rng``.
"""

from __future__ import annotations

import random
from typing import Sequence

UNASSIGNED = -1


class ScriptExhausted(RuntimeError):
    pass


# --- variable selection ----------------------------------------------------


class StaticOrder:
    """Fixed total order; returns its first unassigned variable.

    ``order=None`` means the natural order 1..n.
    """

    def __init__(self, order: Sequence[int] | None = None):
        self.order = None if order is None else list(order)

    def fresh(self, num_vars: int) -> "StaticOrder":
        order = self.order
        if order is None:
            order = list(range(1, num_vars + 1))
        elif sorted(order) != list(range(1, num_vars + 1)):
            raise ValueError("static order must be a permutation of all variables")
        return StaticOrder(order)

    def next_variable(self, state) -> int:
        values = state.values
        for v in self.order:
            if values[v] == UNASSIGNED:
                return v
        raise RuntimeError("no unassigned variable")

    def on_conflict(self, conflict_side_vars, conflicts_so_far) -> None:
        pass

    def on_restart(self) -> None:
        pass


class ScriptedOrder:
    """Returns the first script entry naming an unassigned variable.

    The script may repeat variables and need not cover all of them; it is
    rescanned from the start after backtracking or restarts, so a fixed
    witness strategy replays across rounds.
    """

    def __init__(self, script: Sequence[int]):
        self.script = list(script)

    def fresh(self, num_vars: int) -> "ScriptedOrder":
        for v in self.script:
            if not 1 <= v <= num_vars:
                raise ValueError(f"script variable {v} out of range")
        return ScriptedOrder(self.script)

    def next_variable(self, state) -> int:
        values = state.values
        for v in self.script:
            if values[v] == UNASSIGNED:
                return v
        raise ScriptExhausted("variable script exhausted")

    def on_conflict(self, conflict_side_vars, conflicts_so_far) -> None:
        pass

    def on_restart(self) -> None:
        pass


class Vsids:
    """Activity-based selection: bump on conflict, decay at fixed intervals,
    argmax over unassigned variables with seeded random tie-breaking."""

    def __init__(self, bump: float = 1.0, decay: float = 0.95,
                 decay_interval: int = 1, reset_on_restart: bool = True):
        if not 0.0 < decay < 1.0:
            raise ValueError("decay must be in (0, 1)")
        self.bump = bump
        self.decay = decay
        self.decay_interval = decay_interval
        self.reset_on_restart = reset_on_restart
        self.activity: list[float] = []

    def fresh(self, num_vars: int) -> "Vsids":
        sel = Vsids(self.bump, self.decay, self.decay_interval, self.reset_on_restart)
        sel.activity = [0.0] * (num_vars + 1)
        return sel

    def next_variable(self, state) -> int:
        values = state.values
        activity = self.activity
        best = -1.0
        ties: list[int] = []
        for v in range(1, len(activity)):
            if values[v] != UNASSIGNED:
                continue
            act = activity[v]
            if act > best:
                best = act
                ties = [v]
            elif act == best:
                ties.append(v)
        if not ties:
            raise RuntimeError("no unassigned variable")
        if len(ties) == 1:
            return ties[0]
        return ties[state.rng.randrange(len(ties))]

    def on_conflict(self, conflict_side_vars, conflicts_so_far) -> None:
        for v in conflict_side_vars:
            self.activity[v] += self.bump
        if self.decay_interval > 0 and conflicts_so_far % self.decay_interval == 0:
            c = self.decay
            self.activity = [a * c for a in self.activity]

    def on_restart(self) -> None:
        if self.reset_on_restart:
            self.activity = [0.0] * len(self.activity)


# --- value selection --------------------------------------------------------


class StaticMap:
    """Predetermined variable-to-value mapping."""

    def __init__(self, mapping):
        # mapping: dict var->bit, or a single bit for a constant map
        self.mapping = mapping

    def fresh(self, num_vars: int) -> "StaticMap":
        if isinstance(self.mapping, int):
            table = [self.mapping] * (num_vars + 1)
        else:
            table = [0] * (num_vars + 1)
            for v, b in self.mapping.items():
                table[v] = b
            if len(self.mapping) != num_vars:
                raise ValueError("static map must assign every variable")
        sel = StaticMap(self.mapping)
        sel._table = table
        return sel

    def next_value(self, state, variable: int) -> int:
        return self._table[variable]

    def on_unassign(self, variable: int, value: int) -> None:
        pass

    def on_restart(self) -> None:
        pass


class ScriptedBits:
    """Consumes one scripted bit per decision; errors when exhausted."""

    def __init__(self, bits: Sequence[int]):
        self.bits = list(bits)
        self.cursor = 0

    def fresh(self, num_vars: int) -> "ScriptedBits":
        return ScriptedBits(self.bits)

    def next_value(self, state, variable: int) -> int:
        if self.cursor >= len(self.bits):
            raise ScriptExhausted("value script exhausted")
        bit = self.bits[self.cursor]
        self.cursor += 1
        return bit

    def on_unassign(self, variable: int, value: int) -> None:
        pass

    def on_restart(self) -> None:
        pass


class RandomDynamic:
    """Uniformly random truth value, drawn from the solver's seeded RNG."""

    def fresh(self, num_vars: int) -> "RandomDynamic":
        return RandomDynamic()

    def next_value(self, state, variable: int) -> int:
        return state.rng.getrandbits(1)

    def on_unassign(self, variable: int, value: int) -> None:
        pass

    def on_restart(self) -> None:
        pass


class PhaseSaving:
    """Returns the variable's last assigned value, 0 if never assigned.

    Phase memory is recorded when assignments are undone and is retained
    across restarts.
    """

    def __init__(self):
        self.saved: list[int] = []

    def fresh(self, num_vars: int) -> "PhaseSaving":
        sel = PhaseSaving()
        sel.saved = [0] * (num_vars + 1)
        return sel

    def next_value(self, state, variable: int) -> int:
        return self.saved[variable]

    def on_unassign(self, variable: int, value: int) -> None:
        self.saved[variable] = value

    def on_restart(self) -> None:
        pass
