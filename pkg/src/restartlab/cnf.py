"""Core propositional data model: literals, clauses, formulas, restrictions.

Literals are nonzero signed integers in the DIMACS convention: ``v`` is the
positive literal of variable ``v >= 1`` and ``-v`` its negation.  Clause
database order is a first-class property here: the solver's fixed BCP
contract depends on insertion order, so formulas never reorder clauses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

UNASSIGNED = -1

# Parity constraints on d variables expand to 2^(d-1) clauses; above this
# arity generators must fail loudly instead of emitting gigabytes.
MAX_XOR_ARITY = 16


def neg(lit: int) -> int:
    return -lit


def var_of(lit: int) -> int:
    return lit if lit > 0 else -lit


def is_pos(lit: int) -> bool:
    return lit > 0


def make_literal(variable: int, polarity: bool) -> int:
    if variable < 1:
        raise ValueError(f"variable index must be >= 1, got {variable}")
    return variable if polarity else -variable


class Clause:
    """An ordered disjunction of literals.

    Duplicate literals are dropped at construction (first occurrence kept).
    A clause containing both ``v`` and ``-v`` is kept but flagged
    tautological; the generators in this package never emit one, so the flag
    surfaces generator bugs.
    """

    __slots__ = ("lits", "tautological")

    def __init__(self, literals: Iterable[int]):
        seen = set()
        lits = []
        for lit in literals:
            if lit == 0:
                raise ValueError("0 is not a literal")
            if lit not in seen:
                seen.add(lit)
                lits.append(lit)
        self.lits: tuple[int, ...] = tuple(lits)
        self.tautological: bool = any(-lit in seen for lit in lits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.lits)

    def __len__(self) -> int:
        return len(self.lits)

    def __getitem__(self, i):
        return self.lits[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Clause) and self.lits == other.lits

    def __hash__(self) -> int:
        return hash(self.lits)

    def __repr__(self) -> str:
        return f"Clause({list(self.lits)})"


class CnfFormula:
    """A clause database over variables 1..num_variables.

    Clause insertion order is preserved and observable (BCP propagates the
    clause added first, so order is semantically meaningful).
    """

    __slots__ = ("num_variables", "clauses")

    def __init__(self, num_variables: int, clauses: Iterable[Clause] = ()):
        if num_variables < 0:
            raise ValueError("negative variable count")
        self.num_variables = num_variables
        self.clauses: list[Clause] = []
        for clause in clauses:
            self.add_clause(clause)

    def add_clause(self, clause: Clause) -> None:
        for lit in clause:
            if var_of(lit) > self.num_variables:
                raise ValueError(
                    f"literal {lit} exceeds variable count {self.num_variables}"
                )
        self.clauses.append(clause)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, CnfFormula)
            and self.num_variables == other.num_variables
            and self.clauses == other.clauses
        )

    def __repr__(self) -> str:
        return f"CnfFormula(vars={self.num_variables}, clauses={len(self.clauses)})"


class Restriction:
    """A partial assignment pi: {1..n} -> {0, 1, *} (* = unassigned).

    The domain is always exactly the variable range of the formula it is
    meant for; unassigned variables hold UNASSIGNED.
    """

    __slots__ = ("values",)

    def __init__(self, num_variables: int):
        # index 0 unused so values[v] is the value of variable v
        self.values: list[int] = [UNASSIGNED] * (num_variables + 1)

    @classmethod
    def from_pairs(cls, num_variables: int, pairs: Iterable[tuple[int, int]]) -> "Restriction":
        pi = cls(num_variables)
        for variable, value in pairs:
            pi.set(variable, value)
        return pi

    @property
    def num_variables(self) -> int:
        return len(self.values) - 1

    def set(self, variable: int, value: int) -> None:
        if not 1 <= variable < len(self.values):
            raise ValueError(f"variable {variable} out of domain")
        if value not in (0, 1, UNASSIGNED):
            raise ValueError(f"value must be 0, 1 or UNASSIGNED, got {value}")
        self.values[variable] = value

    def __getitem__(self, variable: int) -> int:
        return self.values[variable]

    def assigned_variables(self) -> list[int]:
        return [v for v in range(1, len(self.values)) if self.values[v] != UNASSIGNED]

    def literal_value(self, lit: int) -> int:
        """Value of a literal under pi: 0, 1 or UNASSIGNED."""
        v = self.values[var_of(lit)]
        if v == UNASSIGNED:
            return UNASSIGNED
        return v if lit > 0 else 1 - v


@dataclass
class CnfInstance:
    """A formula plus provenance: family tag, parameters, known backdoors."""

    formula: CnfFormula
    family: str = "raw"  # tseitin | ladder | pitfall | raw
    parameters: dict = field(default_factory=dict)
    backdoors: dict[str, list[int]] = field(default_factory=dict)
    expected_status: str = "unknown"  # SAT | UNSAT | unknown

    def __post_init__(self):
        for name, variables in self.backdoors.items():
            for v in variables:
                if not 1 <= v <= self.formula.num_variables:
                    raise ValueError(f"backdoor {name!r} variable {v} out of range")
        if self.expected_status not in ("SAT", "UNSAT", "unknown"):
            raise ValueError(f"bad expected_status {self.expected_status!r}")


def restrict(formula: CnfFormula, pi: Restriction) -> tuple[CnfFormula, bool]:
    """Apply a restriction: F[pi].

    Satisfied clauses are removed, falsified literals are removed from the
    surviving clauses, variable indices are preserved.  Returns the reduced
    formula and whether a falsified (empty) clause is present.
    """
    if pi.num_variables != formula.num_variables:
        raise ValueError("restriction domain does not match formula")
    reduced = CnfFormula(formula.num_variables)
    falsified = False
    for clause in formula.clauses:
        kept = []
        satisfied = False
        for lit in clause:
            value = pi.literal_value(lit)
            if value == 1:
                satisfied = True
                break
            if value == UNASSIGNED:
                kept.append(lit)
        if satisfied:
            continue
        if not kept:
            falsified = True
        reduced.add_clause(Clause(kept))
    return reduced, falsified


def xor_to_cnf(variables: Sequence[int], parity: int) -> list[Clause]:
    """CNF of the parity constraint  var_1 xor ... xor var_d = parity.

    Emits exactly 2^(d-1) clauses, one per violating assignment, enumerated
    in lexicographic order with 0 first; each clause has d literals.
    """
    d = len(variables)
    if not 1 <= d <= MAX_XOR_ARITY:
        raise ValueError(f"xor arity {d} outside 1..{MAX_XOR_ARITY}")
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    clauses = []
    for bits in itertools.product((0, 1), repeat=d):
        if sum(bits) % 2 != parity:
            # clause falsified exactly by this assignment
            clauses.append(
                Clause(v if b == 0 else -v for v, b in zip(variables, bits))
            )
    return clauses


# --- DIMACS serialization ------------------------------------------------


class DimacsError(ValueError):
    pass


def parse_dimacs(text: str) -> CnfFormula:
    """Parse DIMACS CNF text into a formula (clause order = file order)."""
    num_vars = None
    declared_clauses = None
    clauses: list[Clause] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError(f"line {lineno}: duplicate header")
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: malformed header {line!r}")
            if num_vars < 0 or declared_clauses < 0:
                raise DimacsError(f"line {lineno}: negative counts in header")
            continue
        if num_vars is None:
            raise DimacsError(f"line {lineno}: clause before header")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"line {lineno}: bad token {token!r}")
            if lit == 0:
                clauses.append(Clause(current))
                current = []
            else:
                if var_of(lit) > num_vars:
                    raise DimacsError(
                        f"line {lineno}: literal {lit} out of range 1..{num_vars}"
                    )
                current.append(lit)
    if num_vars is None:
        raise DimacsError("missing header")
    if current:
        raise DimacsError("last clause not terminated by 0")
    if len(clauses) != declared_clauses:
        raise DimacsError(
            f"header declares {declared_clauses} clauses, found {len(clauses)}"
        )
    return CnfFormula(num_vars, clauses)


def write_dimacs(formula: CnfFormula, comments: Iterable[str] = ()) -> str:
    """Serialize to DIMACS; round-trip stable under parse_dimacs."""
    out = []
    for comment in comments:
        out.append(f"c {comment}")
    out.append(f"p cnf {formula.num_variables} {len(formula.clauses)}")
    for clause in formula.clauses:
        out.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(out) + "\n"


# --- instance metadata sidecar -------------------------------------------
#
# Line-oriented key=value; backdoor lists as comma-separated indices.


def write_sidecar(instance: CnfInstance) -> str:
    lines = [f"family={instance.family}"]
    for key in sorted(instance.parameters):
        lines.append(f"param.{key}={instance.parameters[key]}")
    for name in sorted(instance.backdoors):
        joined = ",".join(str(v) for v in instance.backdoors[name])
        lines.append(f"backdoor.{name}={joined}")
    lines.append(f"expected_status={instance.expected_status}")
    return "\n".join(lines) + "\n"


def read_sidecar(text: str, formula: CnfFormula) -> CnfInstance:
    family = "raw"
    parameters: dict = {}
    backdoors: dict[str, list[int]] = {}
    expected = "unknown"
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "family":
            family = value
        elif key == "expected_status":
            expected = value
        elif key.startswith("param."):
            parameters[key[len("param."):]] = _parse_scalar(value)
        elif key.startswith("backdoor."):
            name = key[len("backdoor."):]
            backdoors[name] = [int(tok) for tok in value.split(",") if tok]
        else:
            raise ValueError(f"unknown sidecar key {key!r}")
    return CnfInstance(formula, family, parameters, backdoors, expected)


def _parse_scalar(value: str):
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            continue
    return value
