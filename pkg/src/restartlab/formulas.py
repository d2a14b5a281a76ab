"""Generators for the three structured CNF families plus random k-CNF.

Variable layouts are fixed and recorded in instance parameters so scripts
and backdoor sets can reference concrete indices:

* parity instances: edge e (0-based) gets variable base + 1 + e;
* ladder: the per-position blocks of width log2(n) come first
  (position i, slot j -> 1 + i*log2(n) + (j-1)), then the log2(n)
  selector variables;
* pitfall: blocks are consecutive, each laid out X (edge order), Y, Z, P, A.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .cnf import Clause, CnfFormula, CnfInstance, MAX_XOR_ARITY, xor_to_cnf
from .graphs import (
    Graph,
    Labelling,
    edge_expansion,
    near_regular_graph,
    odd_labelling,
    random_regular_graph,
)


def parity_clauses(graph: Graph, labelling: Labelling, edge_vars: list[int]) -> list[Clause]:
    """One XOR block per vertex over its incident edge variables."""
    if len(edge_vars) != len(graph.edges):
        raise ValueError("need one variable per edge")
    if len(labelling.values) != graph.num_vertices:
        raise ValueError("labelling does not cover all vertices")
    incident = graph.incident_edges()
    clauses: list[Clause] = []
    for v in range(graph.num_vertices):
        variables = [edge_vars[e] for e in incident[v]]
        if len(variables) > MAX_XOR_ARITY:
            raise ValueError(
                f"vertex {v} degree {len(variables)} exceeds XOR cap {MAX_XOR_ARITY}"
            )
        clauses.extend(xor_to_cnf(variables, labelling.values[v]))
    return clauses


def tseitin(graph: Graph, labelling: Labelling, variable_base: int = 0) -> CnfInstance:
    """Parity-constraint instance: UNSAT exactly when the labelling is odd."""
    num_edges = len(graph.edges)
    edge_vars = [variable_base + 1 + e for e in range(num_edges)]
    formula = CnfFormula(variable_base + num_edges)
    for clause in parity_clauses(graph, labelling, edge_vars):
        formula.add_clause(clause)
    odd = labelling.parity() == 1
    return CnfInstance(
        formula,
        family="tseitin",
        parameters={
            "num_vertices": graph.num_vertices,
            "num_edges": num_edges,
            "variable_base": variable_base,
            "labelling": "".join(str(b) for b in labelling.values),
            "graph": _edges_str(graph),
        },
        expected_status="UNSAT" if odd else "SAT",
    )


def make_tseitin(num_vertices: int, degree: int, seed: int, parity: int = 1,
                 expansion_min: float | None = None) -> CnfInstance:
    """Sample a regular graph and build the parity instance on it."""
    graph = _sample_graph(
        lambda s: random_regular_graph(num_vertices, degree, s), seed, expansion_min
    )
    labelling = odd_labelling(graph, seed)
    if parity == 0:
        labelling.values[0] ^= 1
    inst = tseitin(graph, labelling)
    inst.parameters["seed"] = seed
    inst.parameters["degree"] = degree
    return inst


# --- ladder formulas -------------------------------------------------------


@dataclass
class LadderParams:
    n: int                 # power of two >= 4
    graph: Graph           # exactly n-1 edges
    labelling: Labelling   # odd

    def __post_init__(self):
        if self.n < 4 or self.n & (self.n - 1) != 0:
            raise ValueError("n must be a power of two >= 4")
        if len(self.graph.edges) != self.n - 1:
            raise ValueError(
                f"graph must have n-1={self.n - 1} edges, got {len(self.graph.edges)}"
            )
        if self.labelling.parity() != 1:
            raise ValueError("labelling must have odd parity")

    @property
    def log_n(self) -> int:
        return self.n.bit_length() - 1


def _bit(i: int, m: int) -> int:
    """m-th bit (1-based, least significant first) of i."""
    return (i >> (m - 1)) & 1


def ladder(params: LadderParams) -> CnfInstance:
    """Satisfiable trapdoor family around an embedded parity instance.

    Clause database order: (a) per-position pair clauses guarded by one
    selector literal each, (b) parity clauses guarded by the full selector
    pattern of each position, (c) cross-position equality clauses guarded by
    the all-ones selector pattern.  Exactly two total assignments satisfy
    the result: all selectors 1 and all block variables equal.
    """
    n, logn = params.n, params.log_n
    num_blocks = n - 1

    def lvar(i: int, j: int) -> int:  # i in 0..n-2, j in 1..logn
        return 1 + i * logn + (j - 1)

    def cvar(m: int) -> int:  # m in 1..logn
        return num_blocks * logn + m

    formula = CnfFormula(num_blocks * logn + logn)

    # (a) mixed block i forces the selectors to spell out i:
    #     (l_{ i,j } v -l_{ i,k } v c_m-or-its-negation) per ordered pair, per bit
    for i in range(num_blocks):
        for j in range(1, logn + 1):
            for k in range(1, logn + 1):
                if k == j:
                    continue
                for m in range(1, logn + 1):
                    c_lit = cvar(m) if _bit(i, m) == 1 else -cvar(m)
                    formula.add_clause(Clause((lvar(i, j), -lvar(i, k), c_lit)))

    # (b) selector pattern i forces the parity constraints on slot-1 variables
    edge_vars = [lvar(e, 1) for e in range(num_blocks)]
    parity_part = parity_clauses(params.graph, params.labelling, edge_vars)
    for i in range(num_blocks):
        prefix = tuple(
            -cvar(m) if _bit(i, m) == 1 else cvar(m) for m in range(1, logn + 1)
        )
        for t in parity_part:
            formula.add_clause(Clause(prefix + t.lits))

    # (c) all-ones selector forces every block variable equal
    #     (diagonal pairs skipped: they would be tautologies)
    neg_c = tuple(-cvar(m) for m in range(1, logn + 1))
    for i in range(num_blocks):
        for j in range(1, logn + 1):
            for p in range(num_blocks):
                for q in range(1, logn + 1):
                    if i == p and j == q:
                        continue
                    formula.add_clause(Clause(neg_c + (lvar(i, j), -lvar(p, q))))

    return CnfInstance(
        formula,
        family="ladder",
        parameters={
            "n": n,
            "log_n": logn,
            "labelling": "".join(str(b) for b in params.labelling.values),
            "graph": _edges_str(params.graph),
        },
        backdoors={"c-vars": [cvar(m) for m in range(1, logn + 1)]},
        expected_status="SAT",
    )


def make_ladder(n: int, degree: int = 4, seed: int = 0,
                expansion_min: float | None = 1.0) -> CnfInstance:
    """Build a ladder instance on a sampled near-regular graph with n-1 edges."""
    graph = _sample_graph(
        lambda s: near_regular_graph(n - 1, degree, s), seed, expansion_min
    )
    labelling = odd_labelling(graph, seed)
    inst = ladder(LadderParams(n, graph, labelling))
    inst.parameters["seed"] = seed
    inst.parameters["degree"] = degree
    return inst


def ladder_c_first_script(instance: CnfInstance) -> list[int]:
    """Variable order that probes the selector variables before anything else."""
    if instance.family != "ladder":
        raise ValueError("expected a ladder instance")
    c_vars = instance.backdoors["c-vars"]
    rest = [v for v in range(1, instance.formula.num_variables + 1) if v not in set(c_vars)]
    return list(c_vars) + rest


# --- pitfall formulas ------------------------------------------------------


@dataclass
class PitfallParams:
    k: int                 # number of blocks
    graph: Graph           # constant-degree graph on n vertices, m edges
    labelling: Labelling   # odd

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.labelling.parity() != 1:
            raise ValueError("labelling must have odd parity")
        n = self.graph.num_vertices
        if n < 2 * self.k + 2:
            raise ValueError(
                f"need n >= 2k+2 = {2 * self.k + 2} vertices, got {n}"
            )
        if max(self.graph.degrees()) > MAX_XOR_ARITY:
            raise ValueError("graph degree exceeds XOR cap")


def pitfall(params: PitfallParams) -> CnfInstance:
    """Unsatisfiable family with pitfall gadgets and a small strong backdoor.

    Six clause families per the construction; the backdoor "V" holds the
    first 2k+2 trap variables of every block (size 2k(k+1)).
    """
    k = params.k
    n = params.graph.num_vertices
    m = len(params.graph.edges)
    block_size = 2 * m + 3 * n + 3

    def base(j: int) -> int:  # j in 1..k
        return (j - 1) * block_size

    def x(j: int, i: int) -> int:  # i in 1..m
        return base(j) + i

    def y(j: int, i: int) -> int:  # i in 1..n
        return base(j) + m + i

    def z(j: int, i: int) -> int:  # i in 1..n
        return base(j) + m + n + i

    def p(j: int, i: int) -> int:  # i in 1..m+n
        return base(j) + m + 2 * n + i

    def a(j: int, t: int) -> int:  # t in 1..3
        return base(j) + 2 * m + 3 * n + t

    formula = CnfFormula(k * block_size)

    # (1) per-vertex parity over X_j, escaped by the whole Z_j block
    for j in range(1, k + 1):
        edge_vars = [x(j, e + 1) for e in range(m)]
        z_tail = tuple(z(j, i) for i in range(1, n + 1))
        for t in parity_clauses(params.graph, params.labelling, edge_vars):
            formula.add_clause(Clause(t.lits + z_tail))

    # (2) any two zero trap variables in a block zero out the whole P_j block
    for j in range(1, k + 1):
        for i1 in range(1, n + 1):
            for i2 in range(i1 + 1, n + 1):
                for i3 in range(1, m + n + 1):
                    formula.add_clause(Clause((y(j, i1), y(j, i2), -p(j, i3))))

    # (3) x-chain: with P_j zeroed, forces X_j to all-zero in index order
    for j in range(1, k + 1):
        for i1 in range(1, n + 1):
            for i2 in range(1, m + 1):
                lits = [y(j, i1)]
                lits.extend(p(j, i) for i in range(1, m + n + 1) if i != i2)
                lits.extend(x(j, i) for i in range(1, i2))
                lits.append(-x(j, i2))
                formula.add_clause(Clause(lits))

    # (4) z-chain: likewise forces Z_j to all-zero; the last link skips z_1
    for j in range(1, k + 1):
        for i1 in range(1, n + 1):
            for i2 in range(1, n + 1):
                lits = [y(j, i1)]
                lits.extend(p(j, i) for i in range(1, m + n + 1) if i != m + i2)
                lits.extend(x(j, i) for i in range(1, m + 1))
                start = 2 if i2 == n else 1
                lits.extend(z(j, i) for i in range(start, i2))
                lits.append(-z(j, i2))
                formula.add_clause(Clause(lits))

    # (5) pitfall gadget: a set z together with a set y is contradictory
    for j in range(1, k + 1):
        for i1 in range(1, n + 1):
            formula.add_clause(Clause((-a(j, 1), a(j, 3), -z(j, i1))))
            formula.add_clause(Clause((-a(j, 2), -a(j, 3), -z(j, i1))))
        for i1 in range(1, n + 1):
            for i2 in range(1, n + 1):
                formula.add_clause(Clause((a(j, 1), -z(j, i1), -y(j, i2))))
                formula.add_clause(Clause((a(j, 2), -z(j, i1), -y(j, i2))))

    # (6) for each odd index, some block must zero one of two adjacent traps
    for i in range(1, n + 1, 2):
        if i + 1 > n:
            break
        lits = []
        for j in range(1, k + 1):
            lits.append(-y(j, i))
            lits.append(-y(j, i + 1))
        formula.add_clause(Clause(lits))

    backdoor = [y(j, i) for j in range(1, k + 1) for i in range(1, 2 * k + 3)]
    return CnfInstance(
        formula,
        family="pitfall",
        parameters={
            "k": k,
            "num_vertices": n,
            "num_edges": m,
            "block_size": block_size,
            "labelling": "".join(str(b) for b in params.labelling.values),
            "graph": _edges_str(params.graph),
        },
        backdoors={"V": backdoor},
        expected_status="UNSAT",
    )


def make_pitfall(k: int, n: int, degree: int = 3, seed: int = 0,
                 expansion_min: float | None = 1.0) -> CnfInstance:
    graph = _sample_graph(
        lambda s: random_regular_graph(n, degree, s), seed, expansion_min
    )
    labelling = odd_labelling(graph, seed)
    inst = pitfall(PitfallParams(k, graph, labelling))
    inst.parameters["seed"] = seed
    inst.parameters["degree"] = degree
    return inst


# --- random k-CNF ----------------------------------------------------------


def random_kcnf(num_vars: int, num_clauses: int, k: int = 3, seed: int = 0) -> CnfInstance:
    """Uniform random k-CNF: k distinct variables per clause, random signs."""
    if num_vars < k:
        raise ValueError("need at least k variables")
    rng = random.Random(seed)
    formula = CnfFormula(num_vars)
    population = range(1, num_vars + 1)
    for _ in range(num_clauses):
        variables = rng.sample(population, k)
        formula.add_clause(
            Clause(v if rng.getrandbits(1) else -v for v in variables)
        )
    return CnfInstance(
        formula,
        family="raw",
        parameters={"num_vars": num_vars, "num_clauses": num_clauses, "k": k, "seed": seed},
        expected_status="unknown",
    )


def _sample_graph(build, seed: int, expansion_min: float | None) -> Graph:
    # resample with shifted seeds until the measured expansion clears the bar
    for attempt in range(50):
        graph = build(seed + 1000 * attempt)
        if expansion_min is None:
            return graph
        if graph.num_vertices > 24:
            return graph  # estimate only; accept as-is
        if edge_expansion(graph).value >= expansion_min:
            return graph
    raise RuntimeError(f"no graph with expansion >= {expansion_min} after 50 samples")


def _edges_str(graph: Graph) -> str:
    return ";".join(f"{u}-{w}" for u, w in graph.edges)
