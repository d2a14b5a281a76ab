"""Expander-ish graph generation and measurement.

Graphs are multigraphs without self-loops.  The edge list order is fixed:
edge index e is the parity-constraint variable index, so generators must
never reorder edges after construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

DEFAULT_RETRIES = 200
EXACT_EXPANSION_LIMIT = 24
_EXPANSION_SAMPLES = 20000


@dataclass
class Graph:
    num_vertices: int
    edges: list[tuple[int, int]] = field(default_factory=list)

    def __post_init__(self):
        for u, w in self.edges:
            if u == w:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= w < self.num_vertices):
                raise ValueError(f"edge ({u},{w}) endpoint out of range")

    def degrees(self) -> list[int]:
        deg = [0] * self.num_vertices
        for u, w in self.edges:
            deg[u] += 1
            deg[w] += 1
        return deg

    def incident_edges(self) -> list[list[int]]:
        """Edge indices incident to each vertex, in edge order."""
        inc: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for e, (u, w) in enumerate(self.edges):
            inc[u].append(e)
            inc[w].append(e)
        return inc

    def is_connected(self) -> bool:
        if self.num_vertices == 0:
            return True
        adj: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for u, w in self.edges:
            adj[u].append(w)
            adj[w].append(u)
        seen = [False] * self.num_vertices
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(w)
        return count == self.num_vertices


@dataclass
class Labelling:
    """A 0/1 vertex labelling; values[v] is the label of vertex v."""

    values: list[int]

    def parity(self) -> int:
        return sum(self.values) % 2


def random_regular_graph(num_vertices: int, degree: int, seed: int) -> Graph:
    """Random d-regular multigraph via the pairing (configuration) model.

    Tries to sample a simple connected graph first; after the retry budget,
    multi-edges are permitted but disconnected samples are still rejected.
    Deterministic for a fixed seed.
    """
    if degree < 3:
        raise ValueError("degree must be >= 3")
    if num_vertices <= degree:
        raise ValueError("need num_vertices > degree")
    if (num_vertices * degree) % 2 != 0:
        raise ValueError("num_vertices * degree must be even (handshake lemma)")
    stub_counts = [degree] * num_vertices
    return _pair_stubs(stub_counts, seed)


def near_regular_graph(num_edges: int, degree: int, seed: int) -> Graph:
    """Connected multigraph with exactly num_edges edges and near-equal degrees.

    Exact d-regularity is arithmetically impossible for most edge counts, so
    vertex degrees are degree or degree+1, chosen to consume exactly
    2*num_edges stubs.  Used for formula families that pin the edge count.
    """
    if num_edges < 1:
        raise ValueError("need at least one edge")
    if degree < 2:
        raise ValueError("degree must be >= 2")
    num_vertices = max(2, (2 * num_edges) // degree)
    base, extra = divmod(2 * num_edges, num_vertices)
    stub_counts = [base + 1 if v < extra else base for v in range(num_vertices)]
    return _pair_stubs(stub_counts, seed)


def _pair_stubs(stub_counts: list[int], seed: int) -> Graph:
    rng = random.Random(seed)
    num_vertices = len(stub_counts)
    if sum(stub_counts) % 2 != 0:
        raise ValueError("stub counts must sum to an even number")
    for attempt in range(DEFAULT_RETRIES * 2):
        allow_multi = attempt >= DEFAULT_RETRIES
        stubs = [v for v in range(num_vertices) for _ in range(stub_counts[v])]
        rng.shuffle(stubs)
        edges = []
        used = set()
        ok = True
        for i in range(0, len(stubs), 2):
            u, w = stubs[i], stubs[i + 1]
            if u == w:
                ok = False
                break
            pair = (u, w) if u < w else (w, u)
            if not allow_multi and pair in used:
                ok = False
                break
            used.add(pair)
            edges.append(pair)
        if not ok:
            continue
        graph = Graph(num_vertices, edges)
        if graph.is_connected():
            return graph
    raise RuntimeError(
        f"could not sample a connected graph for degrees {stub_counts} "
        f"within {DEFAULT_RETRIES * 2} attempts"
    )


@dataclass
class ExpansionEstimate:
    value: Fraction
    exact: bool


def edge_expansion(graph: Graph) -> ExpansionEstimate:
    """Edge expansion e(G) = min over nonempty V', |V'| <= |V|/2, of cut/|V'|.

    Exhaustive for |V| <= 24; larger graphs get a sampled estimate flagged
    as approximate (an upper bound on the true minimum).
    """
    n = graph.num_vertices
    if n < 2:
        raise ValueError("expansion needs at least two vertices")
    # bitmask per edge for O(1) cut tests
    edge_masks = [(1 << u, 1 << w) for u, w in graph.edges]
    if n <= EXACT_EXPANSION_LIMIT:
        subsets = range(1, 1 << n)
        exact = True
    else:
        rng = random.Random(0xE0)
        subsets = (rng.getrandbits(n) for _ in range(_EXPANSION_SAMPLES))
        exact = False
    half = n // 2
    best: Fraction | None = None
    for mask in subsets:
        if mask == 0:
            continue
        size = bin(mask).count("1")
        if size > half:
            continue
        cut = 0
        for mu, mw in edge_masks:
            if bool(mask & mu) != bool(mask & mw):
                cut += 1
        ratio = Fraction(cut, size)
        if best is None or ratio < best:
            best = ratio
    if best is None:
        raise RuntimeError("no candidate subset sampled")
    return ExpansionEstimate(best, exact)


def odd_labelling(graph: Graph, seed: int) -> Labelling:
    """Random vertex labelling with odd total parity; deterministic per seed."""
    if graph.num_vertices < 1:
        raise ValueError("need at least one vertex")
    rng = random.Random(seed)
    values = [rng.randint(0, 1) for _ in range(graph.num_vertices)]
    if sum(values) % 2 == 0:
        flip = rng.randrange(graph.num_vertices)
        values[flip] ^= 1
    return Labelling(values)


def even_labelling(graph: Graph, seed: int) -> Labelling:
    """Random labelling with even parity (the satisfiable counterpart)."""
    lab = odd_labelling(graph, seed)
    flip = random.Random(seed ^ 0x5EED).randrange(graph.num_vertices)
    lab.values[flip] ^= 1
    return lab


# --- serialization: "v <count>" then one "e <u> <w>" line per edge --------


def write_graph(graph: Graph) -> str:
    lines = [f"v {graph.num_vertices}"]
    lines.extend(f"e {u} {w}" for u, w in graph.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    num_vertices = None
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v":
            num_vertices = int(parts[1])
        elif parts[0] == "e":
            edges.append((int(parts[1]), int(parts[2])))
        else:
            raise ValueError(f"bad graph line {line!r}")
    if num_vertices is None:
        raise ValueError("missing vertex count line")
    return Graph(num_vertices, edges)
