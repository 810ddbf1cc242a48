"""Rectangle covers (non-deterministic complexity), graph equality, and exact graph invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from .detcc import BudgetExceeded, iter_bits, popcount
from .reports import FAIL, PASS, VACUOUS, CheckReport

YES, NO, DONTCARE = 1, 0, -1

MAX_COVER_SIDE = 16
MAX_COLOR_VERTICES = 24


@dataclass(frozen=True)
class PromiseMatrix:
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        widths = {len(r) for r in self.cells}
        if len(widths) > 1:
            raise ValueError("ragged promise matrix")
        if any(c not in (YES, NO, DONTCARE) for r in self.cells for c in r):
            raise ValueError("cells must be yes, no, or dontcare")

    @classmethod
    def from_array(cls, arr) -> "PromiseMatrix":
        return cls(tuple(tuple(int(c) for c in row) for row in np.asarray(arr)))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.cells), (len(self.cells[0]) if self.cells else 0)

    def complement(self) -> "PromiseMatrix":
        flip = {YES: NO, NO: YES, DONTCARE: DONTCARE}
        return PromiseMatrix(tuple(tuple(flip[c] for c in r) for r in self.cells))

    def count(self, state: int) -> int:
        return sum(c == state for r in self.cells for c in r)

    @property
    def is_total(self) -> bool:
        return self.count(DONTCARE) == 0


def _maximal_rectangles(P: PromiseMatrix) -> list[tuple[int, int]]:
    rows, cols = P.shape
    allowed_cols = [sum(1 << j for j, c in enumerate(r) if c != NO) for r in P.cells]
    allowed_rows = [sum(1 << i for i in range(rows) if P.cells[i][j] != NO) for j in range(cols)]
    full_c = (1 << cols) - 1
    full_r = (1 << rows) - 1
    rects = set()
    for S in range(1, 1 << rows):
        C = full_c
        for i in iter_bits(S):
            C &= allowed_cols[i]
        if not C:
            continue
        R = full_r
        for j in iter_bits(C):
            R &= allowed_rows[j]
        if R == S:
            rects.add((S, C))
    return sorted(rects)


def min_set_cover(universe: int, sets: Sequence[int]) -> Optional[int]:
    """Exact minimum number of ``sets`` whose union is ``universe`` (None if impossible)."""
    sets = sorted({s & universe for s in sets if s & universe}, key=lambda s: -popcount(s))
    sets = [s for s in sets if not any(s != t and s | t == t for t in sets)]
    if _union(sets) != universe:
        return None
    containing: dict[int, list[int]] = {e: [s for s in sets if (s >> e) & 1] for e in iter_bits(universe)}
    biggest = max(popcount(s) for s in sets)
    best = [_greedy_cover(universe, sets)]

    def search(left: int, used: int) -> None:
        if not left:
            best[0] = min(best[0], used)
            return
        if used + math.ceil(popcount(left) / biggest) >= best[0]:
            return
        e = min(iter_bits(left), key=lambda e: len(containing[e]))
        for s in sorted(containing[e], key=lambda s: -popcount(s & left)):
            search(left & ~s, used + 1)

    search(universe, 0)
    return best[0]


def _greedy_cover(universe: int, sets: Sequence[int]) -> int:
    left, used = universe, 0
    while left:
        left &= ~max(sets, key=lambda s: popcount(s & left))
        used += 1
    return used


def _union(masks: Iterable[int]) -> int:
    u = 0
    for m in masks:
        u |= m
    return u


def min_rect_cover(P: PromiseMatrix) -> int:
    """Fewest rectangles free of no-cells covering every yes-cell."""
    rows, cols = P.shape
    if max(rows, cols) > MAX_COVER_SIDE:
        raise BudgetExceeded(f"promise matrix {rows}x{cols} exceeds side {MAX_COVER_SIDE}")
    yes_cells = [(i, j) for i in range(rows) for j in range(cols) if P.cells[i][j] == YES]
    if not yes_cells:
        return 0
    index = {c: k for k, c in enumerate(yes_cells)}
    sets = []
    for S, C in _maximal_rectangles(P):
        sets.append(sum(1 << index[(i, j)] for i in iter_bits(S) for j in iter_bits(C) if (i, j) in index))
    got = min_set_cover((1 << len(yes_cells)) - 1, sets)
    assert got is not None, "a yes cell is not coverable"
    return got


def ncc(P: PromiseMatrix) -> float:
    cover = min_rect_cover(P)
    return math.log2(cover) if cover else float("-inf")


# Graphs --------------------------------------------------------------------

@dataclass(frozen=True)
class SimpleGraph:
    n: int
    adj: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.adj) != self.n:
            raise ValueError("adjacency length differs from vertex count")
        for v, nb in enumerate(self.adj):
            if (nb >> v) & 1:
                raise ValueError(f"self-loop at {v}")
            for u in iter_bits(nb):
                if u >= self.n or not (self.adj[u] >> v) & 1:
                    raise ValueError(f"adjacency not symmetric at {v}-{u}")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "SimpleGraph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, tuple(adj))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in iter_bits(self.adj[u]) if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adj[u] >> v) & 1)

    def complement(self) -> "SimpleGraph":
        full = (1 << self.n) - 1
        return SimpleGraph(self.n, tuple(full & ~nb & ~(1 << v) for v, nb in enumerate(self.adj)))

    def to_networkx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n))
        G.add_edges_from(self.edges)
        return G

    @classmethod
    def from_networkx(cls, G: nx.Graph) -> "SimpleGraph":
        nodes = sorted(G.nodes)
        pos = {v: k for k, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((pos[u], pos[v]) for u, v in G.edges))

    def to_graph6(self) -> str:
        return nx.to_graph6_bytes(self.to_networkx(), header=False).decode().strip()

    @classmethod
    def from_graph6(cls, text: str) -> "SimpleGraph":
        return cls.from_networkx(nx.from_graph6_bytes(text.strip().encode()))

    def to_adjacency_text(self) -> str:
        return "\n".join(f"{v}: " + " ".join(map(str, iter_bits(nb))) for v, nb in enumerate(self.adj))

    @classmethod
    def from_adjacency_text(cls, text: str) -> "SimpleGraph":
        """Lines of the form ``v: u1 u2 ...``; every vertex needs a line."""
        lines = [ln for ln in (l.split("#")[0].strip() for l in text.splitlines()) if ln]
        nbrs: dict[int, list[int]] = {}
        for ln in lines:
            head, _, rest = ln.partition(":")
            nbrs[int(head)] = [int(t) for t in rest.replace(",", " ").split()]
        n = max(nbrs) + 1 if nbrs else 0
        if sorted(nbrs) != list(range(n)):
            raise ValueError("adjacency text must list vertices 0..n-1")
        return cls.from_edges(n, {tuple(sorted((u, v))) for u, vs in nbrs.items() for v in vs})


def parse_graph(text: str) -> SimpleGraph:
    return SimpleGraph.from_adjacency_text(text) if ":" in text else SimpleGraph.from_graph6(text)


def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def empty_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, (0,) * n)


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(n, ((v, (v + 1) % n) for v in range(n)))


def graph_eq(G: SimpleGraph) -> PromiseMatrix:
    return PromiseMatrix(tuple(
        tuple(YES if u == v else NO if G.has_edge(u, v) else DONTCARE for v in range(G.n))
        for u in range(G.n)
    ))


def graph_ineq(G: SimpleGraph) -> PromiseMatrix:
    return graph_eq(G).complement()


def max_clique(G: SimpleGraph) -> int:
    best = [0]

    def expand(size: int, cand: int) -> None:
        if not cand:
            best[0] = max(best[0], size)
            return
        if size + popcount(cand) <= best[0]:
            return
        # pivot on the candidate with most neighbours inside cand
        pivot = max(iter_bits(cand), key=lambda v: popcount(G.adj[v] & cand))
        for v in iter_bits(cand & ~G.adj[pivot]):
            expand(size + 1, cand & G.adj[v])
            cand &= ~(1 << v)
            if size + popcount(cand) <= best[0]:
                return

    expand(0, (1 << G.n) - 1)
    return best[0]


def chromatic_number(G: SimpleGraph) -> int:
    """DSATUR-ordered branch and bound, seeded with the clique lower bound."""
    n = G.n
    if n == 0:
        return 0
    if n > MAX_COLOR_VERTICES:
        raise BudgetExceeded(f"exact colouring limited to {MAX_COLOR_VERTICES} vertices")
    lower = max_clique(G)
    best = [n]
    colors = [-1] * n

    def pick() -> int:
        chosen, key = -1, (-1, -1)
        for v in range(n):
            if colors[v] >= 0:
                continue
            sat = len({colors[u] for u in iter_bits(G.adj[v]) if colors[u] >= 0})
            k = (sat, popcount(G.adj[v]))
            if k > key:
                chosen, key = v, k
        return chosen

    def search(colored: int, used: int) -> bool:
        if used >= best[0]:
            return False
        if colored == n:
            best[0] = used
            return used <= lower
        v = pick()
        taken = {colors[u] for u in iter_bits(G.adj[v]) if colors[u] >= 0}
        for c in range(min(used + 1, best[0] - 1)):
            if c in taken:
                continue
            colors[v] = c
            done = search(colored + 1, max(used, c + 1))
            colors[v] = -1
            if done:
                return True
        return False

    search(0, 0)
    return best[0]


def graph_invariants(G: SimpleGraph) -> tuple[int, int, int]:
    return chromatic_number(G), max_clique(G), max_clique(G.complement())


def verify_graph_eq_ncc(G: SimpleGraph) -> CheckReport:
    cover = min_rect_cover(graph_eq(G))
    chi = chromatic_number(G)
    return CheckReport("graph-eq-ncc", PASS if cover == chi else FAIL, {"cover": cover, "chi": chi})


INEQ_SOLVER_MAX_VERTICES = 8


def ineq_cover_from_chi(chi: int) -> int:
    """Exact GraphIneq cover size: least ``k`` with ``C(k, k//2) >= chi`` (0 when ``chi <= 1``).

    A ``k``-cover labels vertices by subsets of ``[k]`` with adjacent labels
    incomparable; splitting the subset lattice into ``C(k, k//2)`` chains turns
    such a labelling into a proper colouring, and an antichain of that size
    turns a colouring back into a labelling.
    """
    if chi <= 1:
        return 0
    k = 1
    while math.comb(k, k // 2) < chi:
        k += 1
    return k


def verify_graph_ineq_bounds(G: SimpleGraph, solver_max_vertices: int = INEQ_SOLVER_MAX_VERTICES) -> CheckReport:
    """Bracket check; the set-cover solver runs up to ``solver_max_vertices``, the chain formula beyond."""
    chi = chromatic_number(G)
    if G.n <= solver_max_vertices:
        cover, method = min_rect_cover(graph_ineq(G)), "solver"
        if cover != ineq_cover_from_chi(chi):
            return CheckReport("graph-ineq-bounds", FAIL, {"chi": chi, "cover": cover, "formula": ineq_cover_from_chi(chi)})
    else:
        cover, method = ineq_cover_from_chi(chi), "chain-formula"
    details = {"chi": chi, "cover": cover, "method": method}
    if chi < 2:
        return CheckReport("graph-ineq-bounds", VACUOUS, details)
    lo = math.log2(math.log2(chi))
    got = math.log2(cover)
    details.update(loglog_chi=lo, log_cover=got)
    ok = lo - 1e-9 <= got <= lo + 1 + 1e-9
    return CheckReport("graph-ineq-bounds", PASS if ok else FAIL, details)


def verify_ncc_vs_concc(P: PromiseMatrix) -> CheckReport:
    if not P.is_total:
        raise ValueError("count-form check needs a total matrix")
    c1 = min_rect_cover(P)
    c0 = min_rect_cover(P.complement())
    ok = c1 <= 2 ** c0
    return CheckReport("ncc-vs-concc", PASS if ok else FAIL, {"cover_yes": c1, "cover_no": c0})
