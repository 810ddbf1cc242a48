from __future__ import annotations

import itertools
import math
import random

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from krwlab.detcc import BudgetExceeded
from krwlab.ndcc import (
    DONTCARE, NO, YES, PromiseMatrix, SimpleGraph, chromatic_number, complete_graph, cycle_graph, empty_graph,
    graph_eq, graph_ineq, graph_invariants, ineq_cover_from_chi, max_clique, min_rect_cover, ncc, parse_graph,
    verify_graph_eq_ncc, verify_graph_ineq_bounds, verify_ncc_vs_concc,
)
from krwlab.reports import PASS, VACUOUS


def _brute_cover(P: PromiseMatrix) -> int:
    rows, cols = P.shape
    yes = {(i, j) for i in range(rows) for j in range(cols) if P.cells[i][j] == YES}
    if not yes:
        return 0
    rects = []
    for r in range(1, 1 << rows):
        for c in range(1, 1 << cols):
            cells = {(i, j) for i in range(rows) if r >> i & 1 for j in range(cols) if c >> j & 1}
            if all(P.cells[i][j] != NO for i, j in cells):
                rects.append(cells & yes)
    for k in range(1, len(yes) + 1):
        if any(set().union(*combo) == yes for combo in itertools.combinations(rects, k)):
            return k
    raise AssertionError("uncoverable")


def _brute_chi(G: SimpleGraph) -> int:
    for k in range(1, G.n + 1):
        for col in itertools.product(range(k), repeat=G.n):
            if all(col[u] != col[v] for u, v in G.edges):
                return k
    return 0


@st.composite
def graphs(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    keep = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return SimpleGraph.from_edges(n, [p for p, k in zip(pairs, keep) if k])


@st.composite
def promise_matrices(draw):
    r, c = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    cells = draw(st.lists(st.sampled_from([YES, NO, DONTCARE]), min_size=r * c, max_size=r * c))
    return PromiseMatrix(tuple(tuple(cells[i * c:(i + 1) * c]) for i in range(r)))


def test_cover_examples():
    assert min_rect_cover(PromiseMatrix(((YES, YES), (YES, YES)))) == 1
    eq4 = PromiseMatrix(tuple(tuple(YES if i == j else NO for j in range(4)) for i in range(4)))
    assert min_rect_cover(eq4) == 4
    assert ncc(eq4) == 2.0
    assert min_rect_cover(graph_eq(empty_graph(5))) == 1


@given(promise_matrices())
def test_cover_matches_bruteforce(P):
    assert min_rect_cover(P) == _brute_cover(P)


def test_cover_budget():
    big = PromiseMatrix(tuple((YES,) * 17 for _ in range(17)))
    with pytest.raises(BudgetExceeded):
        min_rect_cover(big)


def test_graph_eq_cells():
    k2 = graph_eq(complete_graph(2))
    assert k2.cells == ((YES, NO), (NO, YES))
    e = graph_eq(empty_graph(3))
    assert e.count(DONTCARE) == 6
    c5 = graph_eq(cycle_graph(5))
    assert (c5.count(YES), c5.count(NO), c5.count(DONTCARE)) == (5, 10, 10)
    assert graph_ineq(cycle_graph(5)).count(YES) == 10


@pytest.mark.parametrize("G, expected", [
    (complete_graph(3), (3, 3, 1)),
    (cycle_graph(5), (3, 2, 2)),
    (empty_graph(4), (1, 1, 4)),
    (SimpleGraph.from_networkx(nx.petersen_graph()), (3, 2, 4)),
], ids=["K3", "C5", "E4", "petersen"])
def test_graph_invariants(G, expected):
    assert graph_invariants(G) == expected


@given(graphs())
def test_invariants_match_bruteforce(G):
    assert chromatic_number(G) == _brute_chi(G)
    assert max_clique(G) == max((len(c) for c in nx.find_cliques(G.to_networkx())), default=0)


@given(graphs())
def test_graph_eq_cover_equals_chi(G):
    rep = verify_graph_eq_ncc(G)
    assert rep.status == PASS and rep.details["cover"] == rep.details["chi"]


def test_graph_eq_petersen_subgraphs():
    rng = random.Random(5)
    P = nx.petersen_graph()
    for _ in range(10):
        keep = [e for e in P.edges if rng.random() < 0.7]
        G = SimpleGraph.from_edges(10, keep)
        assert verify_graph_eq_ncc(G).passed


@pytest.mark.parametrize("G, chi, lo, hi", [
    (complete_graph(4), 4, 2, 4),
    (complete_graph(2), 2, 1, 2),
], ids=["K4", "K2"])
def test_graph_ineq_bracket_examples(G, chi, lo, hi):
    rep = verify_graph_ineq_bounds(G)
    assert rep.status == PASS and rep.details["chi"] == chi
    assert lo <= rep.details["cover"] <= hi
    assert rep.details["loglog_chi"] == math.log2(math.log2(chi))


def test_graph_ineq_edgeless_vacuous():
    assert verify_graph_ineq_bounds(empty_graph(4)).status == VACUOUS


@pytest.mark.parametrize("chi, k", [(1, 0), (2, 2), (3, 3), (4, 4), (6, 4), (7, 5), (10, 5), (11, 6)])
def test_ineq_cover_formula_values(chi, k):
    assert ineq_cover_from_chi(chi) == k


@given(graphs(max_n=6))
def test_ineq_cover_formula_matches_solver(G):
    assert min_rect_cover(graph_ineq(G)) == ineq_cover_from_chi(chromatic_number(G))


def test_ineq_uses_formula_on_large_graphs():
    rep = verify_graph_ineq_bounds(complete_graph(10))
    assert rep.details["method"] == "chain-formula" and rep.details["cover"] == 5 and rep.passed


def test_ncc_vs_concc_examples():
    eq4 = PromiseMatrix(tuple(tuple(YES if i == j else NO for j in range(4)) for i in range(4)))
    rep = verify_ncc_vs_concc(eq4)
    assert rep.details == {"cover_yes": 4, "cover_no": 4} and rep.passed
    assert verify_ncc_vs_concc(PromiseMatrix(((YES, YES),))).passed
    with pytest.raises(ValueError):
        verify_ncc_vs_concc(graph_eq(empty_graph(2)))


def test_ncc_vs_concc_random():
    rng = random.Random(11)
    for _ in range(20):
        P = PromiseMatrix(tuple(tuple(rng.choice((YES, NO)) for _ in range(6)) for _ in range(6)))
        assert verify_ncc_vs_concc(P).passed


@given(graphs(max_n=8))
def test_graph_formats_roundtrip(G):
    assert SimpleGraph.from_graph6(G.to_graph6()) == G
    assert parse_graph(G.to_adjacency_text()) == G


def test_graph_validation():
    with pytest.raises(ValueError):
        SimpleGraph(2, (2, 0))
    with pytest.raises(ValueError):
        SimpleGraph.from_edges(2, [(1, 1)])
    with pytest.raises(ValueError):
        SimpleGraph.from_adjacency_text("0: 2\n2: 0")
