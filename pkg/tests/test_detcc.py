from __future__ import annotations

import itertools
from functools import lru_cache

import pytest
from hypothesis import given
from hypothesis import strategies as st

from krwlab.boolcore import AND, NEG_INF, OR, XOR, TruthTable, all_functions, projection
from krwlab.detcc import (
    BudgetExceeded, ProtocolNode, ProtocolTree, RectangleGame, SearchBudget, check_subadditivity, exact_cc,
    exact_protocol_size, find_fortified_subset, formula_complexity_rect, formula_oracle, is_fortified,
    obvious_protocol, subset_complexities, validate_protocol,
)
from krwlab.relations import compose_standard, compose_strong, kw, kw_rectangle

NONCONST2 = [f for f in all_functions(2) if not f.is_constant]


def _naive_solvers(A, B, m):
    """Plain recursion over subsets; no pruning, no bit tricks."""
    def common(X, Y):
        return any(all(((x ^ y) >> (m - 1 - i)) & 1 for x in X for y in Y) for i in range(m))

    def splits(S):
        S = sorted(S)
        for r in range(1, len(S)):
            for part in itertools.combinations(S[1:], r - 1):
                left = frozenset((S[0],) + part)
                yield left, frozenset(S) - left

    @lru_cache(maxsize=None)
    def cc(X, Y):
        if common(X, Y):
            return 0
        best = 99
        for L, R in splits(X):
            best = min(best, 1 + max(cc(L, Y), cc(R, Y)))
        for L, R in splits(Y):
            best = min(best, 1 + max(cc(X, L), cc(X, R)))
        return best

    @lru_cache(maxsize=None)
    def size(X, Y):
        if common(X, Y):
            return 1
        best = 10 ** 6
        for L, R in splits(X):
            best = min(best, size(L, Y) + size(R, Y))
        for L, R in splits(Y):
            best = min(best, size(X, L) + size(X, R))
        return best

    X, Y = frozenset(A), frozenset(B)
    return cc(X, Y), size(X, Y)


@pytest.mark.parametrize("f, cc, size", [(AND(2), 1, 2), (XOR(2), 2, 4), (OR(2), 1, 2)], ids=str)
def test_kw_values(f, cc, size):
    assert exact_cc(kw(f)) == cc
    assert exact_protocol_size(kw(f)) == size


def test_monochromatic_relation():
    rel = kw_rectangle([0b11], [0b00, 0b01], 2)
    assert exact_cc(rel) == 0
    assert exact_protocol_size(rel) == 1


@st.composite
def rectangles(draw):
    m = draw(st.integers(2, 3))
    pts = draw(st.lists(st.integers(0, (1 << m) - 1), min_size=2, max_size=6, unique=True))
    k = draw(st.integers(1, len(pts) - 1))
    return pts[:k], pts[k:], m


@given(rectangles())
def test_game_matches_naive_recursion(rect):
    A, B, m = rect
    L, D = formula_complexity_rect(A, B, m)
    assert (D, L) == _naive_solvers(A, B, m)


def test_formula_complexity_rect_edge_cases():
    assert formula_complexity_rect([], [1], 2) == (0, NEG_INF)
    assert formula_complexity_rect([1], [], 2) == (0, NEG_INF)
    assert formula_complexity_rect([0b01], [0b00], 2) == (1, 0)
    x = XOR(2)
    assert formula_complexity_rect(x.ones(), x.zeros(), 2) == (4, 2)


@pytest.mark.parametrize("f, L, D", [
    (projection(2, 0), 1, 0), (AND(2), 2, 1), (XOR(2), 4, 2), (TruthTable(2, 0), 0, NEG_INF),
    (XOR(3), 10, 4),
], ids=str)
def test_formula_oracle(f, L, D):
    got = formula_oracle(f)
    assert (got.L, got.D, got.status) == (L, D, "exact")


@pytest.mark.parametrize("f", list(all_functions(2)), ids=str)
def test_kw_connection_two_bits(f):
    o = formula_oracle(f)
    assert formula_complexity_rect(f.ones(), f.zeros(), 2) == (o.L, o.D)


def test_oracle_limits():
    with pytest.raises(ValueError):
        formula_oracle(XOR(4))
    assert formula_oracle(XOR(3), size_cap=4).status == "unknown"


def test_validator_accepts_single_leaf():
    rel = kw_rectangle([0b11], [0b00, 0b01], 2)
    tree = ProtocolTree(ProtocolNode(rel.full_x, rel.full_y, output=0), 1, 2)
    assert validate_protocol(tree, rel).ok


def test_validator_flags_wrong_leaf():
    rel = kw(XOR(2))
    tree = ProtocolTree(ProtocolNode(rel.full_x, rel.full_y, output=0), 2, 2)
    rep = validate_protocol(tree, rel)
    assert not rep.ok and "wrong" in rep.errors[0]


def test_validator_flags_bad_partition():
    rel = kw(AND(2))
    good = RectangleGame(rel).min_depth_protocol()
    bad = ProtocolTree.from_json(good.to_json())
    bad.root.children[0].ys = bad.root.ys
    assert not validate_protocol(bad, rel).ok


@pytest.mark.parametrize("f", NONCONST2 + [XOR(3), TruthTable.from_hex(3, "e8")], ids=str)
def test_min_depth_protocol_is_valid_and_optimal(f):
    rel = kw(f)
    p = RectangleGame(rel).min_depth_protocol()
    assert validate_protocol(p, rel).ok
    assert p.depth == exact_cc(rel)
    assert ProtocolTree.from_json(p.to_json()).to_json() == p.to_json()


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        RectangleGame(kw(XOR(3)), SearchBudget(max_side=2))


def test_obvious_protocol_and_and():
    f = g = AND(2)
    pf = pg = RectangleGame(kw(f)).min_depth_protocol()
    tree = obvious_protocol(f, g, pf, pg)
    assert tree.depth <= 2 and tree.depth == pf.depth + pg.depth
    assert validate_protocol(tree, compose_standard(f, g)).ok
    assert validate_protocol(tree, compose_strong(f, g)).ok


@pytest.mark.parametrize("f", NONCONST2, ids=str)
def test_obvious_upper_bound(f):
    pf = RectangleGame(kw(f)).min_depth_protocol()
    for g in NONCONST2:
        pg = RectangleGame(kw(g)).min_depth_protocol()
        tree = obvious_protocol(f, g, pf, pg)
        assert validate_protocol(tree, compose_strong(f, g)).ok
        assert exact_cc(compose_standard(f, g)) <= pf.depth + pg.depth


def test_subadditivity_examples():
    x = XOR(2)
    assert check_subadditivity(x.ones(), x.zeros(), x.ones(), 2).holds
    rep = check_subadditivity(x.ones(), x.zeros(), [x.ones()[0]], 2)
    assert rep.whole == 4 and rep.parts == (2, 2)


@given(rectangles(), st.data())
def test_subadditivity_random(rect, data):
    A, B, m = rect
    part = data.draw(st.lists(st.sampled_from(A), unique=True))
    assert check_subadditivity(A, B, part, m).holds


def test_fortification_examples():
    assert is_fortified([5], [0, 1], 1.0, 3)
    assert is_fortified([0, 1, 6], [2, 3, 4], 0.0, 3)
    assert not is_fortified([0, 1, 6], [2, 3, 4], 1.0, 3)
    assert subset_complexities([0, 1, 6], [2, 3, 4], 3) == [0, 2, 2, 2, 2, 4, 4, 4]


def test_find_fortified_subset_examples():
    x = XOR(2)
    res = find_fortified_subset(x.ones(), x.zeros(), 1 / 8, 2)
    assert res.subset == (1, 2) and res.L_subset == 4 and res.quarter_guarantee
    single = find_fortified_subset([3], [0, 1], 1 / 8, 2)
    assert single.subset == (3,)


@given(rectangles(), st.sampled_from(["A", "B"]))
def test_fortified_subset_quarter(rect, side):
    A, B, m = rect
    res = find_fortified_subset(A, B, 1 / (4 * m), m, side)
    assert 4 * res.L_subset >= res.L_whole
