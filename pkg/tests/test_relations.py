from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from krwlab.boolcore import AND, OR, XOR, TruthTable, all_functions, apply_rowwise, bit, matrix_from_rows
from krwlab.relations import (
    BOTTOM, MuxInput, compose_standard, compose_strong, descriptor_hash, kw, kw_rectangle, mux, mux_compose,
    relation_from_descriptor,
)

NONCONST2 = [f for f in all_functions(2) if not f.is_constant]


def _differ(x, y, m):
    return [i for i in range(m) if bit(x, i, m) != bit(y, i, m)]


@pytest.mark.parametrize("A, B, valid", [
    ([0b11], [0b00], [0, 1]),
    ([0b10], [0b01], [0, 1]),
    ([0b10], [0b00], [0]),
])
def test_kw_rectangle_outputs(A, B, valid):
    rel = kw_rectangle(A, B, 2)
    assert rel.valid_outputs(A[0], B[0]) == valid


def test_kw_matches_rectangle_of_preimages():
    f = AND(2)
    a, b = kw(f), kw_rectangle(f.ones(), f.zeros(), 2)
    assert a.x_domain == b.x_domain and a.y_domain == b.y_domain
    assert (a.masks == b.masks).all()


def test_kw_rejects_bad_input():
    with pytest.raises(ValueError):
        kw_rectangle([1], [1], 2)
    with pytest.raises(ValueError):
        kw_rectangle([], [1], 2)
    with pytest.raises(ValueError):
        kw(TruthTable(2, 0))


@given(st.sampled_from([f for n in (1, 2, 3) for f in all_functions(n) if not f.is_constant]))
def test_kw_predicate(f):
    rel = kw(f)
    m = f.arity
    for x in rel.x_domain:
        for y in rel.y_domain:
            assert rel.valid_outputs(x, y) == _differ(x, y, m)


def test_strong_composition_example():
    f, g = AND(2), OR(2)
    X, Y = matrix_from_rows([[1, 0], [0, 1]]), matrix_from_rows([[0, 0], [0, 1]])
    strong, std = compose_strong(f, g), compose_standard(f, g)
    assert strong.valid_outputs(X, Y) == [(0, 0)]
    assert set(std.valid_outputs(X, Y)) >= {(0, 0)}


def _composition_oracle(f, g, X, Y, strong):
    m, n = f.arity, g.arity
    out = []
    for i in range(m):
        if strong and g(X[i]) == g(Y[i]):
            continue
        out += [(i, j) for j in range(n) if bit(X[i], j, n) != bit(Y[i], j, n)]
    return out


@pytest.mark.parametrize("f", NONCONST2, ids=str)
def test_composition_inclusion_and_oracle(f):
    strictly_more = False
    for g in NONCONST2:
        strong, std = compose_strong(f, g), compose_standard(f, g)
        assert set(std.x_domain).isdisjoint(std.y_domain)
        for X in strong.x_domain:
            for Y in strong.y_domain:
                s, t = strong.valid_outputs(X, Y), std.valid_outputs(X, Y)
                assert s == _composition_oracle(f, g, X, Y, True)
                assert t == _composition_oracle(f, g, X, Y, False)
                assert set(s) <= set(t)
                strictly_more |= len(t) > len(s)
    assert strictly_more


def test_xor_xor_strong_is_total():
    rel = compose_strong(XOR(2), XOR(2))
    assert (rel.masks != 0).all()


def test_mux_examples():
    rel = mux(2)
    x, y = MuxInput(XOR(2), 0b10), MuxInput(XOR(2), 0b00)
    assert rel.valid_outputs(x, y) == [0]
    u, v = MuxInput(OR(2), 0b00), MuxInput(AND(2), 0b00)
    assert rel.valid_outputs(u, v) == [BOTTOM]


def test_mux_total_and_bottom_rule():
    rel = mux(2)
    for u in rel.x_domain:
        for v in rel.y_domain:
            out = rel.valid_outputs(u, v)
            assert out
            assert (BOTTOM in out) == (u.function != v.function)


@pytest.mark.parametrize("f", [AND(2), XOR(2)], ids=str)
def test_mux_compose_properties(f):
    strong, std = mux_compose(f, 2, strong=True), mux_compose(f, 2, strong=False)
    for u in strong.x_domain:
        for v in strong.y_domain:
            s, t = strong.valid_outputs(u, v), std.valid_outputs(u, v)
            assert s and set(s) <= set(t)
            if u.function == v.function:
                assert BOTTOM not in s and s
            a, b = apply_rowwise(u.function, u.payload), apply_rowwise(v.function, v.payload)
            assert f(a) == 1 and f(b) == 0


def test_mux_compose_budget():
    with pytest.raises(ValueError):
        mux_compose(AND(2), 3, strong=True)


@pytest.mark.parametrize("rel", [
    kw(XOR(2)), kw_rectangle([1, 2], [0, 3], 2), compose_strong(AND(2), OR(2)),
    compose_standard(XOR(2), AND(2)), mux(2), mux_compose(AND(2), 2, strong=True),
], ids=lambda r: r.kind)
def test_descriptor_roundtrip(rel):
    back = relation_from_descriptor(rel.descriptor())
    assert back.kind == rel.kind
    assert back.x_domain == rel.x_domain and back.y_domain == rel.y_domain
    assert (back.masks == rel.masks).all()
    assert back.content_hash() == rel.content_hash() == descriptor_hash(rel.descriptor())


def test_descriptor_hash_is_canonical():
    assert descriptor_hash({"a": 1, "b": 2}) == descriptor_hash({"b": 2, "a": 1})
    assert kw(AND(2)).content_hash() != kw(OR(2)).content_hash()


def test_entry_masks_cover_all_cells():
    rel = compose_standard(AND(2), AND(2))
    for X, Y in itertools.product(rel.x_domain, rel.y_domain):
        assert len(rel.valid_outputs(X, Y)) == sum(bin(a ^ b).count("1") for a, b in zip(X, Y))
