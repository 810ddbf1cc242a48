from __future__ import annotations

import itertools
import math

import pytest

from krwlab.boolcore import AND, XOR, balanced_functions
from krwlab.detcc import ProtocolNode, ProtocolTree, RectangleGame, validate_protocol
from krwlab.halfduplex import (
    CLASSICAL, R0, R1, RECV, S0, SILENT, ExplicitHDTree, HDProtocol, HDTree, consistent_inputs, execute_all,
    hardwire, hd_to_text, is_partially_hd, lift_standard, pad_to_depth, reduction_transform, solves, validate_hd,
)
from krwlab.relations import BOTTOM, compose_strong, kw, kw_rectangle, mux_compose
from krwlab.suites import reduction_protocols


def _kw_protocol(f):
    rel = kw(f)
    return rel, RectangleGame(rel).min_depth_protocol()


def _run_standard(tree: ProtocolTree, x: int, y: int):
    v = tree.root
    while v.children is not None:
        side = v.children[1].xs if v.owner == "A" else v.children[1].ys
        v = v.children[(side >> (x if v.owner == "A" else y)) & 1]
    return v.output


class _RaggedTree(HDTree):
    """Single-input tree given by an action table; leaves may sit at any depth."""

    def __init__(self, depth, actions, leaves):
        self.depth, self.domain_size = depth, 1
        self.actions, self.leaves = actions, leaves

    def is_leaf(self, path):
        return path in self.leaves or len(path) >= self.depth

    def action(self, x, path):
        return self.actions.get(path)

    def output(self, path):
        return self.leaves.get(path, "o")


@pytest.mark.parametrize("f", [AND(2), XOR(2)], ids=str)
def test_lift_standard_valid_and_classical(f):
    rel, p = _kw_protocol(f)
    hd = lift_standard(p)
    assert hd.depth == p.depth
    rep = validate_hd(hd, rel)
    assert rep.ok and rep.traces == rep.pairs
    for x, y in itertools.product(range(len(rel.x_domain)), range(len(rel.y_domain))):
        (tr,) = execute_all(hd, x, y)
        assert tr.all_classical
        assert tr.alice_output == _run_standard(p, x, y)


def test_lift_and_has_depth_one():
    rel, p = _kw_protocol(AND(2))
    assert lift_standard(p).depth == 1 and solves(lift_standard(p), rel)


def test_depth_zero_lift():
    rel = kw_rectangle([0b11], [0b00], 2)
    tree = ProtocolTree(ProtocolNode(1, 1, output=0), 1, 1)
    hd = lift_standard(tree)
    assert hd.depth == 0 and validate_hd(hd, rel).ok


def test_is_partially_hd_needs_function_inputs():
    rel, p = _kw_protocol(AND(2))
    with pytest.raises(ValueError):
        is_partially_hd(lift_standard(p), rel)


def test_mismatched_depths_flagged():
    a = ExplicitHDTree(1, 1, {(): 1, (S0,): 1}, {(S0,): 0})
    b = ExplicitHDTree(2, 1, {(): 1, (R0,): 1, (R1,): 1, (R0, S0): 1, (R1, S0): 1}, {})
    rep = validate_hd(HDProtocol(a, b))
    assert any("depths differ" in e for e in rep.errors)


def test_explicit_shallow_leaf_flagged():
    a = ExplicitHDTree(2, 1, {(): 1, (S0,): 1}, {(S0,): 0})
    assert any("leaf at depth 1" in e for e in validate_hd(HDProtocol(a, a)).errors)


def test_silent_round_with_ragged_leaves_flagged():
    alice = _RaggedTree(2, {(): RECV, (R1,): S0}, {(R0,): "early"})
    bob = _RaggedTree(2, {(): RECV, (R0,): S0, (R1,): S0}, {})
    traces = execute_all(HDProtocol(alice, bob), 0, 0)
    assert len(traces) == 4 and all(t.rounds[0].kind == SILENT for t in traces)
    assert sum(not t.simultaneous for t in traces) == 2
    assert any("different rounds" in e for e in validate_hd(HDProtocol(alice, bob)).errors)


def test_structure_errors():
    bad_root = ExplicitHDTree(1, 2, {(): 1, (S0,): 1}, {})
    assert any("root" in e for e in validate_hd(HDProtocol(bad_root, bad_root)).errors)
    uneven = ExplicitHDTree(1, 2, {(): 3, (R0,): 1, (R1,): 3}, {})
    assert any("receive children differ" in e for e in validate_hd(HDProtocol(uneven, uneven)).errors)


def test_trace_count_bounded_by_silent_rounds(and_reduction):
    rel, red = and_reduction
    for x in range(0, len(rel.x_domain), 7):
        for y in range(0, len(rel.y_domain), 11):
            traces = execute_all(red.protocol, x, y)
            k = max(sum(r.kind == SILENT for r in t.rounds) for t in traces)
            assert len(traces) <= 4 ** k
            if k == 0:
                assert len(traces) == 1


@pytest.mark.parametrize("fixture", ["and_reduction", "xor_reduction"])
def test_reduction_depth_and_validity(fixture, request):
    rel, red = request.getfixturevalue(fixture)
    m, n = 2, 2
    assert red.depth == red.c + math.ceil(math.log2(m * n)) + 3
    rep = validate_hd(red.protocol, rel)
    assert rep.ok, rep.errors[:3]
    assert is_partially_hd(red.protocol, rel)


def test_reduction_solves_and_bottom_rule(and_reduction):
    rel, red = and_reduction
    assert solves(red.protocol, rel)
    for x, u in enumerate(rel.x_domain):
        for y, v in enumerate(rel.y_domain):
            if u.function != v.function:
                continue
            for tr in execute_all(red.protocol, x, y):
                assert tr.alice_output != BOTTOM and tr.all_classical


def test_reduction_standard_variant_skips_row_bit():
    f = AND(2)
    rel = mux_compose(f, 2, strong=False)
    red = reduction_transform(reduction_protocols(f, 2, strong=False), f, 2, strong=False, relation=rel)
    assert (red.c, red.depth) == (3, 7)
    assert red.depth == red.c + math.ceil(math.log2(4)) + 2
    assert validate_hd(red.protocol, rel).ok


def test_unnormalized_reduction_is_not_partially_hd(and_reduction):
    rel, red = and_reduction
    raw = reduction_transform(red.protocols | reduction_protocols(AND(2), 2), AND(2), 2, normalize=False, relation=rel)
    assert validate_hd(raw.protocol, rel).ok
    assert not is_partially_hd(raw.protocol, rel)


def test_reduction_rejects_missing_protocol():
    f = AND(2)
    protos = reduction_protocols(f, 2)
    protos.pop(next(iter(protos)))
    with pytest.raises(ValueError):
        reduction_transform(protos, f, 2)


def test_consistency_empty_transcript_is_full(and_reduction):
    rel, red = and_reduction
    c = consistent_inputs(red.protocol, "")
    assert c.xs == rel.full_x and c.ys == rel.full_y


def test_consistency_monotone(and_reduction):
    _, red = and_reduction
    for k in range(4):
        for bits in itertools.product("01", repeat=k):
            pi = "".join(bits)
            outer = consistent_inputs(red.protocol, pi)
            for c in "01":
                inner = consistent_inputs(red.protocol, pi + c)
                assert inner.xs & ~outer.xs == 0 and inner.ys & ~outer.ys == 0


def test_vertex_uniqueness(and_reduction):
    _, red = and_reduction
    sets = red.protocol.alice.materialize()
    for k in range(4):
        for bits in itertools.product("01", repeat=k):
            pi = "".join(bits)
            c = consistent_inputs(red.protocol, pi)
            paths = [p for p in sets if len(p) == k and "".join(lab[1] for lab in p) == pi]
            for x, v in c.alice_vertex.items():
                holders = [p for p in paths if sets[p] >> x & 1]
                assert holders == [v]


def test_full_transcript_matches_standard_leaf():
    rel, p = _kw_protocol(XOR(2))
    hd = lift_standard(p)

    def leaves(v, pi):
        if v.children is None:
            yield pi, v
        else:
            for b in (0, 1):
                yield from leaves(v.children[b], pi + str(b))

    for pi, leaf in leaves(p.root, ""):
        c = consistent_inputs(hd, pi)
        assert (c.xs, c.ys) == (leaf.xs, leaf.ys)


@pytest.mark.parametrize("g", balanced_functions(2), ids=str)
def test_hardwire_gives_valid_standard_protocol(and_reduction, g):
    rel, red = and_reduction
    inner = compose_strong(AND(2), g)
    tree = hardwire(red.protocol, rel, g, inner)
    assert validate_protocol(tree, inner).ok
    assert tree.depth == red.depth


def test_pad_to_depth():
    rel, p = _kw_protocol(AND(2))
    padded = pad_to_depth(p, 3)
    assert padded.depth == 3 and validate_protocol(padded, rel).ok
    with pytest.raises(ValueError):
        pad_to_depth(padded, 2)


def test_hd_to_text():
    _, p = _kw_protocol(AND(2))
    text = hd_to_text(lift_standard(p))
    lines = text.splitlines()
    assert lines[0].startswith("A - ")
    assert any(ln.startswith("A r") for ln in lines) and any(ln.startswith("B s") for ln in lines)
    assert all(len(ln.split()) in (3, 4) for ln in lines)


def test_classical_round_kinds():
    _, p = _kw_protocol(XOR(2))
    for tr in execute_all(lift_standard(p), 0, 0):
        assert all(r.kind == CLASSICAL for r in tr.rounds)
        assert tr.to_dict()["simultaneous"]
