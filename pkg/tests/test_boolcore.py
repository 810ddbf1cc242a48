from __future__ import annotations

import itertools
import math
from decimal import Decimal, getcontext

import pytest
from hypothesis import given
from hypothesis import strategies as st

from krwlab.boolcore import (
    AND, MAJ, OR, XOR, LinearCode, TruthTable, all_functions, apply_rowwise, balanced_functions, binary_entropy,
    binomial_entropy_bounds, bit, build_parity_formula, const, coset_of, cosets, eval_composition, find_linear_code,
    formula_table, matrix_from_rows, matrix_from_string, matrix_to_string, projection, repetition_code,
    row_preimage,
)


def test_hex_is_msb_first():
    assert AND(2).to_hex() == "8"
    assert XOR(2).to_hex() == "6"
    assert OR(2).to_hex() == "e"
    assert MAJ(3).to_hex() == "e8"
    assert str(XOR(2)) == "TT2:6"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hex_roundtrip(n):
    for f in all_functions(n):
        assert TruthTable.from_hex(n, f.to_hex()) == f


def test_projection_reads_coordinate_zero_as_msb():
    x1 = projection(2, 0)
    assert [x1(x) for x in range(4)] == [0, 0, 1, 1]


def test_balanced_counts():
    assert len(balanced_functions(2)) == math.comb(4, 2)
    assert len(balanced_functions(3)) == math.comb(8, 4)


@pytest.mark.parametrize("rows, expected", [
    ([[1, 0], [0, 0]], 0),
    ([[1, 0], [0, 1]], 1),
])
def test_composition_and_of_ors(rows, expected):
    assert eval_composition(AND(2), OR(2), matrix_from_rows(rows)) == expected


@pytest.mark.parametrize("f", list(all_functions(2)))
def test_composition_with_constant_one_inner(f):
    ones = f((1, 1))
    for X in itertools.product(range(4), repeat=2):
        assert eval_composition(f, const(2, 1), X) == ones


@pytest.mark.parametrize("g, rows, expected", [
    (XOR(2), [[1, 0], [1, 1]], (1, 0)),
    (const(2, 0), [[1, 0], [1, 1]], (0, 0)),
    (OR(2), [[0, 0], [0, 1], [1, 1]], (0, 1, 1)),
])
def test_apply_rowwise(g, rows, expected):
    a = apply_rowwise(g, matrix_from_rows(rows))
    assert tuple(bit(a, i, len(rows)) for i in range(len(rows))) == expected


def test_apply_rowwise_rejects_wrong_arity():
    with pytest.raises(ValueError):
        apply_rowwise(AND(2), (0, 1), cols=3)


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_matrix_string_roundtrip(m, n, data):
    X = tuple(data.draw(st.integers(0, (1 << n) - 1)) for _ in range(m))
    assert matrix_from_string(matrix_to_string(X, n), m, n) == X


@given(st.sampled_from(list(all_functions(2))), st.integers(0, 7))
def test_row_preimage_is_exact(g, a):
    pre = row_preimage(g, a, 3)
    brute = [X for X in itertools.product(range(4), repeat=3) if apply_rowwise(g, X) == a]
    assert sorted(pre) == sorted(brute)


def _entropy_decimal(p: str) -> Decimal:
    getcontext().prec = 40
    q = Decimal(p)
    ln2 = Decimal(2).ln()
    return -(q * q.ln() + (1 - q) * (1 - q).ln()) / ln2


def test_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.25) == pytest.approx(float(_entropy_decimal("0.25")), abs=1e-15)
    assert binary_entropy(0.25) == pytest.approx(0.8112781244591328, abs=1e-15)


@given(st.floats(0.0, 1.0))
def test_entropy_symmetric(p):
    assert binary_entropy(p) == pytest.approx(binary_entropy(1 - p), abs=1e-12)


@pytest.mark.parametrize("n, k, lower, upper, exact", [
    (4, 2, 16 / 5, 16.0, 6),
    (8, 4, 256 / 9, 256.0, 70),
    (7, 0, 1 / 8, 1.0, 1),
])
def test_binomial_bounds(n, k, lower, upper, exact):
    lo, up, ex = binomial_entropy_bounds(n, k)
    assert (lo, up, ex) == (pytest.approx(lower), pytest.approx(upper), exact)


@given(st.integers(0, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_binomial_bounds_hold(nk):
    lo, up, ex = binomial_entropy_bounds(*nk)
    assert lo * (1 - 1e-9) <= ex <= up * (1 + 1e-9)


def test_parity_small_cases():
    assert build_parity_formula(1).size == 1
    assert str(build_parity_formula(2)) == "((x1∧¬x2)∨(¬x1∧x2))"
    assert build_parity_formula(2).size == 4
    assert build_parity_formula(4).size == 16


@pytest.mark.parametrize("n", range(1, 11))
def test_parity_formula_exhaustive(n):
    phi = build_parity_formula(n)
    table = formula_table(phi, n)
    for x in range(1 << n):
        assert table(x) == bin(x).count("1") % 2
    assert phi.size <= 4 * n * n


def _span(basis):
    words = {0}
    for v in basis:
        words |= {w ^ v for w in words}
    return words


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_repetition_code(m):
    C = repetition_code(m)
    assert C.dimension == 1 and C.distance == m
    assert set(C.codewords) == {0, (1 << m) - 1}


def test_find_linear_code_hamming():
    C = find_linear_code(7, 3)
    assert C.dimension >= 4
    words = _span(C.basis)
    assert min(bin(a ^ b).count("1") for a in words for b in words if a != b) >= 3


@pytest.mark.parametrize("m, d", [(4, 4), (5, 2), (6, 3), (8, 4)])
def test_find_linear_code_distance(m, d):
    C = find_linear_code(m, d)
    assert C.distance >= d
    assert len(_span(C.basis)) == 1 << C.dimension


def test_dependent_basis_rejected():
    with pytest.raises(ValueError):
        LinearCode(3, (1, 2, 3))


def test_cosets_examples():
    full = LinearCode(3, (1, 2, 4))
    assert cosets(full) == [0]
    reps = cosets(repetition_code(4))
    assert len(reps) == 8
    assert all(coset_of(repetition_code(4), r) == r for r in reps)


@given(st.integers(0, 15), st.integers(0, 15))
def test_coset_membership(a, b):
    C = repetition_code(4)
    assert (coset_of(C, a) == coset_of(C, b)) == ((a ^ b) in C)
