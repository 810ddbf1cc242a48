"""Boolean functions, matrices, composition, de Morgan formulas, entropy and linear codes.

Conventions used throughout the package:

* An input ``x`` in ``{0,1}^n`` is encoded as an int whose most significant of
  ``n`` bits is ``x_1``.  Coordinates are 0-indexed, so ``bit(x, 0, n)`` is ``x_1``.
* A :class:`TruthTable` stores ``f(x)`` at bit position ``x`` of ``bits``.
* A matrix is a tuple of row ints, each an ``n``-bit input of the inner function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence, Union

NEG_INF = float("-inf")


def bit(x: int, i: int, n: int) -> int:
    """Coordinate ``i`` (0-indexed, left to right) of the ``n``-bit string ``x``."""
    return (x >> (n - 1 - i)) & 1


def bits_of(x: int, n: int) -> tuple[int, ...]:
    return tuple(bit(x, i, n) for i in range(n))


def from_bits(bs: Iterable[int]) -> int:
    v = 0
    for b in bs:
        v = (v << 1) | (b & 1)
    return v


def to_bitstring(x: int, n: int) -> str:
    return format(x, f"0{n}b") if n else ""


def weight(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class TruthTable:
    arity: int
    bits: int

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("arity must be at least 1")
        if self.bits < 0 or self.bits >> (1 << self.arity):
            raise ValueError("bit vector longer than 2^arity")

    @classmethod
    def from_function(cls, arity: int, fn) -> "TruthTable":
        v = 0
        for x in range(1 << arity):
            if fn(x):
                v |= 1 << x
        return cls(arity, v)

    @classmethod
    def from_values(cls, values: Sequence[int]) -> "TruthTable":
        n = len(values).bit_length() - 1
        if 1 << n != len(values):
            raise ValueError("number of values must be a power of two")
        return cls(n, sum(1 << x for x, v in enumerate(values) if v))

    @classmethod
    def from_hex(cls, arity: int, text: str) -> "TruthTable":
        return cls(arity, int(text, 16))

    def to_hex(self) -> str:
        width = max(1, (1 << self.arity) // 4)
        return format(self.bits, f"0{width}x")

    def __call__(self, x: Union[int, Sequence[int]]) -> int:
        if not isinstance(x, int):
            x = from_bits(x)
        return (self.bits >> x) & 1

    @property
    def size(self) -> int:
        return 1 << self.arity

    def preimage(self, value: int) -> tuple[int, ...]:
        return tuple(x for x in range(self.size) if self(x) == value)

    def ones(self) -> tuple[int, ...]:
        return self.preimage(1)

    def zeros(self) -> tuple[int, ...]:
        return self.preimage(0)

    @property
    def is_balanced(self) -> bool:
        return 2 * weight(self.bits) == self.size

    @property
    def is_constant(self) -> bool:
        return self.bits == 0 or self.bits == (1 << self.size) - 1

    def negate(self) -> "TruthTable":
        return TruthTable(self.arity, self.bits ^ ((1 << self.size) - 1))

    def __str__(self) -> str:
        return f"TT{self.arity}:{self.to_hex()}"


def const(arity: int, value: int) -> TruthTable:
    return TruthTable(arity, ((1 << (1 << arity)) - 1) if value else 0)


def AND(arity: int = 2) -> TruthTable:
    return TruthTable.from_function(arity, lambda x: x == (1 << arity) - 1)


def OR(arity: int = 2) -> TruthTable:
    return TruthTable.from_function(arity, lambda x: x != 0)


def XOR(arity: int = 2) -> TruthTable:
    return TruthTable.from_function(arity, lambda x: weight(x) % 2)


def MAJ(arity: int = 3) -> TruthTable:
    return TruthTable.from_function(arity, lambda x: 2 * weight(x) > arity)


def projection(arity: int, i: int) -> TruthTable:
    return TruthTable.from_function(arity, lambda x: bit(x, i, arity))


def all_functions(arity: int) -> Iterator[TruthTable]:
    for v in range(1 << (1 << arity)):
        yield TruthTable(arity, v)


def balanced_functions(arity: int) -> list[TruthTable]:
    return [g for g in all_functions(arity) if g.is_balanced]


# Matrices ----------------------------------------------------------------

Matrix = tuple[int, ...]


def matrix_from_rows(rows: Sequence[Sequence[int]]) -> Matrix:
    return tuple(from_bits(r) for r in rows)


def matrix_to_string(X: Matrix, n: int) -> str:
    return "".join(to_bitstring(r, n) for r in X)


def matrix_from_string(text: str, m: int, n: int) -> Matrix:
    if len(text) != m * n:
        raise ValueError(f"expected {m * n} bits, got {len(text)}")
    return tuple(int(text[i * n:(i + 1) * n], 2) for i in range(m))


def all_matrices(m: int, n: int) -> Iterator[Matrix]:
    return product(range(1 << n), repeat=m)


def entry(X: Matrix, i: int, j: int, n: int) -> int:
    return bit(X[i], j, n)


def apply_rowwise(g: TruthTable, X: Matrix, cols: int | None = None) -> int:
    """Column vector ``(g(X_1), ..., g(X_m))`` packed as an ``m``-bit int."""
    if cols is not None and cols != g.arity:
        raise ValueError(f"g has arity {g.arity} but X has {cols} columns")
    limit = 1 << g.arity
    a = 0
    for row in X:
        if not 0 <= row < limit:
            raise ValueError(f"row {row} does not fit arity {g.arity}")
        a = (a << 1) | g(row)
    return a


def eval_composition(f: TruthTable, g: TruthTable, X: Matrix, cols: int | None = None) -> int:
    if len(X) != f.arity:
        raise ValueError(f"f has arity {f.arity} but X has {len(X)} rows")
    return f(apply_rowwise(g, X, cols))


def row_preimage(g: TruthTable, a: int, m: int) -> list[Matrix]:
    """All matrices X with g(X) = a, rows enumerated in order."""
    pre = (g.zeros(), g.ones())
    return list(product(*(pre[bit(a, i, m)] for i in range(m))))


# Entropy ------------------------------------------------------------------

def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0,1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


SLACK = 1e-9


def binomial_entropy_bounds(n: int, k: int) -> tuple[float, float, int]:
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    upper = 2.0 ** (binary_entropy(k / n) * n) if n else 1.0
    lower = upper / (n + 1)
    exact = math.comb(n, k)
    assert lower - SLACK * upper <= exact <= upper * (1 + SLACK), (n, k)
    return lower, upper, exact


# Formulas ----------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    var: int
    negated: bool = False

    def evaluate(self, x: int, n: int) -> int:
        return bit(x, self.var, n) ^ int(self.negated)

    @property
    def size(self) -> int:
        return 1

    @property
    def depth(self) -> float:
        return 0

    def negation(self) -> "Literal":
        return Literal(self.var, not self.negated)

    def __str__(self) -> str:
        return ("¬" if self.negated else "") + f"x{self.var + 1}"


@dataclass(frozen=True)
class Constant:
    value: int

    def evaluate(self, x: int, n: int) -> int:
        return self.value

    @property
    def size(self) -> int:
        return 0

    @property
    def depth(self) -> float:
        return NEG_INF

    def negation(self) -> "Constant":
        return Constant(1 - self.value)

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Gate:
    op: str
    left: "Formula"
    right: "Formula"

    def __post_init__(self) -> None:
        if self.op not in ("and", "or"):
            raise ValueError(f"unknown gate {self.op!r}")
        if isinstance(self.left, Constant) or isinstance(self.right, Constant):
            raise ValueError("constants may only appear as a whole formula")

    def evaluate(self, x: int, n: int) -> int:
        l = self.left.evaluate(x, n)
        r = self.right.evaluate(x, n)
        return l & r if self.op == "and" else l | r

    @cached_property
    def size(self) -> int:
        return self.left.size + self.right.size

    @cached_property
    def depth(self) -> float:
        return 1 + max(self.left.depth, self.right.depth)

    def negation(self) -> "Gate":
        return Gate("or" if self.op == "and" else "and", self.left.negation(), self.right.negation())

    def __str__(self) -> str:
        sym = "∧" if self.op == "and" else "∨"
        return f"({self.left}{sym}{self.right})"


Formula = Union[Literal, Constant, Gate]


def formula_table(phi: Formula, n: int) -> TruthTable:
    return TruthTable.from_function(n, lambda x: phi.evaluate(x, n))


def _xor(p: Formula, q: Formula) -> Gate:
    return Gate("or", Gate("and", p, q.negation()), Gate("and", p.negation(), q))


def build_parity_formula(n: int, offset: int = 0) -> Formula:
    """Parity of ``x_{offset+1} .. x_{offset+n}`` by halving; size s(2k) = 4 s(k)."""
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return Literal(offset)
    half = (n + 1) // 2
    return _xor(build_parity_formula(half, offset), build_parity_formula(n - half, offset + half))


# Linear codes ------------------------------------------------------------

def _span(basis: Sequence[int]) -> list[int]:
    words = [0]
    for v in basis:
        words += [w ^ v for w in words]
    return words


@dataclass(frozen=True)
class LinearCode:
    length: int
    basis: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(set(self.codewords)) != 1 << len(self.basis):
            raise ValueError("basis vectors are linearly dependent")
        if any(v >> self.length for v in self.basis):
            raise ValueError("basis vector longer than code length")

    @cached_property
    def codewords(self) -> tuple[int, ...]:
        return tuple(sorted(_span(self.basis)))

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @cached_property
    def distance(self) -> int:
        nonzero = [weight(c) for c in self.codewords if c]
        return min(nonzero) if nonzero else self.length + 1

    def __contains__(self, word: int) -> bool:
        return word in self._members

    @cached_property
    def _members(self) -> frozenset[int]:
        return frozenset(self.codewords)

    def to_hex(self) -> list[str]:
        return [format(v, "x") for v in self.basis]

    @classmethod
    def from_hex(cls, length: int, basis: Sequence[str]) -> "LinearCode":
        return cls(length, tuple(int(v, 16) for v in basis))


def repetition_code(m: int) -> LinearCode:
    return LinearCode(m, ((1 << m) - 1,))


def _greedy_code(m: int, d: int) -> list[int]:
    basis: list[int] = []
    words = [0]
    for v in range(1, 1 << m):
        if weight(v) < d or v in words:
            continue
        if all(weight(v ^ w) >= d for w in words):
            basis.append(v)
            words += [w ^ v for w in words]
    return basis


def _sphere_bound(m: int, d: int) -> int:
    t = (d - 1) // 2
    ball = sum(math.comb(m, i) for i in range(t + 1))
    return int(math.floor(math.log2((1 << m) / ball) + 1e-12))


def _extend(m: int, d: int, words: list[int], start: int, target: int, budget: list[int]) -> list[int] | None:
    if target == 0:
        return []
    members = set(words)
    for v in range(start, 1 << m):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        if v in members or weight(v) < d:
            continue
        # only take v when it is the smallest element of its coset, so each code is visited less often
        if any((v ^ w) < v for w in words):
            continue
        if all(weight(v ^ w) >= d for w in words):
            rest = _extend(m, d, words + [w ^ v for w in words], v + 1, target - 1, budget)
            if rest is not None:
                return [v] + rest
    return None


def find_linear_code(m: int, d: int, node_budget: int = 2_000_000) -> LinearCode:
    """Greedy lexicographic code, improved by exhaustive basis search when ``m <= 14``."""
    if not 1 <= d <= m:
        raise ValueError("need 1 <= d <= m")
    basis = _greedy_code(m, d)
    if m <= 14:
        cap = _sphere_bound(m, d)
        budget = [node_budget]
        while len(basis) < cap:
            better = _extend(m, d, [0], 1, len(basis) + 1, budget)
            if better is None:
                break
            basis = better
    return LinearCode(m, tuple(basis))


def varshamov_dimension(m: int, d: int) -> float:
    """Information only: ``(1 - H2(d/m)) * m``."""
    return (1 - binary_entropy(min(d / m, 0.5))) * m


def cosets(code: LinearCode) -> list[int]:
    """Minimal representatives of the cosets of ``code`` in ``{0,1}^m``."""
    m = code.length
    if m > 20:
        raise ValueError("code length too large for enumeration")
    seen = bytearray(1 << m)
    reps = []
    words = code.codewords
    for x in range(1 << m):
        if seen[x]:
            continue
        reps.append(x)
        for c in words:
            seen[x ^ c] = 1
    assert len(reps) << code.dimension == 1 << m
    return reps


def coset_of(code: LinearCode, x: int) -> int:
    return min(x ^ c for c in code.codewords)
