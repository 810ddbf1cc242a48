"""Deterministic protocols and exact complexity by rectangle-game search.

Rectangles are pairs of bitmasks over the relation's domain indices.  The
solver computes the game values

* ``cc(X, Y)``   = 0 if monochromatic, else 1 + min over splits of the max child value;
* ``size(X, Y)`` = 1 if monochromatic, else min over splits of the children's sum.

A formula-enumeration oracle (:func:`formula_oracle`) computes ``L`` and ``D``
independently, which lets tests check the KW correspondence end to end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Iterator, Optional, Sequence

from .boolcore import NEG_INF, TruthTable, apply_rowwise, bit
from .relations import Relation, compose_standard, kw, kw_rectangle

SOLVER_VERSION = "detcc-1"


class BudgetExceeded(RuntimeError):
    """The search was aborted; this says nothing about whether a protocol exists."""


@dataclass(frozen=True)
class SearchBudget:
    max_side: int = 16
    max_memo: int = 3_000_000
    depth_cap: Optional[int] = None


DEFAULT_BUDGET = SearchBudget()


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def popcount(mask: int) -> int:
    return bin(mask).count("1")


# Protocol trees ----------------------------------------------------------

@dataclass
class ProtocolNode:
    xs: int
    ys: int
    owner: Optional[str] = None  # "A" or "B" at internal nodes
    children: Optional[tuple["ProtocolNode", "ProtocolNode"]] = None
    output: Any = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def depth(self) -> int:
        if self.children is None:
            return 0
        return 1 + max(c.depth() for c in self.children)

    def leaves(self) -> int:
        if self.children is None:
            return 1
        return sum(c.leaves() for c in self.children)

    def walk(self) -> Iterator["ProtocolNode"]:
        stack = [self]
        while stack:
            v = stack.pop()
            yield v
            if v.children:
                stack.extend(reversed(v.children))

    def child_at(self, path: str) -> Optional["ProtocolNode"]:
        v = self
        for c in path:
            if v.children is None:
                return None
            v = v.children[int(c)]
        return v


@dataclass
class ProtocolTree:
    root: ProtocolNode
    x_size: int
    y_size: int

    @property
    def depth(self) -> int:
        return self.root.depth()

    @property
    def size(self) -> int:
        return self.root.leaves()

    def to_json(self) -> str:
        return json.dumps(
            {"x_size": self.x_size, "y_size": self.y_size, "root": _node_to_obj(self.root)},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ProtocolTree":
        obj = json.loads(text)
        return cls(_node_from_obj(obj["root"]), obj["x_size"], obj["y_size"])


def _node_to_obj(v: ProtocolNode) -> dict:
    obj: dict = {"X": format(v.xs, "x"), "Y": format(v.ys, "x")}
    if v.children is None:
        obj["output"] = v.output
    else:
        obj["owner"] = v.owner
        obj["0"] = _node_to_obj(v.children[0])
        obj["1"] = _node_to_obj(v.children[1])
    return obj


def _as_output(o: Any) -> Any:
    return tuple(o) if isinstance(o, list) else o


def _node_from_obj(obj: dict) -> ProtocolNode:
    v = ProtocolNode(int(obj["X"], 16), int(obj["Y"], 16))
    if "output" in obj:
        v.output = _as_output(obj["output"])
    else:
        v.owner = obj["owner"]
        v.children = (_node_from_obj(obj["0"]), _node_from_obj(obj["1"]))
    return v


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    nodes: int = 0
    leaves: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


def _leaf_ok(rel: Relation, xs: int, ys: int, output: Any) -> bool:
    k = rel.out_index.get(output)
    if k is None:
        return xs == 0 or ys == 0
    ysets = rel.valid_y_sets[k]
    return all(ys & ~ysets[i] == 0 for i in iter_bits(xs))


def validate_protocol(tree: ProtocolTree, rel: Relation, max_errors: int = 50) -> ValidationReport:
    rep = ValidationReport()
    if (tree.x_size, tree.y_size) != (len(rel.x_domain), len(rel.y_domain)):
        rep.errors.append("protocol domain sizes do not match the relation")
        return rep
    if tree.root.xs != rel.full_x or tree.root.ys != rel.full_y:
        rep.errors.append("root rectangle is not the full domain")
    for v in tree.root.walk():
        rep.nodes += 1
        if len(rep.errors) >= max_errors:
            break
        if v.children is None:
            rep.leaves += 1
            if not _leaf_ok(rel, v.xs, v.ys, v.output):
                rep.errors.append(f"leaf with output {v.output!r} is wrong on part of its rectangle")
            continue
        c0, c1 = v.children
        if v.owner == "A":
            split, same = (c0.xs, c1.xs, v.xs), (c0.ys, c1.ys, v.ys)
        elif v.owner == "B":
            split, same = (c0.ys, c1.ys, v.ys), (c0.xs, c1.xs, v.xs)
        else:
            rep.errors.append(f"internal node with owner {v.owner!r}")
            continue
        if split[0] & split[1] or split[0] | split[1] != split[2]:
            rep.errors.append(f"{v.owner}-node children do not partition the speaker's side")
        if not same[0] == same[1] == same[2]:
            rep.errors.append(f"{v.owner}-node children change the listener's side")
    return rep


# Rectangle game ------------------------------------------------------------

class RectangleGame:
    """Memoized exact solver for one relation."""

    def __init__(self, rel: Relation, budget: SearchBudget = DEFAULT_BUDGET):
        nx, ny = len(rel.x_domain), len(rel.y_domain)
        if max(nx, ny) > budget.max_side:
            raise BudgetExceeded(f"rectangle sides {nx}x{ny} exceed max_side={budget.max_side}")
        self.rel = rel
        self.budget = budget
        self.K = len(rel.outputs)
        self.ysets = rel.valid_y_sets
        self.xsets = rel.valid_x_sets
        full_y = rel.full_y
        self._and_y: dict[int, tuple[int, ...]] = {0: (full_y,) * self.K}
        self._mono: dict[tuple[int, int], int] = {}
        self._splits: dict[int, list[tuple[int, int]]] = {}
        # cc memo: key -> (lower, upper, split)
        self._cc_lo: dict[tuple[int, int], int] = {}
        self._cc_hi: dict[tuple[int, int], tuple[int, Any]] = {}
        # size memo
        self._size_exact: dict[tuple[int, int], tuple[int, Any]] = {}
        self._size_lo: dict[tuple[int, int], int] = {}
        self._cover: dict[tuple[str, int, int], int] = {}

    # basic helpers
    def _check_memo(self) -> None:
        total = len(self._cc_lo) + len(self._cc_hi) + len(self._size_exact) + len(self._size_lo)
        if total > self.budget.max_memo:
            raise BudgetExceeded(f"memo exceeded {self.budget.max_memo} entries")

    def and_y(self, xs: int) -> tuple[int, ...]:
        got = self._and_y.get(xs)
        if got is None:
            low = (xs & -xs).bit_length() - 1
            rest = self.and_y(xs & (xs - 1))
            got = tuple(r & self.ysets[k][low] for k, r in enumerate(rest))
            self._and_y[xs] = got
        return got

    def mono_output(self, xs: int, ys: int) -> int:
        """Index of the first output valid on all of X×Y, or -1."""
        key = (xs, ys)
        got = self._mono.get(key)
        if got is None:
            got = -1
            for k, common in enumerate(self.and_y(xs)):
                if ys & ~common == 0:
                    got = k
                    break
            self._mono[key] = got
        return got

    def splits(self, side: int) -> list[tuple[int, int]]:
        got = self._splits.get(side)
        if got is None:
            low = side & -side
            rest = side ^ low
            half = popcount(side) / 2
            subs = []
            sub = rest
            while True:
                part = sub | low
                if part != side:
                    subs.append((abs(popcount(part) - half), part))
                if sub == 0:
                    break
                sub = (sub - 1) & rest
            subs.sort()
            got = [(p, side ^ p) for _, p in subs]
            self._splits[side] = got
        return got

    def _moves(self, xs: int, ys: int) -> Iterator[tuple[str, int, int, int, int]]:
        for a, b in self.splits(xs):
            yield "A", a, ys, b, ys
        for a, b in self.splits(ys):
            yield "B", xs, a, xs, b

    def _single_cover(self, side: str, elem: int, other: int) -> int:
        """Fewest outputs whose valid sets cover ``other`` against one fixed input."""
        key = (side, elem, other)
        got = self._cover.get(key)
        if got is not None:
            return got
        table = self.ysets if side == "A" else self.xsets
        sets = {table[k][elem] & other for k in range(self.K)}
        sets.discard(0)
        sets = [s for s in sets if not any(s != t and s | t == t for t in sets)]
        got = 0
        if other:
            for r in range(1, len(sets) + 1):
                if any(_union(c) == other for c in combinations(sets, r)):
                    got = r
                    break
        self._cover[key] = got
        return got

    def size_lower_bound(self, xs: int, ys: int) -> int:
        key = (xs, ys)
        if key in self._size_exact:
            return self._size_exact[key][0]
        if self.mono_output(xs, ys) >= 0:
            return 1
        if popcount(xs) == 1:
            return self._single_cover("A", _lowest(xs), ys)
        if popcount(ys) == 1:
            return self._single_cover("B", _lowest(ys), xs)
        lo = self._size_lo.get(key, 2)
        best = max(
            max(self._single_cover("A", x, ys) for x in iter_bits(xs)),
            max(self._single_cover("B", y, xs) for y in iter_bits(ys)),
        )
        if best > lo:
            self._size_lo[key] = best
            lo = best
        return lo

    # communication complexity
    def _cc_feasible(self, xs: int, ys: int, k: int) -> bool:
        if self.mono_output(xs, ys) >= 0:
            return True
        if k <= 0:
            return False
        key = (xs, ys)
        hi = self._cc_hi.get(key)
        if hi is not None and hi[0] <= k:
            return True
        if self._cc_lo.get(key, 1) > k:
            return False
        nx, ny = popcount(xs), popcount(ys)
        if nx == 1 or ny == 1:
            cover = self._single_cover("A", _lowest(xs), ys) if nx == 1 else self._single_cover("B", _lowest(ys), xs)
            need = math.ceil(math.log2(cover))
            if need <= k:
                self._cc_hi[key] = (need, None)
                return True
            self._cc_lo[key] = need
            return False
        self._check_memo()
        for move in self._moves(xs, ys):
            _, ax, ay, bx, by = move
            if self._cc_lo.get((ax, ay), 0) > k - 1 or self._cc_lo.get((bx, by), 0) > k - 1:
                continue
            if self._cc_feasible(ax, ay, k - 1) and self._cc_feasible(bx, by, k - 1):
                self._cc_hi[key] = (k, move)
                return True
        self._cc_lo[key] = k + 1
        return False

    def cc(self, xs: Optional[int] = None, ys: Optional[int] = None) -> int:
        xs = self.rel.full_x if xs is None else xs
        ys = self.rel.full_y if ys is None else ys
        k = 0
        while not self._cc_feasible(xs, ys, k):
            k += 1
            if self.budget.depth_cap is not None and k > self.budget.depth_cap:
                raise BudgetExceeded(f"depth cap {self.budget.depth_cap} reached")
        return k

    # protocol size
    def _size(self, xs: int, ys: int, bound: float) -> int:
        """Exact size if it is below ``bound``; otherwise some lower bound that is at least ``bound``."""
        key = (xs, ys)
        got = self._size_exact.get(key)
        if got is not None:
            return got[0]
        if self.mono_output(xs, ys) >= 0:
            return 1
        nx, ny = popcount(xs), popcount(ys)
        if nx == 1 or ny == 1:
            v = self._single_cover("A", _lowest(xs), ys) if nx == 1 else self._single_cover("B", _lowest(ys), xs)
            self._size_exact[key] = (v, None)
            return v
        lo = self.size_lower_bound(xs, ys)
        if lo >= bound:
            return lo
        self._check_memo()
        best = bound
        best_move = None
        for move in self._moves(xs, ys):
            _, ax, ay, bx, by = move
            la = self.size_lower_bound(ax, ay)
            lb = self.size_lower_bound(bx, by)
            if la + lb >= best:
                continue
            va = self._size(ax, ay, best - lb)
            if va + lb >= best:
                continue
            vb = self._size(bx, by, best - va)
            if va + vb < best:
                best = va + vb
                best_move = move
                if best <= lo:
                    break
        if best_move is not None:
            self._size_exact[key] = (best, best_move)
            return best
        self._size_lo[key] = max(lo, int(bound) if bound != math.inf else lo)
        return self._size_lo[key]

    def size(self, xs: Optional[int] = None, ys: Optional[int] = None) -> int:
        xs = self.rel.full_x if xs is None else xs
        ys = self.rel.full_y if ys is None else ys
        if xs == 0 or ys == 0:
            return 1
        return self._size(xs, ys, math.inf)

    # protocol reconstruction
    def _leaf(self, xs: int, ys: int) -> ProtocolNode:
        k = self.mono_output(xs, ys)
        return ProtocolNode(xs, ys, output=self.rel.outputs[max(k, 0)])

    def _cover_tree(self, xs: int, ys: int) -> ProtocolNode:
        """Balanced tree that splits the non-singleton side into cover classes."""
        if popcount(xs) == 1:
            side, elem, other, table = "B", _lowest(xs), ys, self.ysets
        else:
            side, elem, other, table = "A", _lowest(ys), xs, self.xsets
        cover = self._single_cover("A" if side == "B" else "B", elem, other)
        sets = [table[k][elem] & other for k in range(self.K)]
        chosen = None
        for combo in combinations(range(self.K), cover):
            if _union(sets[k] for k in combo) == other:
                chosen = combo
                break
        assert chosen is not None
        parts, left = [], other
        for k in chosen:
            part = sets[k] & left
            if part:
                parts.append(part)
                left &= ~part
        return self._split_parts(side, xs, ys, parts)

    def _split_parts(self, side: str, xs: int, ys: int, parts: list[int]) -> ProtocolNode:
        if len(parts) == 1:
            return self._leaf(xs, ys)
        h = len(parts) // 2
        p0, p1 = _union(parts[:h]), _union(parts[h:])
        if side == "B":
            c0 = self._split_parts(side, xs, p0, parts[:h])
            c1 = self._split_parts(side, xs, p1, parts[h:])
        else:
            c0 = self._split_parts(side, p0, ys, parts[:h])
            c1 = self._split_parts(side, p1, ys, parts[h:])
        return ProtocolNode(xs, ys, owner=side, children=(c0, c1))

    def _build(self, xs: int, ys: int, move) -> ProtocolNode:
        owner, ax, ay, bx, by = move
        return ProtocolNode(xs, ys, owner=owner, children=(self._rebuild(ax, ay), self._rebuild(bx, by)))

    def min_depth_protocol(self) -> ProtocolTree:
        self.cc()
        self._rebuild = self._rebuild_cc
        root = self._rebuild_cc(self.rel.full_x, self.rel.full_y)
        return ProtocolTree(root, len(self.rel.x_domain), len(self.rel.y_domain))

    def _rebuild_cc(self, xs: int, ys: int) -> ProtocolNode:
        if self.mono_output(xs, ys) >= 0:
            return self._leaf(xs, ys)
        k = self.cc(xs, ys)
        hi = self._cc_hi.get((xs, ys))
        if hi is None or hi[0] > k:
            self._cc_feasible(xs, ys, k)
            hi = self._cc_hi[(xs, ys)]
        if hi[1] is None:
            return self._cover_tree(xs, ys)
        return self._build(xs, ys, hi[1])

    def min_size_protocol(self) -> ProtocolTree:
        self.size()
        self._rebuild = self._rebuild_size
        root = self._rebuild_size(self.rel.full_x, self.rel.full_y)
        return ProtocolTree(root, len(self.rel.x_domain), len(self.rel.y_domain))

    def _rebuild_size(self, xs: int, ys: int) -> ProtocolNode:
        if self.mono_output(xs, ys) >= 0:
            return self._leaf(xs, ys)
        self._size(xs, ys, math.inf)
        _, move = self._size_exact[(xs, ys)]
        if move is None:
            return self._cover_tree(xs, ys)
        return self._build(xs, ys, move)


def _member(mask: int, index: dict, value) -> bool:
    k = index.get(value)
    return k is not None and bool((mask >> k) & 1)


def _lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def _union(masks) -> int:
    u = 0
    for m in masks:
        u |= m
    return u


def exact_cc(rel: Relation, budget: SearchBudget = DEFAULT_BUDGET) -> int:
    return RectangleGame(rel, budget).cc()


def exact_protocol_size(rel: Relation, budget: SearchBudget = DEFAULT_BUDGET) -> int:
    return RectangleGame(rel, budget).size()


def formula_complexity_rect(A: Sequence[int], B: Sequence[int], m: int, budget: SearchBudget = DEFAULT_BUDGET):
    """``(L, D)`` of the rectangle ``A × B``; an empty side gives ``(0, -inf)``."""
    if not A or not B:
        return 0, NEG_INF
    game = RectangleGame(kw_rectangle(A, B, m), budget)
    return game.size(), game.cc()


# Formula enumeration oracle ------------------------------------------------

ORACLE_MAX_ARITY = 3
ORACLE_MAX_CAP = 12


@dataclass(frozen=True)
class OracleResult:
    L: Optional[int]
    D: Optional[float]
    status: str  # "exact" or "unknown"


def _literal_signatures(points: Sequence[int], n: int) -> list[int]:
    sigs = []
    full = (1 << len(points)) - 1
    for i in range(n):
        s = sum(1 << k for k, p in enumerate(points) if bit(p, i, n))
        sigs += [s, full ^ s]
    return sigs


def _min_size_search(literals: list[int], accept, cap: int) -> Optional[int]:
    by_size: list[list[int]] = [[], sorted(set(literals))]
    seen = set(by_size[1])
    if any(accept(s) for s in by_size[1]):
        return 1
    for s in range(2, cap + 1):
        new = set()
        for i in range(1, s // 2 + 1):
            for a in by_size[i]:
                for b in by_size[s - i]:
                    new.add(a & b)
                    new.add(a | b)
        new -= seen
        seen |= new
        by_size.append(sorted(new))
        if any(accept(v) for v in new):
            return s
    return None


def _min_depth_search(literals: list[int], accept, limit: int = 64) -> Optional[int]:
    level = set(literals)
    for d in range(limit):
        if any(accept(v) for v in level):
            return d
        items = sorted(level)
        grown = set(level)
        for i, a in enumerate(items):
            for b in items[i:]:
                grown.add(a & b)
                grown.add(a | b)
        if grown == level:
            return None
        level = grown
    return None


def formula_oracle(f: TruthTable, size_cap: int = ORACLE_MAX_CAP) -> OracleResult:
    """Minimal de Morgan formula size and depth of ``f`` by enumeration.

    Size is searched by dynamic programming over (size, function) up to
    ``size_cap``.  Depth is searched by closing the literal set under AND/OR
    level by level, which needs no cap.
    """
    if f.arity > ORACLE_MAX_ARITY:
        raise ValueError(f"oracle supports arity <= {ORACLE_MAX_ARITY}")
    if size_cap > ORACLE_MAX_CAP:
        raise ValueError(f"size cap above {ORACLE_MAX_CAP}")
    if f.is_constant:
        return OracleResult(0, NEG_INF, "exact")
    points = list(range(f.size))
    lits = _literal_signatures(points, f.arity)
    target = f.bits
    L = _min_size_search(lits, lambda s: s == target, size_cap)
    D = _min_depth_search(lits, lambda s: s == target)
    return OracleResult(L, D, "exact" if L is not None else "unknown")


def separating_formula_size(A: Sequence[int], B: Sequence[int], m: int, cap: int = 16) -> Optional[int]:
    """Smallest formula that is 1 on ``A`` and 0 on ``B`` (enumerated on ``A ∪ B`` only)."""
    if not A or not B:
        return 0
    points = sorted(set(A) | set(B))
    amask = sum(1 << k for k, p in enumerate(points) if p in set(A))
    bmask = sum(1 << k for k, p in enumerate(points) if p in set(B))
    return _min_size_search(
        _literal_signatures(points, m), lambda s: s & amask == amask and s & bmask == 0, cap
    )


def separating_formula_depth(A: Sequence[int], B: Sequence[int], m: int) -> float:
    if not A or not B:
        return NEG_INF
    points = sorted(set(A) | set(B))
    amask = sum(1 << k for k, p in enumerate(points) if p in set(A))
    bmask = sum(1 << k for k, p in enumerate(points) if p in set(B))
    return _min_depth_search(_literal_signatures(points, m), lambda s: s & amask == amask and s & bmask == 0)


# Obvious composition protocol --------------------------------------------

def obvious_protocol(f: TruthTable, g: TruthTable, pf: ProtocolTree, pg: ProtocolTree) -> ProtocolTree:
    """Solve ``KW_f`` on ``(g(X), g(Y))``, then ``KW_g`` on the selected rows."""
    rf, rg = kw(f), kw(g)
    for name, tree, rel in (("f", pf, rf), ("g", pg, rg)):
        if not validate_protocol(tree, rel).ok:
            raise ValueError(f"protocol for KW_{name} is invalid")
    comp = compose_standard(f, g)
    m = f.arity
    col_x = [apply_rowwise(g, X) for X in comp.x_domain]
    col_y = [apply_rowwise(g, Y) for Y in comp.y_domain]

    def lift(side_vals: list[int], fmask: int, index: dict) -> int:
        allowed = {v for v in index if (fmask >> index[v]) & 1}
        return sum(1 << k for k, v in enumerate(side_vals) if v in allowed)

    def inner(u: ProtocolNode, xs: int, ys: int, i: int, swapped: bool) -> ProtocolNode:
        # rows X_i, Y_i restricted to the KW_g node's rectangle; players swap roles when a_i = 0
        ux, uy = (u.ys, u.xs) if swapped else (u.xs, u.ys)
        idx_a = rg.y_index if swapped else rg.x_index
        idx_b = rg.x_index if swapped else rg.y_index
        nxs = sum(1 << k for k in iter_bits(xs) if _member(ux, idx_a, comp.x_domain[k][i]))
        nys = sum(1 << k for k in iter_bits(ys) if _member(uy, idx_b, comp.y_domain[k][i]))
        if u.children is None:
            return ProtocolNode(nxs, nys, output=(i, u.output))
        owner = u.owner if not swapped else ("B" if u.owner == "A" else "A")
        kids = tuple(inner(c, nxs, nys, i, swapped) for c in u.children)
        return ProtocolNode(nxs, nys, owner=owner, children=kids)

    def outer(v: ProtocolNode) -> ProtocolNode:
        xs = lift(col_x, v.xs, rf.x_index)
        ys = lift(col_y, v.ys, rf.y_index)
        if v.children is None:
            i = v.output
            # a_i = 1 on X's side for every a in this rectangle, or 0 for all; mixed only when empty
            ones = [k for k in iter_bits(xs) if bit(col_x[k], i, m)]
            if xs:
                swapped = not ones
                if ones and len(ones) != popcount(xs):
                    raise AssertionError("KW_f leaf mixes both values of a_i")
            else:
                swapped = any(bit(col_y[k], i, m) for k in iter_bits(ys))
            return inner(pg.root, xs, ys, i, swapped)
        return ProtocolNode(xs, ys, owner=v.owner, children=tuple(outer(c) for c in v.children))

    return ProtocolTree(outer(pf.root), len(comp.x_domain), len(comp.y_domain))


# Sub-additivity and fortification ----------------------------------------

@dataclass
class SubadditivityReport:
    whole: int
    parts: tuple[int, int]
    holds: bool


def check_subadditivity(
    A: Sequence[int], B: Sequence[int], part0: Sequence[int], m: int, side: str = "A",
    budget: SearchBudget = DEFAULT_BUDGET,
) -> SubadditivityReport:
    split = set(A) if side == "A" else set(B)
    p0 = set(part0)
    if not p0 <= split:
        raise ValueError("part is not a subset of the split side")
    p1 = split - p0

    def L(a, b):
        return formula_complexity_rect(sorted(a), sorted(b), m, budget)[0]

    if side == "A":
        whole, l0, l1 = L(A, B), L(p0, B), L(p1, B)
    else:
        whole, l0, l1 = L(A, B), L(A, p0), L(A, p1)
    rep = SubadditivityReport(whole, (l0, l1), whole <= l0 + l1)
    assert rep.holds, rep
    return rep


def subset_complexities(A: Sequence[int], B: Sequence[int], m: int, budget: SearchBudget = DEFAULT_BUDGET) -> list[int]:
    """``L(S × B)`` for every subset ``S`` of ``A`` indexed by bitmask over sorted ``A``."""
    A = sorted(A)
    if len(A) > 12:
        raise BudgetExceeded("fortification checks need |A| <= 12")
    out = [0] * (1 << len(A))
    if not B:
        return out
    game = RectangleGame(kw_rectangle(A, B, m), budget)
    for s in range(1, 1 << len(A)):
        out[s] = game.size(s, game.rel.full_y)
    return out


def _fortified_masks(Ls: list[int], k: int, rho: float) -> list[bool]:
    # h[s] = min over nonempty t ⊆ s of L(t)/|t|
    h = [math.inf] * (1 << k)
    for s in range(1, 1 << k):
        v = Ls[s] / popcount(s)
        for i in iter_bits(s):
            v = min(v, h[s ^ (1 << i)])
        h[s] = v
    ok = [False] * (1 << k)
    for s in range(1, 1 << k):
        ok[s] = h[s] >= rho * Ls[s] / popcount(s) - 1e-12
    return ok


def _orient(A, B, side):
    if side == "A":
        return sorted(A), sorted(B)
    if side == "B":
        return sorted(B), sorted(A)
    raise ValueError("side must be 'A' or 'B'")


def is_fortified(A: Sequence[int], B: Sequence[int], rho: float, m: int, side: str = "A",
                 budget: SearchBudget = DEFAULT_BUDGET) -> bool:
    S, T = _orient(A, B, side)
    if not S:
        return True
    Ls = subset_complexities(S, T, m, budget)
    return _fortified_masks(Ls, len(S), rho)[(1 << len(S)) - 1]


@dataclass
class FortifiedSubset:
    subset: tuple[int, ...]
    L_subset: int
    L_whole: int
    rho: float

    @property
    def quarter_guarantee(self) -> bool:
        return 4 * self.L_subset >= self.L_whole


def find_fortified_subset(A: Sequence[int], B: Sequence[int], rho: float, m: int, side: str = "A",
                          budget: SearchBudget = DEFAULT_BUDGET) -> FortifiedSubset:
    """Exhaustively pick the ``rho``-fortified subset of maximal complexity.

    When ``rho <= 1/(4m)`` the result must keep a quarter of the complexity;
    this is asserted.
    """
    S, T = _orient(A, B, side)
    Ls = subset_complexities(S, T, m, budget)
    full = (1 << len(S)) - 1
    ok = _fortified_masks(Ls, len(S), rho)
    best = max((s for s in range(1, full + 1) if ok[s]), key=lambda s: (Ls[s], popcount(s), -s), default=0)
    res = FortifiedSubset(tuple(S[i] for i in iter_bits(best)), Ls[best], Ls[full], rho)
    if rho <= 1 / (4 * m) + 1e-12:
        assert res.quarter_guarantee, res
    return res
