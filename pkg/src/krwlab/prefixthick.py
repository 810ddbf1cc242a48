"""Prefix trees over per-coordinate alphabets, thickness, and winning sets.

A string is a tuple of symbol indices; coordinate ``i`` draws from an alphabet
of size ``q`` whose labels live in :class:`AlphabetProfile`.  A branching
structure is a tuple ``w`` with entries in ``1..q``.  Coordinate sets ``I`` are
bitmasks with bit ``i`` standing for coordinate ``i``.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import product
from typing import Any, Iterable, Optional, Sequence

LOG2E = math.log2(math.e)


@dataclass(frozen=True)
class AlphabetProfile:
    labels: tuple[tuple[Any, ...], ...]

    def __post_init__(self) -> None:
        sizes = {len(a) for a in self.labels}
        if len(sizes) > 1:
            raise ValueError("all coordinate alphabets must have the same size")
        for a in self.labels:
            if len(set(a)) != len(a):
                raise ValueError("alphabet labels must be unique per coordinate")

    @classmethod
    def uniform(cls, q: int, m: int) -> "AlphabetProfile":
        return cls(tuple(tuple(range(q)) for _ in range(m)))

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def q(self) -> int:
        return len(self.labels[0]) if self.labels else 0

    def restrict(self, coords: Sequence[int]) -> "AlphabetProfile":
        return AlphabetProfile(tuple(self.labels[i] for i in coords))

    def encode(self, labelled: Sequence[Any]) -> tuple[int, ...]:
        return tuple(self.labels[i].index(s) for i, s in enumerate(labelled))

    def decode(self, s: Sequence[int]) -> tuple[Any, ...]:
        return tuple(self.labels[i][c] for i, c in enumerate(s))


@dataclass(frozen=True)
class StringSet:
    profile: AlphabetProfile
    strings: frozenset

    def __post_init__(self) -> None:
        q, m = self.profile.q, self.profile.m
        for s in self.strings:
            if len(s) != m or any(not 0 <= c < q for c in s):
                raise ValueError(f"string {s} outside the alphabet profile")

    @classmethod
    def of(cls, strings: Iterable[Sequence[int]], q: int, m: int) -> "StringSet":
        return cls(AlphabetProfile.uniform(q, m), frozenset(tuple(s) for s in strings))

    @classmethod
    def from_words(cls, words: Iterable[str], alphabet: str) -> "StringSet":
        words = list(words)
        m = len(words[0]) if words else 0
        return cls.of(([alphabet.index(c) for c in w] for w in words), len(alphabet), m)

    def __len__(self) -> int:
        return len(self.strings)

    def project(self, coords: Sequence[int]) -> "StringSet":
        coords = list(coords)
        return StringSet(self.profile.restrict(coords), frozenset(tuple(s[i] for i in coords) for s in self.strings))

    def to_dict(self) -> dict:
        return {"labels": [list(a) for a in self.profile.labels], "strings": sorted(list(s) for s in self.strings)}

    @classmethod
    def from_dict(cls, obj: dict) -> "StringSet":
        profile = AlphabetProfile(tuple(tuple(a) for a in obj["labels"]))
        return cls(profile, frozenset(tuple(s) for s in obj["strings"]))


def _children(X: frozenset) -> dict[int, frozenset]:
    groups: dict[int, set] = defaultdict(set)
    for s in X:
        groups[s[0]].add(s[1:])
    return {c: frozenset(v) for c, v in sorted(groups.items())}


@dataclass
class PrefixTree:
    """Trie of a string set: node -> sorted child symbols."""

    m: int
    nodes: dict[tuple[int, ...], tuple[int, ...]]

    def degree(self, prefix: tuple[int, ...]) -> int:
        return len(self.nodes[prefix])

    def __len__(self) -> int:
        return len(self.nodes)

    def min_degree(self) -> int:
        return min((len(c) for p, c in self.nodes.items() if len(p) < self.m), default=0)


def prefix_tree(X: StringSet) -> PrefixTree:
    if not X.strings:
        raise ValueError("prefix tree of an empty set")
    m = X.profile.m
    kids: dict[tuple, set] = defaultdict(set)
    for s in X.strings:
        for i in range(m):
            kids[s[:i]].add(s[i])
        kids[s]
    return PrefixTree(m, {p: tuple(sorted(c)) for p, c in kids.items()})


def _thick(X: frozenset, depth: int, t: float, memo: dict) -> Optional[frozenset]:
    """Witness subset with every internal degree above ``t``, or None."""
    key = (X, depth)
    if key in memo:
        return memo[key]
    if depth == 0:
        got = X if X else None
    else:
        parts = []
        for c, sub in _children(X).items():
            w = _thick(sub, depth - 1, t, memo)
            if w is not None:
                parts.append((c, w))
        got = frozenset((c,) + s for c, w in parts for s in w) if len(parts) > t else None
    memo[key] = got
    return got


def is_prefix_thick(X: StringSet, t: Optional[float] = None) -> tuple[bool, Optional[StringSet]]:
    """Decide prefix thickness with degree ``t`` (default ``q/2``), strict inequality."""
    t = X.profile.q / 2 if t is None else t
    w = _thick(X.strings, X.profile.m, t, {})
    return (w is not None, StringSet(X.profile, w) if w is not None else None)


def _winning(X: frozenset, depth: int, memo: dict) -> frozenset:
    key = (X, depth)
    if key in memo:
        return memo[key]
    if depth == 0:
        got = frozenset({()}) if X else frozenset()
    else:
        counts: Counter = Counter()
        for sub in _children(X).values():
            counts.update(_winning(sub, depth - 1, memo))
        got = frozenset((k,) + w for w, c in counts.items() for k in range(1, c + 1))
    memo[key] = got
    return got


def winning_set(X: StringSet) -> list[tuple[int, ...]]:
    """Branching structures of uniform subtrees of ``T_X``, sorted."""
    return sorted(_winning(X.strings, X.profile.m, {}))


def has_uniform_subtree(tree: PrefixTree, w: Sequence[int], prefix: tuple[int, ...] = ()) -> bool:
    """Top-down search for a subtree whose depth-i vertices all have exactly ``w_i`` children."""
    if len(prefix) == tree.m:
        return True
    need = w[len(prefix)]
    good = 0
    for c in tree.nodes[prefix]:
        if has_uniform_subtree(tree, w, prefix + (c,)):
            good += 1
            if good >= need:
                return True
    return False


def winning_set_bruteforce(X: StringSet) -> list[tuple[int, ...]]:
    q, m = X.profile.q, X.profile.m
    if q ** m > 4096:
        raise ValueError("brute force limited to q^m <= 4096")
    if not X.strings:
        return []
    tree = prefix_tree(X)
    return [w for w in product(range(1, q + 1), repeat=m) if has_uniform_subtree(tree, w)]


@dataclass
class WinningReport:
    size_w: int
    size_x: int
    oracle_agrees: Optional[bool]

    @property
    def ok(self) -> bool:
        return self.size_w == self.size_x and self.oracle_agrees is not False


def verify_winning_size(X: StringSet) -> WinningReport:
    W = winning_set(X)
    agrees = None
    if X.profile.q ** X.profile.m <= 4096:
        agrees = W == winning_set_bruteforce(X)
    rep = WinningReport(len(W), len(X), agrees)
    assert rep.ok, rep
    return rep


def project_mask(X: StringSet, I: int) -> StringSet:
    return X.project([i for i in range(X.profile.m) if (I >> i) & 1])


@dataclass
class ProjectionReport:
    family: list[int]
    density: float
    bound: float
    phi_image: list[int]

    @property
    def image_inside_family(self) -> bool:
        return set(self.phi_image) <= set(self.family)

    @property
    def ok(self) -> bool:
        return self.density >= self.bound * (1 - 1e-9) and self.image_inside_family


def phi_image(X: StringSet, eps: float) -> list[int]:
    """``{i : w_i > (1/2+eps)q}`` over all ``w`` in the winning set."""
    t = (0.5 + eps) * X.profile.q
    m = X.profile.m
    return sorted({sum(1 << i for i in range(m) if w[i] > t) for w in _winning(X.strings, m, {})})


def density_bound(X: StringSet, eps: float) -> float:
    """Guaranteed fraction of thick projections: ``2^(-2 log(e) eps m) |X| / q^m``."""
    q, m = X.profile.q, X.profile.m
    return 2 ** (-2 * LOG2E * eps * m) * len(X) / q ** m


def thick_projections(X: StringSet, eps: float) -> ProjectionReport:
    """All ``I`` with ``X|_I`` prefix thick at degree ``(1/2+eps)q``, plus the density check.

    Every set in the image of the winning set under ``phi`` must lie in the
    family.  The converse fails in general: for ``X = {00, 11}`` both
    singletons are in the family but ``W(X) = {(2, 1)}``.
    """
    q, m = X.profile.q, X.profile.m
    if m > 16:
        raise ValueError("2^m subsets are enumerated; m must be at most 16")
    t = (0.5 + eps) * q
    family = [I for I in range(1 << m) if _thick(project_mask(X, I).strings, bin(I).count("1"), t, {}) is not None]
    rep = ProjectionReport(family, len(family) / 2 ** m, density_bound(X, eps), phi_image(X, eps))
    assert rep.ok, rep
    return rep


def shattered_sets(X: StringSet) -> list[int]:
    """Coordinate sets ``I`` on which ``X`` realises every binary pattern (``q = 2``)."""
    m = X.profile.m
    out = []
    for I in range(1 << m):
        k = bin(I).count("1")
        if len(project_mask(X, I).strings) == 2 ** k:
            out.append(I)
    return out


def intersect_witness(X: StringSet, Y: StringSet) -> Optional[tuple[int, ...]]:
    """Common string found by descending through common children of the thick witnesses."""
    if X.profile != Y.profile:
        raise ValueError("string sets use different alphabet profiles")
    tx, wx = is_prefix_thick(X)
    ty, wy = is_prefix_thick(Y)
    if not (tx and ty):
        return None
    A, B = prefix_tree(wx), prefix_tree(wy)
    prefix: tuple[int, ...] = ()
    for _ in range(X.profile.m):
        shared = sorted(set(A.nodes[prefix]) & set(B.nodes[prefix]))
        assert shared, "thick witnesses without a common child"
        prefix = prefix + (shared[0],)
    assert prefix in X.strings and prefix in Y.strings
    return prefix
