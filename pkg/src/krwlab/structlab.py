"""Transcript contexts and the lower-bound pipeline at desk scale.

A context fixes a protocol for the multiplexor composition and a transcript
``pi``, and records for each inner function ``g`` the matrices consistent with
``pi`` on either side.  Everything downstream (aliveness, characteristic
graphs, the ``G'`` construction, the barrier) reads those sets.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from .boolcore import (
    LinearCode, Matrix, TruthTable, apply_rowwise, balanced_functions, bit, coset_of, cosets,
    weight,
)
from .detcc import (
    BudgetExceeded, NEG_INF, ProtocolTree, SearchBudget, DEFAULT_BUDGET, find_fortified_subset,
    formula_complexity_rect, iter_bits, popcount,
)
from .halfduplex import RECV, S0, S1, HDProtocol, HDTree, Path, consistent_inputs
from .ndcc import SimpleGraph, chromatic_number, max_clique
from .prefixthick import AlphabetProfile, StringSet, intersect_witness, is_prefix_thick, thick_projections
from .relations import BOTTOM, MuxInput, Relation, compose_strong, mux_compose
from .reports import FAIL, INFEASIBLE, PASS, VACUOUS, CheckReport

LOG2E = math.log2(math.e)
SLACK = 1e-9


# Contexts ------------------------------------------------------------------

@dataclass
class TranscriptContext:
    f: TruthTable
    n: int
    pi: str
    xs: dict[TruthTable, tuple[Matrix, ...]]
    ys: dict[TruthTable, tuple[Matrix, ...]]

    @property
    def m(self) -> int:
        return self.f.arity

    def X(self, g: TruthTable, a: Optional[int] = None) -> tuple[Matrix, ...]:
        got = self.xs.get(g, ())
        return got if a is None else tuple(X for X in got if apply_rowwise(g, X) == a)

    def Y(self, g: TruthTable, b: Optional[int] = None) -> tuple[Matrix, ...]:
        got = self.ys.get(g, ())
        return got if b is None else tuple(Y for Y in got if apply_rowwise(g, Y) == b)

    def A(self, g: TruthTable) -> tuple[int, ...]:
        return tuple(sorted({apply_rowwise(g, X) for X in self.xs.get(g, ())}))

    def B(self, g: TruthTable) -> tuple[int, ...]:
        return tuple(sorted({apply_rowwise(g, Y) for Y in self.ys.get(g, ())}))

    @cached_property
    def V(self) -> tuple[TruthTable, ...]:
        return tuple(sorted((g for g in self.xs if self.xs[g] and self.ys.get(g)), key=lambda t: t.bits))


def derive_context(hd: HDProtocol, rel: Relation, pi: str) -> TranscriptContext:
    """Consistency sets of ``pi`` split by inner function."""
    f = TruthTable.from_hex(rel.params["m"], rel.params["f"])
    cons = consistent_inputs(hd, pi)
    xs: dict[TruthTable, list] = defaultdict(list)
    ys: dict[TruthTable, list] = defaultdict(list)
    for k in iter_bits(cons.xs):
        u = rel.x_domain[k]
        xs[u.function].append(u.payload)
    for k in iter_bits(cons.ys):
        v = rel.y_domain[k]
        ys[v.function].append(v.payload)
    return TranscriptContext(f, rel.params["n"], pi, {g: tuple(v) for g, v in xs.items()},
                             {g: tuple(v) for g, v in ys.items()})


def preimage_size(g: TruthTable, a: int, m: int) -> int:
    """``|g^{-1}(a)|`` for the row-wise extension of ``g`` to ``m`` rows."""
    ones, zeros = len(g.ones()), len(g.zeros())
    return math.prod(ones if bit(a, i, m) else zeros for i in range(m))


# Aliveness -----------------------------------------------------------------

@dataclass(frozen=True)
class LiveParams:
    gamma: float
    kappa: int = 8
    eps: float = 0.0
    beta: float = 0.12

    def constraint_margin(self) -> float:
        """Slack in ``gamma <= min{2 log e (beta^2 - eps), (1/2 - beta)^2 / 3 - 4 log e eps}``."""
        cap = min(2 * LOG2E * (self.beta ** 2 - self.eps), (0.5 - self.beta) ** 2 / 3 - 4 * LOG2E * self.eps)
        return cap - self.gamma


PUBLISHED_PARAMS = LiveParams(gamma=0.041, kappa=8, eps=0.0001, beta=0.12)
BARRIER_PARAMS = LiveParams(gamma=0.64, kappa=8)


class _LCache:
    def __init__(self, m: int, budget: SearchBudget = DEFAULT_BUDGET):
        self.m, self.budget, self.memo = m, budget, {}

    def __call__(self, A: Iterable[int], B: Iterable[int]) -> int:
        key = (tuple(sorted(A)), tuple(sorted(B)))
        if key not in self.memo:
            self.memo[key] = formula_complexity_rect(key[0], key[1], self.m, self.budget)[0]
        return self.memo[key]


def log2_or_neg_inf(v: float) -> float:
    return math.log2(v) if v > 0 else NEG_INF


def check_alive(ctx: TranscriptContext, V: Sequence[TruthTable], params: LiveParams,
                budget: SearchBudget = DEFAULT_BUDGET) -> CheckReport:
    """Evaluate the three aliveness bullets on ``V``, reporting margins.

    ``infeasible`` means the complexity bullet cannot hold for any rectangle at
    this ``m``: a KW rectangle ``A x B`` always has ``L <= min(|A|, |B|) * m``.
    """
    m, n = ctx.m, ctx.n
    if not set(V) <= set(ctx.V):
        raise ValueError("V must be a subset of the context's function set")
    if any(not g.is_balanced for g in V):
        raise ValueError("aliveness is defined for balanced functions only")
    v0 = len(balanced_functions(n))
    need_l = (1 - params.gamma) * m + params.kappa * (math.log2(m) if m > 0 else 0) + params.kappa
    L = _LCache(m, budget)

    size_margin = len(V) - 2 ** -m * v0
    size_margin_vpi = sum(g.is_balanced for g in ctx.V) - 2 ** -m * v0
    l_margins, dens_margins = {}, {}
    for g in V:
        A, B = ctx.A(g), ctx.B(g)
        l_margins[g.to_hex()] = log2_or_neg_inf(L(A, B)) - need_l
        worst = math.inf
        for a in A:
            worst = min(worst, len(ctx.X(g, a)) / preimage_size(g, a, m) - 2 ** (-params.gamma * m + 1))
        for b in B:
            worst = min(worst, len(ctx.Y(g, b)) / preimage_size(g, b, m) - 2 ** (-params.gamma * m + 1))
        dens_margins[g.to_hex()] = worst
    l_ok = bool(V) and all(v >= -SLACK for v in l_margins.values())
    d_ok = all(v >= -SLACK for v in dens_margins.values())
    s_ok = size_margin >= -SLACK
    ceiling = (m - 1) + math.log2(m) if m > 0 else 0.0
    details = {
        "size_margin": size_margin, "size_margin_on_V_pi": size_margin_vpi,
        "L_required": need_l, "L_margins": l_margins, "density_margins": dens_margins,
        "bullets": [s_ok, l_ok, d_ok], "L_ceiling": ceiling,
    }
    if s_ok and l_ok and d_ok:
        status = PASS
    elif need_l > ceiling + SLACK:
        status = INFEASIBLE
    else:
        status = FAIL
    return CheckReport("alive", status, details)


# The candidate-transcript algorithm ---------------------------------------

@dataclass
class IterationLog:
    speaker: str
    sigma: int
    L_before: int
    L_after: int
    sizes_before: dict[int, int]
    sizes_after: dict[int, int]
    tracked_before: int
    tracked_after: int


@dataclass
class CandidateRun:
    g: TruthTable
    transcript: str
    log: list[IterationLog]
    A: tuple[int, ...]
    B: tuple[int, ...]
    L_final: int
    at_leaf: bool

    def halving_holds(self) -> bool:
        for it in self.log:
            if 2 * it.L_after < it.L_before:
                return False
            for key, after in it.sizes_after.items():
                if 2 * after < it.sizes_before[key]:
                    return False
        return True

    def leaf_consistent(self) -> bool:
        """A leaf can only be reached once the tracked rectangle is solved by one coordinate."""
        return not self.at_leaf or self.L_final <= 1


def candidate_transcript(pg: ProtocolTree, f: TruthTable, g: TruthTable, target_len: int,
                         inner: Optional[Relation] = None, budget: SearchBudget = DEFAULT_BUDGET) -> CandidateRun:
    """Bit-by-bit transcript of ``pg`` keeping ``L`` of the tracked rectangle within a factor 2 per bit.

    The tracked sets are the majority sides ``A_sigma`` (resp. ``B_sigma``);
    a minority string may keep a few consistent matrices but is dropped, since
    the factor-2 shrink is only promised for the majority side.
    """
    inner = inner or compose_strong(f, g)
    m = f.arity
    L = _LCache(m, budget)
    xa = [apply_rowwise(g, X) for X in inner.x_domain]
    yb = [apply_rowwise(g, Y) for Y in inner.y_domain]

    def split(mask: int, labels: list[int]) -> dict[int, int]:
        out: dict[int, int] = defaultdict(int)
        for k in iter_bits(mask):
            out[labels[k]] |= 1 << k
        return out

    xsets = split(pg.root.xs, xa)
    ysets = split(pg.root.ys, yb)
    v, pi, log = pg.root, "", []
    while len(pi) < target_len and v.children is not None:
        alice = v.owner == "A"
        own = xsets if alice else ysets
        other = ysets if alice else xsets
        before_L = L(xsets, ysets)
        parts: dict[int, dict[int, int]] = {0: {}, 1: {}}
        for key, mask in own.items():
            c1 = (v.children[1].xs if alice else v.children[1].ys) & mask
            ones = popcount(c1)
            sigma_key = 1 if 2 * ones > popcount(mask) else 0
            parts[sigma_key][key] = c1 if sigma_key else mask & ~c1
        scores = [L(parts[s], other) if alice else L(other, parts[s]) for s in (0, 1)]
        sigma = 1 if scores[1] > scores[0] else 0
        sizes_before = {key: popcount(mask) for key, mask in own.items() if key in parts[sigma]}
        if alice:
            xsets = parts[sigma]
        else:
            ysets = parts[sigma]
        sizes_after = {key: popcount(mask) for key, mask in parts[sigma].items()}
        log.append(IterationLog("A" if alice else "B", sigma, before_L, scores[sigma], sizes_before, sizes_after,
                                len(own), len(parts[sigma])))
        v = v.children[sigma]
        pi += str(sigma)
    return CandidateRun(g, pi, log, tuple(sorted(xsets)), tuple(sorted(ysets)), L(xsets, ysets), v.children is None)


def popular_transcript(candidates: Mapping[TruthTable, str]) -> tuple[str, tuple[TruthTable, ...]]:
    """Most frequent transcript (smaller string on ties) and the functions that produced it."""
    if not candidates:
        raise ValueError("no candidates")
    lengths = {len(p) for p in candidates.values()}
    if len(lengths) > 1:
        raise ValueError("candidate transcripts differ in length")
    counts = Counter(candidates.values())
    pi = min(counts, key=lambda p: (-counts[p], p))
    V = tuple(sorted((g for g, p in candidates.items() if p == pi), key=lambda t: t.bits))
    assert len(V) * len(counts) >= len(candidates)
    return pi, V


# Characteristic graphs ----------------------------------------------------

MAX_GRAPH_VERTICES = 128


@dataclass
class CharGraph:
    vertices: tuple[TruthTable, ...]
    graph: SimpleGraph
    strong: bool

    @property
    def edge_count(self) -> int:
        return len(self.graph.edges)

    def labelled_edges(self) -> list[tuple[str, str]]:
        return [(self.vertices[u].to_hex(), self.vertices[v].to_hex()) for u, v in self.graph.edges]


def _intersects(ctx: TranscriptContext, gA: TruthTable, gB: TruthTable) -> bool:
    return bool(set(ctx.X(gA)) & set(ctx.Y(gB)))


def weak_intersection_witness(ctx: TranscriptContext, gA: TruthTable, gB: TruthTable) -> Optional[tuple[Matrix, Matrix]]:
    """``X`` in ``X_pi(gA)``, ``Y`` in ``Y_pi(gB)`` agreeing on every row where ``gA(X)`` and ``gB(Y)`` differ."""
    m = ctx.m
    ys = [(Y, apply_rowwise(gB, Y)) for Y in ctx.Y(gB)]
    for X in ctx.X(gA):
        a = apply_rowwise(gA, X)
        for Y, b in ys:
            d = a ^ b
            if all(X[i] == Y[i] for i in range(m) if bit(d, i, m)):
                return X, Y
    return None


def char_graph(ctx: TranscriptContext, strong: bool, vertices: Optional[Sequence[TruthTable]] = None) -> CharGraph:
    verts = tuple(ctx.V if vertices is None else vertices)
    if len(verts) > MAX_GRAPH_VERTICES:
        raise BudgetExceeded(f"characteristic graph limited to {MAX_GRAPH_VERTICES} vertices")
    if strong:
        adj = lambda p, q: weak_intersection_witness(ctx, p, q) is not None
    else:
        adj = lambda p, q: _intersects(ctx, p, q)
    edges = [(u, v) for u in range(len(verts)) for v in range(u + 1, len(verts))
             if adj(verts[u], verts[v]) or adj(verts[v], verts[u])]
    return CharGraph(verts, SimpleGraph.from_edges(len(verts), edges), strong)


def chromatic_excess(chi: int) -> float:
    """``loglog chi - logloglog chi - 4``, or -inf where the logs are undefined or negative."""
    if chi <= 2:
        return NEG_INF
    ll = math.log2(math.log2(chi))
    if ll <= 0:
        return NEG_INF
    return ll - math.log2(ll) - 4


def verify_chromatic_bound(hd: HDProtocol, rel: Relation, pi: str, strong: bool) -> CheckReport:
    """``depth >= |pi| + max(0, loglog chi - logloglog chi - 4)``; vacuous when the excess is not positive."""
    ctx = derive_context(hd, rel, pi)
    details: dict[str, Any] = {"pi": pi, "depth": hd.depth, "V_size": len(ctx.V)}
    if not ctx.V:
        return CheckReport("chromatic-bound", VACUOUS, {**details, "reason": "empty function set"})
    G = char_graph(ctx, strong)
    chi = chromatic_number(G.graph)
    excess = chromatic_excess(chi)
    rhs = len(pi) + max(0.0, excess)
    holds = hd.depth >= rhs - SLACK
    details.update(chi=chi, clique=max_clique(G.graph), excess=excess, rhs=rhs, holds=holds,
                   informative=excess > 0)
    if excess <= 0:
        return CheckReport("chromatic-bound", VACUOUS, details)
    return CheckReport("chromatic-bound", PASS if holds else FAIL, details)


# The G' construction ------------------------------------------------------

def _row_strings(g: TruthTable, vec: int, mats: Iterable[Matrix], m: int, coords: Sequence[int]) -> StringSet:
    """Matrices as strings over the per-row alphabets ``g^{-1}(vec_i)``, restricted to ``coords``."""
    alph = [tuple(sorted(g.ones() if bit(vec, i, m) else g.zeros())) for i in coords]
    pos = [{r: k for k, r in enumerate(a)} for a in alph]
    strings = frozenset(tuple(pos[t][X[i]] for t, i in enumerate(coords)) for X in mats)
    return StringSet(AlphabetProfile(tuple(alph)), strings)


def _coords(I: int, m: int) -> list[int]:
    return [i for i in range(m) if (I >> i) & 1]


def _agree_outside(a: int, b: int, I: int, m: int) -> bool:
    return all(bit(a, i, m) == bit(b, i, m) for i in range(m) if not (I >> i) & 1)


def _thick_family(g: TruthTable, vec: int, mats, m: int, within: int, eps: float) -> list[int]:
    """Subsets of ``within`` on which the restricted matrices are thick, as masks over ``[m]``."""
    coords = _coords(within, m)
    S = _row_strings(g, vec, mats, m, coords)
    fam = thick_projections(S, eps).family
    return [sum(1 << coords[t] for t in iter_bits(J)) for J in fam]


def _pick_subset(counts: Counter) -> tuple[int, int]:
    """Averaging choice: most supporters, then larger set, then smaller mask."""
    I = min(counts, key=lambda J: (-counts[J], -popcount(J), J))
    return I, counts[I]


@dataclass
class GTriplet:
    g: TruthTable
    I: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None
    stages: dict[str, Any] = field(default_factory=dict)
    failure: Optional[str] = None


@dataclass
class GPrimeResult:
    report: CheckReport
    V_prime: tuple[TruthTable, ...] = ()
    I: Optional[int] = None
    a: Optional[int] = None
    b: Optional[int] = None
    graph: Optional[CharGraph] = None
    per_function: list[GTriplet] = field(default_factory=list)


def _triplet_for(ctx: TranscriptContext, g: TruthTable, params: LiveParams, budget: SearchBudget) -> GTriplet:
    m = ctx.m
    full = (1 << m) - 1
    rho = 1 / (4 * m)
    L = _LCache(m, budget)
    res = GTriplet(g)
    A, B = ctx.A(g), ctx.B(g)

    fort_a = find_fortified_subset(A, B, rho, m, "A", budget)
    A0 = fort_a.subset
    min_a = (0.5 - params.beta) * m
    votes: Counter = Counter()
    for a in A0:
        for I in _thick_family(g, a, ctx.X(g, a), m, full, params.eps):
            if popcount(I) >= min_a - SLACK:
                votes[I] += 1
    if not votes:
        res.failure = "no thick projection of size >= (1/2-beta)m on Alice's side"
        return res
    I1, _ = _pick_subset(votes)
    A1 = tuple(a for a in A0 if I1 in _thick_family(g, a, ctx.X(g, a), m, full, params.eps))

    fort_b = find_fortified_subset(A1, B, rho, m, "B", budget)
    B0 = fort_b.subset
    min_b = (0.5 - params.beta) * popcount(I1)
    votes = Counter()
    fams_b = {b: _thick_family(g, b, ctx.Y(g, b), m, I1, params.eps) for b in B0}
    for b in B0:
        for I in fams_b[b]:
            if popcount(I) >= min_b - SLACK:
                votes[I] += 1
    if not votes:
        res.failure = "no thick projection of size >= (1/2-beta)|I1| on Bob's side"
        return res
    Ig, _ = _pick_subset(votes)
    B1 = tuple(b for b in B0 if Ig in fams_b[b])
    l11 = L(A1, B1)
    res.stages = {
        "A": len(A), "A0": len(A0), "A1": len(A1), "B": len(B), "B0": len(B0), "B1": len(B1),
        "I1": I1, "L_AB": L(A, B), "L_A0B": fort_a.L_subset, "L_A1B0": fort_b.L_subset, "L_A1B1": l11,
        "threshold_log": (m - popcount(Ig)) + math.log2(m),
    }
    pairs = [(a, b) for a in A1 for b in B1 if _agree_outside(a, b, Ig, m)]
    if not pairs:
        res.failure = (f"no a, b agreeing outside I: L(A1 x B1) = {l11} vs "
                       f"2^(|[m]-I| + log m) = {2 ** res.stages['threshold_log']:.3f}")
        return res
    res.I, (res.a, res.b) = Ig, min(pairs)
    return res


def build_Gprime(ctx: TranscriptContext, V: Sequence[TruthTable], params: LiveParams,
                 budget: SearchBudget = DEFAULT_BUDGET) -> GPrimeResult:
    """Per-function triplets ``(I_g, a_g, b_g)``, the modal triplet, and the induced strong subgraph."""
    alive = check_alive(ctx, V, params, budget)
    if not alive.passed:
        return GPrimeResult(CheckReport("G-prime", alive.status, {"alive": alive.to_dict()}))
    m, n = ctx.m, ctx.n
    per = [_triplet_for(ctx, g, params, budget) for g in V]
    good = [t for t in per if t.failure is None]
    if not good:
        return GPrimeResult(CheckReport("G-prime", FAIL, {"failures": {t.g.to_hex(): t.failure for t in per}}),
                            per_function=per)
    counts = Counter((t.I, t.a, t.b) for t in good)
    (I, a, b) = min(counts, key=lambda k: (-counts[k], k))
    Vp = tuple(t.g for t in good if (t.I, t.a, t.b) == (I, a, b))
    degree = (0.5 + params.eps) * 2 ** (n - 1)
    coords = _coords(I, m)
    bullet2 = _agree_outside(a, b, I, m)
    thick = {}
    for g in Vp:
        tx = is_prefix_thick(_row_strings(g, a, ctx.X(g, a), m, coords), degree)[0]
        ty = is_prefix_thick(_row_strings(g, b, ctx.Y(g, b), m, coords), degree)[0]
        thick[g.to_hex()] = tx and ty
    bullet3 = all(thick.values())
    bullet1 = len(Vp) * len(counts) >= len(good)
    v0 = len(balanced_functions(n))
    details = {
        "I": I, "a": a, "b": b, "V_prime": [g.to_hex() for g in Vp], "distinct_triplets": len(counts),
        "bullets": [bullet1, bullet2, bullet3], "published_size_margin": len(Vp) - 2 ** (-4 * m) * v0,
        "thick": thick, "failures": {t.g.to_hex(): t.failure for t in per if t.failure},
    }
    graph = char_graph(ctx, strong=True, vertices=Vp)
    details["edges"] = graph.edge_count
    status = PASS if bullet1 and bullet2 and bullet3 else FAIL
    return GPrimeResult(CheckReport("G-prime", status, details), Vp, I, a, b, graph, per)


# Pair events ---------------------------------------------------------------

@dataclass
class PairEvents:
    events: tuple[bool, bool, bool]
    intersect: bool
    witness: Optional[tuple[int, ...]]

    @property
    def all_events(self) -> bool:
        return all(self.events)

    @property
    def implication_holds(self) -> bool:
        return not self.all_events or self.intersect


def _padded(alphabets: list[tuple[int, ...]]) -> AlphabetProfile:
    q = max((len(s) for s in alphabets), default=0) or 1
    return AlphabetProfile(tuple(tuple(s) + tuple(("pad", k) for k in range(q - len(s))) for s in alphabets))


def check_pair_events(gA: TruthTable, gB: TruthTable, a: int, b: int, I: int,
                      Xs: Iterable[tuple[int, ...]], Ys: Iterable[tuple[int, ...]], eps: float, n: int, m: int) -> PairEvents:
    """Evaluate the three events for restricted sets ``Xs``, ``Ys`` (rows of the coordinates in ``I``).

    The intersected alphabets can have different sizes; they are padded with
    dummy symbols to a common size, which leaves thickness unchanged.
    """
    if not (gA.is_balanced and gB.is_balanced):
        raise ValueError("pair events need balanced functions")
    coords = _coords(I, m)
    Xs, Ys = frozenset(map(tuple, Xs)), frozenset(map(tuple, Ys))
    pre_a = [set(gA.ones() if bit(a, i, m) else gA.zeros()) for i in coords]
    pre_b = [set(gB.ones() if bit(b, i, m) else gB.zeros()) for i in coords]
    for s in Xs:
        if len(s) != len(coords) or any(r not in pre_a[t] for t, r in enumerate(s)):
            raise ValueError("Xs must lie inside gA^{-1}(a) restricted to I")
    for s in Ys:
        if len(s) != len(coords) or any(r not in pre_b[t] for t, r in enumerate(s)):
            raise ValueError("Ys must lie inside gB^{-1}(b) restricted to I")
    sigma = [tuple(sorted(pa & pb)) for pa, pb in zip(pre_a, pre_b)]
    e1 = all(len(s) <= (1 + eps / 2) * 2 ** (n - 2) + SLACK for s in sigma)
    prof = _padded(sigma)
    t = (0.5 + eps / 2) * 2 ** (n - 2)

    def inside(S):
        return StringSet(prof, frozenset(prof.encode(s) for s in S if all(r in sigma[k] for k, r in enumerate(s))))

    Xr, Yr = inside(Xs), inside(Ys)
    e2 = is_prefix_thick(Xr, t)[0]
    e3 = is_prefix_thick(Yr, t)[0]
    common = Xs & Ys
    witness = None
    if e1 and e2 and e3:
        w = intersect_witness(Xr, Yr)
        assert w is not None, "thick restricted sets without a common string"
        witness = prof.decode(w)
        assert witness in common
    return PairEvents((e1, e2, e3), bool(common), witness)


# Scheduled standard protocols and the barrier ----------------------------

class ScheduledTree(HDTree):
    """One side of a standard protocol with a fixed speaking order.

    ``message(input, transcript)`` gives the speaker's next bit.  Inputs are
    assumed to sit on their own path, which is all the execution and
    consistency routines ever ask about.
    """

    def __init__(self, schedule: str, side: str, domain: Sequence[Any],
                 message: Callable[[Any, str], int], output: Callable[[str], Any]):
        self.schedule, self.side, self.domain = schedule, side, domain
        self.message, self._output = message, output
        self.depth = len(schedule)
        self.domain_size = len(domain)

    def action(self, x: int, path: Path) -> Optional[str]:
        r = len(path)
        if self.schedule[r] != self.side:
            return RECV
        return S1 if self.message(self.domain[x], "".join(lab[1] for lab in path)) else S0

    def output(self, path: Path) -> Any:
        return self._output("".join(lab[1] for lab in path))


def _bits(v: int, k: int) -> str:
    return format(v, f"0{k}b") if k else ""


def _nbits(count: int) -> int:
    return max(0, math.ceil(math.log2(count))) if count > 1 else 0


@dataclass
class BarrierResult:
    protocol: HDProtocol
    relation: Relation
    pi: str
    coset: int
    context: TranscriptContext
    graph: CharGraph
    coset_L: dict[int, int]
    L_f: int
    report: CheckReport
    alive: CheckReport


def _barrier_f_default(m: int) -> TruthTable:
    """Self-dual-complement threshold: ``f(~x) = 1 - f(x)`` so each repetition-code coset splits."""
    return TruthTable.from_function(m, lambda x: int(weight(x) < m / 2 or (2 * weight(x) == m and not bit(x, 0, m))))


def barrier_protocol(f: TruthTable, code: LinearCode, n: int, rel: Relation) -> tuple[HDProtocol, dict]:
    """Standard protocol for the strong multiplexor composition opening with four announcements.

    Order: first-column weights (Alice, Bob), cosets of ``g(X)`` and ``g(Y)``
    (Alice, Bob), Alice's truth table, Bob's equality bit, Alice's codeword
    index inside her coset, Bob's row ``i``, Alice's row ``X_i``, Bob's column ``j``.
    """
    m = f.arity
    reps = cosets(code)
    rep_index = {r: k for k, r in enumerate(reps)}
    words = sorted(code.codewords)
    wb, cb, kb = _nbits(m + 1), _nbits(len(reps)), _nbits(len(words))
    ib, jb, tb = _nbits(m), _nbits(n), 1 << n
    segs = [("A", wb), ("B", wb), ("A", cb), ("B", cb), ("A", tb), ("B", 1), ("A", kb), ("B", ib), ("A", n), ("B", jb)]
    starts, pos = [], 0
    for _, k in segs:
        starts.append(pos)
        pos += k
    schedule = "".join(s * k for s, k in segs)

    def seg(pi: str, k: int) -> str:
        return pi[starts[k]: starts[k] + segs[k][1]]

    def col0(M: Matrix) -> int:
        return sum(bit(r, 0, n) for r in M)

    def alice_a(pi: str) -> int:
        rep = reps[int(seg(pi, 2) or "0", 2)]
        return rep ^ words[int(seg(pi, 6) or "0", 2)]

    def alice_msg(u: MuxInput, pi: str) -> int:
        r = len(pi)
        k = max(i for i, s in enumerate(starts) if s <= r and segs[i][1] > 0 and s + segs[i][1] > r)
        off = r - starts[k]
        a = apply_rowwise(u.function, u.payload)
        if k == 0:
            return int(_bits(col0(u.payload), wb)[off])
        if k == 2:
            return int(_bits(rep_index[coset_of(code, a)], cb)[off])
        if k == 4:
            return bit(u.function.bits, off, tb)
        if seg(pi, 5) != "1":
            return 0
        if k == 6:
            return int(_bits(words.index(a ^ coset_of(code, a)), kb)[off])
        i = int(seg(pi, 7) or "0", 2)
        return bit(u.payload[i], off, n)

    def bob_msg(v: MuxInput, pi: str) -> int:
        r = len(pi)
        k = max(i for i, s in enumerate(starts) if s <= r and segs[i][1] > 0 and s + segs[i][1] > r)
        off = r - starts[k]
        b = apply_rowwise(v.function, v.payload)
        if k == 1:
            return int(_bits(col0(v.payload), wb)[off])
        if k == 3:
            return int(_bits(rep_index[coset_of(code, b)], cb)[off])
        if k == 5:
            return int(int(seg(pi, 4), 2) == v.function.bits)
        if seg(pi, 5) != "1":
            return 0
        a = alice_a(pi)
        i = next((i for i in range(m) if bit(a, i, m) != bit(b, i, m)), 0)
        if k == 7:
            return int(_bits(i, ib)[off])
        row = int(seg(pi, 8), 2)
        j = next((j for j in range(n) if bit(row, j, n) != bit(v.payload[i], j, n)), 0)
        return int(_bits(j, jb)[off])

    def output(pi: str) -> Any:
        if seg(pi, 5) != "1":
            return BOTTOM
        return (int(seg(pi, 7) or "0", 2), int(seg(pi, 9) or "0", 2))

    hd = HDProtocol(ScheduledTree(schedule, "A", rel.x_domain, alice_msg, output),
                    ScheduledTree(schedule, "B", rel.y_domain, bob_msg, output))
    layout = {"schedule": schedule, "weight_bits": wb, "coset_bits": cb, "announcement_length": 2 * wb + 2 * cb}
    return hd, layout


def run_scheduled(hd: HDProtocol, x: int, y: int) -> tuple[str, Any]:
    """Direct execution of a standard scheduled protocol."""
    A, B = hd.alice, hd.bob
    assert isinstance(A, ScheduledTree) and isinstance(B, ScheduledTree)
    pi = ""
    for owner in A.schedule:
        pi += str(A.message(A.domain[x], pi) if owner == "A" else B.message(B.domain[y], pi))
    return pi, A._output(pi)


def barrier_construct(f: Optional[TruthTable], code: LinearCode, wx: int, wy: int, n: int = 2,
                      params: LiveParams = BARRIER_PARAMS, budget: SearchBudget = DEFAULT_BUDGET) -> BarrierResult:
    """Announcement transcript whose strong characteristic graph has no edges."""
    m = code.length
    f = f or _barrier_f_default(m)
    if f.arity != m:
        raise ValueError("f and the code have different lengths")
    d = code.distance
    if not (0 <= wx <= m and 0 <= wy <= m):
        raise ValueError("weights must lie in 0..m")
    if not wy - wx > m - d:
        raise ValueError(f"need w_Y - w_X > m - d(C), got {wy - wx} <= {m - d}")
    L = _LCache(m, budget)
    ones, zeros = f.ones(), f.zeros()
    L_f = L(ones, zeros)
    reps = cosets(code)
    members = {r: [r ^ c for c in code.codewords] for r in reps}
    coset_L = {r: L([x for x in members[r] if f(x)], zeros) for r in reps}
    W = min(reps, key=lambda r: (-coset_L[r], r))
    A_W = [x for x in members[W] if f(x)]
    B_W = [x for x in members[W] if not f(x)]
    if not A_W or not B_W:
        raise ValueError("the chosen coset misses one side of f")
    rel = mux_compose(f, n, strong=True, max_cells=m * (1 << n), check_total=False)
    hd, layout = barrier_protocol(f, code, n, rel)
    wb, cb = layout["weight_bits"], layout["coset_bits"]
    k = reps.index(W)
    pi = _bits(wx, wb) + _bits(wy, wb) + _bits(k, cb) + _bits(k, cb)
    ctx = derive_context(hd, rel, pi)
    graph = char_graph(ctx, strong=True)
    chi = chromatic_number(graph.graph) if graph.vertices else 0
    V = tuple(g for g in ctx.V if g.is_balanced and _stays_balanced(g))
    alive = check_alive(ctx, V, params, budget)
    total = sum(coset_L.values())
    details = {
        "pi": pi, "coset": W, "edges": graph.edge_count, "chi": chi, "V_pi": len(ctx.V),
        "L_f": L_f, "coset_L": coset_L, "coset_sum_ok": total >= L_f,
        "coset_max_ok": len(reps) * coset_L[W] >= L_f, "alive_status": alive.status,
        "A_pi_equals_A_W": all(ctx.A(g) == tuple(sorted(A_W)) for g in ctx.V),
        "B_pi_equals_B_W": all(ctx.B(g) == tuple(sorted(B_W)) for g in ctx.V),
    }
    ok = graph.edge_count == 0 and details["coset_sum_ok"] and details["coset_max_ok"]
    report = CheckReport("barrier", PASS if ok else FAIL, details)
    return BarrierResult(hd, rel, pi, W, ctx, graph, coset_L, L_f, report, alive)


def _stays_balanced(g: TruthTable) -> bool:
    """Balanced after fixing the first input bit to either value."""
    n = g.arity
    half = 1 << (n - 1)
    lo = sum(g(x) for x in range(half))
    hi = sum(g(x) for x in range(half, 2 * half))
    return 2 * lo == half and 2 * hi == half
