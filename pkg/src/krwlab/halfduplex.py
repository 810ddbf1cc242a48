"""Half-duplex protocols with an adversary.

Each player owns a full 4-ary tree whose edges are labelled ``r0, r1, s0, s1``
(receive or send a bit).  Trees are described by behaviour: ``action(x, path)``
says whether input ``x`` at the vertex reached by ``path`` sends 0, sends 1 or
receives.  The vertex sets ``X_v`` follow from that, and
:class:`ExplicitHDTree` lets tests write the sets down directly instead.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

from .boolcore import TruthTable, apply_rowwise, bit
from .detcc import ProtocolNode, ProtocolTree, validate_protocol
from .relations import BOTTOM, MuxInput, Relation, compose_standard, compose_strong, mux_compose

R0, R1, S0, S1 = "r0", "r1", "s0", "s1"
RECV = "r"
LABELS = (R0, R1, S0, S1)

Path = tuple[str, ...]


def label_bit(label: str) -> int:
    return int(label[1])


class HDTree(ABC):
    depth: int
    domain_size: int

    @abstractmethod
    def action(self, x: int, path: Path) -> Optional[str]:
        """``"s0"``, ``"s1"`` or ``"r"`` for input ``x`` at ``path``; None if ``x`` is not there."""

    @abstractmethod
    def output(self, path: Path) -> Any:
        ...

    def is_leaf(self, path: Path) -> bool:
        return len(path) >= self.depth

    def follow(self, x: int, path: Path) -> bool:
        """Whether ``x`` belongs to the vertex set at ``path``."""
        for k, lab in enumerate(path):
            if self.is_leaf(path[:k]):
                return False
            a = self.action(x, path[:k])
            if a is None or (a == RECV) != (lab[0] == "r") or (a != RECV and a != lab):
                return False
        return True

    def members(self, path: Path) -> int:
        return sum(1 << x for x in range(self.domain_size) if self.follow(x, path))

    def materialize(self, budget: int = 2_000_000) -> dict[Path, int]:
        """Vertex sets of every nonempty vertex, found by walking each input."""
        sets: dict[Path, int] = {}
        visits = 0
        for x in range(self.domain_size):
            stack: list[Path] = [()]
            while stack:
                p = stack.pop()
                visits += 1
                if visits > budget:
                    raise RuntimeError("materialisation budget exceeded")
                sets[p] = sets.get(p, 0) | (1 << x)
                if self.is_leaf(p):
                    continue
                a = self.action(x, p)
                if a == RECV:
                    stack += [p + (R0,), p + (R1,)]
                elif a in (S0, S1):
                    stack.append(p + (a,))
        return sets


class ExplicitHDTree(HDTree):
    """Tree given by its vertex sets; vertices not listed are empty."""

    def __init__(self, depth: int, domain_size: int, sets: Mapping[Path, int], outputs: Mapping[Path, Any]):
        self.depth = depth
        self.domain_size = domain_size
        self.sets = dict(sets)
        self.outputs = dict(outputs)

    def is_leaf(self, path: Path) -> bool:
        return len(path) >= self.depth or path in self.outputs

    def action(self, x: int, path: Path) -> Optional[str]:
        if not (self.sets.get(path, 0) >> x) & 1:
            return None
        for lab in (S0, S1):
            if (self.sets.get(path + (lab,), 0) >> x) & 1:
                return lab
        if (self.sets.get(path + (R0,), 0) >> x) & 1:
            return RECV
        return None

    def output(self, path: Path) -> Any:
        return self.outputs.get(path)


@dataclass
class HDProtocol:
    alice: HDTree
    bob: HDTree

    @property
    def depth(self) -> int:
        return max(self.alice.depth, self.bob.depth)


# Execution ---------------------------------------------------------------

CLASSICAL, WASTED, SILENT = "classical", "wasted", "silent"


@dataclass(frozen=True)
class Round:
    kind: str
    alice: str
    bob: str
    adversary: Optional[tuple[int, int]] = None


@dataclass(frozen=True)
class ExecutionTrace:
    rounds: tuple[Round, ...]
    alice_path: Path
    bob_path: Path
    alice_output: Any
    bob_output: Any
    simultaneous: bool

    @property
    def output(self) -> Any:
        return self.alice_output if self.agrees else None

    @property
    def agrees(self) -> bool:
        return self.simultaneous and self.alice_output == self.bob_output

    @property
    def all_classical(self) -> bool:
        return all(r.kind == CLASSICAL for r in self.rounds)

    def to_dict(self) -> dict:
        return {
            "rounds": [
                {"kind": r.kind, "alice": r.alice, "bob": r.bob, "adversary": list(r.adversary) if r.adversary else None}
                for r in self.rounds
            ],
            "alice_output": _plain_output(self.alice_output),
            "bob_output": _plain_output(self.bob_output),
            "simultaneous": self.simultaneous,
        }


def _plain_output(o):
    return list(o) if isinstance(o, tuple) else o


def execute_all(hd: HDProtocol, x: int, y: int) -> list[ExecutionTrace]:
    """Every execution on ``(x, y)``, branching over the adversary's bits at silent rounds."""
    out: list[ExecutionTrace] = []
    A, B = hd.alice, hd.bob

    def run(u: Path, v: Path, rounds: tuple[Round, ...]) -> None:
        la, lb = A.is_leaf(u), B.is_leaf(v)
        if la or lb:
            out.append(ExecutionTrace(rounds, u, v, A.output(u) if la else None, B.output(v) if lb else None, la and lb))
            return
        a, b = A.action(x, u), B.action(y, v)
        if a is None or b is None:
            raise ValueError(f"input not present at its own vertex (alice={u}, bob={v})")
        if a != RECV and b == RECV:
            run(u + (a,), v + ("r" + a[1],), rounds + (Round(CLASSICAL, a, b),))
        elif a == RECV and b != RECV:
            run(u + ("r" + b[1],), v + (b,), rounds + (Round(CLASSICAL, a, b),))
        elif a != RECV:
            run(u + (a,), v + (b,), rounds + (Round(WASTED, a, b),))
        else:
            for s in (0, 1):
                for t in (0, 1):
                    run(u + (f"r{s}",), v + (f"r{t}",), rounds + (Round(SILENT, a, b, (s, t)),))

    run((), (), ())
    return out


@dataclass
class HDReport:
    errors: list[str] = field(default_factory=list)
    pairs: int = 0
    traces: int = 0

    @property
    def ok(self) -> bool:
        return not self.errors


def _structure_errors(tree: HDTree, who: str, budget: int) -> list[str]:
    errs = []
    if isinstance(tree, ExplicitHDTree):
        sets = {p: s for p, s in tree.sets.items() if s}
        for p in tree.outputs:
            if len(p) != tree.depth and sets.get(p):
                errs.append(f"{who}: leaf at depth {len(p)} but tree depth is {tree.depth}")
    else:
        sets = tree.materialize(budget)
    root = sets.get((), 0)
    if root != (1 << tree.domain_size) - 1:
        errs.append(f"{who}: root set is not the full domain")
    for p, s in sets.items():
        if tree.is_leaf(p):
            continue
        r0, r1 = sets.get(p + (R0,), 0), sets.get(p + (R1,), 0)
        s0, s1 = sets.get(p + (S0,), 0), sets.get(p + (S1,), 0)
        if r0 != r1:
            errs.append(f"{who}: receive children differ at {p}")
        if r0 & s0 or r0 & s1 or s0 & s1:
            errs.append(f"{who}: children overlap at {p}")
        if r0 | s0 | s1 != s:
            errs.append(f"{who}: children do not cover the vertex set at {p}")
    return errs


def validate_hd(hd: HDProtocol, rel: Optional[Relation] = None, budget: int = 2_000_000) -> HDReport:
    rep = HDReport()
    if hd.alice.depth != hd.bob.depth:
        rep.errors.append(f"tree depths differ ({hd.alice.depth} vs {hd.bob.depth})")
    rep.errors += _structure_errors(hd.alice, "alice", budget)
    rep.errors += _structure_errors(hd.bob, "bob", budget)
    if rep.errors:
        return rep
    for x in range(hd.alice.domain_size):
        for y in range(hd.bob.domain_size):
            rep.pairs += 1
            for tr in execute_all(hd, x, y):
                rep.traces += 1
                if not tr.simultaneous:
                    rep.errors.append(f"leaves reached at different rounds on ({x}, {y})")
                elif tr.alice_output != tr.bob_output:
                    rep.errors.append(f"leaf outputs differ on ({x}, {y})")
                elif rel is not None and not rel.solves(rel.x_domain[x], rel.y_domain[y], tr.alice_output):
                    rep.errors.append(f"output {tr.alice_output!r} invalid on ({x}, {y})")
                if len(rep.errors) > 50:
                    return rep
    return rep


def solves(hd: HDProtocol, rel: Relation) -> bool:
    for x in range(len(rel.x_domain)):
        for y in range(len(rel.y_domain)):
            for tr in execute_all(hd, x, y):
                if not tr.agrees or not rel.solves(rel.x_domain[x], rel.y_domain[y], tr.alice_output):
                    return False
    return True


@dataclass
class Consistency:
    xs: int
    ys: int
    alice_vertex: dict[int, Path]
    bob_vertex: dict[int, Path]

    @property
    def is_transcript(self) -> bool:
        return bool(self.xs and self.ys)


def _consistent_vertex(tree: HDTree, x: int, pi: str) -> Optional[Path]:
    path: Path = ()
    for c in pi:
        if tree.is_leaf(path):
            return None
        a = tree.action(x, path)
        if a == RECV:
            path += ("r" + c,)
        elif a == "s" + c:
            path += (a,)
        else:
            return None
    return path


def consistent_inputs(hd: HDProtocol, pi: str) -> Consistency:
    """Inputs consistent with transcript ``pi`` and the unique vertex each one reaches."""
    if len(pi) > hd.depth:
        raise ValueError("transcript longer than the protocol")
    av, bv = {}, {}
    for x in range(hd.alice.domain_size):
        p = _consistent_vertex(hd.alice, x, pi)
        if p is not None:
            av[x] = p
    for y in range(hd.bob.domain_size):
        p = _consistent_vertex(hd.bob, y, pi)
        if p is not None:
            bv[y] = p
    return Consistency(sum(1 << x for x in av), sum(1 << y for y in bv), av, bv)


def is_partially_hd(hd: HDProtocol, rel: Relation) -> bool:
    """All rounds classical on every input pair whose functions coincide."""
    if not rel.x_domain or not isinstance(rel.x_domain[0], MuxInput):
        raise ValueError("relation inputs carry no function component")
    by_fn: dict[TruthTable, list[int]] = {}
    for y, v in enumerate(rel.y_domain):
        by_fn.setdefault(v.function, []).append(y)
    for x, u in enumerate(rel.x_domain):
        for y in by_fn.get(u.function, ()):
            if not all(tr.all_classical for tr in execute_all(hd, x, y)):
                return False
    return True


# Lifting a standard protocol ---------------------------------------------

class LiftedTree(HDTree):
    """One player's view of a standard protocol; past a leaf Alice sends 0 and Bob receives."""

    def __init__(self, tree: ProtocolTree, side: str, depth: Optional[int] = None):
        self.tree = tree
        self.side = side
        self.depth = tree.depth if depth is None else depth
        self.domain_size = tree.x_size if side == "A" else tree.y_size

    def _node(self, path: Path) -> Optional[ProtocolNode]:
        v = self.tree.root
        for lab in path:
            if v.children is None:
                if (self.side == "A") != (lab == S0) and not (self.side == "B" and lab[0] == "r"):
                    return None
                continue
            mine = v.owner == self.side
            if mine != (lab[0] == "s"):
                return None
            v = v.children[label_bit(lab)]
        return v

    def action(self, x: int, path: Path) -> Optional[str]:
        v = self._node(path)
        if v is None:
            return None
        side_set = v.xs if self.side == "A" else v.ys
        if not (side_set >> x) & 1:
            return None
        if v.children is None:
            return S0 if self.side == "A" else RECV
        if v.owner != self.side:
            return RECV
        c1 = v.children[1].xs if self.side == "A" else v.children[1].ys
        return S1 if (c1 >> x) & 1 else S0

    def output(self, path: Path) -> Any:
        v = self._node(path)
        return None if v is None or v.children is not None else v.output


def lift_standard(tree: ProtocolTree) -> HDProtocol:
    d = tree.depth
    return HDProtocol(LiftedTree(tree, "A", d), LiftedTree(tree, "B", d))


def hardwire(hd: HDProtocol, rel: Relation, g: TruthTable, inner: Relation) -> ProtocolTree:
    """Standard protocol for ``inner`` obtained by fixing both functions to ``g``.

    ``inner`` must have the payload matrices of ``g`` as its domains (as built by
    ``compose_strong(f, g)``).  Each input keeps its own vertex path, since two
    inputs can share a transcript while sitting at different vertices.  Raises
    if some round on a live rectangle is not classical.
    """
    ax = [rel.x_index[MuxInput(g, X)] for X in inner.x_domain]
    by = [rel.y_index[MuxInput(g, Y)] for Y in inner.y_domain]

    def step(tree: HDTree, idx: list[int], paths: dict[int, Path], bit_: str, sender: bool) -> dict[int, Path]:
        out = {}
        for k, p in paths.items():
            a = tree.action(idx[k], p)
            if sender and a == "s" + bit_:
                out[k] = p + (a,)
            elif not sender and a == RECV:
                out[k] = p + ("r" + bit_,)
        return out

    def build(xp: dict[int, Path], yp: dict[int, Path], r: int) -> ProtocolNode:
        xs = sum(1 << k for k in xp)
        ys = sum(1 << k for k in yp)
        if not xp or not yp:
            return ProtocolNode(xs, ys, output=BOTTOM)
        if r == hd.depth:
            outs = {hd.alice.output(p) for p in xp.values()} | {hd.bob.output(p) for p in yp.values()}
            if len(outs) != 1:
                raise ValueError("leaf outputs disagree inside a rectangle")
            return ProtocolNode(xs, ys, output=outs.pop())
        acts_a = {hd.alice.action(ax[k], p) for k, p in xp.items()}
        acts_b = {hd.bob.action(by[k], p) for k, p in yp.items()}
        if RECV not in acts_a and acts_b == {RECV}:
            owner = "A"
        elif RECV not in acts_b and acts_a == {RECV}:
            owner = "B"
        else:
            raise ValueError(f"round {r} is not classical for g={g}")
        kids = []
        for c in "01":
            nx = step(hd.alice, ax, xp, c, owner == "A")
            ny = step(hd.bob, by, yp, c, owner == "B")
            kids.append(build(nx, ny, r + 1))
        return ProtocolNode(xs, ys, owner=owner, children=tuple(kids))

    root = build({k: () for k in range(len(ax))}, {k: () for k in range(len(by))}, 0)
    return ProtocolTree(root, len(ax), len(by))


def hd_to_text(hd: HDProtocol, budget: int = 2_000_000) -> str:
    """Paired node lists: one line per nonempty vertex, ``side path members [output]``."""
    lines = []
    for side, tree in (("A", hd.alice), ("B", hd.bob)):
        sets = tree.materialize(budget)
        for p in sorted(sets, key=lambda q: (len(q), q)):
            row = f"{side} {'.'.join(p) or '-'} {sets[p]:x}"
            if tree.is_leaf(p):
                row += f" {tree.output(p)}"
            lines.append(row)
    return "\n".join(lines)


# The reduction transform -------------------------------------------------

def pad_to_depth(tree: ProtocolTree, depth: int) -> ProtocolTree:
    """Extend shallow leaves with Alice-sends-0 rounds so every leaf sits at ``depth``."""

    def pad(v: ProtocolNode, d: int) -> ProtocolNode:
        if v.children is None:
            if d >= depth:
                return v
            empty = ProtocolNode(0, v.ys, output=v.output)
            return ProtocolNode(v.xs, v.ys, owner="A", children=(pad(v, d + 1), empty))
        return ProtocolNode(v.xs, v.ys, owner=v.owner, children=tuple(pad(c, d + 1) for c in v.children))

    if tree.depth > depth:
        raise ValueError("protocol deeper than the padding target")
    return ProtocolTree(pad(tree.root, 0), tree.x_size, tree.y_size)


class _Simulation:
    """Shared bookkeeping of the reduction for one player."""

    def __init__(self, f: TruthTable, n: int, protocols: Mapping[TruthTable, ProtocolTree],
                 inner: Mapping[TruthTable, Relation], domain: Sequence[MuxInput], side: str,
                 c: int, strong: bool):
        self.m, self.n, self.c, self.strong, self.side = f.arity, n, c, strong, side
        self.index_bits = max(0, math.ceil(math.log2(self.m * n)))
        self.msg_bits = self.index_bits + (2 if strong else 1)
        self.depth = c + self.msg_bits + 1
        self.domain = domain
        self.protocols = protocols
        # domain index -> (protocol or None, index inside the inner relation)
        self.local: list[tuple[Optional[ProtocolTree], int]] = []
        for u in domain:
            p = protocols.get(u.function)
            if p is None:
                self.local.append((None, -1))
            else:
                idx = inner[u.function].x_index if side == "A" else inner[u.function].y_index
                self.local.append((p, idx[u.payload]))

    def node(self, k: int, path: Path) -> Optional[ProtocolNode]:
        p, _ = self.local[k]
        if p is None:
            return None
        v = p.root
        for lab in path[: self.c]:
            if v.children is None:
                return v
            v = v.children[label_bit(lab)]
        return v

    def sim_action(self, k: int, path: Path) -> str:
        v = self.node(k, path)
        if v is None or v.children is None:
            return RECV
        if v.owner != self.side:
            return RECV
        _, i = self.local[k]
        c1 = v.children[1].xs if self.side == "A" else v.children[1].ys
        return S1 if (c1 >> i) & 1 else S0

    def solution(self, k: int, path: Path) -> tuple[int, int]:
        v = self.node(k, path[: self.c])
        if v is None or v.children is not None:
            return (0, 0)
        return v.output

    def decode(self, path: Path) -> tuple[Optional[tuple[int, int]], int, int]:
        bits = [label_bit(lab) for lab in path[self.c: self.c + self.msg_bits]]
        idx = 0
        for b in bits[: self.index_bits]:
            idx = (idx << 1) | b
        rest = bits[self.index_bits:]
        entry = (idx // self.n, idx % self.n) if idx < self.m * self.n else None
        a_bit = rest[0] if self.strong else -1
        x_bit = rest[-1]
        return entry, a_bit, x_bit

    def final_output(self, path: Path) -> Any:
        entry, _, _ = self.decode(path)
        return entry if label_bit(path[-1]) == 1 and entry is not None else BOTTOM


class _ReductionAlice(HDTree):
    def __init__(self, sim: _Simulation):
        self.sim = sim
        self.depth = sim.depth
        self.domain_size = len(sim.domain)

    def action(self, x: int, path: Path) -> Optional[str]:
        s, r = self.sim, len(path)
        if r < s.c:
            return s.sim_action(x, path)
        if r < s.c + s.msg_bits:
            u = s.domain[x]
            i, j = s.solution(x, path)
            bits = [bit(i * s.n + j, t, s.index_bits) for t in range(s.index_bits)]
            if s.strong:
                bits.append(bit(apply_rowwise(u.function, u.payload), i, s.m))
            bits.append(bit(u.payload[i], j, s.n))
            return S1 if bits[r - s.c] else S0
        return RECV

    def output(self, path: Path) -> Any:
        return self.sim.final_output(path)


class _ReductionBob(HDTree):
    def __init__(self, sim: _Simulation):
        self.sim = sim
        self.depth = sim.depth
        self.domain_size = len(sim.domain)

    def action(self, y: int, path: Path) -> Optional[str]:
        s, r = self.sim, len(path)
        if r < s.c:
            return s.sim_action(y, path)
        if r < s.c + s.msg_bits:
            return RECV
        entry, a_bit, x_bit = s.decode(path)
        ok = entry is not None and entry == s.solution(y, path)
        if ok:
            i, j = entry
            v = s.domain[y]
            if s.strong and a_bit == bit(apply_rowwise(v.function, v.payload), i, s.m):
                ok = False
            if x_bit == bit(v.payload[i], j, s.n):
                ok = False
        return S1 if ok else S0

    def output(self, path: Path) -> Any:
        return self.sim.final_output(path)


@dataclass
class Reduction:
    protocol: HDProtocol
    relation: Relation
    c: int
    inner: dict[TruthTable, Relation]
    protocols: dict[TruthTable, ProtocolTree]

    @property
    def depth(self) -> int:
        return self.protocol.depth


def reduction_transform(
    protocols: Mapping[TruthTable, ProtocolTree], f: TruthTable, n: int, strong: bool = True,
    normalize: bool = True, relation: Optional[Relation] = None,
) -> Reduction:
    """Partially half-duplex protocol for ``KW_f`` composed with ``MUX_n`` from per-function protocols.

    ``protocols`` maps every non-constant ``g`` on ``n`` bits to a protocol for
    the strong (or, with ``strong=False``, standard) composition.  With
    ``normalize`` each protocol is first padded to the common depth ``c`` so
    that no player idles while the other still simulates.
    """
    rel = relation or mux_compose(f, n, strong)
    inner: dict[TruthTable, Relation] = {}
    fixed: dict[TruthTable, ProtocolTree] = {}
    functions = {u.function for u in rel.x_domain} | {v.function for v in rel.y_domain}
    for g in sorted(functions, key=lambda t: t.bits):
        if g.is_constant:
            continue
        if g not in protocols:
            raise ValueError(f"missing protocol for g={g}")
        inner[g] = compose_strong(f, g) if strong else compose_standard(f, g)
        if not validate_protocol(protocols[g], inner[g]).ok:
            raise ValueError(f"protocol for g={g} is invalid")
        fixed[g] = protocols[g]
    c = max((p.depth for p in fixed.values()), default=0)
    if normalize:
        fixed = {g: pad_to_depth(p, c) for g, p in fixed.items()}
    sim_a = _Simulation(f, n, fixed, inner, rel.x_domain, "A", c, strong)
    sim_b = _Simulation(f, n, fixed, inner, rel.y_domain, "B", c, strong)
    hd = HDProtocol(_ReductionAlice(sim_a), _ReductionBob(sim_b))
    return Reduction(hd, rel, c, inner, fixed)
