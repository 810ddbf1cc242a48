"""Finite communication relations: KW games, compositions and multiplexors.

Every relation enumerates its two input domains in a fixed order so that a
set of inputs can be handled as a bitmask of domain indices.  Validity of an
output for a pair is stored as a bitmask over ``outputs``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Sequence

import numpy as np

from .boolcore import (
    Matrix,
    TruthTable,
    all_functions,
    all_matrices,
    apply_rowwise,
    bit,
    to_bitstring,
)

BOTTOM = "⊥"

MUX_MAX_N = 3
MUX_COMPOSE_MAX_CELLS = 3 * 4


@dataclass(frozen=True)
class MuxInput:
    function: TruthTable
    payload: Any

    def __str__(self) -> str:
        return f"({self.function}, {self.payload})"


@dataclass(eq=False)
class Relation:
    kind: str
    params: dict
    x_domain: tuple
    y_domain: tuple
    outputs: tuple
    mask_fn: Callable[[Any, Any], int] = field(repr=False)
    check_total: bool = True

    def __post_init__(self) -> None:
        if len(self.outputs) > 64:
            raise ValueError("at most 64 outputs are supported")
        self.out_index = {o: k for k, o in enumerate(self.outputs)}
        self.x_index = {x: k for k, x in enumerate(self.x_domain)}
        self.y_index = {y: k for k, y in enumerate(self.y_domain)}
        if self.check_total:
            self.assert_total()

    def solves(self, x, y, o) -> bool:
        k = self.out_index.get(o)
        return k is not None and bool((self.mask_fn(x, y) >> k) & 1)

    def valid_outputs(self, x, y) -> list:
        mask = self.mask_fn(x, y)
        return [o for k, o in enumerate(self.outputs) if (mask >> k) & 1]

    @cached_property
    def masks(self) -> np.ndarray:
        """``masks[i, j]`` is the valid-output bitmask of ``(x_domain[i], y_domain[j])``."""
        arr = np.zeros((len(self.x_domain), len(self.y_domain)), dtype=np.uint64)
        for i, x in enumerate(self.x_domain):
            arr[i, :] = [self.mask_fn(x, y) for y in self.y_domain]
        return arr

    def _packed_sets(self, axis: int) -> list[list[int]]:
        out = []
        for k in range(len(self.outputs)):
            valid = ((self.masks >> np.uint64(k)) & np.uint64(1)).astype(bool)
            if axis == 1:
                valid = valid.T
            rows = np.packbits(valid, axis=1, bitorder="little")
            out.append([int.from_bytes(r.tobytes(), "little") for r in rows])
        return out

    @cached_property
    def valid_y_sets(self) -> list[list[int]]:
        """``valid_y_sets[k][i]``: bitmask of y indices for which output k is valid with x index i."""
        return self._packed_sets(0)

    @cached_property
    def valid_x_sets(self) -> list[list[int]]:
        return self._packed_sets(1)

    def assert_total(self) -> None:
        if self.masks.size and not np.all(self.masks != 0):
            i, j = map(int, np.argwhere(self.masks == 0)[0])
            raise ValueError(
                f"{self.kind} relation is not total at x={self.x_domain[i]}, y={self.y_domain[j]}"
            )

    @property
    def full_x(self) -> int:
        return (1 << len(self.x_domain)) - 1

    @property
    def full_y(self) -> int:
        return (1 << len(self.y_domain)) - 1

    def descriptor(self) -> dict:
        return {"kind": self.kind, **self.params}

    def content_hash(self) -> str:
        return descriptor_hash(self.descriptor())

    def __repr__(self) -> str:
        return f"Relation({self.kind}, |X|={len(self.x_domain)}, |Y|={len(self.y_domain)}, |O|={len(self.outputs)})"


def descriptor_hash(descriptor: dict) -> str:
    text = json.dumps(descriptor, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def _coordinate_mask(diff: int, m: int) -> int:
    # coordinate i of an m-bit string sits at bit m-1-i; output k is coordinate k
    return int(format(diff, f"0{m}b")[::-1], 2) if m else 0


def kw_rectangle(A: Sequence[int], B: Sequence[int], m: int) -> Relation:
    A = sorted(set(A))
    B = sorted(set(B))
    if not A or not B:
        raise ValueError("both sides of a KW rectangle must be nonempty")
    if set(A) & set(B):
        raise ValueError("KW rectangle sides overlap")
    if any(x >> m for x in A + B):
        raise ValueError(f"strings longer than {m} bits")
    return Relation(
        kind="KW-rect",
        params={"m": m, "A": [to_bitstring(a, m) for a in A], "B": [to_bitstring(b, m) for b in B]},
        x_domain=tuple(A),
        y_domain=tuple(B),
        outputs=tuple(range(m)),
        mask_fn=lambda x, y: _coordinate_mask(x ^ y, m),
    )


def kw(f: TruthTable) -> Relation:
    if f.is_constant:
        raise ValueError("KW relation of a constant function is empty")
    rel = kw_rectangle(f.ones(), f.zeros(), f.arity)
    rel.kind = "KW"
    rel.params = {"f": f.to_hex(), "m": f.arity}
    return rel


def _composition_domains(f: TruthTable, g: TruthTable) -> tuple[tuple, tuple]:
    ones, zeros = [], []
    for X in all_matrices(f.arity, g.arity):
        (ones if f(apply_rowwise(g, X)) else zeros).append(X)
    return tuple(ones), tuple(zeros)


def _entry_outputs(m: int, n: int) -> tuple:
    return tuple((i, j) for i in range(m) for j in range(n))


def _entry_mask(X: Matrix, Y: Matrix, n: int, rows: int) -> int:
    """Bitmask over outputs (i, j) with X_ij != Y_ij, restricted to rows in ``rows``."""
    mask = 0
    m = len(X)
    for i in range(m):
        if not bit(rows, i, m):
            continue
        d = X[i] ^ Y[i]
        for j in range(n):
            if bit(d, j, n):
                mask |= 1 << (i * n + j)
    return mask


def _compose(f: TruthTable, g: TruthTable, strong: bool) -> Relation:
    if f.is_constant or g.is_constant:
        raise ValueError("composition needs non-constant f and g")
    m, n = f.arity, g.arity
    xs, ys = _composition_domains(f, g)
    full_rows = (1 << m) - 1

    def mask_fn(X, Y):
        rows = apply_rowwise(g, X) ^ apply_rowwise(g, Y) if strong else full_rows
        return _entry_mask(X, Y, n, rows)

    return Relation(
        kind="compose-strong" if strong else "compose-std",
        params={"f": f.to_hex(), "m": m, "g": g.to_hex(), "n": n},
        x_domain=xs,
        y_domain=ys,
        outputs=_entry_outputs(m, n),
        mask_fn=mask_fn,
    )


def compose_strong(f: TruthTable, g: TruthTable) -> Relation:
    return _compose(f, g, strong=True)


def compose_standard(f: TruthTable, g: TruthTable) -> Relation:
    return _compose(f, g, strong=False)


def mux(n: int) -> Relation:
    if not 1 <= n <= MUX_MAX_N:
        raise ValueError(f"mux needs 1 <= n <= {MUX_MAX_N}")
    xs, ys = [], []
    for g in all_functions(n):
        xs += [MuxInput(g, x) for x in g.ones()]
        ys += [MuxInput(g, y) for y in g.zeros()]
    outputs = tuple(range(n)) + (BOTTOM,)
    bottom = 1 << n

    def mask_fn(u: MuxInput, v: MuxInput) -> int:
        mask = _coordinate_mask(u.payload ^ v.payload, n)
        return mask | bottom if u.function != v.function else mask

    return Relation(
        kind="MUX",
        params={"n": n},
        x_domain=tuple(xs),
        y_domain=tuple(ys),
        outputs=outputs,
        mask_fn=mask_fn,
    )


def mux_compose(
    f: TruthTable, n: int, strong: bool, max_cells: int = MUX_COMPOSE_MAX_CELLS, check_total: bool = True
) -> Relation:
    """``KW_f`` composed with ``MUX_n``; ``check_total=False`` skips the all-pairs totality scan."""
    if f.is_constant:
        raise ValueError("mux composition needs non-constant f")
    m = f.arity
    if m * (1 << n) > max_cells:
        raise ValueError(f"m * 2^n = {m * (1 << n)} exceeds enumeration budget")
    xs, ys = [], []
    for g in all_functions(n):
        for X in all_matrices(m, n):
            (xs if f(apply_rowwise(g, X)) else ys).append(MuxInput(g, X))
    outputs = _entry_outputs(m, n) + (BOTTOM,)
    bottom = 1 << (m * n)
    full_rows = (1 << m) - 1

    def mask_fn(u: MuxInput, v: MuxInput) -> int:
        if strong:
            rows = apply_rowwise(u.function, u.payload) ^ apply_rowwise(v.function, v.payload)
        else:
            rows = full_rows
        mask = _entry_mask(u.payload, v.payload, n, rows)
        return mask | bottom if u.function != v.function else mask

    return Relation(
        kind="MUX-compose-strong" if strong else "MUX-compose-std",
        params={"f": f.to_hex(), "m": m, "n": n},
        x_domain=tuple(xs),
        y_domain=tuple(ys),
        outputs=outputs,
        mask_fn=mask_fn,
        check_total=check_total,
    )


def relation_from_descriptor(desc: dict) -> Relation:
    kind = desc["kind"]
    if kind == "KW":
        return kw(TruthTable.from_hex(desc["m"], desc["f"]))
    if kind == "KW-rect":
        m = desc["m"]
        return kw_rectangle([int(a, 2) for a in desc["A"]], [int(b, 2) for b in desc["B"]], m)
    if kind in ("compose-std", "compose-strong"):
        f = TruthTable.from_hex(desc["m"], desc["f"])
        g = TruthTable.from_hex(desc["n"], desc["g"])
        return _compose(f, g, strong=kind == "compose-strong")
    if kind == "MUX":
        return mux(desc["n"])
    if kind in ("MUX-compose-std", "MUX-compose-strong"):
        f = TruthTable.from_hex(desc["m"], desc["f"])
        return mux_compose(f, desc["n"], strong=kind == "MUX-compose-strong")
    raise ValueError(f"unknown relation kind {kind!r}")


def side_mask(rel: Relation, side: str, members: Sequence[Hashable]) -> int:
    index = rel.x_index if side == "A" else rel.y_index
    mask = 0
    for e in members:
        mask |= 1 << index[e]
    return mask
