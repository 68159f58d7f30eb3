"""Explicit-state CTL checking inside a finite box of integer values.

States are rows of an int64 array; every variable gets a finite range
(booleans 0..1, enumerations 0..k-1, integers from the box).  The graph of
states reachable from the initial states is built level by level and CTL is
labeled directly on it, independently of the symbolic checker.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .atoms import DIV, EQ, LE, BoolLit, lin
from .checker import HOLDS, NOT_SHOWN, Verdict
from .ctl import CtlProperty
from .formula import Formula, is_primed, unprime
from .model import TransitionSystem

MAX_STATES = 10**6
CHUNK = 1 << 18


class StateExplosion(RuntimeError):
    pass


class ClosureViolation(RuntimeError):
    """A successor left the box."""


class DenseDNF:
    """A formula compiled against a column layout."""

    def __init__(self, f: Formula, columns: dict):
        rows, ops, bounds, mods = [], [], [], []
        index: dict = {}
        ptr = [0]
        cube_atoms = []
        for cube in f.sorted_cubes():
            for a in cube:
                key = a
                if key not in index:
                    vec = np.zeros(len(columns), dtype=np.int64)
                    if isinstance(a, BoolLit):
                        vec[columns[a.var]] = 1
                        ops.append(K.OP_EQ)
                        bounds.append(1 if a.positive else 0)
                        mods.append(1)
                    else:
                        for v, c in a.coeffs:
                            if abs(c) > 2**31:
                                raise OverflowError("coefficient too large for the oracle")
                            vec[columns[v]] = c
                        ops.append({LE: K.OP_LE, EQ: K.OP_EQ, DIV: K.OP_MOD}[a.op])
                        bounds.append(a.bound)
                        mods.append(a.mod or 1)
                    index[key] = len(rows)
                    rows.append(vec)
                cube_atoms.append(index[key])
            ptr.append(len(cube_atoms))
        n = len(columns)
        self.coeffs = np.array(rows, dtype=np.int64).reshape(len(rows), n)
        self.ops = np.array(ops, dtype=np.int8)
        self.bounds = np.array(bounds, dtype=np.int64)
        self.mods = np.array(mods, dtype=np.int64)
        self.ptr = np.array(ptr, dtype=np.int64)
        self.atoms = np.array(cube_atoms, dtype=np.int64)

    def __call__(self, states: np.ndarray) -> np.ndarray:
        m = states.shape[0]
        if len(self.ptr) == 1:
            return np.zeros(m, dtype=np.bool_)
        if len(self.atoms) == 0:
            return np.ones(m, dtype=np.bool_)
        truth = K.eval_atoms(np.ascontiguousarray(states), self.coeffs, self.ops, self.bounds, self.mods)
        return K.eval_dnf(truth, self.ptr, self.atoms)


@dataclass
class StateGraph:
    names: list
    states: np.ndarray  # (N, n) int64
    ptr: np.ndarray  # CSR successors
    succ: np.ndarray
    init: np.ndarray  # bool mask
    truncated: bool = False

    def __len__(self):
        return self.states.shape[0]


class _Layout:
    def __init__(self, ts: TransitionSystem, box: dict):
        self.names = ts.names
        self.n = len(self.names)
        lo, size = [], []
        for v in ts.vars:
            if v.kind == "bool":
                a, b = 0, 1
            elif v.kind == "enum":
                a, b = 0, len(v.domain) - 1
            else:
                if v.name not in box:
                    raise ValueError(f"no bounds given for integer variable {v.name!r}")
                a, b = box[v.name]
            if b < a:
                raise ValueError(f"empty range for {v.name!r}")
            lo.append(a)
            size.append(b - a + 1)
        self.lo = np.array(lo, dtype=np.int64)
        self.hi = self.lo + np.array(size, dtype=np.int64) - 1
        self.size = np.array(size, dtype=np.int64)
        total = 1
        for s in size:
            total *= s
        if total >= 2**62:
            raise StateExplosion("box too large to encode")
        self.total = total
        mult = np.ones(self.n, dtype=np.int64)
        for j in range(self.n - 2, -1, -1):
            mult[j] = mult[j + 1] * self.size[j + 1]
        self.mult = mult
        self.cur = {v: j for j, v in enumerate(self.names)}
        self.both = dict(self.cur)
        self.both.update({v + "'": self.n + j for j, v in enumerate(self.names)})

    def encode(self, states):
        return (states - self.lo) @ self.mult

    def decode(self, codes):
        codes = np.asarray(codes, dtype=np.int64)
        out = np.empty((len(codes), self.n), dtype=np.int64)
        rem = codes.copy()
        for j in range(self.n):
            out[:, j] = rem // self.mult[j]
            rem = rem % self.mult[j]
        return out + self.lo

    def inside(self, states):
        return ((states >= self.lo) & (states <= self.hi)).all(axis=1)


class _Step:
    """Successor generation for one transition cube."""

    def __init__(self, cube, lay: _Layout):
        self.lay = lay
        guard, rest = [], []
        for a in cube:
            (rest if any(is_primed(v) for v in a.vars()) else guard).append(a)
        self.guard = DenseDNF(Formula([frozenset(guard)]), lay.cur)
        self.check = DenseDNF(Formula([frozenset(rest)]), lay.both) if rest else None
        # next-state columns fixed by unit equalities, in dependency order
        known = set()
        plan = []
        progress = True
        while progress:
            progress = False
            for a in rest:
                if isinstance(a, BoolLit):
                    v = unprime(a.var)
                    if is_primed(a.var) and v not in known:
                        plan.append((lay.cur[v], {}, 1 if a.positive else 0, 1))
                        known.add(v)
                        progress = True
                    continue
                if a.op != EQ:
                    continue
                open_ = [(v, c) for v, c in a.coeffs if is_primed(v) and unprime(v) not in known]
                if len(open_) != 1 or abs(open_[0][1]) != 1:
                    continue
                (v, c), = open_
                others = {lay.both[w]: k for w, k in a.coeffs if w != v}
                plan.append((lay.cur[unprime(v)], others, a.bound, c))
                known.add(unprime(v))
                progress = True
        self.plan = plan
        self.free = [j for j, v in enumerate(lay.names) if v not in known]

    def successors(self, states: np.ndarray):
        """(source row index, next-state rows) for the given states."""
        lay = self.lay
        n = lay.n
        ok = self.guard(states)
        src = np.nonzero(ok)[0]
        if len(src) == 0:
            return src, np.empty((0, n), dtype=np.int64)
        cur = states[src]
        if self.free:
            ranges = [np.arange(lay.lo[j], lay.hi[j] + 1) for j in self.free]
            combos = np.array(list(itertools.product(*ranges)), dtype=np.int64)
            reps = len(combos)
            src = np.repeat(src, reps)
            cur = np.repeat(cur, reps, axis=0)
            nxt = np.zeros_like(cur)
            nxt[:, self.free] = np.tile(combos, (len(src) // reps, 1))
        else:
            nxt = np.zeros_like(cur)
        both = np.concatenate([cur, nxt], axis=1)
        for col, others, bound, c in self.plan:
            val = np.full(len(both), bound, dtype=np.int64)
            for j, k in others.items():
                val -= k * both[:, j]
            both[:, n + col] = val * c  # c is +-1
        if self.check is not None:
            keep = self.check(both)
            src, both = src[keep], both[keep]
        return src, both[:, n:]


def explore(ts: TransitionSystem, box: dict, on_escape: str = "error",
            max_states: int = MAX_STATES) -> StateGraph:
    """Reachable state graph of ``ts`` inside ``box``.

    Successors outside the state space are dropped.  Successors outside the
    box raise :class:`ClosureViolation` unless ``on_escape="truncate"``.
    """
    if on_escape not in ("error", "truncate"):
        raise ValueError("on_escape must be 'error' or 'truncate'")
    lay = _Layout(ts, box)
    space = DenseDNF(ts.state_space, lay.cur)
    start = DenseDNF(ts.init, lay.cur)
    steps = [_Step(c, lay) for _, f in ts.transitions for c in f.sorted_cubes()]

    inits = []
    for base in range(0, lay.total, CHUNK):
        codes = np.arange(base, min(base + CHUNK, lay.total), dtype=np.int64)
        st = lay.decode(codes)
        keep = start(st) & space(st)
        if keep.any():
            inits.append(codes[keep])
            if sum(len(x) for x in inits) > max_states:
                raise StateExplosion(f"more than {max_states} initial states")
    init_codes = np.unique(np.concatenate(inits)) if inits else np.empty(0, dtype=np.int64)

    visited = init_codes
    frontier = init_codes
    edge_src, edge_dst = [], []
    truncated = False
    while len(frontier):
        st = lay.decode(frontier)
        level_dst = []
        for step in steps:
            src, nxt = step.successors(st)
            if len(src) == 0:
                continue
            good = space(nxt)
            src, nxt = src[good], nxt[good]
            inside = lay.inside(nxt)
            if not inside.all():
                if on_escape == "error":
                    bad = nxt[~inside][0]
                    raise ClosureViolation(
                        "successor leaves the box: "
                        + ", ".join(f"{v}={x}" for v, x in zip(lay.names, bad))
                    )
                truncated = True
                src, nxt = src[inside], nxt[inside]
            codes = lay.encode(nxt)
            edge_src.append(frontier[src])
            edge_dst.append(codes)
            level_dst.append(codes)
        if not level_dst:
            break
        new = np.unique(np.concatenate(level_dst))
        new = new[~np.isin(new, visited, assume_unique=True)]
        if len(visited) + len(new) > max_states:
            raise StateExplosion(f"more than {max_states} reachable states")
        visited = np.union1d(visited, new)
        frontier = new

    order = np.sort(visited)
    if edge_src:
        s = np.searchsorted(order, np.concatenate(edge_src))
        d = np.searchsorted(order, np.concatenate(edge_dst))
        pairs = np.unique(np.stack([s, d], axis=1), axis=0)
        s, d = pairs[:, 0], pairs[:, 1]
    else:
        s = d = np.empty(0, dtype=np.int64)
    ptr = np.zeros(len(order) + 1, dtype=np.int64)
    np.add.at(ptr, s + 1, 1)
    ptr = np.cumsum(ptr)
    init_mask = np.isin(order, init_codes)
    return StateGraph(lay.names, lay.decode(order), ptr, d.astype(np.int64), init_mask, truncated)


def label(g: StateGraph, p: CtlProperty) -> np.ndarray:
    """Mask of graph states satisfying ``p`` (paths are infinite)."""
    cols = {v: j for j, v in enumerate(g.names)}
    op = p.op
    if op == "LEAF":
        return DenseDNF(p.formula, cols)(g.states)
    if op == "NOT":
        return ~label(g, p.args[0])
    if op == "AND":
        out = np.ones(len(g), dtype=np.bool_)
        for a in p.args:
            out &= label(g, a)
        return out
    if op == "OR":
        out = np.zeros(len(g), dtype=np.bool_)
        for a in p.args:
            out |= label(g, a)
        return out
    top = np.ones(len(g), dtype=np.bool_)
    if op == "EX":
        return K.ex(g.ptr, g.succ, label(g, p.args[0]))
    if op == "AX":
        return ~K.ex(g.ptr, g.succ, ~label(g, p.args[0]))
    if op == "EF":
        return K.eu(g.ptr, g.succ, top, label(g, p.args[0]))
    if op == "AG":
        return ~K.eu(g.ptr, g.succ, top, ~label(g, p.args[0]))
    if op == "EG":
        return K.eg(g.ptr, g.succ, label(g, p.args[0]))
    if op == "AF":
        return ~K.eg(g.ptr, g.succ, ~label(g, p.args[0]))
    if op == "EU":
        return K.eu(g.ptr, g.succ, label(g, p.args[0]), label(g, p.args[1]))
    if op == "AU":
        a, b = label(g, p.args[0]), label(g, p.args[1])
        nb = ~b
        bad = K.eu(g.ptr, g.succ, nb, ~a & nb) | K.eg(g.ptr, g.succ, nb)
        return ~bad
    raise ValueError(f"unknown operator {op}")


def oracle_check(ts: TransitionSystem, prop: CtlProperty, box: dict,
                 on_escape: str = "error", max_states: int = MAX_STATES) -> Verdict:
    g = explore(ts, box, on_escape, max_states)
    sat = label(g, prop)
    failing = np.nonzero(g.init & ~sat)[0]
    if len(failing) == 0:
        return Verdict(HOLDS)
    row = g.states[failing[0]]
    point = Formula.of_cube(
        [BoolLit(v, bool(x)) if ts.var_map[v].kind == "bool" else _eq(v, int(x))
         for v, x in zip(g.names, row)]
    )
    return Verdict(NOT_SHOWN, point)


def _eq(v, x):
    return lin(EQ, {v: 1}, x)


__all__ = [
    "oracle_check", "explore", "label", "StateGraph", "StateExplosion",
    "ClosureViolation", "DenseDNF",
]
