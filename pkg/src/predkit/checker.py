"""Backward symbolic ACTL checking with bounded fixpoint iteration.

The property is negated into existential normal form and its satisfying
set is computed with pre-images restricted to the state space.  The
property holds iff no initial state lies in that set.
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

from .atoms import EQ, LE, LinAtom, lin, make_cube
from .ctl import CtlProperty, negate_to_ectl
from .formula import (
    FALSE,
    Formula,
    conj,
    cube_entails,
    disj,
    eliminate,
    entails,
    is_primed,
    prime,
    rename,
    satisfiable,
    to_next,
)
from .model import TransitionSystem

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 64
DEFAULT_WIDEN_AFTER = 4

HOLDS = "Holds"
NOT_SHOWN = "NotShown"
NONCONVERGENT = "Nonconvergent"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Formula | None = None
    iterations: int = 0
    widened: bool = False

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def exit_code(self) -> int:
        return {HOLDS: 0, NOT_SHOWN: 1, NONCONVERGENT: 2}[self.status]

    def __str__(self):
        if self.status == NONCONVERGENT:
            return f"{self.status}({self.iterations})"
        return self.status


def default_max_iter() -> int:
    raw = os.environ.get("PREDKIT_MAX_ITER")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            log.warning("ignoring non-integer PREDKIT_MAX_ITER=%r", raw)
        else:
            if value >= 1:
                return value
    return DEFAULT_MAX_ITER


@dataclass(frozen=True)
class CheckLimits:
    max_iterations: int = field(default_factory=default_max_iter)
    widen_after: int = DEFAULT_WIDEN_AFTER  # 0 disables widening

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.widen_after < 0:
            raise ValueError("widen_after must be nonnegative")


def pre_image(R: Formula, A: Formula) -> Formula:
    """States with an R-successor in A."""
    if A.is_false() or R.is_false():
        return FALSE
    body = conj(R, to_next(A))
    return eliminate(body, {v for v in body.vars() if is_primed(v)})


def widen_cube(c: frozenset, olds, frozen=frozenset()) -> frozenset:
    """Extrapolate a bound of ``c`` that keeps drifting.

    A bound on a linear term is extrapolated when the older cubes hold the
    same constraints except for that bound, at two earlier values moving
    in the same direction (three terms of a chain).  A growing upper bound
    is dropped; a drifting equality becomes a half-line from its oldest
    value.  Terms over variables in ``frozen`` (finite ranges) are never
    widened.
    """
    olds = [d for d in olds if len(d) == len(c)]
    for a in sorted(c, key=str):
        if not isinstance(a, LinAtom) or a.op not in (LE, EQ):
            continue
        if frozen and any(v in frozen for v in a.vars()):
            continue
        rest = c - {a}
        bounds = set()
        for d in olds:
            if not rest <= d:
                continue
            (b,) = d - rest
            if isinstance(b, LinAtom) and b.op == a.op and b.coeffs == a.coeffs:
                bounds.add(b.bound)
        below = sorted(x for x in bounds if x < a.bound)
        above = sorted(x for x in bounds if x > a.bound)
        if a.op == LE:
            if len(below) >= 2:
                return rest
            continue
        d_ = dict(a.coeffs)
        if len(below) >= 2:
            w = lin(LE, {v: -k for v, k in d_.items()}, -below[0])
        elif len(above) >= 2:
            w = lin(LE, d_, above[-1])
        else:
            continue
        out = make_cube(list(rest) + [w])
        if out is not None:
            return out
    return c


class SymbolicChecker:
    def __init__(self, ts: TransitionSystem, limits: CheckLimits | None = None):
        self.ts = ts
        self.limits = limits or CheckLimits()
        self.space = ts.state_space
        self.trans = [f for _, f in ts.transitions]
        self._pre: dict = {}
        self.iterations = 0
        self.under = False  # a least fixpoint hit the cap
        self.over = False  # a greatest fixpoint hit the cap
        self.widened = False
        self.frozen = frozenset(v.name for v in ts.vars if v.kind == "enum")

    # pre-images -----------------------------------------------------------
    def pre_cube(self, cube: frozenset) -> Formula:
        hit = self._pre.get(cube)
        if hit is not None:
            return hit
        tgt = to_next(Formula([cube]))
        parts = []
        for r in self.trans:
            parts.append(pre_image(r, tgt))
        out = conj(disj(*parts), self.space)
        self._pre[cube] = out
        return out

    def pre(self, A: Formula) -> Formula:
        return disj(*(self.pre_cube(c) for c in A.cubes))

    # fixpoints ------------------------------------------------------------
    def _lfp(self, target: Formula, guard: Formula | None, init: Formula | None):
        """Least fixpoint of ``target | guard & EX Z`` (guard None = TRUE)."""
        Z = target
        frontier = target
        for it in range(1, self.limits.max_iterations + 1):
            self.iterations = max(self.iterations, it)
            if init is not None and not self.widened and satisfiable(conj(init, Z)):
                return Z, True
            new = self.pre(frontier)
            if guard is not None:
                new = conj(new, guard)
            fresh = [c for c in new.cubes if not cube_entails(c, Z)]
            if fresh and self.limits.widen_after and it >= self.limits.widen_after:
                widened = []
                for c in fresh:
                    w = widen_cube(c, Z.cubes, self.frozen)
                    if w is not c:
                        self.widened = True
                    widened.append(w)
                fresh = widened
            if not fresh:
                return Z, True
            frontier = Formula(fresh)
            Z = Z | frontier
        return Z, False

    def _gfp(self, A: Formula):
        """Greatest fixpoint of ``A & EX Z``, iterated down from A."""
        Z = A
        for it in range(1, self.limits.max_iterations + 1):
            self.iterations = max(self.iterations, it)
            nZ = conj(A, self.pre(Z))
            if entails(Z, nZ):
                return Z, True
            Z = nZ
        return Z, False

    def sat(self, q: CtlProperty, init: Formula | None = None) -> Formula:
        op = q.op
        if op == "LEAF":
            return conj(q.formula, self.space)
        if op == "AND":
            return conj(*(self.sat(a) for a in q.args))
        if op == "OR":
            return disj(*(self.sat(a) for a in q.args))
        if op == "EX":
            return self.pre(self.sat(q.args[0]))
        if op == "EF":
            Z, ok = self._lfp(self.sat(q.args[0]), None, init)
            self.under |= not ok
            return Z
        if op == "EU":
            Z, ok = self._lfp(self.sat(q.args[1]), self.sat(q.args[0]), init)
            self.under |= not ok
            return Z
        if op == "EG":
            Z, ok = self._gfp(self.sat(q.args[0]))
            self.over |= not ok
            return Z
        raise ValueError(f"operator {op} outside the existential fragment")

    def check(self, prop: CtlProperty) -> Verdict:
        q = negate_to_ectl(prop)
        init = conj(self.ts.init, self.space)
        bad = self.sat(q, init)
        witness = conj(init, bad)
        found = satisfiable(witness)
        if found and not self.over:
            # an under-approximated set that already meets init is conclusive
            return Verdict(NOT_SHOWN, witness, self.iterations, self.widened)
        if self.under or (found and self.over):
            return Verdict(NONCONVERGENT, None, self.iterations, self.widened)
        if found:
            return Verdict(NOT_SHOWN, witness, self.iterations, self.widened)
        return Verdict(HOLDS, None, self.iterations, self.widened)


def check(ts: TransitionSystem, prop: CtlProperty, limits: CheckLimits | None = None) -> Verdict:
    return SymbolicChecker(ts, limits).check(prop)


def reachable(ts: TransitionSystem, limits: CheckLimits | None = None):
    """Forward reachable states (bounded); returns (formula, converged)."""
    limits = limits or CheckLimits()
    space = ts.state_space
    back = {prime(v): v for v in ts.names}
    Z = conj(ts.init, space)
    frontier = Z
    for _ in range(limits.max_iterations):
        img = []
        for _, r in ts.transitions:
            body = conj(frontier, r)
            post = eliminate(body, {v for v in body.vars() if not is_primed(v)})
            img.append(rename(post, back))
        new = conj(disj(*img), space)
        fresh = [c for c in new.cubes if not cube_entails(c, Z)]
        if not fresh:
            return Z, True
        frontier = Formula(fresh)
        Z = Z | frontier
    return Z, False


__all__ = [
    "Verdict", "CheckLimits", "SymbolicChecker", "pre_image", "check",
    "reachable", "HOLDS", "NOT_SHOWN", "NONCONVERGENT", "widen_cube",
]
