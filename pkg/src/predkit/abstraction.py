"""Partial predicate abstraction of states, transitions, systems and
properties.

Only the variables mentioned by the predicates are quantified away; every
other variable keeps its concrete meaning.  Predicate ``i`` is tracked by a
fresh boolean ``b<i>`` (and ``b<i>'`` in the next state).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .atoms import LinAtom
from .ctl import CtlProperty
from .formula import (
    TRUE,
    Formula,
    conj,
    eliminate,
    equivalent,
    iff,
    implies,
    prime,
    substitute_bools,
    to_next,
)
from .model import TransitionSystem, Var


class UnexpressibleAtom(ValueError):
    """A property atom over abstracted variables has no exact image."""


class NameClash(ValueError):
    pass


@dataclass(frozen=True)
class Predicate:
    index: int  # position in the candidate list, 0-based
    atom: LinAtom
    bool_var: str

    @property
    def formula(self) -> Formula:
        return Formula.atom(self.atom)

    @property
    def scope(self) -> frozenset:
        return frozenset(self.atom.vars())

    def __str__(self):
        return str(self.atom)


class PredicateSet:
    """Ordered predicates; the order fixes which ``b`` tracks which atom."""

    def __init__(self, preds: Iterable[Predicate] = ()):
        self.preds = tuple(preds)
        names = [p.bool_var for p in self.preds]
        if len(set(names)) != len(names):
            raise NameClash("predicate boolean variables must be distinct")

    @staticmethod
    def of(atoms, prefix: str = "b") -> "PredicateSet":
        atoms = [_as_atom(a) for a in atoms]
        return PredicateSet(Predicate(i, a, f"{prefix}{i + 1}") for i, a in enumerate(atoms))

    def __iter__(self):
        return iter(self.preds)

    def __len__(self):
        return len(self.preds)

    def __getitem__(self, i):
        return self.preds[i]

    def __eq__(self, other):
        return isinstance(other, PredicateSet) and self.preds == other.preds

    def __hash__(self):
        return hash(self.preds)

    def __repr__(self):
        return "PredicateSet([" + ", ".join(f"{p.bool_var}: {p.atom}" for p in self.preds) + "])"

    @property
    def scope(self) -> frozenset:
        out = set()
        for p in self.preds:
            out |= p.scope
        return frozenset(out)

    @property
    def bool_vars(self) -> list:
        return [p.bool_var for p in self.preds]

    def subset(self, indices) -> "PredicateSet":
        """Predicates with the given candidate indices, keeping their names."""
        want = set(indices)
        return PredicateSet(p for p in self.preds if p.index in want)

    def union(self, other: "PredicateSet") -> "PredicateSet":
        seen = {p.bool_var for p in self.preds}
        return PredicateSet(list(self.preds) + [p for p in other.preds if p.bool_var not in seen])

    def by_index(self, index: int) -> Predicate:
        for p in self.preds:
            if p.index == index:
                return p
        raise KeyError(index)


def _as_atom(a) -> LinAtom:
    if isinstance(a, LinAtom):
        return a
    if isinstance(a, Formula) and len(a.cubes) == 1:
        (c,) = a.cubes
        if len(c) == 1:
            (x,) = c
            if isinstance(x, LinAtom):
                return x
    raise ValueError(f"predicate must be a single linear atom, got {a}")


def _links(ps: PredicateSet, nxt: bool = False) -> list:
    out = []
    for p in ps:
        f, b = p.formula, Formula.boolvar(p.bool_var)
        if nxt:
            f, b = to_next(f), Formula.boolvar(prime(p.bool_var))
        out.append(iff(f, b))
    return out


def alpha_state(s: Formula, ps: PredicateSet) -> Formula:
    """exists V(phi). s & /\\ (phi_i <-> b_i)"""
    if not len(ps):
        return s
    return eliminate(conj(s, *_links(ps)), ps.scope)


def gamma(sabs: Formula, ps: PredicateSet) -> Formula:
    """Replace every b_i by phi_i and every b_i' by phi_i'."""
    table = {}
    for p in ps:
        table[p.bool_var] = p.formula
        table[prime(p.bool_var)] = to_next(p.formula)
    return substitute_bools(sabs, table)


def unchanged(vars_) -> Formula:
    return conj(*(Formula.compare("=", {prime(v): 1, v: -1}, 0) for v in sorted(vars_)))


def consistency_constraint(ps: PredicateSet) -> Formula:
    """/\\_i ((/\\_{v in V(phi_i)} v' = v) -> (b_i' <-> b_i))"""
    parts = []
    for p in ps:
        b, bn = Formula.boolvar(p.bool_var), Formula.boolvar(prime(p.bool_var))
        parts.append(implies(unchanged(p.scope), iff(bn, b)))
    return conj(*parts)


def alpha_trans(r: Formula, ps: PredicateSet) -> Formula:
    """exists V(phi) V(phi'). r & CS & links & next-state links"""
    if not len(ps):
        return r
    scope = ps.scope
    body = conj(r, consistency_constraint(ps), *_links(ps), *_links(ps, nxt=True))
    return eliminate(body, scope | {prime(v) for v in scope})


def check_fresh(ts: TransitionSystem, ps: PredicateSet):
    names = set(ts.names)
    for p in ps:
        if p.bool_var in names:
            raise NameClash(f"boolean {p.bool_var!r} already names a model variable")
        missing = p.scope - names
        if missing:
            raise ValueError(f"predicate {p.atom} mentions unknown variables {sorted(missing)}")


def abstract_system(ts: TransitionSystem, ps: PredicateSet) -> TransitionSystem:
    """Partially abstracted system: V(phi) replaced by the predicate booleans."""
    if not len(ps):
        return ts
    check_fresh(ts, ps)
    space = ts.state_space
    space_next = to_next(space)
    vars_ = [v for v in ts.vars if v.name not in ps.scope]
    vars_ += [Var(b, "bool") for b in ps.bool_vars]
    restriction = alpha_state(space, ps)
    init = alpha_state(conj(ts.init, space), ps)
    trans = tuple(
        (label, alpha_trans(conj(f, space, space_next), ps)) for label, f in ts.transitions
    )
    return TransitionSystem(tuple(vars_), restriction, init, trans, ts.name, dict(ts.consts))


def abstract_property(p: CtlProperty, ps: PredicateSet,
                      ts: TransitionSystem | None = None) -> CtlProperty:
    """Rewrite property leaves over the predicate booleans.

    A leaf ``L`` touching V(phi) maps to ``alpha(L & S)``; the rewrite is
    accepted only when concretizing it back gives ``L`` again on the state
    space ``S``.  Leaves may keep variables that stay concrete in ``ts``;
    without a system every leaf variable must belong to V(phi).
    """
    scope = ps.scope
    keep = set(ts.names) - scope if ts is not None else set()
    space = ts.state_space if ts is not None else TRUE

    def rewrite(f: Formula) -> Formula:
        fv = f.vars()
        stray = fv - scope - keep
        if stray:
            raise UnexpressibleAtom(
                f"{f} mentions {', '.join(sorted(stray))}, not covered by the predicates"
            )
        if not fv & scope:
            return f
        target = conj(f, space)
        # the plain image is smaller; the space-restricted one is exact more often
        for image in (alpha_state(f, ps), alpha_state(target, ps)):
            if equivalent(conj(gamma(image, ps), space), target):
                return image
        raise UnexpressibleAtom(f"{f} is not expressible over {ps!r}")

    return p.map_leaves(rewrite)


def concretize_property(p: CtlProperty, ps: PredicateSet) -> CtlProperty:
    return p.map_leaves(lambda f: gamma(f, ps))


def disjoint(ps1: PredicateSet, ps2: PredicateSet) -> bool:
    return not (ps1.scope & ps2.scope)


__all__ = [
    "Predicate", "PredicateSet", "UnexpressibleAtom", "NameClash",
    "alpha_state", "gamma", "consistency_constraint", "alpha_trans",
    "abstract_system", "abstract_property", "concretize_property", "disjoint",
    "unchanged",
]
