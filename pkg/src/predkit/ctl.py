"""CTL property trees with quantifier-free formula leaves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .formula import TRUE, Formula, conj, disj, neg, to_text

UNARY_TEMPORAL = ("EX", "EF", "EG", "AX", "AF", "AG")
BINARY_TEMPORAL = ("EU", "AU")
EXISTENTIAL = ("EX", "EF", "EG", "EU")
UNIVERSAL = ("AX", "AF", "AG", "AU")

_DUAL = {"EX": "AX", "AX": "EX", "EF": "AG", "AG": "EF", "EG": "AF", "AF": "EG"}


class UnsupportedOperator(ValueError):
    pass


@dataclass(frozen=True)
class CtlProperty:
    """``op`` is one of LEAF, NOT, AND, OR or a temporal operator name."""

    op: str
    args: tuple = ()
    formula: Formula | None = None

    def __str__(self):
        if self.op == "LEAF":
            return f"({to_text(self.formula)})"
        if self.op == "NOT":
            return f"!{self.args[0]}"
        if self.op in ("AND", "OR"):
            sym = " & " if self.op == "AND" else " | "
            return "(" + sym.join(str(a) for a in self.args) + ")"
        if self.op in BINARY_TEMPORAL:
            return f"{self.op[0]}[{self.args[0]} U {self.args[1]}]"
        return f"{self.op}{self.args[0]}"

    @property
    def fragment(self) -> str:
        ops = self.temporal_ops(nnf(self).op_set())
        if not ops:
            return "propositional"
        if ops <= set(UNIVERSAL):
            return "ACTL"
        if ops <= set(EXISTENTIAL):
            return "ECTL"
        return "mixed"

    @staticmethod
    def temporal_ops(ops):
        return {o for o in ops if o in UNARY_TEMPORAL or o in BINARY_TEMPORAL}

    def op_set(self) -> set:
        out = {self.op}
        for a in self.args:
            out |= a.op_set()
        return out

    def leaves(self) -> list:
        if self.op == "LEAF":
            return [self.formula]
        return [f for a in self.args for f in a.leaves()]

    def map_leaves(self, fn: Callable[[Formula], Formula]) -> "CtlProperty":
        if self.op == "LEAF":
            return leaf(fn(self.formula))
        return CtlProperty(self.op, tuple(a.map_leaves(fn) for a in self.args))


def leaf(f: Formula) -> CtlProperty:
    return CtlProperty("LEAF", (), f)


def unary(op: str, arg: CtlProperty) -> CtlProperty:
    return CtlProperty(op, (arg,))


def binary(op: str, a: CtlProperty, b: CtlProperty) -> CtlProperty:
    return CtlProperty(op, (a, b))


def AG(p):
    return unary("AG", _lift(p))


def AF(p):
    return unary("AF", _lift(p))


def _lift(p):
    return leaf(p) if isinstance(p, Formula) else p


def nnf(p: CtlProperty, negated: bool = False) -> CtlProperty:
    """Push negations down to the leaves (negated leaves become formulas)."""
    op = p.op
    if op == "LEAF":
        return leaf(neg(p.formula)) if negated else p
    if op == "NOT":
        return nnf(p.args[0], not negated)
    if op in ("AND", "OR"):
        kids = tuple(nnf(a, negated) for a in p.args)
        new = op if not negated else ("OR" if op == "AND" else "AND")
        # fold purely propositional children back into one leaf
        if all(k.op == "LEAF" for k in kids):
            fs = [k.formula for k in kids]
            return leaf(conj(*fs) if new == "AND" else disj(*fs))
        return CtlProperty(new, kids)
    if op in _DUAL:
        return unary(_DUAL[op] if negated else op, nnf(p.args[0], negated))
    if op in BINARY_TEMPORAL:
        a, b = p.args
        if not negated:
            return binary(op, nnf(a), nnf(b))
        # !E[a U b] = A[!b U (!a & !b)] | AG !b   (and dually for A)
        nb = nnf(b, True)
        both = nnf(CtlProperty("AND", (unary("NOT", a), unary("NOT", b))))
        if op == "EU":
            return CtlProperty("OR", (binary("AU", nb, both), unary("AG", nb)))
        return CtlProperty("OR", (binary("EU", nb, both), unary("EG", nb)))
    raise UnsupportedOperator(op)


def negate_to_ectl(p: CtlProperty) -> CtlProperty:
    """Negation of an ACTL property, in existential negation normal form."""
    q = nnf(p, negated=True)
    bad = CtlProperty.temporal_ops(q.op_set()) - set(EXISTENTIAL)
    if bad:
        raise UnsupportedOperator(
            f"property is not ACTL (negation keeps {', '.join(sorted(bad))})"
        )
    return q


def is_true_leaf(p: CtlProperty) -> bool:
    return p.op == "LEAF" and p.formula == TRUE
