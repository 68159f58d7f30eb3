"""Atomic constraints and cube normalization.

Linear atoms are kept in one of three canonical shapes over integer
variables::

    c1*x1 + ... + cn*xn <= k          (LE)
    c1*x1 + ... + cn*xn  = k          (EQ, first coefficient positive)
    c1*x1 + ... + cn*xn == k (mod m)  (DIV, 0 <= ci, k < m)

Coefficients are Python ints, so there is no overflow.  ``<``, ``>``,
``>=`` reduce to LE; ``!=`` is split into two LE atoms by the caller.
"""
from __future__ import annotations

from math import gcd
from typing import Iterable, NamedTuple, Union

LE = "<="
EQ = "="
DIV = "%"

Coeffs = tuple  # tuple[tuple[str, int], ...] sorted by variable name


class BoolLit(NamedTuple):
    var: str
    positive: bool

    def vars(self):
        return (self.var,)

    def __str__(self):
        return self.var if self.positive else "!" + self.var


class LinAtom(NamedTuple):
    op: str
    coeffs: Coeffs
    bound: int
    mod: int = 0

    def vars(self):
        return tuple(v for v, _ in self.coeffs)

    def coeff(self, var: str) -> int:
        for v, c in self.coeffs:
            if v == var:
                return c
        return 0

    def __str__(self):
        lhs = format_terms(self.coeffs)
        if self.op == DIV:
            return f"{lhs} = {self.bound} mod {self.mod}"
        return f"{lhs} {self.op} {self.bound}"


Atom = Union[BoolLit, LinAtom]


def format_terms(coeffs: Coeffs, const: int = 0) -> str:
    parts = []
    for v, c in coeffs:
        mag = abs(c)
        term = v if mag == 1 else f"{mag}*{v}"
        if not parts:
            parts.append(term if c > 0 else "-" + term)
        else:
            parts.append(("+ " if c > 0 else "- ") + term)
    if const or not parts:
        if not parts:
            parts.append(str(const))
        else:
            parts.append(("+ " if const > 0 else "- ") + str(abs(const)))
    return " ".join(parts)


def _pack(coeffs: dict) -> Coeffs:
    return tuple(sorted((v, c) for v, c in coeffs.items() if c))


def lin(op: str, coeffs: dict, bound: int, mod: int = 0):
    """Build a normalized linear atom; returns True/False for ground atoms."""
    if op == DIV:
        return _div(coeffs, bound, mod)
    packed = _pack(coeffs)
    if not packed:
        return 0 <= bound if op == LE else bound == 0
    g = 0
    for _, c in packed:
        g = gcd(g, c)
    if op == LE:
        if g > 1:
            packed = tuple((v, c // g) for v, c in packed)
            bound = bound // g  # floor
        return LinAtom(LE, packed, bound)
    if op == EQ:
        if bound % g:
            return False
        if g > 1:
            packed = tuple((v, c // g) for v, c in packed)
            bound //= g
        if packed[0][1] < 0:
            packed = tuple((v, -c) for v, c in packed)
            bound = -bound
        return LinAtom(EQ, packed, bound)
    raise ValueError(f"unknown relation {op!r}")


def _div(coeffs: dict, bound: int, mod: int):
    if mod <= 0:
        raise ValueError("modulus must be positive")
    packed = tuple(sorted((v, c % mod) for v, c in coeffs.items() if c % mod))
    bound %= mod
    if mod == 1:
        return True
    if not packed:
        return bound == 0
    g = mod
    for _, c in packed:
        g = gcd(g, c)
    if bound % g:
        return False
    if g > 1:
        mod //= g
        bound //= g
        packed = tuple((v, c // g) for v, c in packed)
        if mod == 1:
            return True
    return LinAtom(DIV, packed, bound, mod)


def cmp_atoms(op: str, coeffs: dict, const: int) -> list:
    """Atoms for ``sum(coeffs) + const  op  0``.

    Returns a list of alternatives (a disjunction); each alternative is an
    atom or a boolean constant.  Only ``!=`` yields two alternatives.
    """
    neg = {v: -c for v, c in coeffs.items()}
    if op == "<=":
        return [lin(LE, coeffs, -const)]
    if op == "<":
        return [lin(LE, coeffs, -const - 1)]
    if op == ">=":
        return [lin(LE, neg, const)]
    if op == ">":
        return [lin(LE, neg, const - 1)]
    if op in ("=", "=="):
        return [lin(EQ, coeffs, -const)]
    if op == "!=":
        return [lin(LE, coeffs, -const - 1), lin(LE, neg, const - 1)]
    raise ValueError(f"unknown comparison {op!r}")


def negate(a: Atom) -> list:
    """Alternatives whose disjunction is the negation of ``a``."""
    if isinstance(a, BoolLit):
        return [BoolLit(a.var, not a.positive)]
    if a.op == LE:
        return [lin(LE, {v: -c for v, c in a.coeffs}, -a.bound - 1)]
    if a.op == EQ:
        d = dict(a.coeffs)
        return [lin(LE, d, a.bound - 1), lin(LE, {v: -c for v, c in a.coeffs}, -a.bound - 1)]
    d = dict(a.coeffs)
    return [_div(d, r, a.mod) for r in range(a.mod) if r != a.bound]


def rename_atom(a: Atom, mapping: dict) -> Atom:
    if isinstance(a, BoolLit):
        return BoolLit(mapping.get(a.var, a.var), a.positive)
    d = {}
    for v, c in a.coeffs:
        d[mapping.get(v, v)] = d.get(mapping.get(v, v), 0) + c
    out = lin(a.op, d, a.bound, a.mod)
    return out


def eval_atom(a: Atom, env) -> bool:
    if isinstance(a, BoolLit):
        return bool(env[a.var]) == a.positive
    s = sum(c * env[v] for v, c in a.coeffs)
    if a.op == LE:
        return s <= a.bound
    if a.op == EQ:
        return s == a.bound
    return (s - a.bound) % a.mod == 0


def atom_key(a: Atom):
    """Total order over mixed atom kinds, used for stable printing."""
    if isinstance(a, BoolLit):
        return (0, a.var, not a.positive)
    return (1, a.vars(), a.op, a.coeffs, a.bound, a.mod)


def _neg_coeffs(coeffs: Coeffs) -> Coeffs:
    return tuple((v, -c) for v, c in coeffs)


def make_cube(atoms: Iterable):
    """Normalize a conjunction of atoms.

    Returns a frozenset of atoms, or None when the conjunction is
    syntactically contradictory (conflicting literals, clashing bounds on
    one linear term, ...).  Redundant bounds on the same term are dropped
    and matching upper/lower bounds are fused into an equality.
    """
    bools: dict = {}
    les: dict = {}
    eqs: dict = {}
    divs: dict = {}
    for a in atoms:
        if a is True:
            continue
        if a is False:
            return None
        if isinstance(a, BoolLit):
            prev = bools.get(a.var)
            if prev is not None and prev != a.positive:
                return None
            bools[a.var] = a.positive
        elif a.op == LE:
            k = les.get(a.coeffs)
            if k is None or a.bound < k:
                les[a.coeffs] = a.bound
        elif a.op == EQ:
            k = eqs.get(a.coeffs)
            if k is not None and k != a.bound:
                return None
            eqs[a.coeffs] = a.bound
        else:
            key = (a.coeffs, a.mod)
            k = divs.get(key)
            if k is not None and k != a.bound:
                return None
            divs[key] = a.bound

    for coeffs in list(les):
        if coeffs not in les:
            continue
        neg = _neg_coeffs(coeffs)
        if neg not in les:
            continue
        hi, lo = les[coeffs], -les[neg]
        if lo > hi:
            return None
        if lo == hi:
            del les[coeffs], les[neg]
            eq = lin(EQ, dict(coeffs), hi)
            k = eqs.get(eq.coeffs)
            if k is not None and k != eq.bound:
                return None
            eqs[eq.coeffs] = eq.bound

    for coeffs, v in eqs.items():
        k = les.pop(coeffs, None)
        if k is not None and v > k:
            return None
        k = les.pop(_neg_coeffs(coeffs), None)
        if k is not None and -v > k:
            return None

    out = [BoolLit(v, p) for v, p in bools.items()]
    out.extend(LinAtom(LE, c, k) for c, k in les.items())
    out.extend(LinAtom(EQ, c, k) for c, k in eqs.items())
    out.extend(LinAtom(DIV, c, k, m) for (c, m), k in divs.items())
    return frozenset(out)
