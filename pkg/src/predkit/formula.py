"""Quantifier-free formulas over linear integer arithmetic and booleans.

A :class:`Formula` is an immutable disjunction of cubes; a cube is a
frozenset of atoms (see :mod:`predkit.atoms`).  ``FALSE`` has no cubes and
``TRUE`` is the single empty cube.  All operations are pure.
"""
from __future__ import annotations

from typing import Iterable, Mapping

from .atoms import (
    BoolLit,
    LinAtom,
    atom_key,
    cmp_atoms,
    eval_atom,
    make_cube,
    negate,
    rename_atom,
)
from .lia import cube_sat, eliminate_cube

PRIME = "'"


class RenameCollision(ValueError):
    pass


class UnsupportedAtom(ValueError):
    pass


def prime(name: str) -> str:
    return name + PRIME


def unprime(name: str) -> str:
    return name[:-1] if name.endswith(PRIME) else name


def is_primed(name: str) -> bool:
    return name.endswith(PRIME)


def _absorb(cubes) -> frozenset:
    cubes = set(cubes)
    if frozenset() in cubes:
        return frozenset([frozenset()])
    if len(cubes) < 2:
        return frozenset(cubes)
    ordered = sorted(cubes, key=len)
    kept = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


class Formula:
    __slots__ = ("cubes", "_hash")

    def __init__(self, cubes: Iterable = ()):
        self.cubes = _absorb(c for c in cubes if c is not None)
        self._hash = None

    # construction -------------------------------------------------------
    @staticmethod
    def atom(a) -> "Formula":
        if a is True:
            return TRUE
        if a is False:
            return FALSE
        return Formula([make_cube([a])])

    @staticmethod
    def of_cube(atoms) -> "Formula":
        return Formula([make_cube(atoms)])

    @staticmethod
    def boolvar(name: str, positive: bool = True) -> "Formula":
        return Formula([frozenset([BoolLit(name, positive)])])

    @staticmethod
    def compare(op: str, coeffs: Mapping[str, int], const: int = 0) -> "Formula":
        """``sum(coeffs) + const  op  0`` as a formula."""
        return Formula(make_cube([a]) for a in cmp_atoms(op, dict(coeffs), const))

    # queries -------------------------------------------------------------
    def is_false(self) -> bool:
        return not self.cubes

    def is_true(self) -> bool:
        return frozenset() in self.cubes

    def vars(self) -> frozenset:
        return frozenset(v for c in self.cubes for a in c for v in a.vars())

    def atoms(self) -> frozenset:
        return frozenset(a for c in self.cubes for a in c)

    def sorted_cubes(self) -> list:
        return sorted(
            (sorted(c, key=atom_key) for c in self.cubes),
            key=lambda c: [atom_key(a) for a in c],
        )

    # boolean algebra -------------------------------------------------------
    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Formula(self.cubes | other.cubes)

    def __invert__(self) -> "Formula":
        return neg(self)

    def __eq__(self, other):
        return isinstance(other, Formula) and self.cubes == other.cubes

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.cubes)
        return self._hash

    def __len__(self):
        return len(self.cubes)

    def __repr__(self):
        return f"Formula({self})"

    def __str__(self):
        return to_text(self)

    def __reduce__(self):
        return (Formula, (tuple(self.cubes),))


TRUE = Formula([frozenset()])
FALSE = Formula()


def to_text(f: Formula, fmt_atom=str) -> str:
    """Stable, sorted DNF rendering; parses back with the model syntax."""
    if f.is_false():
        return "false"
    if f.is_true():
        return "true"
    cubes = f.sorted_cubes()
    parts = []
    for c in cubes:
        body = " & ".join(fmt_atom(a) for a in c)
        parts.append(body if len(cubes) == 1 or len(c) == 1 else f"({body})")
    return " | ".join(parts)


def conj_cubes(c1, c2, prune: bool = True):
    c = make_cube(c1 | c2)
    if c is None or (prune and not cube_sat(c)):
        return None
    return c


def conj(*fs: Formula, prune: bool = True) -> Formula:
    """Conjunction with distribution; unsatisfiable cubes are pruned."""
    acc = TRUE
    for f in fs:
        if f.is_false():
            return FALSE
        if f.is_true():
            continue
        if acc.is_true():
            acc = f if not prune else Formula(c for c in f.cubes if cube_sat(c))
            continue
        out = set()
        for a in acc.cubes:
            for b in f.cubes:
                c = conj_cubes(a, b, prune)
                if c is not None:
                    out.add(c)
        acc = Formula(out)
        if acc.is_false():
            return FALSE
    return acc


def disj(*fs: Formula) -> Formula:
    out = set()
    for f in fs:
        out |= f.cubes
    return Formula(out)


def neg_cube(cube) -> Formula:
    alts = []
    for a in cube:
        for b in negate(a):
            alts.append(make_cube([b]))
    return Formula(alts)


def neg(f: Formula) -> Formula:
    if f.is_false():
        return TRUE
    if f.is_true():
        return FALSE
    # negate the largest cubes last: intermediate products stay small
    acc = TRUE
    for c in sorted(f.cubes, key=len):
        acc = conj(acc, neg_cube(c))
        if acc.is_false():
            return FALSE
    return acc


def implies(f: Formula, g: Formula) -> Formula:
    return disj(neg(f), g)


def iff(f: Formula, g: Formula) -> Formula:
    return disj(conj(f, g), conj(neg(f), neg(g)))


def satisfiable(f: Formula) -> bool:
    return any(cube_sat(c) for c in f.cubes)


def cube_entails(cube, g: Formula) -> bool:
    """Does the single cube entail ``g``?"""
    if not cube_sat(cube):
        return True
    if any(d <= cube for d in g.cubes):
        return True
    residue = [cube]
    for d in sorted(g.cubes, key=len):
        nxt = []
        for r in residue:
            if conj_cubes(r, d) is None:
                nxt.append(r)
                continue
            for a in d:
                if a in r:
                    continue
                for b in negate(a):
                    nb = make_cube([b])
                    if nb is None:
                        continue
                    c = conj_cubes(r, nb)
                    if c is not None:
                        nxt.append(c)
        residue = list(dict.fromkeys(nxt))
        if not residue:
            return True
    return False


def entails(f: Formula, g: Formula) -> bool:
    """Validity of ``f -> g``."""
    if g.is_true() or f.is_false():
        return True
    return all(cube_entails(c, g) for c in f.cubes)


def equivalent(f: Formula, g: Formula) -> bool:
    return entails(f, g) and entails(g, f)


def strictly_entails(f: Formula, g: Formula) -> bool:
    return entails(f, g) and not entails(g, f)


def eliminate(f: Formula, xs) -> Formula:
    """Quantifier-free equivalent of ``exists xs. f``."""
    xs = frozenset(xs)
    if not xs or not (f.vars() & xs):
        return f
    out = []
    for c in f.cubes:
        for a in c:
            if isinstance(a, LinAtom) and a.op not in ("<=", "=", "%"):
                raise UnsupportedAtom(str(a))
        out.extend(d for d in eliminate_cube(c, xs) if cube_sat(d))
    return Formula(out)


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename variables; the map must be injective on the occurring ones."""
    occurring = f.vars()
    image = {}
    for v in occurring:
        w = mapping.get(v, v)
        if w in image and image[w] != v:
            raise RenameCollision(f"{image[w]} and {v} both map to {w}")
        image[w] = v
    if not occurring or all(mapping.get(v, v) == v for v in occurring):
        return f
    return Formula(make_cube(rename_atom(a, mapping) for a in c) for c in f.cubes)


def to_next(f: Formula, names: Iterable[str] | None = None) -> Formula:
    """Prime every (or every listed) current-state variable."""
    vs = f.vars() if names is None else set(names) & f.vars()
    return rename(f, {v: prime(v) for v in vs if not is_primed(v)})


def to_current(f: Formula) -> Formula:
    return rename(f, {v: unprime(v) for v in f.vars() if is_primed(v)})


def simplify(f: Formula) -> Formula:
    """Drop unsatisfiable cubes and cubes entailed by a single other cube."""
    cubes = [c for c in f.cubes if cube_sat(c)]
    cubes.sort(key=len)
    kept: list = []
    for c in cubes:
        if any(cube_entails(c, Formula([k])) for k in kept):
            continue
        kept = [k for k in kept if not cube_entails(k, Formula([c]))]
        kept.append(c)
    return Formula(kept)


def evaluate(f: Formula, env: Mapping) -> bool:
    return any(all(eval_atom(a, env) for a in c) for c in f.cubes)


def substitute_bools(f: Formula, table: Mapping[str, Formula]) -> Formula:
    """Replace boolean variables by formulas (negative literals by negations)."""
    out = []
    negs: dict = {}
    for c in f.cubes:
        parts = []
        rest = []
        for a in c:
            if isinstance(a, BoolLit) and a.var in table:
                if a.positive:
                    parts.append(table[a.var])
                else:
                    if a.var not in negs:
                        negs[a.var] = neg(table[a.var])
                    parts.append(negs[a.var])
            else:
                rest.append(a)
        out.append(conj(Formula([make_cube(rest)]), *parts))
    return disj(*out)
