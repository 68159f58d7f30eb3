"""Exact quantifier elimination for conjunctions of linear integer atoms.

A variable is projected out of a cube by, in order of preference:

* substitution through an equality (with a divisibility side condition when
  the coefficient is not a unit),
* Fourier-Motzkin when every lower/upper bound pair has a unit coefficient
  on one side (exact over the integers in that case),
* Cooper's least-witness expansion otherwise.

The result of projecting one variable is a list of cubes (a disjunction).
"""
from __future__ import annotations

from functools import lru_cache
from math import gcd

from .atoms import DIV, EQ, LE, BoolLit, LinAtom, lin, make_cube


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


def _replace(atom: LinAtom, x: str, mult: int, scale: int, value: dict, vconst: int):
    """Rewrite ``atom`` using the identity ``scale * x = value + vconst``.

    The atom is first multiplied by ``mult`` (positive); ``scale`` must
    divide ``mult * coeff(x)``.
    """
    c = atom.coeff(x) * mult
    q = c // scale
    d = {}
    for v, a in atom.coeffs:
        if v != x:
            d[v] = a * mult
    for v, a in value.items():
        d[v] = d.get(v, 0) + q * a
    bound = atom.bound * mult - q * vconst
    if atom.op == DIV:
        return lin(DIV, d, bound, atom.mod * mult)
    return lin(atom.op, d, bound)


def project(atoms, x: str) -> list:
    """Eliminate integer variable ``x`` from a conjunction of linear atoms.

    Returns a list of normalized cubes (frozensets) whose disjunction is
    equivalent to ``exists x. /\\ atoms``.
    """
    keep = []
    rel = []
    for a in atoms:
        if isinstance(a, LinAtom) and a.coeff(x):
            rel.append(a)
        else:
            keep.append(a)
    if not rel:
        cube = make_cube(keep)
        return [] if cube is None else [cube]

    eqs = [a for a in rel if a.op == EQ]
    if eqs:
        eq = min(eqs, key=lambda a: (abs(a.coeff(x)), len(a.coeffs)))
        c = eq.coeff(x)
        k = abs(c)
        sgn = 1 if c > 0 else -1
        # k*x = sgn*(bound - rest)
        value = {v: -sgn * a for v, a in eq.coeffs if v != x}
        vconst = sgn * eq.bound
        out = list(keep)
        for a in rel:
            if a is eq:
                continue
            ca = abs(a.coeff(x))
            out.append(_replace(a, x, k // gcd(k, ca), k, value, vconst))
        if k > 1:
            out.append(lin(DIV, value, -vconst, k))
        cube = make_cube(out)
        return [] if cube is None else [cube]

    lowers = [a for a in rel if a.op == LE and a.coeff(x) < 0]
    uppers = [a for a in rel if a.op == LE and a.coeff(x) > 0]
    divs = [a for a in rel if a.op == DIV]

    if not divs:
        if not lowers or not uppers:
            cube = make_cube(keep)
            return [] if cube is None else [cube]
        if all(
            abs(lo.coeff(x)) == 1 or abs(up.coeff(x)) == 1
            for lo in lowers
            for up in uppers
        ):
            out = list(keep)
            for lo in lowers:
                a = -lo.coeff(x)
                for up in uppers:
                    b = up.coeff(x)
                    d = {}
                    for v, cv in lo.coeffs:
                        if v != x:
                            d[v] = d.get(v, 0) + b * cv
                    for v, cv in up.coeffs:
                        if v != x:
                            d[v] = d.get(v, 0) + a * cv
                    out.append(lin(LE, d, a * up.bound + b * lo.bound))
            cube = make_cube(out)
            return [] if cube is None else [cube]

    return _cooper(keep, rel, lowers, uppers, divs, x)


def _cooper(keep, rel, lowers, uppers, divs, x):
    L = 1
    for a in rel:
        L = _lcm(L, abs(a.coeff(x)))
    delta = L
    for a in divs:
        delta = _lcm(delta, a.mod * (L // abs(a.coeff(x))))

    # Each bound atom, scaled so x's coefficient is +-L, reads y <= e or y >= e
    # with y = L*x.  Collect e as (coeffs, const).
    def bound_expr(a):
        m = L // abs(a.coeff(x))
        sgn = 1 if a.coeff(x) > 0 else -1
        # sgn*y + m*rest <= m*bound  ->  y op sgn*(m*bound - m*rest)
        e = {v: -sgn * m * c for v, c in a.coeffs if v != x}
        return e, sgn * m * a.bound

    if lowers and (not uppers or len(lowers) <= len(uppers)):
        witnesses = [bound_expr(a) for a in lowers]
        step = 1
    elif uppers:
        witnesses = [bound_expr(a) for a in uppers]
        step = -1
    else:
        witnesses = [({}, 0)]
        step = 1

    out = []
    seen = set()
    for e, c0 in witnesses:
        for j in range(delta):
            vconst = c0 + step * j
            atoms = list(keep)
            for a in rel:
                m = L // abs(a.coeff(x))
                atoms.append(_replace(a, x, m, L, e, vconst))
            if L > 1:
                atoms.append(lin(DIV, e, -vconst, L))
            cube = make_cube(atoms)
            if cube is not None and cube not in seen:
                seen.add(cube)
                out.append(cube)
    return out


def _choose_var(atoms, candidates):
    best = None
    best_cost = None
    for x in candidates:
        lo = up = 0
        unit_eq = False
        has_eq = False
        for a in atoms:
            if not isinstance(a, LinAtom):
                continue
            c = a.coeff(x)
            if not c:
                continue
            if a.op == EQ:
                has_eq = True
                if abs(c) == 1:
                    unit_eq = True
            elif a.op == LE:
                if c > 0:
                    up += 1
                else:
                    lo += 1
            else:
                lo += 1
                up += 1
        if unit_eq:
            cost = (0, 0)
        elif has_eq:
            cost = (1, 0)
        else:
            cost = (2, lo * up - lo - up)
        if best_cost is None or cost < best_cost:
            best, best_cost = x, cost
    return best


def eliminate_cube(cube, xs) -> list:
    """Project the variables ``xs`` out of ``cube``; returns a list of cubes.

    Boolean literals on eliminated variables are dropped (a satisfiable cube
    never carries both polarities).
    """
    xs = set(xs)
    if not xs:
        return [cube]
    base = [a for a in cube if not (isinstance(a, BoolLit) and a.var in xs)]
    start = make_cube(base)
    if start is None:
        return []
    todo = [start]
    done = []
    while todo:
        c = todo.pop()
        present = {v for a in c if isinstance(a, LinAtom) for v in a.vars()} & xs
        if not present:
            done.append(c)
            continue
        x = _choose_var(c, sorted(present))
        todo.extend(project(c, x))
    return done


@lru_cache(maxsize=500_000)
def lin_sat(atoms: frozenset) -> bool:
    """Exact satisfiability of a conjunction of linear atoms."""
    if not atoms:
        return True
    names = sorted({v for a in atoms for v in a.vars()})
    x = _choose_var(atoms, names)
    for c in project(atoms, x):
        if lin_sat(c):
            return True
    return False


def cube_sat(cube) -> bool:
    if cube is None:
        return False
    lins = frozenset(a for a in cube if isinstance(a, LinAtom))
    return lin_sat(lins)
