"""Shared generators and brute-force references for the tests."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from hypothesis import strategies as st

from predkit.atoms import lin
from predkit.formula import Formula, conj, disj, evaluate, neg
from predkit.model import parse_system

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "predkit" / "fixtures"

VARS = ("x", "y", "z")
BOX = range(-4, 5)


# ---------------------------------------------------------------------------
# formulas


@st.composite
def atoms(draw, vars_=VARS, max_coeff=2, max_bound=4):
    k = draw(st.integers(1, min(2, len(vars_))))
    vs = draw(st.lists(st.sampled_from(vars_), min_size=k, max_size=k, unique=True))
    coeffs = {v: draw(st.integers(-max_coeff, max_coeff).filter(bool)) for v in vs}
    op = draw(st.sampled_from(["<=", "<=", "="]))
    bound = draw(st.integers(-max_bound, max_bound))
    a = lin(op, coeffs, bound)
    return Formula.atom(a)


def lin_atoms(vars_=VARS, **kw):
    """Nontrivial atoms (never a ground TRUE/FALSE)."""
    return atoms(vars_, **kw).filter(lambda f: len(f.cubes) == 1 and len(next(iter(f.cubes))) == 1) \
        .map(lambda f: next(iter(next(iter(f.cubes)))))


@st.composite
def formulas(draw, vars_=VARS, depth=2):
    if depth == 0 or draw(st.integers(0, 2)) == 0:
        return draw(atoms(vars_))
    kind = draw(st.sampled_from(["and", "or", "not"]))
    if kind == "not":
        return neg(draw(formulas(vars_, depth - 1)))
    a = draw(formulas(vars_, depth - 1))
    b = draw(formulas(vars_, depth - 1))
    return conj(a, b) if kind == "and" else disj(a, b)


def box_formula(vars_, lo, hi) -> Formula:
    parts = []
    for v in vars_:
        parts.append(Formula.compare("<=", {v: -1}, lo))  # -v + lo <= 0
        parts.append(Formula.compare("<=", {v: 1}, -hi))
    return conj(*parts)


def envs(vars_, rng=BOX):
    for vals in itertools.product(rng, repeat=len(vars_)):
        yield dict(zip(vars_, vals))


def models_of(f: Formula, vars_=VARS, rng=BOX) -> set:
    return {tuple(e[v] for v in vars_) for e in envs(vars_, rng) if evaluate(f, e)}


# ---------------------------------------------------------------------------
# random boxed systems


def random_boxed_system(rng: random.Random, nvars: int = 2, hi: int = 6, ntrans: int = 3):
    """A system over ints ``v0..`` confined to ``[0, hi]`` by its restriction.

    Transitions are guarded linear updates; successors leaving the box are
    not part of the relation (the state space cuts them off).
    """
    names = [f"v{i}" for i in range(nvars)]
    lines = ["model rnd", f"var {', '.join(names)} : int"]
    lines.append("restrict " + " & ".join(f"0 <= {v} & {v} <= {hi}" for v in names))
    lines.append("init " + " & ".join(f"{v} = {rng.randint(0, hi // 2)}" for v in names))
    for t in range(ntrans):
        guard = []
        for _ in range(rng.randint(0, 2)):
            v = rng.choice(names)
            guard.append(f"{v} {rng.choice(['<=', '>=', '='])} {rng.randint(0, hi)}")
        upd = []
        for v in names:
            kind = rng.random()
            if kind < 0.4:
                upd.append(f"{v}' = {v} + {rng.choice([1, 1, 2, -1])}")
            elif kind < 0.55:
                upd.append(f"{v}' = {rng.randint(0, hi)}")
            elif kind < 0.65 and nvars > 1:
                w = rng.choice([u for u in names if u != v])
                upd.append(f"{v}' = {w}")
            else:
                upd.append(f"{v}' = {v}")
        lines.append(f"relation t{t}: " + " & ".join(guard + upd))
    ts = parse_system("\n".join(lines) + "\n")
    return ts, {v: (0, hi) for v in names}


def random_state_prop(rng: random.Random, names, hi: int) -> str:
    v = rng.choice(names)
    c = rng.randint(0, hi)
    leaf = f"{v} {rng.choice(['<=', '>=', '=', '!='])} {c}"
    if rng.random() < 0.3:
        w = rng.choice(names)
        leaf = f"({leaf} | {w} {rng.choice(['<=', '>='])} {rng.randint(0, hi)})"
    return leaf


def random_formula(rng: random.Random, vars_=VARS, depth: int = 2) -> Formula:
    """Seeded counterpart of the ``formulas`` strategy."""
    if depth == 0 or rng.random() < 0.3:
        while True:
            k = rng.randint(1, min(2, len(vars_)))
            coeffs = {v: rng.choice([-2, -1, 1, 2]) for v in rng.sample(list(vars_), k)}
            a = lin(rng.choice(["<=", "<=", "="]), coeffs, rng.randint(-4, 4))
            if not isinstance(a, bool):
                return Formula.atom(a)
    kind = rng.choice(["and", "or", "not"])
    if kind == "not":
        return neg(random_formula(rng, vars_, depth - 1))
    a, b = random_formula(rng, vars_, depth - 1), random_formula(rng, vars_, depth - 1)
    return conj(a, b) if kind == "and" else disj(a, b)


def random_atom(rng: random.Random, vars_):
    while True:
        f = random_formula(rng, vars_, 0)
        (c,) = f.cubes
        if len(c) == 1:
            return next(iter(c))
