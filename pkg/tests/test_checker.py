import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIXTURES, random_boxed_system, random_state_prop
from predkit.abstraction import PredicateSet, abstract_property, abstract_system
from predkit.checker import (
    HOLDS,
    NONCONVERGENT,
    NOT_SHOWN,
    CheckLimits,
    SymbolicChecker,
    Verdict,
    check,
    default_max_iter,
    pre_image,
    widen_cube,
)
from predkit.ctl import UnsupportedOperator
from predkit.formula import FALSE, TRUE, conj, disj, entails, equivalent, satisfiable
from predkit.model import load_model, parse_formula, parse_property, parse_system
from predkit.oracle import oracle_check


@pytest.fixture(scope="module")
def ticket():
    return load_model(FIXTURES / "ticket.pm", 2)


@pytest.fixture(scope="module")
def two_step():
    return load_model(FIXTURES / "two_step.pm")


def zpreds(ts):
    atoms = []
    for t in ("z = 1", "z < 1"):
        ((a,),) = [tuple(c) for c in parse_formula(t, ts).cubes]
        atoms.append(a)
    return PredicateSet.of(atoms)


def test_pre_image_examples(two_step):
    t2 = two_step.transition("t2")
    assert equivalent(pre_image(t2, TRUE), parse_formula("pc2 = a & r = 0", two_step))
    assert pre_image(t2, FALSE).is_false()


def test_ticket_abstracted_holds(ticket):
    ps = zpreds(ticket)
    prop = parse_property("AG(z <= 1)", ticket)
    v = check(abstract_system(ticket, ps), abstract_property(prop, ps, ticket))
    assert v.status == HOLDS and v.exit_code == 0


def test_ticket_weaker_bound_not_shown(ticket):
    ps = zpreds(ticket)
    prop = parse_property("AG(z < 1)", ticket)
    v = check(abstract_system(ticket, ps), abstract_property(prop, ps, ticket))
    assert v.status == NOT_SHOWN and satisfiable(v.witness)


def test_trivial_and_failing_init(two_step):
    assert check(two_step, parse_property("AG(TRUE)", two_step)).holds
    v = check(two_step, parse_property("AG(r = 1)", two_step))
    assert v.status == NOT_SHOWN
    assert entails(v.witness, parse_formula("r = 0", two_step))
    assert v.exit_code == 1


def test_two_step_reaches_one(two_step):
    assert check(two_step, parse_property("AG(r <= 1)", two_step)).holds
    assert check(two_step, parse_property("AF(r = 1)", two_step)).holds
    assert not check(two_step, parse_property("AG(r = 0)", two_step)).holds


def test_deadlocks_have_no_paths():
    # the only state deadlocks: AX and EG claims are about infinite paths
    ts = parse_system("model m\nvar x : int\ninit x = 0\nrelation t: x = 1 & x' = x\n")
    assert check(ts, parse_property("AX(x = 5)", ts)).holds
    assert check(ts, parse_property("AF(x = 5)", ts)).holds
    box = {"x": (0, 1)}
    assert oracle_check(ts, parse_property("AF(x = 5)", ts), box).holds


def test_nonconvergent_counter():
    ts = parse_system("model m\nvar x : int\ninit x = 0\nrelation t: x' = x + 1\n")
    p = parse_property("AG(x != -5)", ts)
    v = check(ts, p, CheckLimits(10, 0))
    assert v.status == NONCONVERGENT and v.exit_code == 2 and str(v) == "Nonconvergent(10)"
    # widening closes the chain
    assert check(ts, p, CheckLimits(30, 3)).holds


def test_widening_never_proves_a_false_property():
    ts = parse_system("model m\nvar x : int\ninit x = 0\nrelation t: x' = x + 1\n")
    v = check(ts, parse_property("AG(x <= 20)", ts), CheckLimits(64, 2))
    assert v.status != HOLDS


def test_widen_cube_chain():
    ts = parse_system("model m\nvar x, y : int\nrelation t: x' = x & y' = y\n")

    def cube(t):
        (c,) = parse_formula(t, ts).cubes
        return c

    c = cube("x <= 3 & y = 0")
    olds = [cube("x <= 1 & y = 0"), cube("x <= 2 & y = 0")]
    assert widen_cube(c, olds) == cube("y = 0")
    assert widen_cube(c, olds[:1]) == c  # a single step is not a chain
    assert widen_cube(c, olds, frozen={"x"}) == c
    eq = widen_cube(cube("x = 3"), [cube("x = 1"), cube("x = 2")])
    assert eq == cube("x >= 1")


def test_max_iter_env(monkeypatch):
    monkeypatch.setenv("PREDKIT_MAX_ITER", "7")
    assert default_max_iter() == 7 and CheckLimits().max_iterations == 7
    monkeypatch.setenv("PREDKIT_MAX_ITER", "junk")
    assert default_max_iter() == 64
    with pytest.raises(ValueError):
        CheckLimits(0)


def test_rejects_non_actl(ticket):
    with pytest.raises(UnsupportedOperator):
        check(ticket, parse_property("EF(z = 2)", ticket))


def test_verdict_codes():
    assert Verdict(HOLDS).exit_code == 0
    assert Verdict(NOT_SHOWN).exit_code == 1
    assert Verdict(NONCONVERGENT, iterations=3).exit_code == 2


# ---------------------------------------------------------------------------
# algebraic properties of the pre-image


def _trans(seed):
    ts, _ = random_boxed_system(random.Random(seed), 2, 5, 2)
    return ts


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.integers(0, 5), st.integers(0, 5))
def test_pre_image_monotone_and_distributive(seed, c1, c2):
    ts = _trans(seed)
    r1, r2 = (f for _, f in ts.transitions[:2])
    a2 = parse_formula(f"v0 <= {max(c1, c2)}", ts)
    a1 = conj(a2, parse_formula(f"v1 >= {c2}", ts))
    assert entails(pre_image(r1, a1), pre_image(r1, a2))
    assert equivalent(pre_image(disj(r1, r2), a2), disj(pre_image(r1, a2), pre_image(r2, a2)))


def test_checker_agrees_with_oracle_small():
    rng = random.Random(11)
    for _ in range(25):
        ts, box = random_boxed_system(rng, 2, 5, 3)
        names = [v.name for v in ts.vars]
        text = f"{rng.choice(['AG', 'AF'])}({random_state_prop(rng, names, 5)})"
        p = parse_property(text, ts)
        v = check(ts, p, CheckLimits(256, 0))
        assert v.status == oracle_check(ts, p, box).status, text


# ---------------------------------------------------------------------------
# existential abstraction keeps concrete paths; counterexamples survive
# refinement by disjoint predicates


def _pred(ts, text):
    ((a,),) = [tuple(c) for c in parse_formula(text, ts).cubes]
    return a


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_ectl_preserved_by_abstraction(seed):
    rng = random.Random(seed)
    ts, box = random_boxed_system(rng, 2, 4, 3)
    c = rng.randint(0, 4)
    concrete = parse_property(f"EF(v0 = {c})", ts)
    if not oracle_check(ts, concrete, box).holds:
        return
    # abstract v0 with a predicate that can express the target
    ps = PredicateSet.of([_pred(ts, f"v0 = {c}")])
    a = abstract_system(ts, ps)
    ap = abstract_property(concrete, ps, ts)
    # some initial abstract state reaches the target region
    reach = SymbolicChecker(a, CheckLimits(256, 0)).sat(ap)
    assert satisfiable(conj(a.init, reach))


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_counterexamples_survive_disjoint_refinement(seed):
    rng = random.Random(seed)
    ts, box = random_boxed_system(rng, 2, 4, 3)
    c = rng.randint(0, 3)
    p = parse_property(f"AG(v0 <= {c})", ts)
    p1 = PredicateSet.of([_pred(ts, f"v0 <= {c}")], "p")
    v1 = check(abstract_system(ts, p1), abstract_property(p, p1, ts), CheckLimits(256, 0))
    if v1.status != NOT_SHOWN:
        return
    p2 = PredicateSet.of([_pred(ts, f"v1 <= {rng.randint(0, 4)}")], "q")
    both = p1.union(p2)
    v12 = check(abstract_system(ts, both), abstract_property(p, both, ts), CheckLimits(256, 0))
    assert v12.status in (NOT_SHOWN, NONCONVERGENT)
