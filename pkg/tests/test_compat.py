import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import FIXTURES
from predkit.abstraction import Predicate, PredicateSet
from predkit.atoms import EQ, lin
from predkit.compat import (
    CompatibilityMatrix,
    CompatSearch,
    augment,
    choose_preds_compat,
    compute_compatibility,
    explore_compat,
    force_check,
    skipped_configs,
)
from predkit.checker import HOLDS
from predkit.model import extract_candidate_predicates, load_model, parse_property
from predkit.trlimp import NoFeasibleConfig


def synthetic(scopes):
    return PredicateSet.of([lin(EQ, {v: 1 for v in vs}, i) for i, vs in enumerate(scopes)])


def test_fully_compatible_triple():
    ps = synthetic([("x",), ("y",), ("z",)])
    m = CompatibilityMatrix.from_table(ps, {(0, 1): 1, (0, 2): 1, (1, 2): 1})
    cfg = choose_preds_compat(ps, m, 3)
    assert cfg.indices == (0, 1, 2) and cfg.score == 3


def test_single_compatible_pair():
    ps = synthetic([("x",), ("x",), ("y",), ("z",)])
    m = CompatibilityMatrix.from_table(ps, {(1, 3): 1})
    cfg = choose_preds_compat(ps, m, 2)
    assert cfg.indices == (1, 3) and cfg.score == 1


def test_disjointness_rule():
    ps = synthetic([("x",), ("y",), ("x",)])
    p0, p1, p2 = ps
    m = CompatibilityMatrix.from_table(ps, {(0, 2): 1, (1, 2): 1})  # 0,1 incompatible
    s = CompatSearch(ps, m, 3)
    assert not s.disjoint_split(frozenset(), p1)  # nothing to clash with yet
    assert s.disjoint_split(frozenset({p0}), p1)  # the pair stands alone
    # p2 shares x with p0, so {p0, p1} is not split off from the rest
    assert not s.disjoint_split(frozenset({p0, p2}), p1)


def test_skipped_configs_recorded():
    ps = synthetic([("x",), ("y",), ("x",)])
    m = CompatibilityMatrix.from_table(ps, {(0, 2): 1, (1, 2): 1})
    assert skipped_configs(ps, m, 2) == [(0, 1)]
    # with a third predicate bridging the scopes the triple is admitted
    s = explore_compat(ps, m, 3)
    assert frozenset(ps) in s.visited


def test_no_feasible_config():
    with pytest.raises(NoFeasibleConfig):
        choose_preds_compat(PredicateSet(), CompatibilityMatrix(PredicateSet()), 1)


@pytest.fixture(scope="module")
def two_step():
    return load_model(FIXTURES / "two_step.pm")


def test_trivial_property_all_compatible(two_step):
    prop = parse_property("AG(TRUE)", two_step)
    ps = extract_candidate_predicates(two_step, parse_property("AG(r <= 1)", two_step))
    m = compute_compatibility(two_step, ps, prop)
    assert set(m.compat.values()) == {1}


def test_false_property_all_incompatible(two_step):
    prop = parse_property("AG(r = 0)", two_step)
    ps = extract_candidate_predicates(two_step, prop)
    m = compute_compatibility(two_step, ps, prop)
    assert set(m.compat.values()) == {0}
    assert all(v != HOLDS for v in m.verdicts.values())


def test_property_atoms_are_added(two_step):
    prop = parse_property("AG(r <= 1)", two_step)
    ps = extract_candidate_predicates(two_step, prop)
    m = compute_compatibility(two_step, ps, prop)
    r1 = [p for p in ps if str(p.atom) == "r = 1"][0]
    r0 = [p for p in ps if str(p.atom) == "r = 0"][0]
    key = (min(r0.index, r1.index), max(r0.index, r1.index))
    assert m.added[key] == ["r <= 1"]
    assert m(r0, r1) == m(r1, r0)
    assert augment([r0.atom], parse_property("AG(TRUE)", two_step)) == (r0.atom,)


def test_cache_and_jobs_agree(two_step):
    prop = parse_property("AG(r <= 1)", two_step)
    ps = extract_candidate_predicates(two_step, prop)
    cache = {}
    m1 = compute_compatibility(two_step, ps, prop, cache=cache)
    n = len(cache)
    compute_compatibility(two_step, ps, prop, cache=cache)
    assert len(cache) == n
    m2 = compute_compatibility(two_step, ps, prop, jobs=2)
    assert m1.compat == m2.compat


def test_force_check_on_ticket_pair():
    ts = load_model(FIXTURES / "ticket.pm", 2)
    prop = parse_property("AG(z <= 1)", ts)
    ps = extract_candidate_predicates(ts, prop)
    assert force_check(ts, ps, (0, 1), prop) == HOLDS


# ---------------------------------------------------------------------------
# search invariants on random matrices


def random_matrix(rng, n):
    scopes = [(rng.choice("uvwx"),) for _ in range(n)]
    ps = synthetic(scopes)
    table = {(i, j): rng.choice([0, 1, 1]) for i, j in itertools.combinations(range(n), 2)}
    return ps, table, CompatibilityMatrix.from_table(ps, table)


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_cohesion_and_dominance(seed):
    rng = random.Random(seed)
    n = 6
    ps, table, m = random_matrix(rng, n)
    s = explore_compat(ps, m, 3)
    for cfg in s.best.values():
        if cfg is None:
            continue
        assert cfg.score == sum(table[(i, j)] for i, j in itertools.combinations(cfg.indices, 2))
        size = len(cfg.preds)
        full = any(all(table[(i, j)] for i, j in itertools.combinations(c, 2))
                   for c in itertools.combinations(range(n), size))
        if full:
            assert cfg.score == size * (size - 1) // 2


@settings(max_examples=30)
@given(st.integers(0, 10_000))
def test_choice_invariant_under_permutation(seed):
    rng = random.Random(seed)
    n = 6
    ps, table, m = random_matrix(rng, n)
    perm = list(range(n))
    rng.shuffle(perm)
    ps2 = PredicateSet(Predicate(k, ps[perm[k]].atom, f"b{k + 1}") for k in range(n))
    inv = {perm[k]: k for k in range(n)}
    m2 = CompatibilityMatrix.from_table(
        ps2, {(inv[i], inv[j]): v for (i, j), v in table.items()})
    a, b = choose_preds_compat(ps, m, 3), choose_preds_compat(ps2, m2, 3)
    assert (a.score, a.num_vars, len(a.preds)) == (b.score, b.num_vars, len(b.preds))
