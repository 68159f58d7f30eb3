"""Pairwise compatibility of predicates on a small instance, and the
maximum-cohesion configuration search built on it.

Two predicates are compatible when abstracting the small instance with
them (plus the property's own atoms over the variables they share with
the property) still proves the property.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .abstraction import PredicateSet, UnexpressibleAtom, abstract_property, abstract_system
from .atoms import LinAtom
from .checker import HOLDS, CheckLimits, Verdict, check
from .ctl import CtlProperty
from .model import TransitionSystem
from .trlimp import Config, make_config, pair_key, pick_best

log = logging.getLogger(__name__)

UNEXPRESSIBLE = "Unexpressible"


def property_atoms(prop: CtlProperty) -> list:
    out = []
    for f in prop.leaves():
        for c in f.sorted_cubes():
            for a in c:
                if isinstance(a, LinAtom) and a not in out:
                    out.append(a)
    return out


def property_scope(prop: CtlProperty) -> frozenset:
    out = set()
    for f in prop.leaves():
        out |= f.vars()
    return frozenset(out)


def augment(atoms, prop: CtlProperty) -> tuple:
    """``atoms`` plus the property atoms over the variables they share with
    the property, as a canonical sorted tuple."""
    atoms = list(atoms)
    scope = set()
    for a in atoms:
        scope |= set(a.vars())
    common = scope & property_scope(prop)
    extra = [a for a in property_atoms(prop) if set(a.vars()) & common] if common else []
    return tuple(sorted(set(atoms) | set(extra), key=str))


@dataclass
class CompatibilityMatrix:
    """``compat`` maps an index pair ``(i, j)``, ``i < j``, to 0 or 1."""

    preds: PredicateSet
    compat: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)  # pair -> status string
    added: dict = field(default_factory=dict)  # pair -> property atoms added
    reasons: dict = field(default_factory=dict)  # pair -> text, for 0 entries

    def __call__(self, p, q) -> int:
        i = p.index if hasattr(p, "index") else p
        j = q.index if hasattr(q, "index") else q
        if i == j:
            return 1
        return self.compat[pair_key(i, j)]

    def to_json(self) -> dict:
        name = {p.index: str(p.atom) for p in self.preds}
        return {
            "preds": [name[p.index] for p in self.preds],
            "compat": [
                [name[i], name[j], v, self.verdicts.get((i, j))]
                for (i, j), v in sorted(self.compat.items())
            ],
        }

    @staticmethod
    def from_table(ps: PredicateSet, table) -> "CompatibilityMatrix":
        """Matrix from ``{(i, j): 0|1}`` given by candidate index."""
        m = CompatibilityMatrix(ps)
        for p, q in itertools.combinations(list(ps), 2):
            m.compat[pair_key(p.index, q.index)] = 0
        for (i, j), v in table.items():
            m.compat[pair_key(i, j)] = int(v)
        return m


def verify_with(ts: TransitionSystem, atoms, prop: CtlProperty,
                limits: CheckLimits | None = None) -> tuple:
    """Abstract ``ts`` and ``prop`` with ``atoms`` and check.

    Returns ``(status, detail)``; status is a checker verdict name or
    ``Unexpressible`` when the property has no exact abstract image.
    """
    ps = PredicateSet.of(atoms, prefix="_c")
    try:
        aprop = abstract_property(prop, ps, ts)
    except UnexpressibleAtom as e:
        return UNEXPRESSIBLE, str(e)
    v: Verdict = check(abstract_system(ts, ps), aprop, limits)
    return v.status, str(v)


def _job(args):
    ts, atoms, prop, limits = args
    return verify_with(ts, atoms, prop, limits)


def compute_compatibility(small_ts: TransitionSystem, ps: PredicateSet, prop: CtlProperty,
                          limits: CheckLimits | None = None, jobs: int = 1,
                          cache: dict | None = None) -> CompatibilityMatrix:
    limits = limits or CheckLimits()
    cache = {} if cache is None else cache
    preds = list(ps)
    tries = {}
    for p, q in itertools.combinations(preds, 2):
        tries[pair_key(p.index, q.index)] = augment([p.atom, q.atom], prop)
    todo = sorted({t for t in tries.values() if t not in cache}, key=lambda t: [str(a) for a in t])
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = ex.map(_job, [(small_ts, t, prop, limits) for t in todo])
            for t, r in zip(todo, results):
                cache[t] = r
    else:
        for t in todo:
            cache[t] = verify_with(small_ts, t, prop, limits)
    m = CompatibilityMatrix(ps)
    pair_atoms = {pair_key(p.index, q.index): {p.atom, q.atom}
                  for p, q in itertools.combinations(preds, 2)}
    for key, t in tries.items():
        status, detail = cache[t]
        m.compat[key] = 1 if status == HOLDS else 0
        m.verdicts[key] = status
        m.added[key] = [str(a) for a in t if a not in pair_atoms[key]]
        if status != HOLDS:
            m.reasons[key] = detail
            log.info("pair %s incompatible: %s", key, detail)
    return m


# ---------------------------------------------------------------------------
# configuration search


def compat_rank(c: Config) -> tuple:
    """Smaller is better: higher cohesion, then more variables, fewer
    predicates, then the lexicographically smallest index tuple."""
    return (-c.score, -c.num_vars, len(c.preds), c.indices)


def _scope(preds) -> set:
    out = set()
    for p in preds:
        out |= p.scope
    return out


class CompatSearch:
    def __init__(self, ps: PredicateSet, m: CompatibilityMatrix, k: int):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.preds = list(ps)
        self.m = m
        self.k = k
        self.best: dict = {lvl: None for lvl in range(1, k + 1)}
        self.visited: set = set()
        self.skipped: set = set()  # extensions blocked by the disjointness rule

    def cohesion(self, cur) -> int:
        return sum(self.m(p, q) for p, q in itertools.combinations(cur, 2))

    def disjoint_split(self, cur: frozenset, p) -> bool:
        """Some member incompatible with ``p`` forms, together with ``p``,
        an abstraction disjoint from the rest of ``cur``."""
        for q in sorted(cur, key=lambda x: x.index):
            if self.m(p, q) != 0:
                continue
            if not (_scope(cur - {q}) & (p.scope | q.scope)):
                return True
        return False

    def explore(self, cur: frozenset, level: int):
        if level >= self.k:
            return
        for p in self.preds:
            if p in cur:
                continue
            nxt = cur | {p}
            if nxt in self.visited:
                continue
            if self.disjoint_split(cur, p):
                self.skipped.add(nxt)
                continue
            self.visited.add(nxt)
            cfg = make_config(nxt, self.cohesion(nxt))
            old = self.best[level + 1]
            if old is None or compat_rank(cfg) < compat_rank(old):
                self.best[level + 1] = cfg
            self.explore(nxt, level + 1)

    def run(self) -> Config:
        self.explore(frozenset(), 0)
        return pick_best(self.best.values(), compat_rank)


def explore_compat(ps: PredicateSet, m: CompatibilityMatrix, k: int) -> CompatSearch:
    s = CompatSearch(ps, m, k)
    s.explore(frozenset(), 0)
    return s


def choose_preds_compat(ps: PredicateSet, m: CompatibilityMatrix, k: int) -> Config:
    return CompatSearch(ps, m, k).run()


def skipped_configs(ps: PredicateSet, m: CompatibilityMatrix, k: int) -> list:
    """Configurations that the disjointness rule blocked and no other
    route admitted, sorted by index tuple."""
    s = explore_compat(ps, m, k)
    out = [c for c in s.skipped if c not in s.visited]
    return sorted((tuple(sorted(p.index for p in c)) for c in out))


def force_check(small_ts: TransitionSystem, ps: PredicateSet, indices, prop: CtlProperty,
                limits: CheckLimits | None = None) -> str:
    """Verdict name of checking the small instance under a configuration
    (with the same property augmentation the pair check uses)."""
    atoms = [ps.by_index(i).atom for i in indices]
    status, _ = verify_with(small_ts, augment(atoms, prop), prop, limits)
    return status


__all__ = [
    "CompatibilityMatrix", "compute_compatibility", "choose_preds_compat",
    "explore_compat", "skipped_configs", "force_check", "compat_rank", "augment",
    "verify_with", "UNEXPRESSIBLE",
]
