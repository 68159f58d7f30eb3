"""Transition-level imprecision scores and the configuration search that
uses them.

For an ordered pair of transitions (r_k then r_j) the concrete relation
``r_k & next(pre[r_j](TRUE))`` says which states can fire r_k into a state
that enables r_j.  Abstracting both transitions can make that composition
feasible in more predicate regions than it concretely is; the number of
extra regions is the imprecision charged to the predicate (or pair).
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from .abstraction import Predicate, PredicateSet, alpha_trans, gamma
from .checker import pre_image
from .formula import TRUE, Formula, conj, neg, satisfiable, strictly_entails, to_next
from .model import TransitionSystem

log = logging.getLogger(__name__)


class NoFeasibleConfig(RuntimeError):
    pass


def pair_key(i: int, m: int) -> tuple:
    return (i, m) if i <= m else (m, i)


@dataclass
class ImprecisionScores:
    """``IS`` maps a candidate index to its score, ``PwS`` an unordered index
    pair ``(i, m)`` with ``i < m`` to the pair score.  ``per_pair`` keeps the
    individual increments of every ordered transition pair ``(r_k, r_j)``
    (r_k fired first) for inspection."""

    preds: PredicateSet
    IS: dict = field(default_factory=dict)
    PwS: dict = field(default_factory=dict)
    per_pair: dict = field(default_factory=dict)
    per_pair_pws: dict = field(default_factory=dict)

    def individual(self, p) -> int:
        return self.IS[_index(p)]

    def pairwise(self, p, q) -> int:
        return self.PwS[pair_key(_index(p), _index(q))]

    def to_json(self) -> dict:
        name = {p.index: str(p.atom) for p in self.preds}
        return {
            "IS": {name[i]: v for i, v in sorted(self.IS.items())},
            "PwS": [[name[i], name[m], v] for (i, m), v in sorted(self.PwS.items())],
        }


def _index(p) -> int:
    return p.index if isinstance(p, Predicate) else int(p)


def range_of_pre(r: Formula) -> Formula:
    """Next-state copy of the states that enable ``r``."""
    return to_next(pre_image(r, TRUE))


def _coverage(f: Formula, regions) -> int:
    return sum(1 for c in regions if satisfiable(conj(f, c)))


def _signs(fs):
    """All sign combinations of the formulas, as conjunctions."""
    out = []
    for signs in itertools.product((True, False), repeat=len(fs)):
        out.append(conj(*(f if s else neg(f) for f, s in zip(fs, signs))))
    return out


class _Scorer:
    def __init__(self, ts: TransitionSystem, ps: PredicateSet):
        space = ts.state_space
        nspace = to_next(space)
        self.labels = ts.labels
        self.trans = {lbl: conj(f, space, nspace) for lbl, f in ts.transitions}
        self.ps = ps
        self._alpha: dict = {}
        self._range: dict = {}

    def alpha(self, indices: tuple, label: str) -> Formula:
        key = (indices, label)
        hit = self._alpha.get(key)
        if hit is None:
            hit = alpha_trans(self.trans[label], self.ps.subset(indices))
            self._alpha[key] = hit
        return hit

    def abs_range(self, indices: tuple, label: str) -> Formula:
        key = (indices, label)
        hit = self._range.get(key)
        if hit is None:
            hit = range_of_pre(self.alpha(indices, label))
            self._range[key] = hit
        return hit


def comp_trans_level_imp(ts: TransitionSystem, ps: PredicateSet) -> ImprecisionScores:
    preds = list(ps)
    out = ImprecisionScores(ps)
    out.IS = {p.index: 0 for p in preds}
    out.PwS = {pair_key(p.index, q.index): 0 for p, q in itertools.combinations(preds, 2)}
    if not preds:
        return out
    sc = _Scorer(ts, ps)
    conc_range = {lbl: range_of_pre(sc.trans[lbl]) for lbl in sc.labels}
    for rj in sc.labels:
        for rk in sc.labels:
            conc = conj(sc.trans[rk], conc_range[rj])
            inc, pinc = {}, {}
            for p in preds:
                conc_cov = _coverage(conc, _signs([p.formula]))
                if conc_cov < 2:
                    key = (p.index,)
                    ab = conj(sc.alpha(key, rk), sc.abs_range(key, rj))
                    abs_cov = _coverage(ab, _signs([Formula.boolvar(p.bool_var)]))
                    inc[p.index] = abs_cov - conc_cov
                    out.IS[p.index] += abs_cov - conc_cov
            # Both orders of a pair see the same four regions, so each
            # unordered pair is scored once.
            for p, q in itertools.combinations(preds, 2):
                conc_cov = _coverage(conc, _signs([p.formula, q.formula]))
                if conc_cov < 4:
                    key = (p.index, q.index)
                    ab = conj(sc.alpha(key, rk), sc.abs_range(key, rj))
                    bs = [Formula.boolvar(p.bool_var), Formula.boolvar(q.bool_var)]
                    abs_cov = _coverage(ab, _signs(bs))
                    pinc[key] = abs_cov - conc_cov
                    out.PwS[key] += abs_cov - conc_cov
            out.per_pair[(rk, rj)] = inc
            out.per_pair_pws[(rk, rj)] = pinc
    return out


def strict_imprecision(r1: Formula, r2: Formula, ps: PredicateSet) -> bool:
    """Whether abstracting with ``ps`` adds behaviour to firing r2 into a
    state enabling r1, or r1 into a state enabling r2 (strict entailment
    of the concrete composition by the concretized abstract one)."""

    def one_way(a, b):
        conc = conj(b, range_of_pre(a))
        ab = conj(alpha_trans(b, ps), range_of_pre(alpha_trans(a, ps)))
        return strictly_entails(conc, gamma(ab, ps))

    return one_way(r1, r2) or one_way(r2, r1)


# ---------------------------------------------------------------------------
# configuration search


@dataclass(frozen=True)
class Config:
    preds: tuple  # Predicate objects ordered by candidate index
    num_vars: int
    score: int

    @property
    def indices(self) -> tuple:
        return tuple(p.index for p in self.preds)

    def predicate_set(self) -> PredicateSet:
        return PredicateSet(self.preds)

    def to_json(self) -> dict:
        return {
            "preds": [str(p.atom) for p in self.preds],
            "indices": list(self.indices),
            "num_vars": self.num_vars,
            "score": self.score,
        }


def make_config(preds, score: int) -> Config:
    preds = tuple(sorted(preds, key=lambda p: p.index))
    scope = set()
    for p in preds:
        scope |= p.scope
    return Config(preds, len(scope), score)


def trlimp_rank(c: Config) -> tuple:
    """Smaller is better: score, then more variables, fewer predicates,
    then the lexicographically smallest index tuple."""
    return (c.score, -c.num_vars, len(c.preds), c.indices)


def pick_best(configs, rank) -> Config:
    configs = [c for c in configs if c is not None]
    if not configs:
        raise NoFeasibleConfig("no feasible predicate configuration")
    return min(configs, key=rank)


class TrlimpSearch:
    """Depth-first enumeration of configurations up to size ``k`` that
    keeps the best configuration found at each level."""

    def __init__(self, ps: PredicateSet, scores: ImprecisionScores, k: int,
                 scope_exclusion: bool = True):
        if k < 1:
            raise ValueError("k must be at least 1")
        self.preds = list(ps)
        self.scores = scores
        self.k = k
        self.best: dict = {lvl: None for lvl in range(1, k + 1)}
        self.visited: set = set()
        self.exclude_vars = set()
        if scope_exclusion:
            for p in self.preds:
                if scores.IS[p.index] > 0:
                    self.exclude_vars |= p.scope
        self.explored = 0

    def score(self, cur) -> int:
        return sum(self.scores.PwS[pair_key(p.index, q.index)]
                   for p, q in itertools.combinations(cur, 2))

    def allowed(self, p) -> bool:
        return self.scores.IS[p.index] == 0 and not (p.scope & self.exclude_vars)

    def explore(self, cur: frozenset, level: int):
        if level >= self.k:
            return
        for p in self.preds:
            if p in cur:
                continue
            nxt = cur | {p}
            if nxt in self.visited or not self.allowed(p):
                continue
            self.visited.add(nxt)
            self.explored += 1
            cfg = make_config(nxt, self.score(nxt))
            old = self.best[level + 1]
            if old is None or trlimp_rank(cfg) < trlimp_rank(old):
                self.best[level + 1] = cfg
            self.explore(nxt, level + 1)

    def run(self) -> Config:
        self.explore(frozenset(), 0)
        return pick_best(self.best.values(), trlimp_rank)


def explore_trlimp(ps: PredicateSet, scores: ImprecisionScores, k: int,
                   scope_exclusion: bool = True) -> dict:
    """Per-level best configurations (level -> Config or None)."""
    s = TrlimpSearch(ps, scores, k, scope_exclusion)
    s.explore(frozenset(), 0)
    return s.best


def choose_preds_trlimp(ps: PredicateSet, scores: ImprecisionScores, k: int,
                        scope_exclusion: bool = True) -> Config:
    return TrlimpSearch(ps, scores, k, scope_exclusion).run()


__all__ = [
    "ImprecisionScores", "Config", "NoFeasibleConfig", "comp_trans_level_imp",
    "strict_imprecision", "choose_preds_trlimp", "explore_trlimp", "make_config",
    "trlimp_rank", "pick_best", "pair_key", "range_of_pre",
]
