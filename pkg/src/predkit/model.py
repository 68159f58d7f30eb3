"""Transition systems, the model language, and candidate predicates.

Model files describe shared variables plus one process template that is
replicated ``n`` times::

    model ticket
    instances 2
    var s, t, z : int
    local a : int
    local pc : {think, try, cr}
    init s = t & z = 0 & pc[i] = think
    transition try[i]: pc[i] = think -> a[i]' = t & t' = t + 1 & pc[i]' = try

Formulas containing ``[i]`` outside a transition are replicated for every
process and conjoined.  Variables not primed in a transition's update keep
their value.  ``relation`` declares a raw transition formula (no frame).
Enumerated variables are encoded as integers ``0..k-1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod

from .atoms import EQ, LinAtom, lin
from .ctl import CtlProperty, binary, leaf, unary
from .formula import (
    FALSE,
    TRUE,
    Formula,
    conj,
    disj,
    iff,
    implies,
    is_primed,
    neg,
    prime,
    to_text,
    unprime,
)
from .syntax import ParseError, parse_formula_ast, parse_model_ast


class ModelError(ValueError):
    """Kind, arity and well-formedness errors in a model."""


@dataclass(frozen=True)
class Var:
    name: str
    kind: str  # "int" | "bool" | "enum"
    domain: tuple = ()

    @property
    def is_int(self) -> bool:
        return self.kind != "bool"


@dataclass(frozen=True)
class TransitionSystem:
    vars: tuple
    restriction: Formula
    init: Formula
    transitions: tuple  # ((label, Formula), ...)
    name: str = "model"
    consts: dict = field(default_factory=dict, compare=False, hash=False)

    @cached_property
    def var_map(self) -> dict:
        return {v.name: v for v in self.vars}

    @property
    def names(self) -> list:
        return [v.name for v in self.vars]

    @property
    def labels(self) -> list:
        return [lbl for lbl, _ in self.transitions]

    @cached_property
    def domain_constraint(self) -> Formula:
        parts = []
        for v in self.vars:
            if v.kind == "enum":
                parts.append(Formula.compare(">=", {v.name: 1}, 0))
                parts.append(Formula.compare("<=", {v.name: 1}, -(len(v.domain) - 1)))
        return conj(*parts)

    @cached_property
    def state_space(self) -> Formula:
        """The restriction together with the enumerated-variable ranges."""
        return conj(self.restriction, self.domain_constraint)

    @cached_property
    def relation(self) -> Formula:
        return disj(*(f for _, f in self.transitions))

    def transition(self, label: str) -> Formula:
        for lbl, f in self.transitions:
            if lbl == label:
                return f
        raise KeyError(label)

    def guard(self, label: str) -> list:
        """Current-state atoms of a transition (its guard conjuncts)."""
        out = []
        for c in self.transition(label).sorted_cubes():
            for a in c:
                if not any(is_primed(v) for v in a.vars()) and a not in out:
                    out.append(a)
        return out

    def int_vars(self) -> list:
        return [v.name for v in self.vars if v.is_int]

    def bool_vars(self) -> list:
        return [v.name for v in self.vars if not v.is_int]

    def describe_atom(self, a) -> str:
        """Render an atom, naming enumeration constants where possible."""
        if isinstance(a, LinAtom) and a.op == EQ and len(a.coeffs) == 1:
            (name, c), = a.coeffs
            v = self.var_map.get(unprime(name))
            if v is not None and v.kind == "enum" and c == 1 and 0 <= a.bound < len(v.domain):
                return f"{name} = {v.domain[a.bound]}"
        return str(a)

    def text(self, f: Formula) -> str:
        return to_text(f, self.describe_atom)


# ---------------------------------------------------------------------------
# templates


@dataclass
class ModelTemplate:
    name: str
    instances: int
    shared: list  # [Var]
    local: list  # [Var] (unindexed names)
    init: list  # ASTs
    restrict: list
    transitions: list  # [TransDecl]
    consts: dict

    def var_names(self, n: int) -> list:
        names = [v.name for v in self.shared]
        for i in range(1, n + 1):
            names.extend(f"{v.name}{i}" for v in self.local)
        return names


def parse_model(text: str) -> ModelTemplate:
    ast = parse_model_ast(text)
    shared, local, consts = [], [], {}
    seen = set()
    for d in ast.decls:
        if d.name in seen:
            raise ModelError(f"{d.tok.line}:{d.tok.col}: variable {d.name!r} declared twice")
        seen.add(d.name)
        (local if d.local else shared).append(Var(d.name, d.kind, d.domain))
        for k, c in enumerate(d.domain):
            if consts.get(c, k) != k:
                raise ModelError(f"enumeration constant {c!r} has conflicting positions")
            consts[c] = k
    for name in list(seen):
        if name in consts:
            raise ModelError(f"{name!r} is both a variable and a constant")
    if not ast.transitions:
        raise ModelError("no transitions")
    labels = [t.label for t in ast.transitions]
    if len(set(labels)) != len(labels):
        raise ModelError("duplicate transition label")
    if ast.instances < 1:
        raise ModelError("instances must be at least 1")
    tpl = ModelTemplate(ast.name, ast.instances, shared, local, ast.init,
                        ast.restrict, ast.transitions, consts)
    # lowering at n = instances surfaces kind errors at parse time
    instantiate(tpl, tpl.instances)
    return tpl


def load_model(path, n: int | None = None) -> TransitionSystem:
    with open(path, encoding="utf-8") as fh:
        tpl = parse_model(fh.read())
    return instantiate(tpl, n or tpl.instances)


class _Scope:
    """Resolves references inside one formula of an instantiated model."""

    def __init__(self, kinds: dict, locals_: set, consts: dict, n: int,
                 proc: int | None, allow_primes: bool):
        self.kinds = kinds
        self.locals = locals_
        self.consts = consts
        self.n = n
        self.proc = proc
        self.allow_primes = allow_primes
        self.primed_seen: set = set()

    def resolve(self, ref) -> tuple:
        name, index, primed, tok = ref
        if name in self.locals:
            if index is None:
                raise ModelError(f"{tok.line}:{tok.col}: local variable {name!r} needs a process index")
            k = self.proc if index == "i" else index
            if k is None:
                raise ModelError(f"{tok.line}:{tok.col}: index 'i' used outside a process context")
            if not 1 <= k <= self.n:
                raise ModelError(f"{tok.line}:{tok.col}: process index {k} out of range 1..{self.n}")
            full = f"{name}{k}"
        else:
            if index is not None:
                raise ModelError(f"{tok.line}:{tok.col}: {name!r} is not a local variable")
            full = name
        if full not in self.kinds:
            raise ModelError(f"{tok.line}:{tok.col}: undeclared variable {name!r}")
        if primed:
            if not self.allow_primes:
                raise ModelError(f"{tok.line}:{tok.col}: next-state variable {name}' not allowed here")
            self.primed_seen.add(full)
            full = prime(full)
        return full, self.kinds[unprime(full)], tok

    def linear(self, node) -> tuple:
        tag = node[0]
        if tag == "num":
            return {}, node[1]
        if tag == "ref":
            name, index, primed, tok = node[1]
            if index is None and not primed and name in self.consts and name not in self.kinds:
                return {}, self.consts[name]
            full, kind, tok = self.resolve(node[1])
            if kind == "bool":
                raise ModelError(f"{tok.line}:{tok.col}: boolean {name!r} used in arithmetic")
            return {full: 1}, 0
        if tag == "neg":
            d, c = self.linear(node[1])
            return {v: -k for v, k in d.items()}, -c
        if tag in ("add", "sub"):
            d1, c1 = self.linear(node[1])
            d2, c2 = self.linear(node[2])
            s = 1 if tag == "add" else -1
            out = dict(d1)
            for v, k in d2.items():
                out[v] = out.get(v, 0) + s * k
            return out, c1 + s * c2
        if tag == "mul":
            d1, c1 = self.linear(node[1])
            d2, c2 = self.linear(node[2])
            if d1 and d2:
                raise ModelError("non-linear product")
            if d1:
                return {v: k * c2 for v, k in d1.items()}, c1 * c2
            return {v: k * c1 for v, k in d2.items()}, c1 * c2
        raise ModelError(f"unexpected node {tag}")

    def formula(self, node) -> Formula:
        tag = node[0]
        if tag == "tt":
            return TRUE
        if tag == "ff":
            return FALSE
        if tag == "bool":
            name, index, primed, tok = node[1]
            if index is None and not primed and name in self.consts and name not in self.kinds:
                raise ModelError(f"{tok.line}:{tok.col}: constant {name!r} used as a formula")
            full, kind, tok = self.resolve(node[1])
            if kind != "bool":
                raise ModelError(f"{tok.line}:{tok.col}: {name!r} is not boolean")
            return Formula.boolvar(full)
        if tag == "cmp":
            op, lhs, rhs, mod, tok = node[1:]
            d1, c1 = self.linear(lhs)
            d2, c2 = self.linear(rhs)
            d = dict(d1)
            for v, k in d2.items():
                d[v] = d.get(v, 0) - k
            if mod is not None:
                a = lin("%", d, c2 - c1, mod)
                return Formula.atom(a)
            return Formula.compare(op, d, c1 - c2)
        if tag == "not":
            return neg(self.formula(node[1]))
        if tag == "and":
            return conj(*(self.formula(x) for x in node[1]))
        if tag == "or":
            return disj(*(self.formula(x) for x in node[1]))
        if tag == "imp":
            return implies(self.formula(node[1]), self.formula(node[2]))
        if tag == "iff":
            return iff(self.formula(node[1]), self.formula(node[2]))
        raise ModelError("temporal operator inside a state formula")


def _uses_index(node) -> bool:
    if isinstance(node, tuple):
        if len(node) == 4 and isinstance(node[0], str) and node[1] == "i" and isinstance(node[2], bool):
            return True
        return any(_uses_index(x) for x in node)
    if isinstance(node, list):
        return any(_uses_index(x) for x in node)
    return False


def _frame(name: str, kind: str) -> Formula:
    if kind == "bool":
        return iff(Formula.boolvar(name), Formula.boolvar(prime(name)))
    return Formula.compare("=", {prime(name): 1, name: -1}, 0)


def instantiate(tpl: ModelTemplate, n: int) -> TransitionSystem:
    if n < 1:
        raise ModelError("n must be at least 1")
    vars_ = list(tpl.shared)
    for i in range(1, n + 1):
        vars_.extend(Var(f"{v.name}{i}", v.kind, v.domain) for v in tpl.local)
    kinds = {v.name: v.kind for v in vars_}
    locals_ = {v.name for v in tpl.local}

    def state(nodes) -> Formula:
        parts = []
        for node in nodes:
            procs = range(1, n + 1) if _uses_index(node) else [None]
            for p in procs:
                parts.append(_Scope(kinds, locals_, tpl.consts, n, p, False).formula(node))
        return conj(*parts)

    init = state(tpl.init)
    restriction = state(tpl.restrict)
    trans = []
    for td in tpl.transitions:
        for p in (range(1, n + 1) if td.indexed else [None]):
            label = f"{td.label}_{p}" if td.indexed else td.label
            sc = _Scope(kinds, locals_, tpl.consts, n, p, True)
            if td.raw:
                trans.append((label, sc.formula(td.guard)))
                continue
            guard = sc.formula(td.guard)
            primed_in_guard = set(sc.primed_seen)
            if primed_in_guard:
                raise ModelError(f"{td.tok.line}:{td.tok.col}: guard of {td.label!r} mentions next-state variables")
            upd = TRUE if td.update is None else sc.formula(td.update)
            frames = [_frame(v.name, v.kind) for v in vars_ if v.name not in sc.primed_seen]
            trans.append((label, conj(guard, upd, *frames)))
    return TransitionSystem(tuple(vars_), restriction, init, tuple(trans), tpl.name, dict(tpl.consts))


# ---------------------------------------------------------------------------
# formulas and properties against a system


def _scope_for(ts: TransitionSystem, allow_primes: bool) -> _Scope:
    kinds = {v.name: v.kind for v in ts.vars}
    return _Scope(kinds, set(), ts.consts, 0, None, allow_primes)


def parse_formula(text: str, ts: TransitionSystem, allow_primes: bool = False) -> Formula:
    return _scope_for(ts, allow_primes).formula(parse_formula_ast(text))


def parse_property(text: str, ts: TransitionSystem) -> CtlProperty:
    sc = _scope_for(ts, False)

    def build(node) -> CtlProperty:
        tag = node[0]
        if tag == "temp":
            op, args = node[1], node[2]
            if op in ("AU", "EU"):
                return binary(op, build(args[0]), build(args[1]))
            return unary(op, build(args[0]))
        if tag == "not":
            return unary("NOT", build(node[1]))
        if tag in ("and", "or"):
            return CtlProperty(tag.upper(), tuple(build(x) for x in node[1]))
        if tag == "imp":
            return CtlProperty("OR", (unary("NOT", build(node[1])), build(node[2])))
        if tag == "iff":
            a, b = build(node[1]), build(node[2])
            return CtlProperty("OR", (CtlProperty("AND", (a, b)),
                                      CtlProperty("AND", (unary("NOT", a), unary("NOT", b)))))
        return leaf(sc.formula(node))

    return build(parse_formula_ast(text, temporal=True))


def property_text(p: CtlProperty, ts: TransitionSystem) -> str:
    if p.op == "LEAF":
        return f"({ts.text(p.formula)})"
    if p.op == "NOT":
        return "!" + property_text(p.args[0], ts)
    if p.op in ("AND", "OR"):
        sym = " & " if p.op == "AND" else " | "
        return "(" + sym.join(property_text(a, ts) for a in p.args) + ")"
    if p.op in ("EU", "AU"):
        return f"{p.op[0]}[{property_text(p.args[0], ts)} U {property_text(p.args[1], ts)}]"
    return p.op + property_text(p.args[0], ts)


def print_model(ts: TransitionSystem) -> str:
    """Model-language text that parses back to an equivalent system."""
    lines = [f"model {ts.name}"]
    groups: dict = {}
    for v in ts.vars:
        key = "{" + ", ".join(v.domain) + "}" if v.kind == "enum" else v.kind
        groups.setdefault(key, []).append(v.name)
    for key, names in groups.items():
        lines.append(f"var {', '.join(names)} : {key}")
    if not ts.restriction.is_true():
        lines.append(f"restrict {ts.text(ts.restriction)}")
    lines.append(f"init {ts.text(ts.init)}")
    for label, f in ts.transitions:
        lines.append(f"relation {label}: {ts.text(f)}")
    return "\n".join(lines) + "\n"


def parse_system(text: str) -> TransitionSystem:
    """Parse a flat (single-instance) model file straight to a system."""
    tpl = parse_model(text)
    return instantiate(tpl, tpl.instances)


# ---------------------------------------------------------------------------
# candidate predicates


def _split_boundary(a: LinAtom) -> list:
    """``t <= c`` yields ``t = c`` and ``t < c`` ahead of itself."""
    if a.op != "<=":
        return [a]
    d = dict(a.coeffs)
    return [lin(EQ, d, a.bound), lin("<=", d, a.bound - 1), a]


def extract_candidate_predicates(ts: TransitionSystem, prop: CtlProperty | None = None,
                                 split_property: bool = True):
    """Distinct integer atoms of the property, init, restriction and guards.

    Property atoms come first.  A non-strict property bound ``t <= c`` also
    contributes its boundary pieces ``t = c`` and ``t < c``, the split that
    lets an abstraction keep the two sides of the bound apart.
    """
    from .abstraction import PredicateSet

    out: list = []
    seen: set = set()

    def add(atom):
        if not isinstance(atom, LinAtom) or atom.op == "%":
            return
        if any(is_primed(v) for v in atom.vars()):
            return
        if atom in seen:
            return
        seen.add(atom)
        out.append(atom)

    def atoms_of(f: Formula) -> list:
        res = []
        for c in f.sorted_cubes():
            for a in c:
                if a not in res:
                    res.append(a)
        return res

    if prop is not None:
        for f in prop.leaves():
            for a in atoms_of(f):
                if isinstance(a, LinAtom):
                    for b in (_split_boundary(a) if split_property else [a]):
                        add(b)
    for a in atoms_of(ts.init):
        add(a)
    for a in atoms_of(ts.restriction):
        add(a)
    for label in ts.labels:
        for a in ts.guard(label):
            add(a)
    return PredicateSet.of(out)


def state_count_bound(ts: TransitionSystem, box: dict) -> int:
    sizes = []
    for v in ts.vars:
        if v.kind == "bool":
            sizes.append(2)
        elif v.kind == "enum":
            sizes.append(len(v.domain))
        else:
            lo, hi = box[v.name]
            sizes.append(hi - lo + 1)
    return prod(sizes)


__all__ = [
    "ModelError", "ParseError", "Var", "TransitionSystem", "ModelTemplate",
    "parse_model", "load_model", "instantiate", "parse_formula", "parse_property",
    "print_model", "property_text", "extract_candidate_predicates", "parse_system",
]
