"""Tokenizer and recursive-descent parser shared by formulas, CTL
properties and model files.

Parsing produces a small tuple-based AST; :mod:`predkit.model` resolves
identifiers against declarations and lowers the AST to formulas.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


KEYWORDS = {
    "model", "instances", "var", "local", "init", "restrict",
    "transition", "relation", "int", "bool", "true", "false", "mod",
    "and", "or", "not", "TRUE", "FALSE",
}
TEMPORAL = {"AG", "AF", "AX", "EG", "EF", "EX", "A", "E", "U"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>(\#|//)[^\n]*) |
    (?P<int>\d+) |
    (?P<id>[A-Za-z_][A-Za-z0-9_.]*) |
    (?P<op><->|->|&&|\|\||<=|>=|!=|==|[&|!<>=+\-*()\[\]{},:;'])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out = []
    line, start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line, m.start() - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers ---------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts) -> bool:
        t = self.tok
        return t.kind in ("op", "id") and t.text in texts

    def take(self, *texts) -> Token:
        t = self.tok
        if texts and not self.at(*texts):
            self.fail(f"expected {' or '.join(repr(x) for x in texts)}, got {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def fail(self, msg: str, tok: Token | None = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "id" or t.text in KEYWORDS:
            self.fail(f"expected identifier, got {t.text or 'end of input'!r}")
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self.fail(f"expected integer, got {t.text or 'end of input'!r}")
        self.i += 1
        return int(t.text)

    # formulas ----------------------------------------------------------------
    # AST nodes:
    #   ("tt",) ("ff",) ("bool", ref) ("cmp", op, lhs, rhs, mod, tok)
    #   ("not", x) ("and", [x..]) ("or", [x..]) ("imp", a, b) ("iff", a, b)
    #   ("temp", op, [args])
    # arithmetic: ("num", k) ("ref", ref) ("add", a, b) ("sub", a, b)
    #             ("neg", a) ("mul", a, b)
    # ref = (name, index, primed, tok); index is None, an int, or "i"

    def formula(self, allow_implies: bool = True, temporal: bool = False):
        left = self._or(temporal)
        if self.at("<->"):
            self.take()
            return ("iff", left, self.formula(allow_implies, temporal))
        if allow_implies and self.at("->"):
            self.take()
            return ("imp", left, self.formula(allow_implies, temporal))
        return left

    def _or(self, temporal):
        parts = [self._and(temporal)]
        while self.at("|", "||", "or"):
            self.take()
            parts.append(self._and(temporal))
        return parts[0] if len(parts) == 1 else ("or", parts)

    def _and(self, temporal):
        parts = [self._unary(temporal)]
        while self.at("&", "&&", "and"):
            self.take()
            parts.append(self._unary(temporal))
        return parts[0] if len(parts) == 1 else ("and", parts)

    def _unary(self, temporal):
        t = self.tok
        if self.at("!", "not"):
            self.take()
            return ("not", self._unary(temporal))
        if temporal and t.kind == "id" and t.text in ("AG", "AF", "AX", "EG", "EF", "EX"):
            self.take()
            return ("temp", t.text, [self._unary(temporal)])
        if temporal and t.kind == "id" and t.text in ("A", "E") and self.peek().text == "[":
            self.take()
            self.take("[")
            a = self.formula(True, temporal)
            self.take("U")
            b = self.formula(True, temporal)
            self.take("]")
            return ("temp", t.text + "U", [a, b])
        if self.at("true", "TRUE"):
            self.take()
            return ("tt",)
        if self.at("false", "FALSE"):
            self.take()
            return ("ff",)
        if self.at("("):
            # either a parenthesized formula or the left side of a comparison
            save = self.i
            try:
                return self._comparison()
            except ParseError:
                self.i = save
            self.take("(")
            inner = self.formula(True, temporal)
            self.take(")")
            return inner
        return self._comparison()

    def _comparison(self):
        start = self.tok
        lhs = self.expr()
        if self.at("<=", "<", ">=", ">", "=", "==", "!="):
            op = self.take().text
            rhs = self.expr()
            mod = None
            if self.at("mod"):
                self.take()
                mod = self.integer()
                if op not in ("=", "=="):
                    self.fail("'mod' only follows an equality")
            return ("cmp", op, lhs, rhs, mod, start)
        if lhs[0] == "ref":
            return ("bool", lhs[1])
        self.fail("expected a comparison", start)

    def expr(self):
        node = self._term()
        while self.at("+", "-"):
            op = self.take().text
            rhs = self._term()
            node = ("add" if op == "+" else "sub", node, rhs)
        return node

    def _term(self):
        node = self._factor()
        while self.at("*"):
            self.take()
            node = ("mul", node, self._factor())
        return node

    def _factor(self):
        t = self.tok
        if self.at("-"):
            self.take()
            return ("neg", self._factor())
        if t.kind == "int":
            return ("num", self.integer())
        if self.at("("):
            self.take()
            e = self.expr()
            self.take(")")
            return e
        return ("ref", self.ref())

    def ref(self):
        t = self.ident()
        if t.text in TEMPORAL:
            self.fail(f"{t.text!r} is reserved", t)
        index = None
        if self.at("["):
            self.take()
            if self.tok.kind == "int":
                index = self.integer()
            else:
                idx = self.ident()
                if idx.text != "i":
                    self.fail("process index must be 'i' or an integer", idx)
                index = "i"
            self.take("]")
        primed = False
        if self.at("'"):
            self.take()
            primed = True
        return (t.text, index, primed, t)


# model files -------------------------------------------------------------


@dataclass
class VarDecl:
    name: str
    kind: str  # "int" | "bool" | "enum"
    domain: tuple = ()
    local: bool = False
    tok: Token | None = None


@dataclass
class TransDecl:
    label: str
    indexed: bool
    guard: tuple
    update: tuple | None
    raw: bool
    tok: Token | None = None


@dataclass
class ModelAst:
    name: str = "model"
    instances: int = 1
    decls: list = field(default_factory=list)
    init: list = field(default_factory=list)
    restrict: list = field(default_factory=list)
    transitions: list = field(default_factory=list)


def parse_model_ast(text: str) -> ModelAst:
    p = Parser(text)
    ast = ModelAst()
    if p.at("model"):
        p.take()
        ast.name = p.ident().text
    while p.tok.kind != "eof":
        t = p.tok
        if p.at(";"):
            p.take()
        elif p.at("instances"):
            p.take()
            ast.instances = p.integer()
        elif p.at("var", "local"):
            local = p.take().text == "local"
            names = [p.ident()]
            while p.at(","):
                p.take()
                names.append(p.ident())
            p.take(":")
            kind, domain = _type(p)
            for n in names:
                ast.decls.append(VarDecl(n.text, kind, domain, local, n))
        elif p.at("init"):
            p.take()
            ast.init.append(p.formula())
        elif p.at("restrict"):
            p.take()
            ast.restrict.append(p.formula())
        elif p.at("transition", "relation"):
            raw = p.take().text == "relation"
            name = p.ident()
            indexed = False
            if p.at("["):
                p.take()
                idx = p.ident()
                if idx.text != "i":
                    p.fail("transition index must be 'i'", idx)
                p.take("]")
                indexed = True
            p.take(":")
            if raw:
                ast.transitions.append(TransDecl(name.text, indexed, p.formula(), None, True, name))
            else:
                guard = p.formula(allow_implies=False)
                update = None
                if p.at("->"):
                    p.take()
                    update = p.formula(allow_implies=False)
                ast.transitions.append(TransDecl(name.text, indexed, guard, update, False, name))
        else:
            p.fail(f"unexpected {t.text!r} at top level")
    return ast


def _type(p: Parser):
    if p.at("int"):
        p.take()
        return "int", ()
    if p.at("bool"):
        p.take()
        return "bool", ()
    p.take("{")
    names = [p.ident().text]
    while p.at(","):
        p.take()
        names.append(p.ident().text)
    p.take("}")
    if len(set(names)) != len(names):
        p.fail("duplicate enumeration constant")
    return "enum", tuple(names)


def parse_formula_ast(text: str, temporal: bool = False):
    p = Parser(text)
    node = p.formula(True, temporal)
    if p.tok.kind != "eof":
        p.fail(f"trailing input {p.tok.text!r}")
    return node
