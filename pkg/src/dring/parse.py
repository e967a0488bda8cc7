"""Reading and writing series: a small infix grammar and a canonical JSON form.

Grammar (whitespace ignored, ``-`` accepted as ``+`` since we are in
characteristic 2)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' INT)?
    atom   := IDENT | INT | '(' expr ')'
"""

from __future__ import annotations

import json
import re

from .series import CoeffRing, MultiSeries, RingElem, Var, make_ring


class ParseError(ValueError):
    def __init__(self, msg, line=1, col=1):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<int>\d+)|(?P<op>[-+*^()]))")


def _tokens(text):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            j = pos
            while j < len(text) and text[j].isspace():
                j += 1
            raise ParseError(f"unexpected character {text[j]!r}", *_linecol(text, j))
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", None, len(text)))
    return text, out


def _linecol(text, offset):
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


# polynomials during parsing: set of monomials, a monomial is a sorted tuple of (name, exp)

def _pmul(p, q):
    out = set()
    for a in p:
        for b in q:
            d = dict(a)
            for n, e in b:
                d[n] = d.get(n, 0) + e
            out ^= {tuple(sorted(d.items()))}
    return out


def _ppow(p, k):
    out = {()}
    for _ in range(k):
        out = _pmul(out, p)
    return out


class _Parser:
    def __init__(self, text):
        self.text, self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, *_linecol(self.text, tok[2]))

    def expr(self):
        p = self.term()
        while self.peek()[1] in ("+", "-"):
            self.take()
            p = p ^ self.term()
        return p

    def term(self):
        p = self.factor()
        while self.peek()[1] == "*":
            self.take()
            p = _pmul(p, self.factor())
        return p

    def factor(self):
        p = self.atom()
        if self.peek()[1] == "^":
            self.take()
            tok = self.take()
            if tok[0] != "int":
                self.fail("exponent must be a non-negative integer", tok)
            k = int(tok[1])
            if len(p) == 1:
                (mon,) = p
                p = {tuple((n, e * k) for n, e in mon if k)}
            else:
                p = _ppow(p, k)
        return p

    def atom(self):
        tok = self.take()
        kind, val = tok[0], tok[1]
        if kind == "id":
            return {((val, 1),)}
        if kind == "int":
            return {()} if int(val) % 2 else set()
        if val == "(":
            p = self.expr()
            if self.peek()[1] != ")":
                self.fail("expected ')'")
            self.take()
            return p
        if kind == "end":
            self.fail("unexpected end of input", tok)
        self.fail(f"unexpected {val!r}", tok)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return p


def parse_polynomial(text: str) -> set:
    """Parse to a set of monomials, each a sorted tuple of (identifier, exponent)."""
    return _Parser(text).parse()


def identifiers(poly) -> list[str]:
    return sorted({n for m in poly for n, _ in m})


def parse_series(text, variables, truncation, ring: CoeffRing = None) -> MultiSeries:
    """Parse ``text`` as a series in ``variables`` over ``ring``.

    Identifiers that are not variables must be generators of the ring.
    """
    ring = ring or make_ring()
    poly = parse_polynomial(text)
    variables = [v if isinstance(v, Var) else Var(*v) for v in variables]
    vnames = sorted(v.name for v in variables)
    gnames = list(ring.names)
    for n in identifiers(poly):
        if n not in vnames and n not in gnames:
            raise ParseError(f"unknown identifier {n!r}", *_find(text, n))
    mons = []
    for m in poly:
        d = dict(m)
        mons.append(tuple(d.get(n, 0) for n in vnames) + tuple(d.get(n, 0) for n in gnames))
    return MultiSeries.build(ring, variables, truncation, mons)


def _find(text, name):
    m = re.search(rf"\b{re.escape(name)}\b", text)
    return _linecol(text, m.start() if m else 0)


# -- canonical JSON --------------------------------------------------------------

def ring_to_json(ring: CoeffRing) -> dict:
    return {"generators": [{"name": n, "deg": d} for n, d in ring.generators],
            "truncation": ring.truncation}


def ring_from_json(obj) -> CoeffRing:
    return make_ring([(g["name"], g["deg"]) for g in obj.get("generators", [])],
                     obj.get("truncation", 0))


def series_to_json(f: MultiSeries) -> dict:
    out_vars = []
    for v in f.variables:
        rec = {"name": v.name, "deg": v.degree}
        if v.order is not None:
            rec["order"] = v.order
        out_vars.append(rec)
    terms = []
    for exp in sorted(f.terms):
        c = f.terms[exp]
        terms.append({"exp": list(exp), "coeff": [{"gexp": list(g)} for g in sorted(c.terms)]})
    return {"vars": out_vars, "ring": ring_to_json(f.ring), "trunc": f.truncation, "terms": terms}


def series_from_json(obj) -> MultiSeries:
    ring = ring_from_json(obj.get("ring", {}))
    variables = [Var(v["name"], v.get("deg", 1), v.get("order")) for v in obj["vars"]]
    names = [v.name for v in variables]
    if names != sorted(names):
        raise ValueError("variables must be listed in sorted order")
    mons = []
    for t in obj["terms"]:
        for c in t["coeff"]:
            mons.append(tuple(t["exp"]) + tuple(c["gexp"]))
    return MultiSeries.build(ring, variables, obj["trunc"], mons)


def ringelem_to_json(c: RingElem) -> list:
    return [{"gexp": list(g)} for g in sorted(c.terms)]


def dumps(obj) -> str:
    """Deterministic JSON text."""
    return json.dumps(obj, sort_keys=True, indent=2)
