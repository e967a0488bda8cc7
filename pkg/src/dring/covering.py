"""Finite coverings p: T -> B and the extended-power calculus on finite sets.

A covering is stored as its base and, aligned with it, the fibre over each
base point.  The extended power is p(X) = {(b, u) : u a function fibre_b -> X};
functions are tuples of (point, value) pairs in fibre order.  Up to
isomorphism a covering is its multiset of fibre sizes, whose generating
polynomial sum_b x^(n_b) turns sum, product, composition and derivative
into the usual polynomial operations.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from itertools import permutations, product
from math import factorial
from typing import Hashable, Sequence


class NonConstantSheetCount(ValueError):
    pass


@dataclass(frozen=True)
class FiniteCovering:
    base: tuple
    fibers: tuple          # fibers[k] is the tuple of total-space points over base[k]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(self.base))
        object.__setattr__(self, "fibers", tuple(tuple(f) for f in self.fibers))
        if len(self.base) != len(self.fibers):
            raise ValueError("base and fibers must align")
        if len(set(self.base)) != len(self.base):
            raise ValueError("base points must be distinct")
        pts = [s for f in self.fibers for s in f]
        if len(set(pts)) != len(pts):
            raise ValueError("fibers must be disjoint with distinct points")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], names=None) -> "FiniteCovering":
        names = list(names) if names is not None else [f"b{k + 1}" for k in range(len(sizes))]
        return cls(tuple(names), tuple(tuple(f"{b}.{i + 1}" for i in range(n))
                                       for b, n in zip(names, sizes)))

    @classmethod
    def from_json(cls, obj) -> "FiniteCovering":
        if isinstance(obj, str):
            obj = json.loads(obj)
        base = obj["base"]
        fib = obj["fibers"]
        missing = [b for b in base if b not in fib]
        if missing or set(fib) - set(base):
            raise ValueError(f"fibers and base disagree: {sorted(set(fib) ^ set(base))}")
        return cls.from_sizes([int(fib[b]) for b in base], base)

    def to_json(self) -> dict:
        return {"base": [str(b) for b in self.base],
                "fibers": {str(b): len(f) for b, f in zip(self.base, self.fibers)}}

    @property
    def total(self) -> tuple:
        return tuple(s for f in self.fibers for s in f)

    @property
    def projection(self) -> dict:
        return {s: b for b, f in zip(self.base, self.fibers) for s in f}

    def fiber(self, b) -> tuple:
        return self.fibers[self.base.index(b)]

    @property
    def sizes(self) -> tuple:
        return tuple(len(f) for f in self.fibers)

    @property
    def has_empty_fibers(self) -> bool:
        return any(not f for f in self.fibers)

    def poly(self) -> "IndexedPolynomial":
        return IndexedPolynomial.from_sizes(self.sizes)

    def __len__(self):
        return len(self.base)


# -- polynomial shadow ---------------------------------------------------------------------

@dataclass(frozen=True)
class IndexedPolynomial:
    """Polynomial with natural-number coefficients; coeffs[k] multiplies x^k."""

    coeffs: tuple = ()

    def __post_init__(self):
        c = list(self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        if any(a < 0 for a in c):
            raise ValueError("coefficients must be natural numbers")
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_sizes(cls, sizes) -> "IndexedPolynomial":
        cnt = Counter(sizes)
        return cls(tuple(cnt.get(k, 0) for k in range(max(sizes, default=-1) + 1)))

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return IndexedPolynomial(tuple(x + y for x, y in zip(a, b)))

    def __mul__(self, other):
        out = [0] * (len(self.coeffs) + len(other.coeffs))
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IndexedPolynomial(tuple(out))

    def __pow__(self, k):
        out = IndexedPolynomial((1,))
        for _ in range(k):
            out = out * self
        return out

    def compose(self, other) -> "IndexedPolynomial":
        out = IndexedPolynomial()
        for k, a in enumerate(self.coeffs):
            if a:
                out = out + IndexedPolynomial((a,)) * other ** k
        return out

    def derivative(self) -> "IndexedPolynomial":
        return IndexedPolynomial(tuple(k * a for k, a in enumerate(self.coeffs))[1:])

    def __call__(self, m: int) -> int:
        return sum(a * m ** k for k, a in enumerate(self.coeffs))

    def __str__(self):
        terms = [f"{a}" if k == 0 else f"{'' if a == 1 else a}x" + (f"^{k}" if k > 1 else "")
                 for k, a in enumerate(self.coeffs) if a]
        return " + ".join(terms) or "0"


# -- extended power and frames ---------------------------------------------------------------

def functions(domain: Sequence, codomain: Sequence):
    """All functions domain -> codomain, as tuples of (point, value) pairs."""
    for values in product(codomain, repeat=len(domain)):
        yield tuple(zip(domain, values))


def extended_power(p: FiniteCovering, X: Sequence) -> list:
    """p(X) = {(b, u) : u: fibre_b -> X}; the structure map to the base is the first entry."""
    X = list(X)
    return [(b, u) for b, f in zip(p.base, p.fibers) for u in functions(f, X)]


def extended_power_size(p: FiniteCovering, m: int) -> int:
    return sum(m ** n for n in p.sizes)


def induced_map(p: FiniteCovering, f: dict):
    """p(f): p(X) -> p(Y) by post-composition, as a function on elements."""
    def pf(elem):
        b, u = elem
        return (b, tuple((s, f[x]) for s, x in u))
    return pf


def frames(p: FiniteCovering) -> list:
    """E(p) = {(b, f) : f a bijection {1..n} -> fibre_b}, f stored as a tuple."""
    sizes = set(p.sizes)
    if len(sizes) > 1:
        raise NonConstantSheetCount(f"fibre sizes {sorted(sizes)} are not constant")
    return [(b, f) for b, fib in zip(p.base, p.fibers) for f in permutations(fib)]


def act(frame, sigma):
    """Right action of a permutation sigma of range(n) on a frame: f -> f o sigma."""
    b, f = frame
    return (b, tuple(f[sigma[i]] for i in range(len(f))))


def frames_quotient(p: FiniteCovering, X: Sequence) -> dict:
    """Orbits of Sigma_n on E(p) x X^n, mapped to p(X).

    Returns a dict from orbit representative (the least element) to its
    image (b, u) with u = x o f^{-1}.
    """
    E = frames(p)
    n = p.sizes[0] if p.sizes else 0
    sigmas = list(permutations(range(n)))
    seen, orbits = set(), {}
    for fr in E:
        for xs in product(list(X), repeat=n):
            if (fr, xs) in seen:
                continue
            orbit = set()
            for s in sigmas:
                g = act(fr, s)
                orbit.add((g, tuple(xs[s[i]] for i in range(n))))
            seen |= orbit
            rep = min(orbit, key=repr)
            (b, f), xv = rep
            orbits[rep] = (b, tuple(sorted(zip(f, xv), key=lambda sx: p.fiber(b).index(sx[0]))))
    return orbits


def check_frames(p: FiniteCovering, X: Sequence) -> dict:
    """Freeness of the action on E(p) and the bijection (E(p) x X^n)/Sigma_n -> p(X)."""
    E = frames(p)
    n = p.sizes[0] if p.sizes else 0
    sigmas = list(permutations(range(n)))
    free = all(len({act(fr, s) for s in sigmas}) == len(sigmas) for fr in E)
    orbits = frames_quotient(p, X)
    target = extended_power(p, X)
    images = list(orbits.values())
    return {"frames": len(E), "expected_frames": len(p) * factorial(n), "free": free,
            "orbits": len(orbits), "bijective": len(set(images)) == len(images)
            and set(images) == set(target)}


# -- calculus ----------------------------------------------------------------------------

def derivative(p: FiniteCovering) -> FiniteCovering:
    """Fibre over t is the rest of t's fibre; total points are pairs (t, s)."""
    base, fibers = [], []
    for f in p.fibers:
        for t in f:
            base.append(t)
            fibers.append(tuple((t, s) for s in f if s != t))
    return FiniteCovering(tuple(base), tuple(fibers))


def covering_sum(p: FiniteCovering, q: FiniteCovering) -> FiniteCovering:
    """Disjoint union of coverings, tagged 0 and 1."""
    base = tuple((0, b) for b in p.base) + tuple((1, c) for c in q.base)
    fibers = tuple(tuple((0, s) for s in f) for f in p.fibers) + \
        tuple(tuple((1, r) for r in f) for f in q.fibers)
    return FiniteCovering(base, fibers)


def covering_product(p: FiniteCovering, q: FiniteCovering) -> FiniteCovering:
    """Over (b, c) the fibre is fibre_b + fibre_c."""
    base, fibers = [], []
    for b, fb in zip(p.base, p.fibers):
        for c, fc in zip(q.base, q.fibers):
            base.append((b, c))
            fibers.append(tuple((0, b, c, s) for s in fb) + tuple((1, b, c, r) for r in fc))
    return FiniteCovering(tuple(base), tuple(fibers))


def compose(p: FiniteCovering, q: FiniteCovering) -> FiniteCovering:
    """Base p(q(1)) = {(b, u: fibre_b -> B_q)}; over (b, u) the points (b, u, s, r), r over u(s)."""
    base, fibers = [], []
    for b, u in extended_power(p, q.base):
        base.append((b, u))
        fibers.append(tuple((b, u, s, r) for s, c in u for r in q.fiber(c)))
    return FiniteCovering(tuple(base), tuple(fibers))


def iso_check(p: FiniteCovering, q: FiniteCovering) -> bool:
    return sorted(p.sizes) == sorted(q.sizes)


def composite_total_bijection(p: FiniteCovering, q: FiniteCovering) -> bool:
    """The total of p o q against p'(q(1)) x q'(1), point by point.

    (b, u, s, r) goes to ((s, u restricted to the rest of s's fibre), r); the
    inverse recovers u(s) as the base point under r.
    """
    pq = compose(p, q)
    dp = derivative(p)
    right = {((t, u_rest), r) for t, rest in zip(dp.base, dp.fibers)
             for u_rest in functions(rest, q.base) for r in q.total}
    image = [((s, tuple(((s, s2), c) for s2, c in u if s2 != s)), r)
             for f in pq.fibers for (b, u, s, r) in f]
    return len(set(image)) == len(image) and set(image) == right


def composite_power_map(p: FiniteCovering, q: FiniteCovering):
    """The map (p o q)(X) -> p(q(X)): ((b,u), w) |-> (b, s |-> (u(s), r |-> w(b,u,s,r)))."""
    def phi(elem):
        (b, u), w = elem
        wd = dict(w)
        return (b, tuple((s, (c, tuple((r, wd[(b, u, s, r)]) for r in q.fiber(c))))
                         for s, c in u))
    return phi


def composite_power_inverse(p: FiniteCovering, q: FiniteCovering):
    """Inverse of :func:`composite_power_map`."""
    def psi(elem):
        b, v = elem
        u = tuple((s, c) for s, (c, _) in v)
        w = tuple(((b, u, s, r), x) for s, (c, ws) in v for r, x in ws)
        return ((b, u), w)
    return psi


def _random_power_element(p: FiniteCovering, q: FiniteCovering, X, rng, b):
    f = p.fiber(b)
    v = []
    for s in f:
        c = rng.choice(q.base)
        v.append((s, (c, tuple((r, rng.choice(X)) for r in q.fiber(c)))))
    return (b, tuple(v))


def composite_power_check(p: FiniteCovering, q: FiniteCovering, X: Sequence,
                          budget: int = 20_000, samples: int = 200, seed: int = 0) -> dict:
    """Verify (p o q)(X) = p(q(X)) through :func:`composite_power_map`.

    Base point by base point, the part of p(q(X)) over b is enumerated and
    compared with the image of the part of (p o q)(X) over b whenever it has
    at most ``budget`` elements.  Larger parts are checked by the round trip
    through the explicit inverse on ``samples`` random elements of each side,
    and by exact cardinality.
    """
    X = list(X)
    m = len(X)
    qX = extended_power(q, X)
    phi, psi = composite_power_map(p, q), composite_power_inverse(p, q)
    rng = random.Random(seed)
    out = {"size": sum(len(qX) ** n for n in p.sizes), "elementwise_parts": 0,
           "sampled_parts": 0, "sizes_agree": True, "bijective": True}
    for b, fib in zip(p.base, p.fibers):
        pb = FiniteCovering((b,), (fib,))
        cb = compose(pb, q)
        left = extended_power_size(cb, m)
        right = len(qX) ** len(fib)
        out["sizes_agree"] &= left == right
        if right <= budget:
            image = [phi(e) for e in extended_power(cb, X)]
            target = extended_power(pb, qX)
            ok = len(set(image)) == len(image) and set(image) == set(target)
            out["elementwise_parts"] += 1
        else:
            ok = True
            for _ in range(samples):
                y = _random_power_element(p, q, X, rng, b)
                e = psi(y)
                (bb, u), w = e
                ok &= phi(e) == y and [k for k, _ in w] == list(cb.fiber((bb, u)))
            out["sampled_parts"] += 1
        out["bijective"] &= ok
    out["mode"] = "elementwise" if not out["sampled_parts"] else "mixed"
    return out


def check_functoriality(p: FiniteCovering, X: Sequence, Y: Sequence, Z: Sequence,
                        rng: random.Random) -> bool:
    f = {x: rng.choice(list(Y)) for x in X}
    g = {y: rng.choice(list(Z)) for y in Y}
    gf = {x: g[f[x]] for x in X}
    ident = {x: x for x in X}
    pX = extended_power(p, X)
    pid, pf, pg, pgf = (induced_map(p, h) for h in (ident, f, g, gf))
    return all(pid(e) == e for e in pX) and all(pgf(e) == pg(pf(e)) for e in pX)


def random_covering(rng: random.Random, max_sheets=5, max_base=4, allow_empty=True,
                    prefix="b") -> FiniteCovering:
    nb = rng.randint(1, max_base)
    lo = 0 if allow_empty else 1
    sizes = [rng.randint(lo, max_sheets) for _ in range(nb)]
    return FiniteCovering.from_sizes(sizes, [f"{prefix}{k + 1}" for k in range(nb)])


def calculus_report(p: FiniteCovering, q: FiniteCovering) -> dict:
    """Sum, product and chain rules, with the polynomial shadow of each covering."""
    dp, dq = derivative(p), derivative(q)
    s, pr, co = covering_sum(p, q), covering_product(p, q), compose(p, q)
    P, Q = p.poly(), q.poly()
    return {
        "p": list(P.coeffs), "q": list(Q.coeffs),
        "sum": list(s.poly().coeffs), "product": list(pr.poly().coeffs),
        "compose": list(co.poly().coeffs),
        "sum_rule": iso_check(derivative(s), covering_sum(dp, dq)),
        "leibniz": iso_check(derivative(pr), covering_sum(covering_product(dp, q),
                                                            covering_product(p, dq))),
        "chain_rule": iso_check(derivative(co), covering_product(compose(dp, q), dq)),
        "poly_sum": s.poly() == P + Q,
        "poly_product": pr.poly() == P * Q,
        "poly_compose": co.poly() == P.compose(Q),
        "poly_derivative": derivative(p).poly() == P.derivative(),
    }
