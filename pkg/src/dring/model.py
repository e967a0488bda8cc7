"""Model D-rings A[t_1..t_k]/(t_i^(a n_i)) with their total operation D_u.

The carrier is polynomial in nilpotent variables of degree 1 over the
coefficient ring A of an order-two law F (the law written F~ when a > 1).
The total operation is the ring map into carrier[[u]] given on generators by

    D_u(t_i) = t_i F(t_i, u),      D_u(g) = c_ij(u)   for g at position (i, j) of F,

where c_ij(u) are the coefficients of the Lubin twist F_u.  It is extended
to arbitrary elements multiplicatively and additively.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Union

from .fgl import (FormalGroupLaw, OrderTwoRequired, lubin_twist, square_compose)
from .series import MultiSeries, PrecisionError, RingElem, Var, substitute


class MissingCoefficientAction(KeyError):
    pass


class CompatibilityViolated(ArithmeticError):
    pass


@dataclass
class AxiomReport:
    axiom: str
    verified_degree: Union[int, None]
    failures: list = field(default_factory=list)    # dicts with element, witness_monomial
    samples: int = 0

    @property
    def ok(self):
        return not self.failures

    def fail(self, element, diff: MultiSeries):
        w = diff.lowest_term()
        self.failures.append({"element": str(element),
                              "witness_monomial": diff.monomial_str(w) if w else None})

    def to_json(self):
        return {"axiom": self.axiom, "verified_degree": self.verified_degree,
                "failures": list(self.failures), "samples": self.samples}


class DRing:
    """Carrier ring with total operation; build with :func:`make_model`."""

    def __init__(self, F: FormalGroupLaw, a: int, orders: dict, truncation: int,
                 coeff_images: dict, twist: Union[FormalGroupLaw, None], param="u"):
        self.F, self.a, self.orders, self.truncation = F, a, dict(orders), truncation
        self.param = param
        self.ring = F.ring
        self.carrier_vars = tuple(Var(n, 1, a * k) for n, k in sorted(orders.items()))
        self.u = Var(param, 1)
        self.twist = twist
        self.coeff_images = dict(coeff_images)
        self.variables = self.carrier_vars + (self.u,)
        self._gen_images = {}
        U = MultiSeries.var(param, self.variables, truncation, self.ring)
        for v in self.carrier_vars:
            T = MultiSeries.var(v.name, self.variables, truncation, self.ring)
            self._gen_images[v.name] = T * substitute(F.F, {"x": T, "y": U})
        self._memo: dict = {}
        self._powers: dict = {}

    # -- elements -----------------------------------------------------------------

    def var(self, name, variables=None, truncation=0):
        return MultiSeries.var(name, variables or self.carrier_vars, truncation, self.ring)

    def element(self, monomials=()) -> MultiSeries:
        """Carrier element from carrier-exponent tuples (optionally with generator exponents)."""
        ng = self.ring.ngens
        mons = [tuple(m) + ((0,) * ng if len(m) == len(self.carrier_vars) else ())
                for m in monomials]
        return MultiSeries.build(self.ring, self.carrier_vars, 0, mons)

    def gen(self, name) -> MultiSeries:
        if name in self.orders:
            return self.var(name)
        return MultiSeries.constant(self.ring.gen(name), self.carrier_vars, 0)

    def one(self) -> MultiSeries:
        return MultiSeries.constant(1, self.carrier_vars, 0, self.ring)

    def parse(self, text) -> MultiSeries:
        from .parse import parse_series
        return parse_series(text, self.carrier_vars, 0, self.ring)

    def carrier_monomials(self, max_degree):
        """Carrier monomials in the t_i of total degree <= max_degree (nonzero in the quotient)."""
        k = len(self.carrier_vars)
        orders = [v.order for v in self.carrier_vars]
        out = []

        def rec(i, left, acc):
            if i == k:
                out.append(tuple(acc))
                return
            for e in range(min(left, orders[i] - 1) + 1):
                rec(i + 1, left - e, acc + [e])
        rec(0, max_degree, [])
        out.sort(key=lambda m: (sum(m), tuple(-e for e in m)))
        return [self.element([m]) for m in out]

    def _embed(self, x: MultiSeries) -> MultiSeries:
        if x.ring != self.ring:
            raise ValueError("element lives over a different coefficient ring")
        for v in x.variables:
            if v not in self.carrier_vars:
                raise ValueError(f"{v.name} is not a carrier variable")
        return x.embed(self.carrier_vars, 0)

    # -- total operation ------------------------------------------------------------

    def _symbol_image(self, k):
        nv = len(self.carrier_vars)
        if k < nv:
            return self._gen_images[self.carrier_vars[k].name]
        name = self.ring.names[k - nv]
        if name not in self.coeff_images:
            raise MissingCoefficientAction(f"no total-operation image for generator {name}")
        return self.coeff_images[name]

    def _power(self, k, e):
        key = (k, e)
        if key not in self._powers:
            self._powers[key] = self._symbol_image(k) ** e
        return self._powers[key]

    def monomial_image(self, m) -> MultiSeries:
        """D_u of a single joint monomial, memoised."""
        if m not in self._memo:
            acc = MultiSeries.constant(1, self.variables, self.truncation, self.ring)
            for k, e in enumerate(m):
                if e:
                    acc = acc * self._power(k, e)
            self._memo[m] = acc
        return self._memo[m]

    def apply_total(self, x: MultiSeries) -> MultiSeries:
        x = self._embed(x)
        out: set = set()
        for m in x.monomials:
            out ^= self.monomial_image(m).monomials
        return MultiSeries(self.ring, self.variables, frozenset(out), self.truncation)

    def apply_total_in(self, x: MultiSeries, param: str) -> MultiSeries:
        """D_param(x): the total operation with its variable renamed."""
        return self.apply_total(x).rename({self.param: param})

    def u_coefficient(self, y: MultiSeries, i: int, param=None) -> MultiSeries:
        param = param or self.param
        if i > y.truncation:
            raise PrecisionError(f"u^{i} lies beyond truncation {y.truncation}")
        return self._embed(y.coefficient_series({param: i}).embed(self.carrier_vars, 0))

    def restrict(self, orders: dict) -> "DRing":
        """The model with smaller nilpotency orders n_i' <= n_i."""
        new = dict(self.orders)
        for n, k in orders.items():
            if n not in new or not 1 <= k <= new[n]:
                raise ValueError("restriction must lower truncation orders of known variables")
            new[n] = k
        return DRing(self.F, self.a, new, self.truncation, self.coeff_images, self.twist,
                     self.param)

    def reduce(self, x: MultiSeries, target: "DRing") -> MultiSeries:
        """Image of an element (or a series in u) under the quotient map to ``target``."""
        vs = [target.carrier_vars[i] for i in range(len(target.carrier_vars))]
        if any(v.name == self.param for v in x.variables):
            vs = list(vs) + [self.u]
        return MultiSeries.build(x.ring, vs, x.truncation, x.monomials)

    def random_element(self, rng: random.Random, max_degree=3, terms=4) -> MultiSeries:
        mons = self.carrier_monomials(max_degree)
        gens = [MultiSeries.constant(self.ring.gen(n), self.carrier_vars, 0)
                for n in self.ring.names]
        x = MultiSeries.zero(self.ring, self.carrier_vars, 0)
        for _ in range(rng.randint(1, terms)):
            y = rng.choice(mons)
            if gens and rng.random() < 0.3:
                y = y * rng.choice(gens)
            x = x + y
        return x

    def default_samples(self, seed=0, max_degree=3, count=32):
        """Variables, coefficient generators, monomials of degree <= 3 and seeded random elements."""
        out = [self.var(v.name) for v in self.carrier_vars]
        out += [self.gen(n) for n in self.ring.names]
        out += self.carrier_monomials(max_degree)
        rng = random.Random(seed)
        out += [self.random_element(rng) for _ in range(count)]
        return list(dict.fromkeys(out))

    def __repr__(self):
        vs = ", ".join(f"{v.name}^{v.order}" for v in self.carrier_vars)
        return f"DRing(A={self.ring}, carrier relations {vs}, a={self.a}, u-trunc={self.truncation})"


def make_model(F: FormalGroupLaw, a: int = 1, vars=(("t", 8),), truncation=None,
               coeff_images=None, param="u") -> DRing:
    """Build the model A[t_i]/(t_i^(a n_i)) with D_u(t) = t F(t,u).

    Coefficient generators act through the Lubin twist unless explicit
    images are supplied.  The law must be exact (an honest polynomial over
    its truncated coefficient ring) so it can be evaluated to any u-degree.
    """
    if not F.flags.get("order_two"):
        raise OrderTwoRequired("the model needs an order-two law")
    if a not in (1, 2):
        raise ValueError("grade multiple a must be 1 or 2")
    if F.grade != 1:
        raise ValueError("the model law is written in degree-1 variables")
    if F.params:
        raise ValueError("the model law must not carry parameter variables")
    if not F.F.exact:
        raise PrecisionError("the model law must be exact over its coefficient ring")
    orders = {n: int(k) for n, k in vars}
    if any(k < 1 for k in orders.values()):
        raise ValueError("truncation orders must be positive")
    if truncation is None:
        truncation = 2 * sum(a * k - 1 for k in orders.values()) + F.ring.truncation
    twist = None
    images = dict(coeff_images or {})
    if F.ring.ngens and coeff_images is None:
        twist = lubin_twist(F, param=param, truncation=2 + F.ring.truncation)
        images = twist_coefficient_images(F, twist, truncation, param)
    for name, img in images.items():
        if not isinstance(img, MultiSeries):
            raise TypeError(f"image of {name} must be a series in {param}")
    return DRing(F, a, orders, truncation, images, twist, param)


def twist_coefficient_images(F: FormalGroupLaw, twist: FormalGroupLaw, truncation, param="u"):
    """Generator at position (i, j) of F maps to the x^i y^j coefficient of the twist."""
    out = {}
    Ft = twist.F
    for name, (i, j) in F.positions.items():
        out[name] = Ft.coefficient_series({"x": i, "y": j}).retruncate(truncation)
    return out


# -- axiom checks ----------------------------------------------------------------------

def check_D1(D: DRing, samples=None) -> AxiomReport:
    """The u^0 part of D_u(x) is x^2."""
    samples = D.default_samples() if samples is None else samples
    rep = AxiomReport("D1", D.truncation, samples=len(samples))
    for x in samples:
        x = D._embed(x)
        diff = D.u_coefficient(D.apply_total(x), 0) + x * x
        if diff:
            rep.fail(x, diff)
    if rep.failures:
        rep.verified_degree = None
    return rep


def check_D2(D: DRing, twist: Union[FormalGroupLaw, None] = None) -> AxiomReport:
    """D_u applied to the coefficients of F gives the coefficients of F_u."""
    missing = [n for n in D.ring.names if n not in D.coeff_images]
    if missing:
        raise MissingCoefficientAction(f"generators without total-operation image: {missing}")
    if twist is None:
        twist = D.twist if D.twist is not None else lubin_twist(
            D.F, param=D.param, truncation=2 + D.ring.truncation)
    Fs, Ft = D.F.F, twist.F
    rep = AxiomReport("D2", D.truncation)
    xi, yi = Ft.var_index("x"), Ft.var_index("y")
    positions = set(Fs.terms) | {(e[xi], e[yi]) for e in Ft.terms}
    checked = 0
    for i, j in sorted(positions):
        a_ij = Fs.coefficient({"x": i, "y": j})
        lhs = D.apply_total(MultiSeries.constant(a_ij, D.carrier_vars, 0))
        rhs = Ft.coefficient_series({"x": i, "y": j})
        rhs = rhs.embed(D.variables, D.truncation if rhs.exact else min(D.truncation,
                                                                        rhs.truncation))
        diff = lhs.difference(rhs)
        checked += 1
        if diff:
            rep.failures.append({"element": f"a_{i},{j} = {a_ij}",
                                 "witness_monomial": diff.monomial_str(diff.lowest_term())})
    rep.samples = checked
    if rep.failures:
        rep.verified_degree = None
    return rep


def _second_operation(D: DRing, inner: MultiSeries, staged=False) -> MultiSeries:
    """Apply D_u to a series in the carrier and v, with D_u(v) = v F(u, v)."""
    uv = D.carrier_vars + (Var("u", 1), Var("v", 1))
    U = MultiSeries.var("u", uv, D.truncation, D.ring)
    V = MultiSeries.var("v", uv, D.truncation, D.ring)
    v_image = V * substitute(D.F.F, {"x": U, "y": V})
    assignment = {v.name: D._gen_images[v.name].rename({D.param: "u"}) for v in D.carrier_vars}
    coeffs = {n: c.rename({D.param: "u"}) for n, c in D.coeff_images.items()}
    if staged:
        # carrier and coefficients first; v's image brings coefficients that must stay put
        first = substitute(inner, assignment, coeffs)
        return substitute(first, {"v": v_image})
    return substitute(inner, dict(assignment, v=v_image), coeffs)


def iterated_total(D: DRing, x: MultiSeries, staged=False) -> MultiSeries:
    """D_u(D_v(x))."""
    if D.param in ("v",):
        raise ValueError("the model's own parameter must not be v")
    inner = D.apply_total(x).rename({D.param: "v"}) if D.param != "v" else D.apply_total(x)
    return _second_operation(D, inner, staged)


def check_D3(D: DRing, samples=None, check_staging=True) -> AxiomReport:
    """D_u D_v (x) is symmetric in u and v, and independent of the extension order."""
    samples = D.default_samples() if samples is None else samples
    rep = AxiomReport("D3", D.truncation, samples=len(samples))
    for x in samples:
        x = D._embed(x)
        y = iterated_total(D, x)
        diff = y.difference(y.rename({"u": "v", "v": "u"}))
        if diff:
            rep.fail(x, diff)
            continue
        if check_staging:
            diff = y.difference(iterated_total(D, x, staged=True))
            if diff:
                rep.fail(x, diff)
        rep.verified_degree = min(rep.verified_degree, y.truncation)
    if rep.failures:
        rep.verified_degree = None
    return rep


def check_homomorphism(D: DRing, pairs) -> AxiomReport:
    rep = AxiomReport("homomorphism", D.truncation, samples=len(pairs))
    for x, y in pairs:
        x, y = D._embed(x), D._embed(y)
        Dx, Dy = D.apply_total(x), D.apply_total(y)
        for label, lhs, rhs in (("x*y", D.apply_total(x * y), Dx * Dy),
                                ("x+y", D.apply_total(x + y), Dx + Dy)):
            diff = lhs.difference(rhs)
            if diff:
                rep.fail(f"{label} with x = {x}, y = {y}", diff)
    if rep.failures:
        rep.verified_degree = None
    return rep


def check_grading(D: DRing, samples=None) -> AxiomReport:
    """For homogeneous x of degree q, the u^i coefficient of D_u(x) has degree 2q - i."""
    samples = D.default_samples() if samples is None else samples
    rep = AxiomReport("grading", D.truncation)
    for x in samples:
        x = D._embed(x)
        if not x or not x.is_homogeneous():
            continue
        rep.samples += 1
        q = x.degree
        Dx = D.apply_total(x)
        for i in range(D.truncation + 1):
            c = D.u_coefficient(Dx, i)
            if c and c.degree_set() != {2 * q - i}:
                rep.fail(x, c)
                break
    if rep.failures:
        rep.verified_degree = None
    return rep


def check_naturality(D: DRing, orders: dict, samples=None) -> AxiomReport:
    """Reducing to smaller nilpotency orders commutes with the total operation."""
    E = D.restrict(orders)
    samples = D.default_samples() if samples is None else samples
    rep = AxiomReport("naturality", D.truncation, samples=len(samples))
    for x in samples:
        x = D._embed(x)
        lhs = E.apply_total(D.reduce(x, E))
        rhs = D.reduce(D.apply_total(x), E)
        diff = lhs.difference(rhs)
        if diff:
            rep.fail(x, diff)
    if rep.failures:
        rep.verified_degree = None
    return rep


def euler_total(D: DRing, t: str) -> MultiSeries:
    """D_u(t)^a, checked against e F_A(e, u^a) with e = t^a and F_A(x^a, y^a) = F(x, y)^a."""
    T = D.var(t)
    lhs = D.apply_total(T) ** D.a
    FA = square_compose(D.F, D.a)
    e = (T ** D.a).embed(D.variables, D.truncation)
    ua = MultiSeries.var(D.param, D.variables, D.truncation, D.ring) ** D.a
    rhs = e * substitute(FA.F, {"x": e, "y": ua})
    diff = lhs.difference(rhs)
    if diff:
        raise CompatibilityViolated(f"D_u({t})^{D.a} differs from e F_A(e, u^{D.a}) at "
                                    f"{diff.monomial_str(diff.lowest_term())}")
    return lhs


def all_products(elements, k=2):
    return [tuple(c) for c in combinations_with_replacement(elements, k)]
