"""Formal group laws of order two over graded F_2-algebras.

Conventions: a law lives in variables ``x, y`` of degree ``grade`` (``a`` in
the literature), possibly with extra parameter variables such as ``t`` that
are treated as coefficients.  The coefficient of ``x^i y^j`` has degree
``grade*(1 - i - j)``, so the law is homogeneous of degree ``grade``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Union

from .series import (CoeffRing, MultiSeries, NotASquare, PrecisionError, RingElem, Var,
                     frobenius_sqrt, make_ring, map_coefficients, substitute)

AXIOMS = ("unit", "commutative", "associative", "order_two")


class OrderTwoRequired(ValueError):
    pass


class SolverInconsistency(ArithmeticError):
    pass


class NotCompatible(ValueError):
    pass


class InvalidLaw(ValueError):
    def __init__(self, report):
        super().__init__(report.message)
        self.report = report


@dataclass
class FGLReport:
    """Outcome of checking the identities; ``flags`` maps axiom -> verified degree or None."""

    flags: dict
    failures: list = field(default_factory=list)   # (axiom, witness monomial, defect string)

    @property
    def ok(self):
        return not self.failures

    @property
    def message(self):
        if self.ok:
            return "all identities hold to degree " + str(min(self.flags.values()))
        axiom, _, defect = self.failures[0]
        return f"{axiom} fails: {defect}"

    def to_json(self):
        return {"ok": self.ok, "flags": dict(self.flags),
                "failures": [{"identity": a, "witness_monomial": w, "defect": d}
                             for a, w, d in self.failures]}


@dataclass(frozen=True)
class FormalGroupLaw:
    F: MultiSeries
    flags: dict = field(default_factory=dict, compare=False, hash=False)
    positions: dict = field(default_factory=dict, compare=False, hash=False)  # generator -> (i, j)

    @property
    def ring(self) -> CoeffRing:
        return self.F.ring

    @property
    def truncation(self) -> int:
        return self.F.truncation

    @property
    def grade(self) -> int:
        return self.F.variables[self.F.var_index("x")].degree

    @property
    def params(self) -> tuple[Var, ...]:
        return tuple(v for v in self.F.variables if v.name not in ("x", "y"))

    @property
    def order_two(self) -> bool:
        return self.flags.get("order_two") is not None

    def coefficient(self, i, j, **params) -> RingElem:
        exps = {"x": i, "y": j, **params}
        return self.F.coefficient(exps)

    def __call__(self, a, b, truncation=None) -> MultiSeries:
        return substitute(self.F, {"x": a, "y": b}, truncation=truncation)

    def __str__(self):
        return str(self.F)


def law_variables(grade=1, params=()) -> list[Var]:
    return [Var("x", grade), Var("y", grade), *params]


def _z_like(F: MultiSeries) -> Var:
    x = F.variables[F.var_index("x")]
    return Var("z", x.degree, x.order)


def _defect(label, diff: MultiSeries):
    w = diff.lowest_term()
    return w and diff.monomial_str(w), f"{label} = {diff}"


def check_fgl(F: Union[MultiSeries, FormalGroupLaw]) -> FGLReport:
    """Evaluate unit, commutativity, associativity and F(x,x) = 0 to the truncation."""
    if isinstance(F, FormalGroupLaw):
        F = F.F
    F.var_index("x")
    F.var_index("y")
    flags, failures = {}, []
    vs = F.variables
    X = MultiSeries.var("x", vs, F.truncation, F.ring)
    Y = MultiSeries.var("y", vs, F.truncation, F.ring)

    const = F.coefficient_series({"x": 0, "y": 0})
    if const:
        failures.append(("unit", const.monomial_str(const.lowest_term()),
                         f"F(0,0) = {const} is not zero"))
        return FGLReport({a: None for a in AXIOMS}, failures)

    # unit
    fx0 = substitute(F, {"y": 0}).difference(X)
    f0y = substitute(F, {"x": 0}).difference(Y)
    if fx0:
        failures.append(("unit",) + _defect("F(x,0) + x", fx0))
    elif f0y:
        failures.append(("unit",) + _defect("F(0,y) + y", f0y))
    flags["unit"] = None if (fx0 or f0y) else fx0.truncation

    swapped = F.rename({"x": "y", "y": "x"})
    comm = F.difference(swapped)
    flags["commutative"] = None if comm else comm.truncation
    if comm:
        failures.append(("commutative",) + _defect("F(x,y) + F(y,x)", comm))

    z = _z_like(F)
    vs3 = list(vs) + [z]
    Xv, Yv, Zv = (MultiSeries.var(n, vs3, F.truncation, F.ring) for n in "xyz")
    Fyz = substitute(F, {"x": Yv, "y": Zv})
    left = substitute(F, {"x": F.embed(vs3), "y": Zv})
    right = substitute(F, {"x": Xv, "y": Fyz})
    assoc = left.difference(right)
    flags["associative"] = None if assoc else assoc.truncation
    if assoc:
        failures.append(("associative",) + _defect("F(F(x,y),z) + F(x,F(y,z))", assoc))

    fxx = substitute(F, {"y": X})
    flags["order_two"] = None if fxx else fxx.truncation
    if fxx:
        failures.append(("order_two",) + _defect("F(x,x)", fxx))
    return FGLReport(flags, failures)


def validate_fgl(F: Union[MultiSeries, FormalGroupLaw], require=AXIOMS) -> FormalGroupLaw:
    """Return a law with verified flags, or raise InvalidLaw carrying the report."""
    positions = F.positions if isinstance(F, FormalGroupLaw) else {}
    series = F.F if isinstance(F, FormalGroupLaw) else F
    report = check_fgl(series)
    bad = [f for f in report.failures if f[0] in require]
    if bad:
        raise InvalidLaw(FGLReport(report.flags, bad))
    return FormalGroupLaw(series, report.flags, positions)


def additive_law(truncation, ring: CoeffRing = None, grade=1, params=()) -> FormalGroupLaw:
    ring = ring or make_ring()
    vs = law_variables(grade, params)
    F = MultiSeries.var("x", vs, truncation, ring) + MultiSeries.var("y", vs, truncation, ring)
    return validate_fgl(F)


def is_additive(F: FormalGroupLaw) -> bool:
    vs = F.F.variables
    add = MultiSeries.var("x", vs, F.truncation, F.ring) + MultiSeries.var("y", vs, F.truncation,
                                                                          F.ring)
    return not F.F.difference(add)


# -- morphisms -------------------------------------------------------------------

@dataclass
class MorphismReport:
    ok: bool
    truncation: int
    witness: Union[str, None] = None
    defect: Union[str, None] = None

    def __bool__(self):
        return self.ok


def is_morphism(h: MultiSeries, F: FormalGroupLaw, G: FormalGroupLaw, var="x") -> MorphismReport:
    """Compare h(F(x,y)) with G(h(x), h(y)) at the common truncation."""
    Fs = F.F if isinstance(F, FormalGroupLaw) else F
    Gs = G.F if isinstance(G, FormalGroupLaw) else G
    if Fs.ring != Gs.ring or h.ring != Fs.ring:
        from .series import RingMismatch
        raise RingMismatch("morphism check needs a common coefficient ring")
    const = h.coefficient_series({var: 0})
    if const:
        raise ValueError(f"h has nonzero constant term {const}")
    if var != "x":
        h = h.rename({var: "x"})
    hy = h.rename({"x": "y"})
    lhs = substitute(h, {"x": Fs})
    rhs = substitute(Gs, {"x": h, "y": hy})
    diff = lhs.difference(rhs)
    if diff:
        w = diff.lowest_term()
        return MorphismReport(False, diff.truncation, diff.monomial_str(w), str(diff))
    return MorphismReport(True, diff.truncation)


# -- universal law of order two ---------------------------------------------------

def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def solve_f2(rows, ncols, zero):
    """Row-reduce ``sum_j M[r][j] a_j = rhs_r`` over F_2 with right-hand sides in a ring.

    ``rows`` are (bitmask, rhs).  Returns (pivots, free) where pivots maps a
    column to (mask of free columns, rhs) expressing it.  Raises
    SolverInconsistency on a zero row with nonzero right-hand side.
    """
    pivots: dict = {}
    reduced: list = []
    for mask, rhs in rows:
        for col, (pmask, prhs) in reduced:
            if mask >> col & 1:
                mask ^= pmask
                rhs = rhs + prhs
        if not mask:
            if rhs:
                raise SolverInconsistency(f"inconsistent linear condition: 0 = {rhs}")
            continue
        col = (mask & -mask).bit_length() - 1
        # eliminate the new pivot from earlier rows to keep the system reduced
        new = []
        for c, (pmask, prhs) in reduced:
            if pmask >> col & 1:
                pmask ^= mask
                prhs = prhs + rhs
            new.append((c, (pmask, prhs)))
        reduced = new + [(col, (mask, rhs))]
    for col, (mask, rhs) in reduced:
        pivots[col] = (mask & ~(1 << col), rhs)
    free = [c for c in range(ncols) if c not in pivots]
    return pivots, free


def _unknowns(m):
    return [(i, m - i) for i in range(1, m // 2 + 1)]


def _sym(i, j):
    return [(i, j)] if i == j else [(i, j), (j, i)]


def universal_order_two(max_degree: int, grade: int = 1) -> FormalGroupLaw:
    """Universal order-two law modulo degree ``max_degree + 1``.

    Degree by degree, the unknown coefficients ``a_ij`` (``i <= j``,
    commutativity built in, unit forcing ``a_m0 = 0``) are constrained by
    F(x,x) = 0 and associativity, which are F_2-linear in the new unknowns
    once lower degrees are fixed.  Free columns of the echelon form become
    fresh generators ``g{m}_{k}``.  The coefficient ring keeps degrees down
    to ``-(max_degree - 1)``, which makes the result exact.
    """
    d = int(max_degree)
    if d < 2:
        raise ValueError("max_degree must be at least 2")
    placeholders = [(f"a{i}_{j}", 1 - i - j) for m in range(2, d + 1) for i, j in _unknowns(m)]
    ring = make_ring(placeholders, d - 1)
    xyz = [Var("x"), Var("y"), Var("z")]
    vs = xyz[:2]

    def var(n, vlist, T):
        return MultiSeries.var(n, vlist, T, ring)

    F = var("x", vs, d) + var("y", vs, d)
    solved: dict = {}                 # placeholder -> RingElem value
    free_names: dict = {}             # placeholder -> (m, k)
    lin = {}                          # linear map on F_2 for each unknown, cached by degree

    for m in range(2, d + 1):
        unknowns = _unknowns(m)
        Fm = F.retruncate(m)
        Fxy = Fm.embed(xyz)
        Fyz = substitute(Fm, {"x": var("y", xyz, m), "y": var("z", xyz, m)})
        gamma = (substitute(Fm, {"x": Fxy, "y": var("z", xyz, m)})
                 + substitute(Fm, {"x": var("x", xyz, m), "y": Fyz}))

        # linear part: P(x,y) + P(x+y,z) + P(y,z) + P(x,y+z) for each unknown monomial pair
        rows: dict = {}
        f2xyz = [Var("x"), Var("y"), Var("z")]
        X, Y, Z = (MultiSeries.var(n, f2xyz, m) for n in "xyz")
        for col, (i, j) in enumerate(unknowns):
            key = (m, i, j)
            if key not in lin:
                acc = MultiSeries.zero(X.ring, f2xyz, m)
                for p, q in _sym(i, j):
                    acc = acc + X ** p * Y ** q + (X + Y) ** p * Z ** q \
                        + Y ** p * Z ** q + X ** p * (Y + Z) ** q
                lin[key] = acc
            for mon in lin[key].monomials:
                rows[mon[:3]] = rows.get(mon[:3], 0) ^ (1 << col)
        system = []
        for mon in sorted(set(rows) | set(gamma.terms)):
            if sum(mon) != m:
                continue
            system.append((rows.get(mon, 0), gamma.terms.get(mon, ring.zero)))
        if m % 2 == 0:
            system.append((1 << unknowns.index((m // 2, m // 2)), ring.zero))
        pivots, free = solve_f2(system, len(unknowns), ring.zero)

        values = {}
        for k, col in enumerate(free, start=1):
            i, j = unknowns[col]
            name = f"a{i}_{j}"
            free_names[name] = (m, k)
            values[col] = ring.gen(name)
        for col, (mask, rhs) in pivots.items():
            val = rhs
            for c in _bits(mask):
                val = val + values[c]
            values[col] = val
        terms = {}
        for col, (i, j) in enumerate(unknowns):
            solved[f"a{i}_{j}"] = values[col]
            for p, q in _sym(i, j):
                terms[(p, q)] = values[col]
        F = F + MultiSeries.from_terms(ring, vs, d, terms)

    # compress: keep only free placeholders, renamed by degree and echelon index
    kept = sorted(free_names, key=lambda n: free_names[n])
    new_ring = make_ring([(f"g{free_names[n][0]}_{free_names[n][1]}", ring.degrees[ring.index(n)])
                          for n in kept], d - 1)
    images = {n: new_ring.gen(f"g{free_names[n][0]}_{free_names[n][1]}") for n in kept}
    G = map_coefficients(F, new_ring, images)
    positions = {}
    for n in kept:
        i, j = (int(s) for s in n[1:].split("_"))
        positions[f"g{free_names[n][0]}_{free_names[n][1]}"] = (i, j)
    if grade != 1:
        G = regrade(G, grade)
    law = validate_fgl(G)
    return FormalGroupLaw(law.F, law.flags, positions)


def regrade(F: MultiSeries, grade: int) -> MultiSeries:
    """Scale every variable and generator degree (and truncations) by ``grade``."""
    ring = make_ring([(n, grade * d) for n, d in F.ring.generators], grade * F.ring.truncation)
    vs = [Var(v.name, grade * v.degree, v.order) for v in F.variables]
    return MultiSeries.build(ring, vs, grade * F.truncation, F.monomials)


def specialize(F: FormalGroupLaw, ring: CoeffRing, images) -> FormalGroupLaw:
    """Push a law along a ring map given on generators (missing ones go to 0)."""
    G = map_coefficients(F.F, ring, images)
    return validate_fgl(G)


# -- Lubin twist -----------------------------------------------------------------

def lubin_twist(F: FormalGroupLaw, param: str = "t", truncation: Union[int, None] = None,
                order: Union[Callable, int, None] = None) -> FormalGroupLaw:
    """The law F_t with h(x) = x F(x,t) a morphism F -> F_t.

    F_t lives in x, y of degree ``2*grade`` and a parameter of degree
    ``grade``; ``truncation`` bounds the weighted degree in those three.  The
    coefficient of x^i y^j t^k is read off the residual h(F(x,y)) - F_t(h(x),h(y))
    at x^i y^j t^(i+j+k), which only that unknown can reach since h(x) = t x + ...
    Within a stage the unknowns are independent; ``order`` (a sort key, or an
    integer seed for a shuffle) changes the processing order only.
    """
    if not F.flags.get("order_two"):
        raise OrderTwoRequired("the Lubin twist is only constructed for laws of order two")
    g = F.grade
    E = F.truncation if truncation is None else truncation
    Fs = F.F
    if any(v.name == param for v in Fs.variables):
        raise ValueError(f"parameter name {param!r} already used by the law")
    if E > Fs.truncation:
        if not Fs.exact:
            raise PrecisionError(f"law known to {Fs.truncation}, twist asked to {E}")
        Fs = Fs.retruncate(E)
    ring = Fs.ring
    tv = Var(param, g)
    src = [Var("x", g), Var("y", g), tv]
    X = MultiSeries.var("x", src, E, ring)
    Y = MultiSeries.var("y", src, E, ring)
    T = MultiSeries.var(param, src, E, ring)
    hx = X * substitute(Fs, {"y": T}).embed(src, E)
    hy = Y * substitute(Fs, {"x": Y, "y": T}).embed(src, E)
    residual = substitute(hx, {"x": Fs.embed(src)}).embed(src, E)

    hx_pow = {0: MultiSeries.constant(1, src, E, ring)}
    hy_pow = {0: MultiSeries.constant(1, src, E, ring)}
    t_pow = {0: MultiSeries.constant(1, src, E, ring)}

    def pw(cache, base, e):
        if e not in cache:
            cache[e] = pw(cache, base, e - 1) * base
        return cache[e]

    out_vars = [Var("x", 2 * g), Var("y", 2 * g), tv]
    found: dict = {}
    for s in range(1, E // (2 * g) + 1):
        triples = [(i, s - i, k) for i in range(s + 1) for k in range((E - 2 * g * s) // g + 1)]
        if isinstance(order, int):
            random.Random(order).shuffle(triples)
        elif order is not None:
            triples.sort(key=order)
        for i, j, k in triples:
            c = residual.terms.get(residual._exp_vector({"x": i, "y": j, param: s + k}))
            if not c:
                continue
            found[(i, j, k)] = c
            term = pw(hx_pow, hx, i) * pw(hy_pow, hy, j) * pw(t_pow, T, k)
            residual = residual + MultiSeries.constant(c, src, E) * term
    if residual:
        w = residual.lowest_term()
        raise SolverInconsistency(f"twist residual does not vanish at {residual.monomial_str(w)}")
    names = sorted(v.name for v in out_vars)
    keyed = {}
    for (i, j, k), c in found.items():
        e = {"x": i, "y": j, param: k}
        keyed[tuple(e[n] for n in names)] = c
    Ft = MultiSeries.from_terms(ring, out_vars, E, keyed)
    law = validate_fgl(Ft)
    return FormalGroupLaw(law.F, law.flags, {})


def twist_morphism(F: FormalGroupLaw, param="t", truncation=None) -> MultiSeries:
    """h(x) = x F(x, t) as a series in x and the parameter."""
    g = F.grade
    Fs = F.F
    E = Fs.truncation if truncation is None else truncation
    if E > Fs.truncation:
        Fs = Fs.retruncate(E)
    vs = [Var("x", g), Var(param, g)]
    return (substitute(Fs, {"y": MultiSeries.var(param, vs, E, Fs.ring)})
            .embed(vs).shift({"x": 1}).retruncate(E))


# -- Frobenius ---------------------------------------------------------------------

def _is_power_of_two(a):
    return a >= 1 and a & (a - 1) == 0


def square_compose(G: FormalGroupLaw, a: int) -> FormalGroupLaw:
    """The law F_A obtained by raising every coefficient of G to the a-th power.

    Its variables get degree ``a`` times those of G, and F_A(x^a, y^a) = G(x, y)^a.
    """
    if not _is_power_of_two(a):
        raise ValueError("a must be a power of 2")
    Gs = G.F if isinstance(G, FormalGroupLaw) else G
    nv = len(Gs.variables)
    vs = [Var(v.name, a * v.degree, v.order) for v in Gs.variables]
    mons = (m[:nv] + tuple(a * e for e in m[nv:]) for m in Gs.monomials)
    H = MultiSeries.build(Gs.ring, vs, a * Gs.truncation, mons)
    return validate_fgl(H)


def frobenius_descend(F: FormalGroupLaw, a: int) -> FormalGroupLaw:
    """The law F~ with F~(x,y)^a = F(x^a, y^a): square roots of the coefficients."""
    if not _is_power_of_two(a):
        raise ValueError("a must be a power of 2")
    Fs = F.F if isinstance(F, FormalGroupLaw) else F
    if a == 1:
        return F if isinstance(F, FormalGroupLaw) else validate_fgl(F)
    nv = len(Fs.variables)
    for v in Fs.variables:
        if v.degree % a:
            raise NotCompatible(f"variable {v.name} has degree {v.degree}, not divisible by {a}")
    mons = []
    for m in Fs.monomials:
        g = m[nv:]
        if any(e % a for e in g):
            raise NotCompatible("coefficient of " + Fs.monomial_str(m[:nv] + (0,) * len(g))
                                + " is not an a-th power: " + Fs.monomial_str((0,) * nv + g))
        mons.append(m[:nv] + tuple(e // a for e in g))
    vs = [Var(v.name, v.degree // a, v.order) for v in Fs.variables]
    if Fs.truncation % a:
        raise NotCompatible(f"truncation {Fs.truncation} is not a multiple of {a}")
    return validate_fgl(MultiSeries.build(Fs.ring, vs, Fs.truncation // a, mons))


def random_order_two_law(rng: random.Random, truncation=6, nparams=3, ring_truncation=40):
    """Specialise the universal law's generators to random elements of F_2[c_1..c_k].

    The c_i get degree -1 so specialisations stay homogeneous; the ring is
    wide enough that squaring coefficients loses nothing.
    """
    U = universal_order_two(truncation)
    ring = make_ring([(f"c{i}", -1) for i in range(1, nparams + 1)], ring_truncation)
    images = {}
    for name, deg in U.ring.generators:
        monos = _monomials_of_degree(nparams, -deg)
        pick = [m for m in monos if rng.random() < 0.5]
        images[name] = ring.element(pick)
    G = map_coefficients(U.F, ring, images)
    return validate_fgl(G)


def _monomials_of_degree(n, d):
    if n == 0:
        return [()] if d == 0 else []
    return [(e,) + rest for e in range(d + 1) for rest in _monomials_of_degree(n - 1, d - e)]
