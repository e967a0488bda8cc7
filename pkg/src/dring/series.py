"""Sparse truncated multivariate power series over graded F_2 coefficient rings.

A coefficient ring is a polynomial ring over F_2 on graded generators, cut
down to monomials whose weighted degree has absolute value at most its
truncation.  When every generator has negative degree this is a quotient by
an ideal, so all arithmetic is honest ring arithmetic.

A series is a finite set of monomials in its variables and the coefficient
generators jointly (an F_2 coefficient is presence or absence), plus a
truncation: the largest weighted degree in the *measured* variables that is
known.  Variables carrying a nilpotency order ``t^N = 0`` are polynomial
variables; they have no measure and are never truncated away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from operator import add
from typing import Iterable, Mapping, NamedTuple, Union


class NotASquare(ValueError):
    """Raised when a Frobenius square root is requested of a non-square."""


class RingMismatch(ValueError):
    pass


class PrecisionError(ValueError):
    """A result would need precision the inputs do not carry."""


class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class CoeffRing:
    """Graded polynomial ring over F_2, truncated by absolute weighted degree."""

    generators: tuple[tuple[str, int], ...] = ()
    truncation: int = 0

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple((str(n), int(d)) for n, d in self.generators))
        names = [n for n, _ in self.generators]
        if len(set(names)) != len(names):
            dup = sorted(n for n in set(names) if names.count(n) > 1)
            raise ValueError(f"duplicate generator name(s): {', '.join(dup)}")
        if self.truncation < 0:
            raise ValueError("truncation must be non-negative")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.generators)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.generators)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None

    def degree_of(self, gexp) -> int:
        return sum(d * e for d, e in zip(self.degrees, gexp))

    def keeps(self, gexp) -> bool:
        return not self.generators or abs(self.degree_of(gexp)) <= self.truncation

    def element(self, terms: Iterable[tuple[int, ...]] = ()) -> "RingElem":
        out = set()
        for m in terms:
            m = tuple(m)
            if len(m) != self.ngens or min(m, default=0) < 0:
                raise ValueError(f"bad exponent vector {m} for {self.ngens} generator(s)")
            if self.keeps(m):
                out ^= {m}
        return RingElem(self, frozenset(out))

    @property
    def zero(self) -> "RingElem":
        return RingElem(self, frozenset())

    @property
    def one(self) -> "RingElem":
        return RingElem(self, frozenset({(0,) * self.ngens}))

    def gen(self, name: str) -> "RingElem":
        i = self.index(name)
        m = tuple(1 if k == i else 0 for k in range(self.ngens))
        return self.element([m])

    def __str__(self):
        if not self.generators:
            return "F_2"
        gens = ", ".join(f"{n}:{d}" for n, d in self.generators)
        return f"F_2[{gens}] (|deg| <= {self.truncation})"


def make_ring(generators: Iterable[tuple[str, int]] = (), truncation: int = 0) -> CoeffRing:
    """Build a coefficient ring; the empty presentation is the field F_2."""
    return CoeffRing(tuple(generators), truncation)


F2 = CoeffRing()


def _mon_str(names, exps) -> str:
    parts = []
    for n, e in zip(names, exps):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True)
class RingElem:
    ring: CoeffRing
    terms: frozenset = frozenset()

    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise RingMismatch(f"{other.ring} vs {self.ring}")
            return other
        if isinstance(other, int):
            return self.ring.one if other % 2 else self.ring.zero
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RingElem(self.ring, self.terms ^ other.terms)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = set()
        for a in self.terms:
            for b in other.terms:
                m = tuple(map(add, a, b))
                if self.ring.keeps(m):
                    out ^= {m}
        return RingElem(self.ring, frozenset(out))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result, base = self.ring.one, self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base.frobenius()
        return result

    def frobenius(self) -> "RingElem":
        """Square; additive in characteristic 2."""
        return self.ring.element(tuple(2 * e for e in m) for m in self.terms)

    def sqrt(self) -> "RingElem":
        for m in self.terms:
            if any(e % 2 for e in m):
                raise NotASquare(f"{self} has odd exponent in {_mon_str(self.ring.names, m)}")
        return RingElem(self.ring, frozenset(tuple(e // 2 for e in m) for m in self.terms))

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self._coerce(other)
        if not isinstance(other, RingElem):
            return NotImplemented
        return self.ring == other.ring and self.terms == other.terms

    def __hash__(self):
        return hash((self.ring, self.terms))

    def degrees(self) -> set[int]:
        return {self.ring.degree_of(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        """Degree of a nonzero homogeneous element."""
        degs = self.degrees()
        if len(degs) != 1:
            raise ValueError(f"{self} is not a nonzero homogeneous element")
        return degs.pop()

    def sorted_terms(self) -> list[tuple[int, ...]]:
        return sorted(self.terms, key=lambda m: (sum(m), tuple(-e for e in m)))

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(_mon_str(self.ring.names, m) for m in self.sorted_terms())

    __repr__ = __str__


class Var(NamedTuple):
    """A series variable.  ``order`` set means ``name^order = 0``."""

    name: str
    degree: int = 1
    order: Union[int, None] = None


class _Layout:
    """Per (ring, variables) constants used by the arithmetic kernels."""

    def __init__(self, ring: CoeffRing, variables: tuple[Var, ...]):
        self.nv = len(variables)
        self.ng = ring.ngens
        self.weights = tuple(0 if v.order is not None else v.degree for v in variables)
        self.nil = tuple((i, v.order) for i, v in enumerate(variables) if v.order is not None)
        self.gdeg = ring.degrees
        self.has_gens = bool(ring.generators)
        self.ctrunc = ring.truncation
        self.measured = tuple(i for i, v in enumerate(variables) if v.order is None)

    def measure(self, m) -> int:
        return sum(w * e for w, e in zip(self.weights, m))

    def cdeg(self, m) -> int:
        return sum(d * e for d, e in zip(self.gdeg, m[self.nv:]))

    def keep(self, m, trunc: int) -> bool:
        if self.measure(m) > trunc:
            return False
        for i, n in self.nil:
            if m[i] >= n:
                return False
        return not self.has_gens or abs(self.cdeg(m)) <= self.ctrunc


@lru_cache(maxsize=None)
def _layout(ring: CoeffRing, variables: tuple[Var, ...]) -> _Layout:
    return _Layout(ring, variables)


def _toggle(out: set, m) -> None:
    if m in out:
        out.remove(m)
    else:
        out.add(m)


def _mul_sets(lay: _Layout, A, B, trunc: int) -> set:
    lb = sorted(((b, lay.measure(b), lay.cdeg(b)) for b in B), key=lambda r: r[1])
    nil, hg, ct = lay.nil, lay.has_gens, lay.ctrunc
    out: set = set()
    for a in A:
        room = trunc - lay.measure(a)
        ca = lay.cdeg(a)
        for b, mb, cb in lb:
            if mb > room:
                break
            if hg and abs(ca + cb) > ct:
                continue
            m = tuple(map(add, a, b))
            if nil and any(m[i] >= n for i, n in nil):
                continue
            if m in out:
                out.remove(m)
            else:
                out.add(m)
    return out


def _sorted_vars(variables: Iterable) -> tuple[Var, ...]:
    by_name: dict[str, Var] = {}
    for v in variables:
        v = Var(*v) if not isinstance(v, Var) else v
        old = by_name.get(v.name)
        if old is not None and old != v:
            raise ValueError(f"conflicting declarations for variable {v.name!r}: {old} vs {v}")
        by_name[v.name] = v
    return tuple(sorted(by_name.values(), key=lambda v: v.name))


@dataclass(frozen=True, eq=False)
class MultiSeries:
    """Truncated series; ``monomials`` holds joint (variable, generator) exponents."""

    ring: CoeffRing
    variables: tuple[Var, ...]
    monomials: frozenset
    truncation: int
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, ring, variables, truncation, monomials=()) -> "MultiSeries":
        variables = _sorted_vars(variables)
        lay = _layout(ring, variables)
        width = lay.nv + lay.ng
        out: set = set()
        for m in monomials:
            m = tuple(m)
            if len(m) != width or min(m, default=0) < 0:
                raise ValueError(f"bad joint exponent vector {m}")
            if lay.keep(m, truncation):
                _toggle(out, m)
        return cls(ring, variables, frozenset(out), truncation)

    @classmethod
    def zero(cls, ring, variables, truncation) -> "MultiSeries":
        return cls.build(ring, variables, truncation)

    @classmethod
    def constant(cls, c, variables=(), truncation=0, ring=None) -> "MultiSeries":
        if isinstance(c, int):
            ring = ring or F2
            c = ring.one if c % 2 else ring.zero
        variables = _sorted_vars(variables)
        pad = (0,) * len(variables)
        return cls.build(c.ring, variables, truncation, (pad + g for g in c.terms))

    @classmethod
    def var(cls, name, variables, truncation, ring=F2) -> "MultiSeries":
        variables = _sorted_vars(variables)
        names = [v.name for v in variables]
        if name not in names:
            raise KeyError(f"unknown variable {name!r}")
        m = tuple(1 if n == name else 0 for n in names) + (0,) * ring.ngens
        return cls.build(ring, variables, truncation, [m])

    @classmethod
    def from_terms(cls, ring, variables, truncation, terms: Mapping) -> "MultiSeries":
        """``terms`` maps variable-exponent tuples to RingElems (or 0/1)."""
        mons = []
        for vexp, c in terms.items():
            if isinstance(c, int):
                c = ring.one if c % 2 else ring.zero
            mons.extend(tuple(vexp) + g for g in c.terms)
        return cls.build(ring, variables, truncation, mons)

    # -- views -------------------------------------------------------------

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def _lay(self) -> _Layout:
        return _layout(self.ring, self.variables)

    @cached_property
    def terms(self) -> dict:
        """Map variable-exponent vector -> RingElem (no zero entries)."""
        nv = len(self.variables)
        groups: dict = {}
        for m in self.monomials:
            groups.setdefault(m[:nv], set()).add(m[nv:])
        return {k: RingElem(self.ring, frozenset(v)) for k, v in groups.items()}

    def var_index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    def __bool__(self):
        return bool(self.monomials)

    def __hash__(self):
        return hash((self.ring, self.variables, self.monomials, self.truncation))

    def __eq__(self, other):
        """Exact equality: same terms, variables, ring and truncation."""
        if isinstance(other, int):
            other = MultiSeries.constant(other, self.variables, self.truncation, self.ring)
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return (self.ring == other.ring and self.variables == other.variables
                and self.monomials == other.monomials and self.truncation == other.truncation)

    def valuation(self) -> int:
        """Lower bound on the measured order; ``truncation + 1`` for zero."""
        if not self.monomials:
            return self.truncation + 1
        lay = self._lay
        return min(lay.measure(m) for m in self.monomials)

    def degree_set(self) -> set[int]:
        """Total graded degrees of the monomials (variables plus coefficients)."""
        lay = self._lay
        vdeg = tuple(v.degree for v in self.variables)
        return {sum(d * e for d, e in zip(vdeg, m)) + lay.cdeg(m) for m in self.monomials}

    def is_homogeneous(self) -> bool:
        return len(self.degree_set()) <= 1

    @property
    def degree(self) -> int:
        degs = self.degree_set()
        if len(degs) != 1:
            raise ValueError(f"{self} is not a nonzero homogeneous element")
        return degs.pop()

    @cached_property
    def exact(self) -> bool:
        """True when no term can hide beyond the truncation.

        Holds for polynomials in nilpotent variables, and for homogeneous
        series whose truncation covers every degree the coefficient ring can
        still realise (all generators negative, all measured variables
        positive).  Grading is treated as part of the data.
        """
        lay = self._lay
        if self.truncation < 0:
            return False
        if not lay.measured:
            return True
        if any(self.variables[i].degree <= 0 for i in lay.measured):
            return False
        if any(v.degree < 0 for v in self.variables):
            return False
        if any(d >= 0 for d in self.ring.degrees):
            return False
        degs = self.degree_set()
        if len(degs) != 1:
            return False
        w = degs.pop()
        bound = w + (self.ring.truncation if self.ring.generators else 0)
        return self.truncation >= bound

    def _mark_exact(self) -> "MultiSeries":
        self.__dict__["exact"] = True
        return self

    # -- unification ---------------------------------------------------------

    def embed(self, variables, truncation=None) -> "MultiSeries":
        """Re-express over a superset of variables, optionally lowering truncation."""
        variables = _sorted_vars(variables)
        trunc = self.truncation if truncation is None else truncation
        if trunc > self.truncation and not self.exact:
            raise PrecisionError(f"cannot raise truncation {self.truncation} -> {trunc}")
        if variables == self.variables:
            if trunc == self.truncation:
                return self
            out = MultiSeries.build(self.ring, variables, trunc, self.monomials)
            return out._mark_exact() if self.exact and trunc >= 0 else out
        new_names = [v.name for v in variables]
        pos = []
        for v in self.variables:
            if v.name not in new_names:
                if any(m[self.var_index(v.name)] for m in self.monomials):
                    raise ValueError(f"variable {v.name!r} missing from target")
                pos.append(None)
                continue
            if variables[new_names.index(v.name)] != v:
                raise ValueError(f"conflicting declarations for variable {v.name!r}")
            pos.append(new_names.index(v.name))
        nv, nn = len(self.variables), len(variables)
        mons = []
        for m in self.monomials:
            out = [0] * nn
            for k, p in enumerate(pos):
                if p is not None:
                    out[p] = m[k]
            mons.append(tuple(out) + m[nv:])
        out = MultiSeries.build(self.ring, variables, trunc, mons)
        return out._mark_exact() if self.exact and trunc >= 0 else out

    def retruncate(self, truncation: int) -> "MultiSeries":
        return self.embed(self.variables, truncation)

    def _unify(self, other) -> tuple["MultiSeries", "MultiSeries"]:
        if isinstance(other, (int, RingElem)):
            if isinstance(other, RingElem) and other.ring != self.ring:
                raise RingMismatch(f"{other.ring} vs {self.ring}")
            c = MultiSeries.constant(other, self.variables, self.truncation, self.ring)
            return self, c
        if not isinstance(other, MultiSeries):
            raise TypeError(f"cannot combine MultiSeries with {type(other).__name__}")
        if other.ring != self.ring:
            raise RingMismatch(f"owner rings differ: {self.ring} vs {other.ring}")
        # an exact operand is a polynomial and imposes no truncation of its own
        inexact = [s.truncation for s in (self, other) if not s.exact]
        trunc = min(inexact) if inexact else max(self.truncation, other.truncation)
        if self.variables == other.variables:
            vs = self.variables
        else:
            vs = _sorted_vars(self.variables + other.variables)
        return self.embed(vs, trunc), other.embed(vs, trunc)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        a, b = self._unify(other)
        return MultiSeries(a.ring, a.variables, a.monomials ^ b.monomials, a.truncation)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        a, b = self._unify(other)
        mons = _mul_sets(a._lay, a.monomials, b.monomials, a.truncation)
        return MultiSeries(a.ring, a.variables, frozenset(mons), a.truncation)

    __rmul__ = __mul__

    def frobenius(self) -> "MultiSeries":
        """Square, computed termwise (Frobenius is additive in characteristic 2)."""
        return MultiSeries.build(self.ring, self.variables, self.truncation,
                                 (tuple(2 * e for e in m) for m in self.monomials))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = MultiSeries.constant(1, self.variables, self.truncation, self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base.frobenius()
        return result

    def shift(self, exponents: Mapping[str, int]) -> "MultiSeries":
        """Multiply by an exact monomial; precision grows by its measure."""
        lay = self._lay
        vec = [0] * lay.nv
        for name, e in exponents.items():
            vec[self.var_index(name)] = e
        grow = lay.measure(tuple(vec) + (0,) * lay.ng)
        pad = tuple(vec) + (0,) * lay.ng
        return MultiSeries.build(self.ring, self.variables, self.truncation + grow,
                                 (tuple(map(add, m, pad)) for m in self.monomials))

    # -- coefficient access ------------------------------------------------------

    def _exp_vector(self, exponents) -> tuple[int, ...]:
        if isinstance(exponents, Mapping):
            vec = [0] * len(self.variables)
            for name, e in exponents.items():
                vec[self.var_index(name)] = int(e)
            return tuple(vec)
        vec = tuple(int(e) for e in exponents)
        if len(vec) != len(self.variables):
            raise ValueError(f"exponent vector has {len(vec)} entries, series has "
                             f"{len(self.variables)} variables")
        return vec

    def coefficient(self, exponents) -> RingElem:
        vec = self._exp_vector(exponents)
        lay = self._lay
        if lay.measure(vec + (0,) * lay.ng) > self.truncation and not self.exact:
            raise PrecisionError(f"monomial {vec} lies beyond truncation {self.truncation}")
        return self.terms.get(vec, self.ring.zero)

    def coefficient_series(self, exponents: Mapping[str, int]) -> "MultiSeries":
        """Coefficient of a monomial in some variables, as a series in the rest."""
        idx = {self.var_index(n): e for n, e in exponents.items()}
        keep = [i for i in range(len(self.variables)) if i not in idx]
        lay = self._lay
        vec = [0] * lay.nv
        for i, e in idx.items():
            vec[i] = e
        trunc = self.truncation - lay.measure(tuple(vec) + (0,) * lay.ng)
        nv = lay.nv
        mons = []
        for m in self.monomials:
            if all(m[i] == e for i, e in idx.items()):
                mons.append(tuple(m[i] for i in keep) + m[nv:])
        rest = tuple(self.variables[i] for i in keep)
        if self.exact:
            # a coefficient of a polynomial is a polynomial, even when it vanishes
            return MultiSeries.build(self.ring, rest, max(trunc, 0), mons)._mark_exact()
        return MultiSeries.build(self.ring, rest, trunc, mons)

    def drop_variable(self, name: str) -> "MultiSeries":
        """Forget an unused variable."""
        i = self.var_index(name)
        if any(m[i] for m in self.monomials):
            raise ValueError(f"variable {name!r} still occurs")
        rest = tuple(v for v in self.variables if v.name != name)
        return MultiSeries.build(self.ring, rest, self.truncation,
                                 (m[:i] + m[i + 1:] for m in self.monomials))

    def rename(self, mapping: Mapping[str, str]) -> "MultiSeries":
        """Rename variables (a simultaneous permutation is allowed)."""
        for old in mapping:
            self.var_index(old)
        newvars = [Var(mapping.get(v.name, v.name), v.degree, v.order) for v in self.variables]
        if len({v.name for v in newvars}) != len(newvars):
            raise ValueError("renaming merges variables")
        order = sorted(range(len(newvars)), key=lambda i: newvars[i].name)
        nv = len(newvars)
        mons = (tuple(m[i] for i in order) + m[nv:] for m in self.monomials)
        return MultiSeries.build(self.ring, [newvars[i] for i in order], self.truncation, mons)

    def agrees(self, other: "MultiSeries") -> bool:
        return not self.difference(other)

    def difference(self, other: "MultiSeries") -> "MultiSeries":
        """``self - other`` at the common truncation."""
        a, b = self._unify(other)
        return a + b

    def lowest_term(self) -> Union[tuple, None]:
        """Joint exponent vector of the lowest monomial (measure, then lex)."""
        if not self.monomials:
            return None
        lay = self._lay
        return min(self.monomials, key=lambda m: (lay.measure(m), sum(m[:lay.nv]), m))

    def monomial_str(self, m) -> str:
        return _mon_str(self.names + self.ring.names, m)

    def sorted_monomials(self) -> list:
        nv = len(self.variables)
        return sorted(self.monomials,
                      key=lambda m: (sum(m[:nv]), tuple(-e for e in m[:nv]), sum(m[nv:]),
                                     tuple(-e for e in m[nv:])))

    def __str__(self):
        if not self.monomials:
            return "0"
        return " + ".join(self.monomial_str(m) for m in self.sorted_monomials())

    def __repr__(self):
        return f"MultiSeries({self}; trunc={self.truncation})"


def _as_series(x, ring, variables, truncation) -> MultiSeries:
    if isinstance(x, MultiSeries):
        if x.ring != ring:
            raise RingMismatch(f"assigned series lives over {x.ring}, expected {ring}")
        return x
    return MultiSeries.constant(x, variables, truncation, ring)


def substitute(f: MultiSeries, assignment: Mapping[str, object],
               coeff_images: Union[Mapping[str, MultiSeries], None] = None,
               truncation: Union[int, None] = None) -> MultiSeries:
    """Compose ``f`` with the assignment (and optionally a map on coefficient generators).

    The result truncation is the least of the image truncations and the
    order up to which ``f``'s unknown tail cannot reach; an image without
    positive measured order landing on a truncated position is refused.
    Coefficient generators may map to series with constant terms since
    coefficients are exact polynomials.
    """
    coeff_images = dict(coeff_images or {})
    for name in assignment:
        f.var_index(name)
    for name in coeff_images:
        f.ring.index(name)

    images = {n: _as_series(g, f.ring, (), f.truncation) for n, g in assignment.items()}
    cimages = {n: _as_series(g, f.ring, (), f.truncation) for n, g in coeff_images.items()}

    lay = f._lay
    out_vars = [v for v in f.variables if v.name not in images]
    for g in list(images.values()) + list(cimages.values()):
        out_vars.extend(g.variables)
    out_vars = _sorted_vars(out_vars)

    bound = math.inf
    for g in list(images.values()) + list(cimages.values()):
        bound = min(bound, g.truncation)
    if not f.exact:
        ratio = math.inf
        for i in lay.measured:
            v = f.variables[i]
            if v.name in images:
                ratio = min(ratio, images[v.name].valuation() / v.degree)
            else:
                ratio = min(ratio, 1)
        if ratio < math.inf:
            tail = math.ceil(ratio * (f.truncation + 1)) - 1
            if tail < 0:
                bad = [v.name for k, v in enumerate(f.variables) if k in lay.measured
                       and v.name in images and images[v.name].valuation() == 0]
                raise SubstitutionError(
                    f"assignment with zero order into truncated position(s) {bad}")
            bound = min(bound, tail)
        # no measured variables: f is a polynomial, nothing hidden
    if bound == math.inf:
        bound = f.truncation
    if truncation is not None:
        if truncation > bound:
            raise PrecisionError(f"requested truncation {truncation} exceeds available {bound}")
        bound = truncation
    bound = int(bound)

    # one output series per symbol (variables, then generators)
    symbols: list[MultiSeries] = []
    for v in f.variables:
        if v.name in images:
            symbols.append(images[v.name].embed(out_vars, min(bound, images[v.name].truncation)))
        else:
            symbols.append(MultiSeries.var(v.name, out_vars, bound, f.ring))
    for gname in f.ring.names:
        if gname in cimages:
            symbols.append(cimages[gname].embed(out_vars, min(bound, cimages[gname].truncation)))
        else:
            symbols.append(MultiSeries.constant(f.ring.gen(gname), out_vars, bound))
    one = MultiSeries.constant(1, out_vars, bound, f.ring)
    zero_mons: set = set()

    powers: dict = {}

    def power(k, e):
        key = (k, e)
        if key not in powers:
            powers[key] = symbols[k] ** e
        return powers[key]

    prefix: dict = {(): one}

    def image(m):
        # memoised over prefixes so shared leading factors are computed once
        k = len(m)
        while m[:k] not in prefix:
            k -= 1
        acc = prefix[m[:k]]
        for j in range(k, len(m)):
            if m[j]:
                acc = acc * power(j, m[j])
            prefix[m[:j + 1]] = acc
        return acc

    for m in sorted(f.monomials):
        zero_mons ^= image(m).monomials
    return MultiSeries(f.ring, out_vars, frozenset(zero_mons), bound)


def frobenius_sqrt(x):
    """Square root of a RingElem or MultiSeries; raises NotASquare on odd exponents."""
    if isinstance(x, RingElem):
        return x.sqrt()
    for m in x.monomials:
        if any(e % 2 for e in m):
            raise NotASquare(f"odd exponent in {x.monomial_str(m)}")
    return MultiSeries.build(x.ring, x.variables, x.truncation // 2,
                             (tuple(e // 2 for e in m) for m in x.monomials))


def map_coefficients(f: MultiSeries, ring: CoeffRing, images: Mapping[str, object]) -> MultiSeries:
    """Push ``f`` along the ring map sending each generator to ``images[name]``.

    Images are RingElems of ``ring`` or integers; missing generators map to 0.
    """
    imgs = []
    for name in f.ring.names:
        c = images.get(name, 0)
        if isinstance(c, int):
            c = ring.one if c % 2 else ring.zero
        if c.ring != ring:
            raise RingMismatch(f"image of {name} lives over {c.ring}, expected {ring}")
        imgs.append(c)
    nv = len(f.variables)
    memo: dict = {}

    def image(g):
        if g not in memo:
            acc = ring.one
            for c, e in zip(imgs, g):
                if e:
                    acc = acc * c ** e
            memo[g] = acc
        return memo[g]

    mons = [m[:nv] + h for m in f.monomials for h in image(m[nv:]).terms]
    return MultiSeries.build(ring, f.variables, f.truncation, mons)
