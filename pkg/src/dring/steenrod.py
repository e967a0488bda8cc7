"""Individual operations q_i and Sq^j read off the total operation.

For x homogeneous of degree n, D_u(x) = sum_i q_i(x) u^i and, when the law is
additive, Sq^j(x) = q_{n-j}(x).  Words of operations act right to left:
``Sq^2 Sq^1`` applies Sq^1 first.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import comb
from typing import Iterable

from .fgl import is_additive
from .model import AxiomReport, DRing
from .series import MultiSeries, PrecisionError


class NonHomogeneous(ValueError):
    pass


class NonAdditiveModel(ValueError):
    pass


def _degree(x: MultiSeries):
    """Degree of a homogeneous element; None for zero."""
    degs = x.degree_set()
    if len(degs) > 1:
        raise NonHomogeneous(f"{x} is not homogeneous (degrees {sorted(degs)})")
    return degs.pop() if degs else None


def q_op(D: DRing, i: int, x: MultiSeries) -> MultiSeries:
    """The u^i coefficient of D_u(x)."""
    x = D._embed(x)
    n = _degree(x)
    if i < 0 or n is None:
        return MultiSeries.zero(D.ring, D.carrier_vars, 0)
    if i > D.truncation:
        raise PrecisionError(f"q_{i} needs u-truncation {i}, model has {D.truncation}")
    return D.u_coefficient(D.apply_total(x), i)


def _require_additive(D: DRing):
    flag = getattr(D, "_additive", None)
    if flag is None:
        flag = D._additive = is_additive(D.F)
    if not flag:
        raise NonAdditiveModel("Sq^j is only defined from the total operation of an additive law")


def sq(D: DRing, j: int, x: MultiSeries) -> MultiSeries:
    """Sq^j(x) = q_{n-j}(x) for x homogeneous of degree n."""
    _require_additive(D)
    x = D._embed(x)
    n = _degree(x)
    if n is None or j < 0 or j > n:
        return MultiSeries.zero(D.ring, D.carrier_vars, 0)
    return q_op(D, n - j, x)


def sq_total(D: DRing, x: MultiSeries) -> MultiSeries:
    """Sum of all Sq^j(x), applied per homogeneous component."""
    _require_additive(D)
    x = D._embed(x)
    out = MultiSeries.zero(D.ring, D.carrier_vars, 0)
    for part in homogeneous_parts(x):
        n = _degree(part)
        for j in range(n + 1):
            out = out + sq(D, j, part)
    return out


def homogeneous_parts(x: MultiSeries) -> list:
    vdeg = tuple(v.degree for v in x.variables)
    nv = len(vdeg)
    groups: dict = {}
    for m in x.monomials:
        d = sum(a * b for a, b in zip(vdeg, m)) + x.ring.degree_of(m[nv:])
        groups.setdefault(d, []).append(m)
    return [MultiSeries.build(x.ring, x.variables, x.truncation, groups[d]) for d in sorted(groups)]


# -- words -----------------------------------------------------------------------------

@dataclass(frozen=True)
class OpWord:
    """A word of operations, written left to right and applied right to left."""

    ops: tuple = ()   # entries ("Sq", j) or ("q", i)

    def __post_init__(self):
        for kind, k in self.ops:
            if kind not in ("Sq", "q") or not isinstance(k, int) or k < 0:
                raise ValueError(f"bad operation {kind}^{k}")

    @classmethod
    def sq(cls, *degrees) -> "OpWord":
        return cls(tuple(("Sq", int(j)) for j in degrees))

    @classmethod
    def parse(cls, text: str) -> "OpWord":
        ops = []
        for tok in text.replace("*", " ").split():
            m = re.fullmatch(r"(Sq|q)(?:\^?\{?(\d+)\}?|_(\d+))", tok)
            if not m:
                raise ValueError(f"cannot read operation {tok!r}")
            ops.append((m.group(1), int(m.group(2) or m.group(3))))
        return cls(tuple(ops))

    @property
    def degrees(self) -> tuple:
        return tuple(k for _, k in self.ops)

    def is_sq(self) -> bool:
        return all(kind == "Sq" for kind, _ in self.ops)

    def is_admissible(self) -> bool:
        d = self.degrees
        return self.is_sq() and all(d[k] >= 2 * d[k + 1] for k in range(len(d) - 1))

    def __str__(self):
        if not self.ops:
            return "1"
        return " ".join(f"Sq^{k}" if kind == "Sq" else f"q_{k}" for kind, k in self.ops)

    def __len__(self):
        return len(self.ops)


def compose_ops(D: DRing, w: OpWord, x: MultiSeries) -> MultiSeries:
    """Apply the word to x, rightmost operation first."""
    y = D._embed(x)
    for kind, k in reversed(w.ops):
        y = sq(D, k, y) if kind == "Sq" else q_op(D, k, y)
    return y


def apply_sum(D: DRing, words: Iterable[OpWord], x: MultiSeries) -> MultiSeries:
    out = MultiSeries.zero(D.ring, D.carrier_vars, 0)
    for w in words:
        out = out + compose_ops(D, w, x)
    return out


def adem_normalize(w: OpWord) -> list:
    """Rewrite a Sq-word into a sum (mod 2) of admissible words.

    Sq^0 is dropped, then the leftmost inadmissible pair Sq^a Sq^b (a < 2b) is
    replaced by sum_c binom(b-c-1, a-2c) Sq^(a+b-c) Sq^c.  Returns the words
    sorted, each present once.
    """
    if not w.is_sq():
        raise ValueError("adem_normalize takes words of Sq operations")
    todo = {tuple(j for j in w.degrees if j)}
    done: set = set()
    while todo:
        nxt: set = set()
        for word in todo:
            for k in range(len(word) - 1):
                a, b = word[k], word[k + 1]
                if a < 2 * b:
                    for c in range(a // 2 + 1):
                        if comb(b - c - 1, a - 2 * c) % 2:
                            new = word[:k] + (a + b - c, c) + word[k + 2:]
                            nxt ^= {tuple(j for j in new if j)}
                    break
            else:
                done ^= {word}
        todo = nxt
    return [OpWord.sq(*word) for word in sorted(done, key=lambda t: (len(t), t))]


def words_to_json(words) -> list:
    return [str(w) for w in words]


# -- checks ----------------------------------------------------------------------------

def cartan_check(D: DRing, pairs, max_k=None) -> AxiomReport:
    """Sq^k(xy) = sum_{i+j=k} Sq^i(x) Sq^j(y) on the given pairs of homogeneous elements."""
    _require_additive(D)
    rep = AxiomReport("cartan", D.truncation, samples=len(pairs))
    for x, y in pairs:
        x, y = D._embed(x), D._embed(y)
        nx, ny = _degree(x), _degree(y)
        if nx is None or ny is None:
            continue
        top = nx + ny if max_k is None else min(max_k, nx + ny)
        sx = [sq(D, i, x) for i in range(nx + 1)]
        sy = [sq(D, j, y) for j in range(ny + 1)]
        xy = x * y
        for k in range(top + 1):
            rhs = MultiSeries.zero(D.ring, D.carrier_vars, 0)
            for i in range(max(0, k - ny), min(k, nx) + 1):
                rhs = rhs + sx[i] * sy[k - i]
            diff = sq(D, k, xy) + rhs
            if diff:
                rep.fail(f"Sq^{k}({x} * {y})", diff)
                break
    if rep.failures:
        rep.verified_degree = None
    return rep
