import pytest
from hypothesis import given, settings, strategies as st

from dring.parse import (ParseError, parse_series, series_from_json, series_to_json)
from dring.series import (F2, MultiSeries, NotASquare, PrecisionError, RingMismatch,
                          SubstitutionError, Var, frobenius_sqrt, make_ring, substitute)

XY = [Var("x"), Var("y")]
TU = [Var("t"), Var("u")]


def S(text, vs=XY, T=8, ring=F2):
    return parse_series(text, vs, T, ring)


def test_make_ring_examples():
    R = make_ring([], 10)
    assert R.ngens == 0 and R.one != R.zero
    C = make_ring([("c", -2)], 8)
    c = C.gen("c")
    assert c ** 4 == C.element([(4,)])
    assert c ** 5 == 0                       # degree -10 falls outside |deg| <= 8
    R2 = make_ring([("a21", -2), ("a31", -3)], 6)
    a = R2.gen("a21")
    assert (a * a).degree == -4 and a * a
    assert (R2.gen("a31") * R2.gen("a31")).degree == -6
    assert R2.gen("a31") * R2.gen("a31") * a == 0
    with pytest.raises(ValueError):
        make_ring([("c", -1), ("c", -2)], 3)


def test_arithmetic_examples():
    x, y = S("x"), S("y")
    assert x + x == 0
    assert (x + y) * (x + y) == S("x^2 + y^2")
    assert S("t^2 + t*u", TU) ** 2 == S("t^4 + t^2*u^2", TU)


def test_mismatched_rings():
    R = make_ring([("c", -1)], 4)
    with pytest.raises(RingMismatch):
        S("x") + S("x", ring=R)


def test_truncation_is_minimum():
    # x + x^2 is not homogeneous, so its truncation is binding
    assert (S("x + x^2", T=3) * S("x + y", T=6)).truncation == 3
    # homogeneous series without generators are exact and lift to the larger bound
    assert (S("x", T=3) * S("x + y", T=6)).truncation == 6
    assert (S("x^3 + y^7", T=8) * S("x^2", T=8)) == S("x^5", T=8)


def test_substitute_examples():
    u = [Var("u"), Var("v")]
    assert str(substitute(S("x + y"), {"y": 0})) == "x"
    assert substitute(S("x*y"), {"x": S("u + v", u), "y": S("u", u)}) == S("u^2 + u*v", u)
    # y is left alone and stays among the variables
    g = substitute(S("x^2"), {"x": S("x^2 + t*x", [Var("t"), Var("x")])})
    assert [v.name for v in g.variables] == ["t", "x", "y"]
    assert str(g) == str(S("x^4 + t^2*x^2", [Var("t"), Var("x")]))


def test_substitute_identity_and_errors():
    f = S("x + y + x*y^2")
    assert substitute(f, {"x": S("x"), "y": S("y")}) == f
    with pytest.raises(KeyError):
        substitute(f, {"w": S("x")})
    with pytest.raises(SubstitutionError):
        substitute(f, {"x": S("1 + x")})


def test_substitute_constant_into_polynomial_position():
    # nilpotent variables carry no truncation, so a constant may go there
    vs = [Var("t", 1, 4)]
    f = MultiSeries.build(F2, vs, 0, [(1,), (3,)])
    assert not substitute(f, {"t": 1})


def test_coefficient_examples():
    f = S("t^2 + t*u", TU)
    assert f.coefficient({"t": 1, "u": 1}) == 1
    assert f.coefficient({"t": 0, "u": 2}) == 0
    assert (f ** 3).coefficient({"t": 4, "u": 2}) == 1
    with pytest.raises(ValueError):
        f.coefficient((1, 1, 1))
    with pytest.raises(PrecisionError):
        S("x + x^2", T=3).coefficient({"x": 5})
    assert S("x", T=3).coefficient({"x": 5}) == 0      # exact, so known everywhere


def test_frobenius_sqrt_examples():
    assert frobenius_sqrt(S("x^4*y^2")) == S("x^2*y", T=4)
    assert frobenius_sqrt(S("x^2 + y^2")) == S("x + y", T=4)
    with pytest.raises(NotASquare):
        frobenius_sqrt(S("x^3"))
    R = make_ring([("c", -1)], 6)
    assert frobenius_sqrt(R.element([(4,)])) == R.element([(2,)])


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        S("x +\n  y ^ y")
    assert (e.value.line, e.value.col) == (2, 7)
    with pytest.raises(ParseError):
        S("x + q")
    with pytest.raises(ParseError):
        S("(x + y")


def test_json_round_trip_and_order():
    R = make_ring([("a21", -2)], 4)
    f = S("x + y + a21*x^2*y + a21*x*y^2", ring=R)
    obj = series_to_json(f)
    assert [t["exp"] for t in obj["terms"]] == sorted(t["exp"] for t in obj["terms"])
    assert series_from_json(obj) == f


def test_exactness_allows_lifting():
    R = make_ring([("c", -1)], 2)
    f = S("x + y + c*x*y", ring=R, T=3)
    assert f.exact
    assert f.retruncate(10).coefficient({"x": 5, "y": 4}) == 0
    g = S("x + x^2", T=3)
    assert not g.exact
    with pytest.raises(PrecisionError):
        g.retruncate(5)


# -- properties ----------------------------------------------------------------------

RING = make_ring([("c", -1), ("d", -2)], 4)
VARS = [Var("x"), Var("y")]
T = 5


@st.composite
def series(draw):
    mons = draw(st.lists(st.tuples(*(st.integers(0, 3) for _ in range(4))), max_size=8))
    return MultiSeries.build(RING, VARS, T, mons)


@st.composite
def positive_series(draw):
    mons = draw(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2),
                                   st.integers(0, 1)).filter(lambda m: m[0] + m[1] > 0),
                         max_size=6))
    return MultiSeries.build(RING, VARS, T, mons)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_ring_axioms(f, g, h):
    assert f + g == g + f
    assert f * g == g * f
    assert f * (g + h) == f * g + f * h
    assert (f * g) * h == f * (g * h)
    assert f + f == 0


@settings(max_examples=60, deadline=None)
@given(series(), series())
def test_squaring_is_additive(f, g):
    assert (f + g) ** 2 == f ** 2 + g ** 2
    assert f ** 2 == f * f


@st.composite
def squarable(draw):
    # generator parts whose squares stay inside the ring truncation
    gens = st.sampled_from([(0, 0), (1, 0), (2, 0), (0, 1)])
    mons = draw(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), gens), max_size=8))
    return MultiSeries.build(RING, VARS, T, [(i, j) + g for i, j, g in mons])


@settings(max_examples=60, deadline=None)
@given(squarable())
def test_sqrt_of_square(f):
    # joint square root halves the known precision
    sq = MultiSeries.build(RING, VARS, 2 * T + 1, (tuple(2 * e for e in m) for m in f.monomials))
    assert frobenius_sqrt(sq) == f


@settings(max_examples=40, deadline=None)
@given(series(), positive_series(), positive_series(), positive_series())
def test_substitution_associative(f, a, b, c):
    sigma = {"x": a, "y": b}
    tau = {"x": c, "y": MultiSeries.var("x", VARS, T, RING)}
    once = substitute(substitute(f, sigma), tau)
    composed = {"x": substitute(a, tau), "y": substitute(b, tau)}
    twice = substitute(f, composed)
    assert not once.difference(twice)
