import random

import pytest

import oracle
from dring.fgl import OrderTwoRequired, additive_law, lubin_twist, universal_order_two, validate_fgl
from dring.model import (MissingCoefficientAction, all_products, check_D1, check_D2, check_D3,
                         check_grading, check_homomorphism, check_naturality, euler_total,
                         iterated_total, make_model)
from dring.parse import parse_series
from dring.series import F2, MultiSeries, Var


@pytest.fixture(scope="module")
def additive():
    return make_model(additive_law(1), 1, [("t1", 6), ("t2", 6)])


@pytest.fixture(scope="module")
def universal():
    return make_model(universal_order_two(5), 1, [("t", 4)], truncation=6)


def test_default_truncation(additive):
    assert additive.truncation == 2 * (5 + 5)
    assert [(v.name, v.degree, v.order) for v in additive.carrier_vars] == \
        [("t1", 1, 6), ("t2", 1, 6)]


def test_total_operation_on_powers():
    D = make_model(additive_law(1), 1, [("t", 10)], truncation=18)
    t = D.var("t")
    for n in range(1, 10):
        Dx = D.apply_total(t ** n)
        # D_u(t^n) = t^n (t + u)^n
        for i in range(n + 1):
            c = D.u_coefficient(Dx, i)
            expect = oracle.binom_parity(n, i) and 2 * n - i < 10
            assert bool(c) == bool(expect)


def test_axioms_on_additive(additive):
    samples = additive.carrier_monomials(10)
    assert check_D1(additive, samples).ok
    assert check_grading(additive, samples).ok
    gens = [additive.var("t1"), additive.var("t2")]
    assert check_D3(additive, gens + [x * y for x, y in all_products(gens)]).ok
    rng = random.Random(3)
    pairs = [(additive.random_element(rng), additive.random_element(rng)) for _ in range(20)]
    assert check_homomorphism(additive, pairs).ok


def test_naturality(additive):
    rep = check_naturality(additive, {"t1": 3, "t2": 4})
    assert rep.ok and rep.samples > 0
    with pytest.raises(ValueError):
        additive.restrict({"t1": 9})


def test_euler_total_both_grades():
    for a in (1, 2):
        D = make_model(additive_law(1), a, [("t", 4)])
        assert euler_total(D, "t")
    U = make_model(universal_order_two(4), 2, [("t", 3)], truncation=6)
    assert euler_total(U, "t")


def test_universal_axioms(universal):
    samples = universal.default_samples(max_degree=3)
    assert check_D1(universal, samples).ok
    assert check_D2(universal).ok
    assert check_D3(universal, samples).ok
    assert check_grading(universal, samples).ok


def test_d2_against_reordered_twist(universal):
    other = lubin_twist(universal.F, param="u", truncation=2 + universal.ring.truncation,
                        order=lambda t: (-t[0], -t[2]))
    assert check_D2(universal, twist=other).ok


def test_d2_detects_wrong_action():
    U = universal_order_two(4)
    vs = (Var("u"),)
    wrong = {n: MultiSeries.constant(U.ring.gen(n), vs, 6, U.ring) for n in U.ring.names}
    D = make_model(U, 1, [("t", 3)], truncation=6, coeff_images=wrong)
    rep = check_D2(D)
    assert not rep.ok and rep.failures[0]["witness_monomial"]


def test_staging_order_matters_only_when_naive(universal):
    t = universal.var("t")
    assert iterated_total(universal, t) == iterated_total(universal, t, staged=True)


def test_missing_action():
    U = universal_order_two(4)
    D = make_model(U, 1, [("t", 3)], truncation=6, coeff_images={})
    with pytest.raises(MissingCoefficientAction):
        D.apply_total(D.gen(U.ring.names[0]))
    with pytest.raises(MissingCoefficientAction):
        check_D2(D)


def test_model_rejects_bad_laws():
    law = validate_fgl(parse_series("x + y + x*y", [Var("x"), Var("y")], 6, F2),
                       require=("unit", "commutative", "associative"))
    with pytest.raises(OrderTwoRequired):
        make_model(law)
    with pytest.raises(ValueError):
        make_model(additive_law(1), a=3)
    with pytest.raises(ValueError):
        make_model(additive_law(1), vars=[("t", 0)])


def test_parse_and_foreign_elements(additive):
    x = additive.parse("t1^2 + t1*t2")
    assert x.degree == 2
    with pytest.raises(ValueError):
        additive.apply_total(parse_series("x", [Var("x")], 0, F2))
