import random

import pytest

from dring.covering import (FiniteCovering, IndexedPolynomial, NonConstantSheetCount,
                            calculus_report, check_frames, check_functoriality, compose,
                            composite_power_check, composite_total_bijection, covering_product,
                            covering_sum, derivative, extended_power, extended_power_size,
                            iso_check, random_covering)


def test_polynomial_of_covering():
    p = FiniteCovering.from_sizes([2, 0, 2, 3])
    assert p.poly().coeffs == (1, 0, 2, 1)
    assert str(p.poly()) == "1 + 2x^2 + x^3"
    assert p.poly()(2) == 1 + 8 + 8


def test_extended_power_counts():
    p = FiniteCovering.from_sizes([0, 1, 3])
    for m in range(4):
        X = list(range(m))
        assert len(extended_power(p, X)) == extended_power_size(p, m) == p.poly()(m)


def test_derivative_examples():
    p = FiniteCovering.from_sizes([3])
    d = derivative(p)
    assert sorted(d.sizes) == [2, 2, 2]
    assert d.poly() == p.poly().derivative()
    assert derivative(FiniteCovering.from_sizes([1, 0])).sizes == (0,)


def test_sum_and_product_shapes():
    p, q = FiniteCovering.from_sizes([1, 2]), FiniteCovering.from_sizes([3])
    assert covering_sum(p, q).sizes == (1, 2, 3)
    assert covering_product(p, q).sizes == (4, 5)
    assert compose(p, q).poly() == p.poly().compose(q.poly())


def test_composition_with_empty_fibers():
    p = FiniteCovering.from_sizes([0, 2])
    q = FiniteCovering.from_sizes([0, 1])
    c = compose(p, q)
    assert c.poly() == p.poly().compose(q.poly())
    assert calculus_report(p, q)["chain_rule"]


def test_rules_detect_mismatch():
    assert not iso_check(FiniteCovering.from_sizes([1, 2]), FiniteCovering.from_sizes([3]))
    a, b = IndexedPolynomial((1, 2)), IndexedPolynomial((0, 1))
    assert (a * b).coeffs == (0, 1, 2)
    assert a.compose(b + IndexedPolynomial((1,))).coeffs == (3, 2)
    with pytest.raises(ValueError):
        IndexedPolynomial((1, -1))


def test_frames():
    p = FiniteCovering.from_sizes([2, 2])
    rep = check_frames(p, ["x", "y", "z"])
    assert rep["free"] and rep["bijective"]
    assert rep["frames"] == rep["expected_frames"] == 4
    assert rep["orbits"] == extended_power_size(p, 3)
    with pytest.raises(NonConstantSheetCount):
        check_frames(FiniteCovering.from_sizes([1, 2]), ["x"])


def test_composite_bijections_small():
    p, q = FiniteCovering.from_sizes([2, 1]), FiniteCovering.from_sizes([1, 2])
    assert composite_total_bijection(p, q)
    rep = composite_power_check(p, q, [0, 1, 2])
    assert rep["bijective"] and rep["sizes_agree"] and rep["mode"] == "elementwise"


def test_composite_power_sampling_for_large_parts():
    p, q = FiniteCovering.from_sizes([3]), FiniteCovering.from_sizes([2, 3])
    rep = composite_power_check(p, q, [0, 1, 2], budget=100, samples=50)
    assert rep["sampled_parts"] == 1 and rep["bijective"] and rep["sizes_agree"]


def test_functoriality():
    rng = random.Random(1)
    p = FiniteCovering.from_sizes([2, 0, 1])
    assert check_functoriality(p, [0, 1], ["a", "b", "c"], [True, False], rng)


def test_json_round_trip_and_errors():
    p = FiniteCovering.from_sizes([2, 0], ["u", "v"])
    assert FiniteCovering.from_json(p.to_json()) == p
    with pytest.raises(ValueError):
        FiniteCovering.from_json({"base": ["u"], "fibers": {"v": 1}})
    with pytest.raises(ValueError):
        FiniteCovering(("a", "a"), ((), ()))


def test_random_pairs_satisfy_calculus():
    rng = random.Random(5)
    for _ in range(20):
        p, q = random_covering(rng, prefix="b"), random_covering(rng, prefix="c")
        rep = calculus_report(p, q)
        assert all(v for v in rep.values() if isinstance(v, bool)), rep
