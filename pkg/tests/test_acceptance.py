"""Acceptance criteria 1 to 9, one test each, each printing a PASS/FAIL line with its runtime."""

import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from itertools import product

import pytest

import oracle
from dring.covering import (FiniteCovering, calculus_report, check_frames,
                            composite_power_check, composite_total_bijection, random_covering)
from dring.fgl import (additive_law, frobenius_descend, is_additive, is_morphism, lubin_twist,
                       random_order_two_law, square_compose, twist_morphism, universal_order_two,
                       validate_fgl)
from dring.model import (all_products, check_D1, check_D2, check_D3, check_homomorphism,
                         make_model)
from dring.series import MultiSeries, Var
from dring.steenrod import OpWord, adem_normalize, apply_sum, cartan_check, compose_ops, sq

from test_fgl import _oracle_twist_holds, regrade_twist


@contextmanager
def criterion(capsys, number, limit, detail=""):
    """Run a block, then print one line with the verdict and the time against its limit."""
    start = time.perf_counter()
    info = {"detail": detail}
    ok = False
    try:
        yield info
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit
        verdict = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print(f"\ncriterion {number}: {verdict} ({elapsed:.1f} s, limit {limit} s) "
                  f"{info['detail']}")
    assert within, f"criterion {number} took {elapsed:.1f} s, limit {limit} s"


def test_criterion_1_fgl_axioms(capsys):
    with criterion(capsys, 1, 10) as info:
        assert validate_fgl(additive_law(8)).flags["order_two"]
        for d in range(2, 9):
            U = universal_order_two(d)
            rep = validate_fgl(U)
            assert all(rep.flags[a] for a in ("unit", "commutative", "associative", "order_two"))
        assert str(universal_order_two(2)) == "x + y"
        assert universal_order_two(3).ring.ngens == 1
        U8 = universal_order_two(8)
        counts = []
        for m in range(2, 9):
            fresh = sum(1 for n, _ in U8.ring.generators if n.startswith(f"g{m}_"))
            brute = oracle.brute_force_degree(m)
            assert brute == 2 ** fresh, (m, brute, fresh)
            counts.append(fresh)
        info["detail"] = f"fresh generators by degree 2..8: {counts}"


def test_criterion_2_lubin_twist(capsys):
    with criterion(capsys, 2, 30) as info:
        Ft = lubin_twist(additive_law(12), truncation=12)
        assert is_additive(Ft) and str(Ft) == "x + y"
        for d in range(2, 7):
            U = universal_order_two(d)
            Fd = lubin_twist(U, truncation=d)
            assert is_morphism(twist_morphism(U, truncation=d), U, regrade_twist(Fd, d))
            assert _oracle_twist_holds(U, Fd, d)
            for order in (11, 12, lambda t: (-t[2], t[1]), lambda t: (t[0], -t[1])):
                assert lubin_twist(U, truncation=d, order=order).F == Fd.F
        info["detail"] = "additive twist exact to 12; morphism d = 2..6; 4 alternative orders"


def test_criterion_3_frobenius_round_trip(capsys):
    with criterion(capsys, 3, 60) as info:
        failures = 0
        for seed in range(50):
            G = random_order_two_law(random.Random(seed), truncation=6)
            if frobenius_descend(square_compose(G, 2), 2).F != G.F:
                failures += 1
        assert failures == 0
        info["detail"] = f"50 random laws, {failures} failures"


def test_criterion_4_additive_model(capsys):
    with criterion(capsys, 4, 60) as info:
        D = make_model(additive_law(1), 1, [("t1", 13), ("t2", 13), ("t3", 13)], truncation=12)
        mons = D.carrier_monomials(12)
        assert check_D1(D, mons).ok
        gens = [D.var(v.name) for v in D.carrier_vars]
        d3 = gens + [x * y for x, y in all_products(gens)]
        assert check_D3(D, d3).ok
        rng = random.Random(0)
        pairs = [(D.random_element(rng, max_degree=6), D.random_element(rng, max_degree=6))
                 for _ in range(200)]
        assert check_homomorphism(D, pairs).ok
        info["detail"] = f"D1 on {len(mons)} monomials, D3 on {len(d3)}, 200 pairs"


def test_criterion_5_universal_model(capsys):
    with criterion(capsys, 5, 60) as info:
        U = universal_order_two(6)
        D = make_model(U, 1, [("t1", 4), ("t2", 4)], truncation=6)
        E = 2 + U.ring.truncation
        other = lubin_twist(U, param="u", truncation=E, order=lambda t: (-t[0], t[2], -t[1]))
        assert other.F == D.twist.F
        assert _oracle_twist_holds(U, lubin_twist(U, truncation=E), E)
        rep = check_D2(D, twist=other)
        assert rep.ok
        samples = [D.var(v.name) for v in D.carrier_vars] + [D.gen(n) for n in D.ring.names]
        samples += D.carrier_monomials(3)
        assert check_D1(D, samples).ok
        assert check_D3(D, samples).ok
        info["detail"] = f"D2 on {rep.samples} coefficients, D1/D3 on {len(samples)} elements"


def test_criterion_6_steenrod(capsys):
    with criterion(capsys, 6, 60) as info:
        D = make_model(additive_law(1), 1, [("t1", 13), ("t2", 13), ("t3", 13)], truncation=12)
        mons = D.carrier_monomials(12)
        for x in mons:
            assert sq(D, 0, x) == x
            assert sq(D, x.degree, x) == x * x
        # sums of monomials of one degree
        rng = random.Random(6)
        by_degree = {}
        for x in mons:
            by_degree.setdefault(x.degree, []).append(x)
        for n, group in by_degree.items():
            for _ in range(5):
                x = sum(rng.sample(group, min(3, len(group))), 0 * group[0])
                assert sq(D, 0, x) == x and sq(D, n, x) == x * x
        P = make_model(additive_law(1), 1, [("t", 41)], truncation=20)
        t = P.var("t")
        for n in range(1, 21):
            for j in range(n + 1):
                expect = t ** (n + j) if oracle.binom_parity(n, j) else 0 * t
                assert sq(P, j, t ** n) == expect
        small = D.carrier_monomials(10)
        pairs = [(x, y) for x in small for y in small if x.degree + y.degree <= 10]
        assert cartan_check(D, pairs).ok
        info["detail"] = f"{len(mons)} monomials, Sq^j(t^n) for n <= 20, {len(pairs)} Cartan pairs"


def test_criterion_7_adem(capsys):
    with criterion(capsys, 7, 120) as info:
        D = make_model(additive_law(1), 1, [(f"t{i}", 15) for i in range(1, 5)], truncation=20)
        mons = D.carrier_monomials(10)
        words = [(a, b) for a in range(11) for b in range(11) if a + b <= 10]
        for a, b in words:
            w = OpWord.sq(a, b)
            nf = adem_normalize(w)
            assert all(v.is_admissible() for v in nf)
            for x in mons:
                assert compose_ops(D, w, x) == apply_sum(D, nf, x), (str(w), str(x))
        assert adem_normalize(OpWord.sq(1, 1)) == []
        assert [str(v) for v in adem_normalize(OpWord.sq(1, 2))] == ["Sq^3"]
        assert [str(v) for v in adem_normalize(OpWord.sq(2, 2))] == ["Sq^3 Sq^1"]
        info["detail"] = f"{len(words)} words on {len(mons)} monomials"


def test_criterion_8_coverings(capsys):
    with criterion(capsys, 8, 60) as info:
        rng = random.Random(8)
        elementwise = sampled = frames_checked = 0
        for _ in range(100):
            p = random_covering(rng, prefix="b")
            q = random_covering(rng, prefix="c")
            rep = calculus_report(p, q)
            assert rep["sum_rule"] and rep["leibniz"] and rep["chain_rule"]
            assert rep["poly_sum"] and rep["poly_product"] and rep["poly_compose"]
            assert rep["poly_derivative"]
            assert composite_total_bijection(p, q)
            for m in range(4):
                res = composite_power_check(p, q, list(range(m)), seed=m)
                assert res["bijective"] and res["sizes_agree"]
                elementwise += res["elementwise_parts"]
                sampled += res["sampled_parts"]
            for c in (p, q):
                if len(set(c.sizes)) == 1 and c.sizes[0] <= 3:
                    fr = check_frames(c, list(range(3)))
                    assert fr["free"] and fr["bijective"]
                    frames_checked += 1
        for n, nb in product(range(4), range(1, 5)):
            fr = check_frames(FiniteCovering.from_sizes([n] * nb), list(range(3)))
            assert fr["free"] and fr["bijective"]
            frames_checked += 1
        info["detail"] = (f"power bijection: {elementwise} parts element-wise, {sampled} parts "
                          f"sampled; {frames_checked} frame checks")


COMMANDS = [
    ["fgl-check", "--expr", "x + y + x*y"],
    ["fgl-twist", "--expr", "x + y"],
    ["fgl-universal", "--trunc", "6"],
    ["dring-verify", "--model", "k=2,n=5", "--trunc", "8", "--seed", "3"],
    ["dring-verify", "--universal", "5", "--model", "n=3", "--trunc", "6", "--seed", "4"],
    ["sq-eval", "--op", "Sq^2 Sq^1", "--elem", "t1^2*t2", "--model", "k=2,n=9"],
    ["adem-normalize", "--op", "Sq^2 Sq^3", "--verify"],
    ["cover-calc", "--xsize", "2", "--seed", "5", "--expr",
     json.dumps({"p": {"base": ["a", "b"], "fibers": {"a": 2, "b": 0}},
                 "q": {"base": ["c", "d"], "fibers": {"c": 1, "d": 3}}})],
]


def test_criterion_9_determinism(capsys):
    with criterion(capsys, 9, 120) as info:
        for argv in COMMANDS:
            outs = [subprocess.run([sys.executable, "-m", "dring", *argv, "--json"],
                                   capture_output=True, check=False).stdout
                    for _ in range(2)]
            assert outs[0] == outs[1] and outs[0], argv
            json.loads(outs[0])
        info["detail"] = f"{len(COMMANDS)} commands run twice, identical JSON"
