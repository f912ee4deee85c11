"""Tree automorphism model, degree chains, and transport checks."""

import dataclasses
import random
from fractions import Fraction as F
from math import gcd

import pytest

from padicdyn import (DomainError, ExactField, ExtensionField, KummerLevel,
                      MonicPoly, UsageError, boettcher_series, certify_degree,
                      degree_chain, kummer_act, kummer_restrict,
                      predicted_degree_step, subgroup_orbit_count,
                      transport_check, transported_valuation)


def mono(p, coeffs):
    return MonicPoly(ExactField(p), coeffs)


# -- group model ---------------------------------------------------------------


def test_act_identity_and_arithmetic():
    L = KummerLevel(2, 2)
    for k in range(4):
        assert kummer_act((0, 1), k, L) == k
    assert kummer_act((1, 3), 2, L) == (3 * 2 + 1) % 4


def test_translations_are_transitive():
    L = KummerLevel(3, 2)
    orbit = {0}
    k = 0
    for _ in range(L.modulus):
        k = kummer_act((1, 1), k, L)
        orbit.add(k)
    assert orbit == set(range(L.modulus))
    assert subgroup_orbit_count([(1, 1)], L) == 1


def test_restrict_examples():
    L = KummerLevel(2, 2)
    assert kummer_restrict((3, 3), L) == (1, 1)
    assert kummer_restrict(L.identity(), L) == (0, 1)


def test_restrict_commutes_with_action_exhaustively():
    for d in (2, 3):
        for N in (2, 3):
            L = KummerLevel(d, N)
            L_down = KummerLevel(d, N - 1)
            m_down = d ** (N - 1)
            for g in L.elements():
                gd = kummer_restrict(g, L)
                for k in range(L.modulus):
                    assert (kummer_act(g, k, L) % m_down
                            == kummer_act(gd, k % m_down, L_down))


def test_group_axioms_small_levels():
    for d in (2, 3):
        for N in (1, 2):
            L = KummerLevel(d, N)
            els = list(L.elements())
            assert len(els) == L.order
            ident = L.identity()
            for g in els:
                assert L.compose(g, ident) == g
                assert L.compose(ident, g) == g
                assert L.compose(g, L.inverse(g)) == ident
            for g in els:
                for h in els:
                    gh = L.compose(g, h)
                    assert gh in set(els)
                    # the action is a homomorphism
                    for k in range(0, L.modulus, max(1, L.modulus // 3)):
                        assert (kummer_act(gh, k, L)
                                == kummer_act(g, kummer_act(h, k, L), L))


def test_group_order_formula():
    for d, N in [(2, 1), (2, 3), (3, 2), (3, 3)]:
        L = KummerLevel(d, N)
        m = d ** N
        phi = sum(1 for j in range(1, m) if gcd(j, m) == 1)
        assert L.order == m * phi


def test_orbit_count_examples():
    L = KummerLevel(2, 3)
    assert subgroup_orbit_count([(0, 3)], L) == 5
    assert subgroup_orbit_count([], L) == 8
    assert subgroup_orbit_count(list(L.elements()), L) == 1


def test_non_invertible_generator_rejected():
    L = KummerLevel(2, 2)
    with pytest.raises(UsageError):
        kummer_act((1, 2), 1, L)


def test_restriction_tower_compatibility():
    L3 = KummerLevel(2, 3)
    L2 = KummerLevel(2, 2)
    for g in L3.elements():
        via_two = kummer_restrict(kummer_restrict(g, L3), L2)
        direct = (g[0] % 2, g[1] % 2)
        assert via_two == direct


# -- predicted degree steps ------------------------------------------------------


def test_predicted_step_unit_valuation():
    for d in (2, 3, 5):
        for n in range(5):
            assert predicted_degree_step(1, d, n) == d
            assert predicted_degree_step(-1, d, n) == d


def test_predicted_step_examples():
    assert [predicted_degree_step(2, 2, n) for n in range(4)] == [1, 2, 2, 2]
    assert [predicted_degree_step(6, 2, n) for n in range(4)] == [1, 2, 2, 2]
    assert [predicted_degree_step(12, 2, n) for n in range(4)] == [1, 1, 2, 2]


def test_predicted_step_rejects_units():
    with pytest.raises(DomainError):
        predicted_degree_step(0, 2, 1)


def test_predicted_step_telescoping():
    for v_q in range(-20, 21):
        if v_q == 0:
            continue
        for d in (2, 3, 4):
            product = 1
            stabilized = None
            for n in range(9):
                step = predicted_degree_step(v_q, d, n)
                assert step >= 1 and d % step == 0
                product *= step
                dm = d ** (n + 1)
                assert product == dm // gcd(dm, abs(v_q))
                if step == d and stabilized is None:
                    stabilized = n
            assert predicted_degree_step(v_q, d, 8) == d


# -- certified degrees -----------------------------------------------------------


def test_certify_power_map_chain():
    for p in (3, 5):
        f = mono(p, [0, 0])
        for n in range(1, 7):
            assert certify_degree(f, F(1, p), n) == 2 ** n


def test_certify_quadratic_chain_base_three():
    f = mono(3, [1, 0])
    for n, expected in [(1, 2), (2, 4), (3, 8)]:
        assert certify_degree(f, F(1, 3), n) == expected


def test_certify_uncertified_case():
    f = mono(5, [0, 0])
    assert certify_degree(f, F(25), 1) is None


def test_certify_needs_exact_backend():
    from padicdyn import CappedField
    f = MonicPoly(CappedField(5, 10), [0, 0])
    with pytest.raises(UsageError):
        certify_degree(f, F(1, 5), 1)


def test_degree_chain_consistency():
    f = mono(3, [1, 0])
    chain = degree_chain(f, F(1, 3), levels=3)
    assert chain.v_q == 1
    product = 1
    for rec in chain.levels:
        product *= rec["predicted_step"]
        if rec["certified_degree"] is not None:
            assert rec["certified_degree"] == product


def test_transported_valuation_good_reduction():
    f = mono(3, [1, 0])
    B = boettcher_series(f, 12)
    assert transported_valuation(B, F(1, 9)) == 2


def test_transported_valuation_bad_reduction_exact():
    f = mono(5, [F(-1, 5), 0])
    B = boettcher_series(f, 16)
    assert transported_valuation(B, F(1, 25)) == 2


# -- transport -------------------------------------------------------------------


def test_transport_power_map():
    p = 5
    f = mono(p, [0, 0])
    B = boettcher_series(f, 12)
    E = ExtensionField(ExactField(p), [-p, 0], "eisenstein")
    Q = E.generator().inverse()  # 1/pi with pi^2 = p
    report = transport_check(B, E, Q, F(1, p))
    assert report.passed
    for check in report.checks:
        assert check.passed
        assert check.residual >= check.bound


def test_transport_quadratic_preimage():
    f = mono(3, [1, 0])  # z^2 + 1 over Q_3
    B = boettcher_series(f, 20)
    E = ExtensionField(ExactField(3), [F(3, 2), 0], "eisenstein")
    Q = E.generator().inverse()  # Q^2 = -2/3, so f(Q) = 1/3
    report = transport_check(B, E, Q, F(1, 3))
    assert report.passed


def test_transport_detects_corruption():
    p = 5
    f = mono(p, [0, 0])
    B = boettcher_series(f, 12)
    bad_omega = B.omega.replace_coefficient(3, F(1, 1))
    corrupted = dataclasses.replace(B, omega=bad_omega)
    E = ExtensionField(ExactField(p), [-p, 0], "eisenstein")
    Q = E.generator().inverse()
    report = transport_check(corrupted, E, Q, F(1, p))
    assert not report.passed
    power = report.checks[0]
    assert not power.passed
    assert power.residual < power.bound
    # predictable residual: with omega ~ w + w^3 the power side picks up
    # 2 pi^4 (valuation 2) while the base side error sits at valuation 3
    assert power.residual == 2


def test_transport_rejects_wrong_preimage():
    p = 5
    f = mono(p, [0, 0])
    B = boettcher_series(f, 12)
    E = ExtensionField(ExactField(p), [-p, 0], "eisenstein")
    with pytest.raises(UsageError):
        transport_check(B, E, E.generator(), F(1, p))


def test_certify_degree_budget():
    from padicdyn import BudgetError
    f = mono(5, [0, 0])
    with pytest.raises(BudgetError):
        certify_degree(f, F(1, 5), 7)  # 2^7 = 128 > default budget 64


def test_tree_degree_budget_env(monkeypatch):
    from padicdyn import BudgetError
    monkeypatch.setenv("PADICDYN_MAX_DEGREE", "256")
    f = mono(5, [0, 0])
    assert certify_degree(f, F(1, 5), 7) == 128


def test_orbit_count_budget():
    from padicdyn import BudgetError
    with pytest.raises(BudgetError):
        subgroup_orbit_count([(1, 1)], KummerLevel(2, 13))
