"""Field arithmetic, valuations, Hensel lifting, and conjugates."""

import random
from fractions import Fraction as F

import pytest

from padicdyn import (CappedField, DomainError, ExactField, ExtensionField,
                      PrecisionError, UsageError, Valuation, conjugates,
                      field_arith, hensel_lift, valuation_of)
from padicdyn.localfield import poly_eval


def test_capped_base_addition():
    K = CappedField(5, 4)
    s = K.from_rational(2) + K.from_rational(3)
    assert s == 5
    assert s.valuation() == 1


def test_eisenstein_generator_square():
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")
    pi = E.generator()
    sq = field_arith(pi, pi, "mul")
    assert sq == E.embed(3)
    assert sq.valuation() == 1


def test_exact_inverse_pair():
    K = ExactField(3)
    prod = K.from_rational(F(1, 3)) * K.from_rational(3)
    assert prod == 1
    assert prod.valuation() == 0


def test_valuation_examples():
    assert ExactField(7).from_rational(7).valuation() == 1
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")
    assert E.generator().valuation() == F(1, 2)
    assert ExactField(3).from_rational(F(5, 9)).valuation() == -2


def test_valuation_lower_bound_marker():
    K = CappedField(5, 4)
    x = K.from_rational(2)
    diff = x - x
    assert diff.is_zero()
    v = diff.valuation()
    assert not v.exact
    assert v >= 4
    with pytest.raises(PrecisionError):
        K.from_rational(1) / diff


def test_mixed_fields_rejected():
    with pytest.raises(UsageError):
        ExactField(5).from_rational(1) + ExactField(7).from_rational(1)
    with pytest.raises(UsageError):
        CappedField(5, 4).from_rational(1) * CappedField(5, 8).from_rational(1)


def test_precision_propagation_rules():
    K = CappedField(5, 6)
    a = K.from_rational(5)       # v=1, 6 digits
    b = K.from_rational(26)      # v=0
    # add: min of absolute precisions
    s = a + b
    assert s.v + s.rel == min(1 + 6, 0 + 6)
    # mul: valuations add, relative precision takes the min
    m = a * b
    assert m.v == 1
    assert m.rel == 6
    # cancellation drops to the known floor rather than guessing
    c = K.from_rational(1) + K.from_rational(24)  # 25: valuation 2
    assert c.valuation() == 2
    assert c.v + c.rel == 6


# -- Hensel lifting ----------------------------------------------------------


def lift_sqrt6(K):
    g = [K.from_rational(-6), K.from_rational(0), K.from_rational(1)]
    return hensel_lift(g, K.from_rational(1), 12)


def test_hensel_sqrt6_exact_backend():
    K = ExactField(5)
    x = lift_sqrt6(K)
    # oracle: square it and check the congruence directly
    assert (x * x - 6).valuation() >= 12
    assert (x - 1).valuation() >= 1


def test_hensel_sqrt6_capped_backend():
    K = CappedField(5, 14)
    x = lift_sqrt6(K)
    assert (x * x - 6).valuation() >= 12


def test_hensel_exact_root_is_fixed():
    K = ExactField(5)
    g = [K.from_rational(-1), K.from_rational(0), K.from_rational(1)]
    x = hensel_lift(g, K.from_rational(1), 30)
    assert x == 1


def test_hensel_no_simple_unit_root():
    K = ExactField(5)
    g = [K.from_rational(-5), K.from_rational(0), K.from_rational(1)]
    with pytest.raises(DomainError):
        hensel_lift(g, K.from_rational(1), 10)
    with pytest.raises(DomainError):
        hensel_lift(g, K.from_rational(2), 10)


def test_hensel_output_meets_target_precision():
    K = ExactField(7)
    g = [K.from_rational(-2), K.from_rational(0), K.from_rational(1)]
    x = hensel_lift(g, K.from_rational(3), 25)  # 3^2 = 9 = 2 mod 7
    assert poly_eval(g, x).valuation() >= 25


# -- conjugates --------------------------------------------------------------


def test_conjugates_quadratic_eisenstein():
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")
    pi = E.generator()
    conj = conjugates(E, pi)
    assert len(conj) == 2
    assert any(c == pi for c in conj)
    assert any(c == -pi for c in conj)


def test_conjugates_fix_base_elements():
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")
    a = E.embed(F(7, 2))
    assert all(c == a for c in conjugates(E, a))


def test_split_unramified_polynomial_rejected():
    # x^2 - 6 splits over Q_5: both residues +-1 lift by Hensel
    K = CappedField(5, 12)
    for r in (1, 4):
        g = [K.from_rational(-6), K.from_rational(0), K.from_rational(1)]
        root = hensel_lift(g, K.from_rational(r), 10)
        assert (root * root - 6).is_zero() or (root * root - 6).valuation() >= 10
    with pytest.raises(UsageError):
        ExtensionField(ExactField(5), [-6, 0], "unramified")


def test_unramified_quadratic_conjugates():
    # x^2 - 2 is irreducible mod 5; conjugation swaps the square roots
    E = ExtensionField(ExactField(5), [-2, 0], "unramified")
    u = E.generator()
    conj = conjugates(E, u)
    assert len(conj) == 2
    assert any(c == u for c in conj)
    assert any(c == -u for c in conj)
    assert u.valuation() == 0
    assert (u * u).valuation() == 0


def test_conjugates_totally_ramified_cubic():
    # Q_7 contains the cube roots of unity, so x^3 - 7 is normal over Q_7
    E = ExtensionField(ExactField(7), [-7, 0, 0], "eisenstein")
    pi = E.generator()
    conj = conjugates(E, pi, precision=30)
    assert len(conj) == 3
    for c in conj:
        assert c.valuation() == F(1, 3)
        assert (c ** 3 - 7).valuation() >= 29


def test_conjugates_multiset_closure_quadratic():
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")
    x = E.from_vector([F(1, 2), 5])
    once = conjugates(E, x)
    twice = [conjugates(E, c) for c in once]
    flat = [c for group in twice for c in group]
    # applying conjugation twice returns each element with multiplicity 2
    for c in once:
        assert sum(1 for d in flat if d == c) == 2


def test_unramified_stage_over_eisenstein_tower():
    base = ExactField(3)
    E1 = ExtensionField(base, [-3, 0], "eisenstein")
    E2 = ExtensionField(E1, [-2, 0], "unramified")
    assert E2.e == 2 and E2.f_res == 2 and E2.tower_degree == 4
    x = E2.generator() * E2.embed(E1.generator())
    assert x.valuation() == F(1, 2)
    with pytest.raises(UsageError):
        ExtensionField(E2, [-7, 0], "unramified")  # nested unramified


# -- properties (seeded randomized cross-checks) ------------------------------


def random_rational(rng, p):
    num = rng.randrange(-400, 401)
    den = rng.choice([1, 1, 2, 3, p, p * p, p ** 3])
    if num == 0:
        num = 1
    return F(num, den)


def test_ultrametric_inequality_random():
    rng = random.Random(1001)
    K = ExactField(5)
    for _ in range(300):
        a = K.from_rational(random_rational(rng, 5))
        b = K.from_rational(random_rational(rng, 5))
        va, vb = a.valuation(), b.valuation()
        vs = (a + b).valuation()
        assert vs >= min(va, vb)
        if va != vb:
            assert vs == min(va, vb)


def test_multiplicativity_random():
    rng = random.Random(1002)
    K = ExactField(7)
    for _ in range(300):
        a = K.from_rational(random_rational(rng, 7))
        b = K.from_rational(random_rational(rng, 7))
        assert (a * b).valuation() == a.valuation() + b.valuation()


def test_backends_agree_modulo_precision():
    rng = random.Random(1003)
    prec = 9
    for p in (3, 5, 7):
        exact = ExactField(p)
        capped = CappedField(p, prec)
        for _ in range(120):
            qa = random_rational(rng, p)
            qb = random_rational(rng, p)
            for op in ("add", "sub", "mul", "div"):
                ea = field_arith(exact.from_rational(qa),
                                 exact.from_rational(qb), op)
                ca = field_arith(capped.from_rational(qa),
                                 capped.from_rational(qb), op)
                diff = ca - capped.from_rational(ea.value)
                assert diff.is_zero(), (p, qa, qb, op)


def test_extension_valuation_matches_norm():
    # v(a) should equal v(N(a)) / degree; the norm is the resultant
    # of the defining polynomial with the coordinate polynomial.
    rng = random.Random(1004)
    E = ExtensionField(ExactField(3), [-3, 0], "eisenstein")

    def norm(vec):  # N(a + b pi) for pi^2 = 3: a^2 - 3 b^2
        a, b = vec
        return a * a - 3 * b * b

    for _ in range(200):
        a = random_rational(rng, 3)
        b = random_rational(rng, 3)
        x = E.from_vector([a, b])
        nrm = norm((a, b))
        if nrm == 0:
            continue
        vn = F(ExactField(3).from_rational(nrm).valuation().as_fraction(), 2)
        assert x.valuation() == vn


def test_extension_division_round_trip():
    rng = random.Random(1005)
    E = ExtensionField(ExactField(5), [-5, 0], "eisenstein")
    one = E.one()
    for _ in range(80):
        vec = [random_rational(rng, 5), random_rational(rng, 5)]
        x = E.from_vector(vec)
        assert (x / x) == one
        y = E.from_vector([random_rational(rng, 5), random_rational(rng, 5)])
        assert ((x * y) / y) == x


def test_valuation_ordering_and_infinity():
    assert Valuation.infinite() > 100
    assert Valuation(F(1, 2)) < 1
    assert Valuation(3) + Valuation(F(1, 2)) == F(7, 2)
    assert valuation_of(ExactField(5).from_rational(0)).is_infinite


def test_conjugates_non_normal_cubic_rejected():
    # Q_3 lacks the cube roots of unity, so x^3 - 3 is not normal
    E = ExtensionField(ExactField(3), [-3, 0, 0], "eisenstein")
    with pytest.raises(DomainError):
        conjugates(E, E.generator())


def test_conjugates_unramified_cubic():
    # x^3 + x + 1 is irreducible mod 5; an unramified stage is Galois,
    # so all three roots live in the extension
    E = ExtensionField(ExactField(5), [1, 1, 0], "unramified")
    roots = conjugates(E, E.generator(), precision=25)
    assert len(roots) == 3
    for r in roots:
        assert (r ** 3 + r + 1).valuation() >= 25


def test_conjugates_interface_limits():
    base = ExactField(3)
    E1 = ExtensionField(base, [-3, 0], "eisenstein")
    E2 = ExtensionField(E1, [-2, 0], "unramified")
    with pytest.raises(UsageError):
        conjugates(E2, E2.generator())  # multi-stage tower
    with pytest.raises(UsageError):
        big = ExtensionField(ExactField(7), [-7, 0, 0, 0, 0], "eisenstein")
        conjugates(big, big.generator())  # degree > 4


def test_concurrent_extension_arithmetic():
    from concurrent.futures import ThreadPoolExecutor
    E = ExtensionField(ExactField(5), [-5, 0], "eisenstein")
    pi = E.generator()

    def work(k):
        return ((pi + k) * (pi - k)).valuation()

    with ThreadPoolExecutor(max_workers=8) as pool:
        got = list(pool.map(work, range(1, 40)))
    assert got == [((pi + k) * (pi - k)).valuation() for k in range(1, 40)]
