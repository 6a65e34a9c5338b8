from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dysonrank import modular as md
from dysonrank import qfunctions as qf
from dysonrank.cyclotomic import UnitAngle
from dysonrank.modular import FamilyMember, Mat2, S, T, T_INV

PRIMES = [5, 7, 11, 13]


@st.composite
def sl2(draw, bound=30):
    c, d = draw(st.tuples(st.integers(-bound, bound), st.integers(-bound, bound)).filter(lambda t: math.gcd(*t) == 1))
    n = draw(st.integers(-3, 3))
    if c == 0:
        return Mat2(d, n, 0, d)
    # a d - b c = 1
    a = pow(d, -1, abs(c)) if abs(c) > 1 else 0
    b = (a * d - 1) // c
    return Mat2(a, b, c, d) @ (T ** n)


# generators and multipliers


def test_rademacher_generator_p5_k1():
    V = md.rademacher_generator(1, 5)
    assert V == Mat2(-4, -1, 5, 1) and V.det == 1 and V.in_gamma0(5)


@pytest.mark.parametrize("p", PRIMES)
def test_rademacher_generators_are_conjugated_translations(p):
    for k in range(1, p):
        ks = md.kstar(k, p)
        W = S @ T**k @ S @ T ** (-ks) @ S.inverse()
        V = md.rademacher_generator(k, p)
        assert W in (V, -V)


def test_kstar():
    assert md.kstar(3, 7) == 2
    assert md.kstar(1, 5) == 4


def test_mu_on_v1():
    mu, ell = md.mu_multiplier(md.rademacher_generator(1, 5), 1, 5)
    assert mu == UnitAngle(Fraction(8, 5)) and ell == 1


@pytest.mark.parametrize("p", PRIMES)
def test_mu_generator_formula_matches_general_formula(p):
    for k in range(1, p):
        V = md.rademacher_generator(k, p)
        for ell in range(1, p):
            assert md.mu_tilde_generator(k, ell, p) == md.mu_multiplier(V, ell, p)[0]


def test_mu_preconditions():
    with pytest.raises(ValueError):
        md.mu_multiplier(S, 1, 5)
    with pytest.raises(ValueError):
        md.mu_multiplier(T, 5, 5)


@given(st.sampled_from(PRIMES), st.randoms(use_true_random=False), st.data())
def test_mu_cocycle(p, rng, data):
    A, B = md.random_gamma0(p, rng), md.random_gamma0(p, rng)
    ell = data.draw(st.integers(1, p - 1))
    assert md.mu_cocycle_holds(A, B, ell, p)


@given(st.sampled_from(PRIMES), st.data())
def test_mu_inverse_generator(p, data):
    k = data.draw(st.integers(1, p - 1))
    ell = data.draw(st.integers(1, p - 1))
    V = md.rademacher_generator(k, p)
    mu, ell2 = md.mu_multiplier(V, ell, p)
    mu_inv, back = md.mu_multiplier(V.inverse(), ell2, p)
    assert back == ell and (mu * mu_inv).is_one()


@given(st.sampled_from(PRIMES), st.randoms(use_true_random=False), st.data())
def test_mu_trivial_on_level_p2_gamma1(p, rng, data):
    A = md.random_gamma0_p2_gamma1(p, rng)
    assert A.in_gamma0(p * p) and A.in_gamma1(p)
    assert md.mu_multiplier(A, data.draw(st.integers(1, p - 1)), p)[0].is_one()


@given(st.integers(-10**6, 10**6), st.sampled_from([3, 5, 7, 11, 13, 101]))
def test_floor_parity(x, p):
    assert md.floor_parity_holds(x, p)


def test_eta_multiplier_generators():
    assert md.eta_multiplier(S) == UnitAngle(Fraction(-1, 4))
    assert md.eta_multiplier(T) == UnitAngle(Fraction(1, 12))


@given(sl2())
def test_eta_multiplier_is_24th_root(A):
    assert md.eta_multiplier(A).order in {1, 2, 3, 4, 6, 8, 12, 24}


# word decomposition and the family action


@given(sl2())
def test_decompositions_reproduce_matrix(A):
    for method in ("floor", "nearest"):
        sign, word = md.decompose(A, method)
        assert md.word_matrix(sign, word) == A


def test_tinv_relation():
    # T^-1 = -S T S T S in SL2(Z); the family action must respect it
    assert -(S @ T @ S @ T @ S) == T_INV
    for p in (5, 7):
        for m in md.family_members(p):
            f1, x = md.family_apply(m, "Tinv")
            y, total = m, md.MINUS
            for g in "STSTS":
                f, y = md.family_apply(y, g)
                total = total * f
            assert md.same_function((f1, x), (total, y))


@pytest.mark.parametrize("seed", range(4))
def test_decomposition_independence(seed):
    rng = random.Random(seed)
    members = md.family_members(5) + md.family_members(7)
    for _ in range(10):
        A = md.random_gamma0(rng.choice([5, 7]), rng, 4) @ Mat2(0, -1, 1, rng.randint(-3, 3))
        m = rng.choice([x for x in members if x.c in (5, 7)])
        x = md.apply_matrix(m, A, "floor")
        y = md.apply_matrix(m, A, "nearest")
        assert md.same_function(x, y)


def test_g1_t_rule():
    f, m = md.family_apply(FamilyMember.ac(1, 1, 5), "T", level="G")
    assert f == UnitAngle(Fraction(-1, 12)) and m == FamilyMember.ac(1, 1, 5)


def test_gg1_t_rule_a_ge_b():
    a, b, c = 3, 2, 7
    f, m = md.family_apply(FamilyMember.abc(1, a, b, c), "T", level="G")
    assert m == FamilyMember.abc(1, a - b, b, c)
    assert f == UnitAngle(Fraction(3 * b * b, c * c)) * UnitAngle(Fraction(-1, 12))


@pytest.mark.parametrize("p", [5, 7, 11])
def test_st_cubed_walk(p):
    for ell in range(1, p):
        factor, m = md.st_cubed_walk(ell, p)
        want = md.I_ANGLE * UnitAngle(Fraction(-5 * ell, p))  # i zeta_{2p}^{-5l}
        assert m == FamilyMember.ac(1, (p - ell) % p, p) or m == FamilyMember.ac(1, ell, p)
        assert md.same_function((factor, m), (want, FamilyMember.ac(1, ell, p)))


def test_canonical_identifications_are_exact():
    for c in (5, 7):
        for b in range(1, c):
            for m in (FamilyMember.abc(2, 0, b, c), FamilyMember.abc(1, 0, b, c), FamilyMember.abc(1, b, b, c)):
                f, x = md.canonical(m)
                assert md.same_function((UnitAngle(0), m), (f, x))


@pytest.mark.parametrize("p", [5, 7])
def test_hord_independent_of_matrix(p):
    rng = random.Random(p)
    for m in rng.sample(md.family_members(p), 6):
        for a, c in [(0, 1), (1, 2), (2, p)]:
            if c == 1:
                A = S
            else:
                _, x, y = _egcd(a, c)
                A = Mat2(a, -y, c, x)
            assert A.det == 1 and A.cusp_image() == md.Cusp.make(a, c)
            h = md.hord_at_cusp(m, A)
            for n in (-2, 1, 3):
                assert md.hord_at_cusp(m, A @ T**n) == h
            assert md.hord_at_cusp(m, -A) == h


def _egcd(a, b):
    if b == 0:
        return a, 1, 0
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


# cusps and orders


def test_cusp_lists():
    assert [str(c) for c in md.cusps_gamma1(5)] == ["i∞", "0", "1/2", "2/5"]
    assert [str(c) for c in md.cusps_gamma1(7)] == ["i∞", "0", "1/2", "1/3", "2/7", "3/7"]
    c11 = [str(c) for c in md.cusps_gamma1(11)]
    assert c11 == ["i∞", "0", "1/2", "1/3", "1/4", "1/5", "2/11", "3/11", "4/11", "5/11"]
    for p in (5, 7, 11, 13):
        assert len(md.cusps_gamma1(p)) == p - 1


def test_widths():
    assert [md.fan_width(5, c) for c in md.cusps_gamma1(5)] == [1, 5, 5, 1]
    assert md.fan_width(7, md.Cusp.make(1, 3)) == 7
    # widths sum to the index
    for p in (5, 7, 11, 13):
        assert sum(md.fan_width(p, c) for c in md.cusps_gamma1(p)) == md.index_gamma1(p)


def test_eta_quotient_orders():
    spec = qf.EtaQuotientSpec(eta=((25, 1), (1, -1)))
    assert md.ord_eta_quotient(spec, md.Cusp.make(0, 1)) == Fraction(-1, 25)
    assert md.ord_eta_quotient(spec, md.Cusp.make(1, 0)) == 1


def test_generalized_order_at_infinity_matches_expansion():
    for N, rho in [(11, 4), (13, 2), (5, 1)]:
        want = qf.f_biagioli(N, rho, 3).leading_exponent()
        assert md.ord_gen_f(N, rho, md.Cusp.make(1, 0)) == want
    assert md.ord_gen_f(11, 4, md.Cusp.make(1, 0)) == Fraction(9, 88)


def test_j11_table():
    t = md.j11_order_table()
    assert t["i∞"] == [3, 1, 2, 2, 2]
    for k in ("0", "1/2", "1/3", "1/4", "1/5"):
        assert t[k] == [Fraction(-1, 11)] * 5
    assert t["2/11"] == [1, 2, 2, 2, 3]
    assert t["3/11"] == [2, 2, 1, 3, 2]
    assert t["4/11"] == [2, 2, 3, 2, 1]
    assert t["5/11"] == [2, 3, 2, 1, 2]


def test_j11_order_at_infinity_matches_expansion():
    from dysonrank.identities import j11_spec

    for k in range(1, 6):
        f = qf.eta_quotient(j11_spec(k), 5)
        assert f.leading_exponent() == md.ord_spec(j11_spec(k), md.Cusp.make(1, 0))


# holomorphic orders


def test_hord_f1_ac_zero():
    for p in (5, 7):
        for a in range(1, p):
            assert md.hord_from_expansion(FamilyMember.ac(1, a, p)) == 0


def test_hord_f2_ac_values():
    assert md.hord_from_expansion(FamilyMember.ac(2, 1, 7)) == Fraction(2, 49)
    assert md.hord_from_expansion(FamilyMember.ac(2, 6, 7)) == Fraction(2, 49)


@pytest.mark.parametrize("p", [5, 7])
def test_hord_consistent_table(p):
    for m in md.family_members(p):
        assert md.hord_from_expansion(m) == md.hord_closed_form(m, "consistent")


# valence audits


def test_dyson_audits():
    r5 = md.dyson_audit(5)
    assert r5.mu_k_over_12 == 1 and r5.total == 2 and r5.forces_vanishing
    assert [row.ord_improved for row in r5.rows] == [1, 0, 0, 1]
    assert [row.width for row in r5.rows] == [1, 5, 5, 1]
    r7 = md.dyson_audit(7)
    assert r7.mu_k_over_12 == 2 and r7.total == 3 and r7.forces_vanishing
    assert [row.ord_improved for row in r7.rows] == [1, 0, 0, 0, 1, 1]


def test_rank_identity_audits():
    r11 = md.rank11_audit()
    assert r11.mu_k_over_12 == 5 and r11.required_at_infinity == 7
    r13 = md.rank13_audit()
    assert r13.mu_k_over_12 == 7 and r13.required_at_infinity == 15


def test_audit_needs_full_cover():
    with pytest.raises(ValueError):
        md.valence_audit([(md.Cusp.make(1, 0), 1)], 5)
