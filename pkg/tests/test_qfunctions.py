from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dysonrank import qfunctions as qf
from dysonrank.cyclotomic import CycNum, UnitAngle, sin_pi, zeta
from dysonrank.series import QExp, substitute

from oracles import euler, p as p_oracle, phi_like, rank_residue_counts


def _ints(f: QExp, n: int) -> list[int]:
    out = []
    for j in range(n):
        c = f.coefficient(j)
        assert c.is_rational()
        out.append(int(c.coeffs[0]) if not c.is_zero() else 0)
    return out


def test_rank_oracle_small_cases():
    tab = qf.rank_oracle(6, "enumerate")
    assert (tab.N(0, 4), tab.N(1, 4), tab.N(3, 4)) == (1, 1, 1)
    assert [tab.residue_count(k, 5, 4) for k in range(5)] == [1] * 5
    assert [tab.residue_count(k, 7, 5) for k in range(7)] == [1] * 7


def test_rank_oracle_methods_agree():
    a, b = qf.rank_oracle(30, "box"), qf.rank_oracle(30, "enumerate")
    assert a.counts == b.counts
    assert qf.rank_oracle(40).p(40) == p_oracle(40)


def test_rank_series_q2_coefficient():
    z = zeta(5)
    assert qf.rank_series(5, 1, 5).coefficient(2) == z + z**4


@pytest.mark.parametrize("c", [5, 7, 11, 13])
def test_rank_series_matches_oracle(c):
    table = qf.rank_table_from_series(c, 61)
    box = qf.rank_oracle(60)
    for n in range(61):
        assert table[n] == [box.residue_count(k, c, n) for k in range(c)]
    for n in (0, 7, 15):
        assert table[n] == rank_residue_counts(n, c)


@pytest.mark.parametrize("c", [5, 7, 11, 13])
def test_two_rank_generating_functions_agree(c):
    assert qf.rank_series(c, 1, 50) == qf.rank_series_eulerian(c, 1, 50)


@pytest.mark.parametrize("c,a", [(5, 1), (7, 3), (11, 2), (13, 5)])
def test_rank_series_conjugate_symmetric(c, a):
    R = qf.rank_series(c, a, 40)
    assert R.galois(c - 1) == R


@pytest.mark.parametrize("a,c", [(1, 5), (2, 5), (3, 7)])
def test_mac_identity(a, c):
    lhs = qf.macid_lhs(a, c, 60)
    rhs = QExp.one(60) + substitute(qf.mac_series(a, c, 12), c).shift(a).truncate(60)
    assert lhs.truncate(60) == rhs.truncate(60)


def test_lambert_identities():
    l, r = qf.lamid1_sides(7, 1, 50)
    assert l.truncate(50) == r.truncate(50)
    l, r = qf.lamid2_sides(7, 2, 50)
    assert l.truncate(50) == r.truncate(50)


def test_nell_is_scaled_rank_series():
    lhs = qf.nell(1, 5, 30).scale(sin_pi(Fraction(1, 5)))
    rhs = qf.rank_series(5, 1, 31).shift(Fraction(-1, 24)).truncate(30)
    assert lhs == rhs
    assert qf.nell(2, 7, 10).leading_exponent() == Fraction(-1, 24)


def test_nabc_two_forms_agree():
    a = qf.nabc_cal(1, 1, 5, 10, form="factored")
    b = qf.nabc_cal(1, 1, 5, 10, form="cosine")
    assert a.denom == b.denom and a == b


def test_phi_matches_naive_expansion():
    for a in (1, 2):
        assert _ints(qf.phi_series(5, a, 40), 40) == phi_like(a, 5, 40)


def test_phi_11_2_leading_exponent():
    f = qf.phi_series(11, 2, 10)
    assert f.leading_exponent() == 2
    assert f.coefficient(2) == 1


def test_eta_pentagonal():
    f = qf.eta(1, 30).shift(Fraction(-1, 24))
    assert _ints(f, 30) == euler(30)
    assert qf.eta(1, 3).leading_exponent() == Fraction(1, 24)


def test_generalized_eta():
    # (t/2) P(r/t) with P(x) = x^2 - x + 1/6
    assert qf.eta_gen_exponent(5, 1) == Fraction(5, 2) * (Fraction(1, 25) - Fraction(1, 5) + Fraction(1, 6))
    prod = qf.eta_gen(5, 1, 30) * qf.eta_gen(5, 2, 30) * qf.eta(5, 30)
    assert prod.agrees_with(qf.eta(1, 30)) and prod.prec_exponent() > 29


def test_f_biagioli_product():
    N, rho = 11, 4
    lhs = qf.f_biagioli(N, rho, 60)
    rhs = qf.eta(N, 61) * qf.eta_gen(N, rho, 61)
    assert lhs.truncate(60) == rhs.truncate(60)


@given(st.integers(5, 13), st.data())
def test_theta_tilde_reindexing(N, data):
    k = data.draw(st.integers(1, N - 1))
    assert qf.theta_tilde(k, N, 40) == -qf.theta_tilde(N - k, N, 40)
    assert qf.theta_tilde(k, N, 40) == qf.theta_tilde(k + N, N, 40)


def test_theta1_closed_form():
    assert qf.theta1(1, 2, 5, 40) == qf.theta1_closed(1, 2, 5, 40)


def test_theta_via_theta2():
    assert qf.theta_ac(1, 7, 20) == qf.theta_ac_via_theta2(1, 7, 20)


def test_eps2_values():
    assert qf.eps2_ac(2, 7).is_zero()
    e = qf.eps2_ac(1, 7)
    assert e.leading_exponent() == Fraction(-1, 1176) and e.leading_coefficient() == 2
    e = qf.eps2_abc(0, 1, 5)
    assert e.leading_exponent() == Fraction(-1, 24)
    assert e.leading_coefficient() == 2 * zeta(5) ** -2


def test_mock_theta_f():
    assert qf.mock_f_check(60)["verified"]
    # f(q) = sum_n (N(even rank, n) - N(odd rank, n)) q^n
    f = qf.mock_f_series(20)
    for n in range(1, 20):
        counts = rank_residue_counts(n, 2)
        assert f.coefficient(n) == counts[0] - counts[1]


def test_named_series_registry():
    assert qf.named_series("Phi 5 2", 20) == qf.phi_series(5, 2, 20)
    assert qf.named_series("Rank 7 3", 10) == qf.rank_series(7, 3, 10)
    with pytest.raises(KeyError):
        qf.named_series("Bogus 1", 10)
    with pytest.raises(ValueError):
        qf.named_series("Phi 5", 10)


def test_eta_quotient_leading_exponent():
    spec = qf.EtaQuotientSpec(eta=((25, 1), (1, -1)))
    f = qf.eta_quotient(spec, 10)
    assert f.leading_exponent() == spec.leading_exponent() == 1
