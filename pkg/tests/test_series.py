from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dysonrank.cyclotomic import CycNum, zeta
from dysonrank.series import PrecisionError, QExp, SeriesError, dissect, invert, substitute, u_operator
from dysonrank import qfunctions as qf

from oracles import p as p_oracle, phi_like


@st.composite
def qexp(draw, denom=None, prec=12, order=5):
    d = denom or draw(st.sampled_from([1, 2, 5]))
    lo = draw(st.integers(-3, 2))
    cs = draw(st.lists(st.integers(-4, 4), min_size=1, max_size=prec))
    k = draw(st.integers(0, order - 1))
    terms = {lo + i: CycNum.zeta(order, k) * c for i, c in enumerate(cs)}
    return QExp(terms, d, lo + prec, order)


def test_euler_times_inverse_is_one():
    e = qf.euler_product(100)
    assert (e * invert(e)).truncate(100) == QExp.one(100)


def test_inverse_of_euler_gives_partitions():
    got = [int(c.coeffs[0]) if not c.is_zero() else 0 for c in (invert(qf.euler_product(21)).coefficient(n) for n in range(21))]
    assert got == [p_oracle(n) for n in range(21)]


def test_phi52_at_q5_is_psi_q5():
    want = phi_like(2, 5, 40)
    got = substitute(qf.phi_series(5, 2, 40), 5)
    for n in range(40):
        c = got.coefficient(5 * n)
        assert c == want[n]


def test_u_operator_partition_congruence():
    f = qf.partition_series(5 * 21)
    g = u_operator(f, 5, 4)
    assert g.leading_exponent() == Fraction(4, 5)
    for e, c in g.items():
        assert int(c.coeffs[0]) % 5 == 0


def test_dissect_partition_congruence():
    f = qf.partition_series(55)
    g = dissect(f, 5, 4)
    assert len(g) == 11
    for e, c in g.items():
        assert e % 5 == 4
        assert int(c.coeffs[0]) % 5 == 0


def test_precision_is_tracked():
    f = QExp({0: 1, 1: 2}, 1, 5)
    g = QExp({0: 1}, 1, 3)
    assert (f * g).prec_exponent() == 3
    assert (f + g).prec_exponent() == 3


def test_coefficient_beyond_precision_raises():
    f = QExp({0: 1}, 1, 3)
    with pytest.raises(PrecisionError):
        f.coefficient(5)


def test_u_operator_rejects_bad_residue():
    with pytest.raises(SeriesError):
        u_operator(qf.partition_series(10), 5, 7)


@given(qexp(), qexp(), qexp())
def test_mul_commutative_associative(f, g, h):
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)


@given(qexp(denom=1), qexp(denom=1), st.integers(-3, 3), st.integers(0, 4))
def test_u_operator_linear(f, g, a, m):
    b = zeta(5, 2)
    lhs = u_operator(f.scale(a) + g.scale(b), 5, m)
    rhs = u_operator(f, 5, m).scale(a) + u_operator(g, 5, m).scale(b)
    assert lhs == rhs


@given(qexp(denom=1), st.sampled_from([2, 3, 5, 7]), st.data())
def test_dissect_then_substitute_is_u_operator(f, p, data):
    m = data.draw(st.integers(0, p - 1))
    assert u_operator(f, p, m) == substitute(dissect(f, p, m), Fraction(1, p))


@given(st.integers(10, 40), st.integers(1, 30))
def test_precision_soundness(n, extra):
    lo = qf.rank_series(7, 2, n) * qf.eta(1, n)
    hi = qf.rank_series(7, 2, n + extra) * qf.eta(1, n + extra)
    assert lo.first_difference(hi) is None


@given(qexp())
def test_json_round_trip(f):
    assert QExp.from_json(f.to_json()) == f
