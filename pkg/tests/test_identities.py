from __future__ import annotations

from fractions import Fraction

import pytest

from dysonrank import identities as ids
from dysonrank import qfunctions as qf
from dysonrank.cyclotomic import zeta
from dysonrank.series import QExp, substitute

from oracles import rank_residue_counts


def test_chi12():
    assert [ids.chi12(n) for n in (5, 7, 11, 13, 1, 2)] == [-1, -1, 1, 1, 1, 0]


def test_r5_matches_direct_formula():
    z = zeta(5)
    bound = 100
    R = qf.rank_series(5, 1, bound + 1)
    phi = substitute(qf.phi_series(5, 1, bound // 5 + 2), 5)
    psi = substitute(qf.phi_series(5, 2, bound // 5 + 2), 5).shift(-2)
    direct = (R - phi.scale(z + z**4 - 2) + psi.scale(1 + 2 * z + 2 * z**4)).shift(Fraction(-1, 24))
    got = ids.build_Rp(5, bound)
    assert got.agrees_with(direct)
    assert got.prec_exponent() >= bound


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_kpm_closed_forms(p):
    assert ids.verify_kpm_closed(p, 40).ok


@pytest.mark.parametrize("p", [5, 7, 11])
def test_dissection_completeness(p):
    bound = 30
    whole = ids.eta_p2_Rp(p, bound)
    pieces = QExp.zero(bound, 1, p)
    for m in range(p):
        pieces = pieces + substitute(ids.build_Kpm(p, m, bound // p + 1), p)
    assert whole.agrees_with(pieces)


def test_kp0_rank_form():
    # K_{p,0} = (q^p;q^p) sum_n (sum_k N(k,p,pn - s_p) zeta^k) q^n
    p = 11
    s = ids.sp(p)
    K = ids.build_Kpm(p, 0, 6)
    z = zeta(p)
    terms = {}
    for n in range(1, 6):
        counts = rank_residue_counts(p * n - s, p)
        terms[n] = sum((z**k * counts[k] for k in range(p)), zeta(p) * 0)
    rank_part = QExp(terms, 1, 6, p)
    want = (rank_part * substitute(qf.euler_product(1), p)).truncate(6)
    assert K.truncate(6) == want


def test_quadratic_branches():
    s, a = ids.quadratic_branch(5, 1)
    assert s == 1
    assert (36 * a * a + 24) % 5 == 0
    # -24 m a non-residue mod 7 for some m: pure rank-difference branch
    nonres = [m for m in range(1, 7) if ids.quadratic_branch(7, m)[0] == -1]
    assert nonres and all(ids.quadratic_branch(7, m)[1] is None for m in nonres)


def test_kpm_leading_exponents():
    for p in (11, 13):
        for m in range(1, p):
            K = ids.build_Kpm(p, m, 5)
            lead = K.leading_exponent()
            assert lead is not None
            # eta(p^2 z) is folded in, so exponents sit on m/p + Z
            assert (lead - Fraction(m, p)).denominator == 1


@pytest.mark.parametrize("p", [5, 7])
def test_dyson_by_oracle(p):
    r = {5: 4, 7: 5}[p]
    tab = qf.rank_oracle(120)
    for n in range(r, 121, p):
        counts = rank_residue_counts(n, p) if n <= 40 else None
        row = [tab.residue_count(k, p, n) for k in range(p)]
        assert len(set(row)) == 1
        if counts is not None:
            assert counts == row


def test_kp0_nonzero_beyond_seven():
    for p in (11, 13):
        e, c = ids.first_nonzero_Kp0(p)
        assert not c.is_zero()


def test_order_formulas():
    assert ids.kp_order_at_zero(5)[0] == ">="
    for p in (11, 13, 17):
        rel, v = ids.kp_order_at_zero(p)
        assert rel == "=" and v == Fraction(-(p - 5) * (p - 7), 24 * p) and v < 0


@pytest.mark.parametrize("g", [2, 3])
def test_rank11_galois_conjugate(g):
    assert ids.verify_rank11(40, galois=g).ok


def test_rank13_galois_conjugate():
    assert ids.verify_rank13(40, galois=2).ok


def test_constants():
    z = zeta(11)
    c1 = ids.cyc_from_powers(11, ids.C11[1])
    assert c1 == 2 * z**9 + 2 * z**8 + z**7 + z**4 + 2 * z**3 + 2 * z**2 + 1
    w = zeta(13)
    assert ids.cyc_from_powers(13, ids.D13[6]) == -(w**8) - w**5


def test_broken_constant_is_detected():
    consts = dict(ids.C11)
    consts[1] = {**consts[1], 0: 2}
    lhs = ids.build_Kpm(11, 0, 21)
    rhs = ids.rank11_rhs(21, consts)
    rep = ids.compare_series("rank-11", lhs, rhs, 21, 0.0)
    assert not rep.ok and rep.failed_at is not None


def test_theta1id_small():
    assert ids.verify_theta1id(5, 10).ok


def test_verify_is_precision_monotone():
    lo = ids.verify_dyson(5, 60)
    hi = ids.verify_dyson(5, 120)
    assert lo.ok and hi.ok
