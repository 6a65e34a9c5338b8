from __future__ import annotations

import random
from fractions import Fraction

import mpmath as mp
import pytest

from dysonrank import modular as md
from dysonrank import numeric as nm
from dysonrank import qfunctions as qf
from dysonrank.modular import FamilyMember, Mat2, S

POINTS5 = [0.1 + 0.9j, -0.3 + 1.1j, 0.45 + 0.7j, 1j, -0.2 + 0.6j]


def rel(x, y):
    return float(abs(x - y) / max(abs(y), mp.mpf(1e-300)))


def test_eta_at_i_closed_form():
    with mp.workdps(30):
        want = mp.gamma(0.25) / (2 * mp.pi ** mp.mpf(0.75))
        assert rel(nm.eta(1j), want) < 1e-25
        assert rel(nm.eta_pentagonal(1j), want) < 1e-25
        assert rel(nm.qpochhammer_inf(1j) * mp.exp(-2 * mp.pi / 24), want) < 1e-25


def test_rank_two_routes():
    with mp.workdps(30):
        z = mp.mpc(1) / 3 + 0.5j
        for a, c in [(1, 5), (2, 7), (3, 11)]:
            assert rel(nm.rank_lambert(a, c, z), nm.rank_eulerian(a, c, z)) < 1e-10
            assert rel(nm.nell(a, c, z, "lambert"), nm.nell(a, c, z, "eulerian")) < 1e-10


def test_theta_two_routes():
    with mp.workdps(30):
        for a, c in [(1, 7), (2, 5)]:
            lhs = nm.theta_ac(a, c, 1j)
            rhs = -1j / (2 * c) * nm.theta2(0, -a, c, 1j)
            assert rel(lhs, rhs) < 1e-12
        for params in [(1, 2, 5), (3, 1, 7)]:
            z = mp.mpc(0.2, 0.8)
            assert rel(nm.theta1(*params, z), nm.theta1_defining(*params, z)) < 1e-12
            assert rel(nm.theta2(*params, z), nm.theta2_defining(*params, z)) < 1e-12


@pytest.mark.parametrize(
    "name,key,num,params",
    [
        ("Nell", "Nell 1 5", "Nell", (1, 5)),
        ("Mell", "Mell 2 7", "Mell", (2, 7)),
        ("MabcCal", "MabcCal 1 2 5", "MabcCal", (1, 2, 5)),
        ("NabcCal", "NabcCal 2 1 5", "NabcCal", (2, 1, 5)),
        ("Theta1", "Theta1 1 2 5", "Theta1", (1, 2, 5)),
        ("Theta_ac", "Theta_ac 2 7", "Theta_ac", (2, 7)),
    ],
)
def test_expansions_match_numeric_sums(name, key, num, params):
    f = qf.named_series(key, 80)
    with mp.workdps(30):
        for z in POINTS5:
            v, tail = nm.eval_qexp(f, z)
            w = nm.eval_series(num, params, z)
            assert abs(v - w) <= 1e-9 * max(1, abs(w)) + tail


def test_mordell_integrals():
    with mp.workdps(30):
        r = nm.mordell_ac(1, 5, 2 * mp.pi)
        assert abs(mp.im(r.value)) < 1e-20 and mp.re(r.value) > 0
        assert r.error < 1e-9
        r = nm.mordell_abc(0, 1, 5, mp.pi)
        assert r.error < 1e-9


def test_mordell_pole_guard():
    with mp.workdps(30), pytest.raises(nm.NumericError):
        nm.mordell_abc(1, 1, 5, 2 * mp.pi)


def test_period_integral_contour_deformation():
    # int_0^{i inf} = int_{-conj z}^{i inf} + int_0^{-conj z} along the straight segment
    with mp.workdps(30):
        z = mp.mpc(0.1, 0.9)
        f = lambda t: nm.theta_ac(1, 5, t, check=False)
        from_conj = nm.period_integral(f, z, "conj")
        from_zero = nm.period_integral(f, z, "zero")
        w = -mp.conj(z)
        knots = [mp.mpf(10) ** -k for k in range(4, -1, -1)]
        seg = mp.quad(lambda s: f(s * w) / mp.sqrt(-1j * (s * w + z)) * w, knots)
        assert abs(f(w * knots[0])) < 1e-20
        assert rel(from_zero.value, from_conj.value + seg) < 1e-10
        for r in (from_conj, from_zero):
            assert r.error < nm.TOLERANCES["residual"] / 10


def test_eps_branch_coverage():
    seen = set()
    for law in ("Jint1", "Jint2", "Jint3", "Jint4"):
        for params in nm.MATRIX_PARAMS[law]:
            seen.add((len(params), nm.eps_branch(params)))
    assert seen == {(n, b) for n in (2, 3) for b in ("low", "middle", "high")}


def test_eta_s_transform():
    with mp.workdps(30):
        lhs = nm.stroke(nm.eta, S, Fraction(1, 2), 1j)
        assert rel(lhs, mp.expjpi(mp.mpf(-1) / 4) * nm.eta(1j)) < 1e-25


def test_stroke_is_an_action():
    rng = random.Random(3)
    SMALL = [S, md.T, md.T_INV, Mat2(2, 1, 1, 1), Mat2(1, 0, 1, 1)]
    F = lambda z: nm.eta(z) ** 2
    with mp.workdps(30):
        for _ in range(5):
            A, B = rng.choice(SMALL), rng.choice(SMALL)
            z = mp.mpc(0.13, 1.2)
            lhs = nm.stroke(lambda w: nm.stroke(F, A, 1, w), B, 1, z)
            rhs = nm.stroke(F, A @ B, 1, z)
            assert rel(lhs, rhs) < 1e-10


def test_eta_multiplier_numeric():
    rng = random.Random(11)
    with mp.workdps(30):
        for _ in range(20):
            A = md.random_gamma0(rng.choice([5, 7]), rng, 3)
            while A.c == 0 or abs(A.c) > 15:
                A = md.random_gamma0(rng.choice([5, 7]), rng, 3)
            z = complex(-A.d / A.c + 0.03, 1 / abs(A.c))
            r = nm.check_transform("eta_mult", (A.a, A.b, A.c, A.d), z)
            assert r.passed, r


def test_s_rule_closes():
    for m in md.family_members(5):
        f1, x = md.family_apply(m, "S", level="G")
        f2, y = md.family_apply(x, "S", level="G")
        assert y == m and (f1 * f2).is_one()


@pytest.mark.parametrize(
    "law,params,z",
    [
        ("Jint1", (1, 7), 1j),
        ("Jint1", (2, 7), 1j),
        ("Jint1", (6, 7), 1j),
        ("Jint2", (1, 5), 0.25 + 1j),
        ("Jint4", (0, 2, 5), 1j),
        ("Ntrans3", (1, 5), 1j),
        ("tt2", (1, 2, 5), 2j),
        ("G1trans2", (1, 5), 1j),
        ("G2trans1", (2, 7), 0.25 + 1j),
        ("F20id", (2, 5), 1j),
        ("F1F2id", (2, 7), 0.1 + 0.9j),
    ],
)
def test_transform_laws(law, params, z):
    r = nm.check_transform(law, params, z)
    assert r.passed, r.to_json()


def test_mainthm_v2():
    case = nm.MATRIX_CASES["mainthm"][0]
    r = nm.check_transform("mainthm", case, nm.matrix_point("mainthm", case))
    assert r.residual < 1e-7 * max(1, r.lhs_abs)


def test_residual_detects_wrong_factor():
    assert nm.check_transform("Ntrans1", (1, 5), 1j).passed
    with mp.workdps(30):
        z = mp.mpc(0, 1)
        lhs = nm.nell(1, 5, z + 1)
        good = mp.expjpi(mp.mpf(-1) / 12) * nm.nell(1, 5, z)
        bad = mp.expjpi(mp.mpf(1) / 12) * nm.nell(1, 5, z)
        assert rel(lhs, good) < 1e-25 and rel(lhs, bad) > 0.1


def test_conditioning_guard():
    with pytest.raises(nm.NumericError):
        nm.eta(0.3 + 0.01j)
