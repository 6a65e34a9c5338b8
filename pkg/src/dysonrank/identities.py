"""Composite rank objects and the exact identity verifiers built on them.

Everything stays inside Q(zeta_p) (or Q(zeta_12p)): sine prefactors are never
materialized, the rank series enters only through eta(p^2 z) R_p(z) whose
q-expansion has integral exponents.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .cyclotomic import CycNum, sin_pi, sqrt3, zeta
from .qfunctions import (
    EtaQuotientSpec,
    eta,
    eta_quotient,
    euler_product,
    phi_series,
    rank_series,
    rank_series_eulerian,
    rank_table_from_series,
    theta1,
    theta_ac,
)
from .series import QExp, invert, substitute, u_operator


def chi12(n: int) -> int:
    r = n % 12
    if r in (1, 11):
        return 1
    if r in (5, 7):
        return -1
    return 0


def legendre(a: int, p: int) -> int:
    """Legendre symbol by Euler's criterion."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def _check_prime(p: int) -> None:
    if p <= 3 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"{p} is not a prime greater than 3")


def sp(p: int) -> int:
    return (p * p - 1) // 24


def correction_coefficient(p: int, a: int, variant: str = "standard") -> CycNum:
    """zeta^{3a+(p+1)/2} + zeta^{-3a-(p+1)/2} - zeta^{3a+(p-1)/2} - zeta^{-3a-(p-1)/2}.

    variant="alternate" flips the sign of (p-1)/2 in the last exponent, which is
    the other reading of the closed form for the U_{p,m} pieces.
    """
    h1, h0 = (p + 1) // 2, (p - 1) // 2
    last = -3 * a - h0 if variant == "standard" else -3 * a + h0
    return zeta(p, 3 * a + h1) + zeta(p, -3 * a - h1) - zeta(p, 3 * a + h0) - zeta(p, last)


def build_Rp(p: int, prec) -> QExp:
    """R_p(z) = q^{-1/24} R(zeta_p, q) minus its Phi_{p,a}(q^p) corrections, on grid 24."""
    _check_prime(p)
    prec = Fraction(prec)
    top = math.ceil(prec + Fraction(1, 24))
    out = rank_series(p, 1, top).shift(Fraction(-1, 24))
    chi = chi12(p)
    for a in range(1, (p - 1) // 2 + 1):
        shift = Fraction(a * (p - 3 * a), 2) - Fraction(p * p, 24)
        need = math.ceil((prec - shift) / p) if prec > shift else 0
        phi = substitute(phi_series(p, a, max(need, 0)), p).shift(shift)
        coeff = correction_coefficient(p, a) * (-chi * (-1) ** a)
        out = out + phi.scale(coeff)
    return out.truncate(prec)


def eta_p2_Rp(p: int, prec: int) -> QExp:
    """eta(p^2 z) R_p(z), an integral-exponent series, exact below prec."""
    lead = Fraction(p * p, 24)
    r = build_Rp(p, Fraction(prec) - lead + 1)
    low = r.leading_exponent() or Fraction(0)
    return (r * eta(p * p, prec - low + 1)).coarsen(1).truncate(prec)


def quadratic_branch(p: int, m: int) -> tuple[int, Optional[int]]:
    """(symbol of -24m mod p, a) with -24m = (6a)^2 mod p, 1 <= a <= (p-1)/2, when the symbol is 1."""
    if m % p == 0:
        return 0, None
    s = legendre(-24 * m, p)
    if s != 1:
        return s, None
    hits = [a for a in range(1, (p - 1) // 2 + 1) if (36 * a * a + 24 * m) % p == 0]
    if len(hits) != 1:
        raise ArithmeticError(f"contradictory branch detection for p={p}, m={m}")
    return s, hits[0]


def build_Kpm(p: int, m: int, prec: int, base: Optional[QExp] = None) -> QExp:
    """K_{p,m} = U_{p,m}[eta(p^2 z) R_p(z)], exact for exponents below prec."""
    _check_prime(p)
    if not 0 <= m < p:
        raise ValueError("need 0 <= m < p")
    if base is None:
        base = eta_p2_Rp(p, p * prec)
    return u_operator(base, p, m).truncate(prec)


def _rank_part(p: int, m: int, prec: int, source: str) -> QExp:
    """q^{m/p} sum_n (sum_k N(k,p,pn+m-s_p) zeta_p^k) q^n from a rank series."""
    s = sp(p)
    top = p * prec + m
    ranks = rank_series(p, 1, top) if source == "lambert" else rank_series_eulerian(p, 1, top)
    terms = {}
    for e, c in ranks.items():
        j = e + s  # j = pn + m
        if (j - m) % p == 0:
            terms[(j - m) // p] = c
    return QExp(terms, 1, prec, p).shift(Fraction(m, p)).truncate(prec)


def Kpm_closed(p: int, m: int, prec: int, variant: str = "standard") -> QExp:
    """The explicit form of K_{p,m}: rank part times (q^p;q^p), plus a Phi_{p,a} term when (-24m|p) = 1."""
    _check_prime(p)
    sym, a = quadratic_branch(p, m)
    inner = _rank_part(p, m, prec, "eulerian")
    if sym == 1:
        shift = Fraction(Fraction(a * (p - 3 * a), 2) - m, p) + Fraction(m, p)
        need = math.ceil(prec - shift) if prec > shift else 0
        phi = phi_series(p, a, max(need, 0)).shift(shift)
        coeff = correction_coefficient(p, a, variant) * (-chi12(p) * (-1) ** a)
        inner = inner + phi.scale(coeff)
    return (inner * euler_product(prec, p)).truncate(prec)


def build_Rpm(p: int, m: int, prec, base: Optional[QExp] = None) -> QExp:
    """R_{p,m} = K_{p,m}/eta(pz) by exact series division."""
    prec = Fraction(prec)
    lead = Fraction(p, 24)
    k = build_Kpm(p, m, math.ceil(prec + lead) + 1, base)
    return (k * invert(eta(p, prec + 2 * lead + 1))).truncate(prec)


def Rpm_closed(p: int, m: int, prec, variant: str = "standard") -> QExp:
    """Sum form of R_{p,m} without any eta division."""
    prec = Fraction(prec)
    shift = Fraction(-p, 24)
    sym, a = quadratic_branch(p, m)
    top = math.ceil(prec - shift) + 1
    out = _rank_part(p, m, top, "lambert").shift(shift)
    if sym == 1:
        e = Fraction(Fraction(a * (p - 3 * a), 2) - Fraction(p * p, 24), p)
        need = math.ceil(prec - e) if prec > e else 0
        phi = phi_series(p, a, max(need, 0)).shift(e)
        out = out + phi.scale(correction_coefficient(p, a, variant) * (-chi12(p) * (-1) ** a))
    return out.truncate(prec)


# reports


@dataclass
class IdentityReport:
    name: str
    verified_to: int
    status: str  # "verified" or "failed"
    failed_at: Optional[Fraction] = None
    lhs_coeff: Optional[CycNum] = None
    rhs_coeff: Optional[CycNum] = None
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "verified"

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "verified_to": self.verified_to,
            "status": self.status,
            "seconds": round(self.seconds, 3),
        }
        if self.failed_at is not None:
            out["failed_at"] = str(self.failed_at)
            out["lhs_coeff"] = self.lhs_coeff.to_json() if self.lhs_coeff is not None else None
            out["rhs_coeff"] = self.rhs_coeff.to_json() if self.rhs_coeff is not None else None
        if self.details:
            out["details"] = self.details
        return out


def compare_series(name: str, lhs: QExp, rhs: QExp, bound: int, started: float, **details) -> IdentityReport:
    """Coefficientwise comparison for every exponent below bound."""
    for side in (lhs, rhs):
        pe = side.prec_exponent()
        if pe is not None and pe < bound:
            raise ArithmeticError(f"{name}: a side is only known below q^{pe}, need q^{bound}")
    diff = lhs.truncate(bound).first_difference(rhs.truncate(bound))
    elapsed = time.perf_counter() - started
    if diff is None:
        return IdentityReport(name, bound - 1, "verified", seconds=elapsed, details=details)
    return IdentityReport(
        name, bound - 1, "failed", diff, _coeff(lhs, diff), _coeff(rhs, diff), elapsed, details
    )


def _coeff(f: QExp, e: Fraction) -> CycNum:
    try:
        return f.coefficient(e)
    except Exception:
        return CycNum.zero(f.order)


# verifiers. `prec` is the largest exponent N checked, i.e. all exponents <= N.


RAMANUJAN5_RHS = (
    (EtaQuotientSpec(eta=((25, 1),), gen=((5, 2, 1, 5), (5, 1, -2, 5))), 1, 0),
    (EtaQuotientSpec(eta=((25, 1),), gen=((5, 1, -1, 5),)), 1, 0),
    (EtaQuotientSpec(eta=((25, 1),), gen=((5, 2, -1, 5),)), 0, 1),
    (EtaQuotientSpec(eta=((25, 1),), gen=((5, 1, 1, 5), (5, 2, -2, 5))), 0, -1),
)


def ramanujan5_lhs_direct(bound) -> QExp:
    """q^{-1/24}(R(z5,q) - (z5+z5^4-2) phi(q^5) + (1+2z5+2z5^4) q^{-2} psi(q^5))."""
    bound = Fraction(bound)
    top = math.ceil(bound + Fraction(1, 24)) + 2
    z = zeta(5, 1) + zeta(5, 4)
    n5 = math.ceil(Fraction(top + 2, 5))
    phi = substitute(phi_series(5, 1, n5), 5)
    psi = substitute(phi_series(5, 2, n5), 5).shift(-2)
    inner = rank_series(5, 1, top) - phi.scale(z - 2) + psi.scale(z * 2 + 1)
    return inner.shift(Fraction(-1, 24)).truncate(bound)


def ramanujan5_rhs(bound) -> QExp:
    z = zeta(5, 1) + zeta(5, 4)
    out = QExp.zero(None, 24, 5)
    for spec, c0, c1 in RAMANUJAN5_RHS:
        out = out + eta_quotient(spec, bound).scale(z * c1 + c0)
    return out


def verify_ramanujan5(prec: int = 200) -> IdentityReport:
    t0 = time.perf_counter()
    bound = prec + 1
    lhs = build_Rp(5, bound)
    rhs = ramanujan5_rhs(bound)
    return compare_series("ramanujan-5", lhs, rhs, bound, t0)


def dyson_counts_equal(p: int, r: int, limit: int) -> tuple[bool, Optional[int]]:
    """N(k,p,pn+r) independent of k for pn+r <= limit, read off the rank series."""
    table = rank_table_from_series(p, limit + 1)
    for n in range(r, limit + 1, p):
        row = table[n]
        if len(set(row)) != 1:
            return False, n
    return True, None


def verify_dyson(p: int, prec: int = 200) -> IdentityReport:
    """Valence audit of K_{p,0} on Gamma_1(p) combined with its vanishing at infinity."""
    from .modular import dyson_audit

    if p not in (5, 7):
        raise ValueError("Dyson's conjecture concerns p = 5 and 7")
    t0 = time.perf_counter()
    audit = dyson_audit(p)
    bound = prec + 1
    k = build_Kpm(p, 0, bound)
    residue = (-sp(p)) % p
    counts_ok, bad_n = dyson_counts_equal(p, residue, prec)
    needed = audit.required_at_infinity
    first = k.leading_exponent()
    zero_ok = k.is_zero() and bound >= needed
    elapsed = time.perf_counter() - t0
    details = {
        "audit": audit.to_json(),
        "series_zero_to": prec,
        "order_needed_at_infinity": needed,
        "residue_class": residue,
        "counts_equal": counts_ok,
    }
    if zero_ok and audit.forces_vanishing and counts_ok:
        return IdentityReport(f"dyson-{p}", prec, "verified", seconds=elapsed, details=details)
    if bad_n is not None:
        details["counts_differ_at"] = bad_n
    return IdentityReport(
        f"dyson-{p}", prec, "failed", first,
        k.leading_coefficient(), CycNum.zero(p) if first is not None else None, elapsed, details,
    )


def theta1id_sides(p: int, bound) -> tuple[QExp, QExp]:
    """Theta(1/p; z) and -(2/sqrt3) chi12(p) sum_a (-1)^a sin(6 a pi/p) Theta_1(0,-a,p; p^2 z)."""
    _check_prime(p)
    bound = Fraction(bound)
    lhs = theta_ac(1, p, bound)
    pref = sqrt3().inverse() * (-2 * chi12(p))
    rhs = None
    for a in range(1, (p - 1) // 2 + 1):
        t = substitute(theta1(0, -a, p, bound / (p * p)), p * p)
        term = t.scale(pref * sin_pi(Fraction(6 * a, p)) * (-1) ** a)
        rhs = term if rhs is None else rhs + term
    return lhs, rhs.truncate(bound)


def theta_exponent_bound(count: int) -> int:
    """Smallest integral bound covering the first `count` exponents (6n+1)^2/24 of Theta(1/p; z)."""
    vals = sorted({(6 * n + 1) ** 2 for n in range(-count, count + 1)})
    return vals[count - 1] // 24 + 1


def verify_theta1id(p: int, terms: int = 30) -> IdentityReport:
    t0 = time.perf_counter()
    bound = theta_exponent_bound(terms)
    lhs, rhs = theta1id_sides(p, bound)
    rep = compare_series(f"theta1id-{p}", lhs, rhs, bound, t0)
    rep.details["theta_exponents"] = terms
    rep.details["nonzero_lhs_terms"] = len(lhs)
    return rep


C11 = {
    1: {9: 2, 8: 2, 7: 1, 4: 1, 3: 2, 2: 2, 0: 1},
    2: {9: -1, 8: -1, 7: -2, 6: -1, 5: -1, 4: -2, 3: -1, 2: -1, 0: -1},
    3: {8: 2, 7: 2, 4: 2, 3: 2, 0: 3},
    4: {9: 4, 8: 1, 7: 2, 6: 2, 5: 2, 4: 2, 3: 1, 2: 4, 0: 4},
    5: {9: -1, 8: -2, 7: 1, 6: -2, 5: -2, 4: 1, 3: -2, 2: -1, 0: -3},
}

C13 = {
    1: {11: 5, 10: 1, 9: 5, 8: 2, 7: 3, 6: 3, 5: 2, 4: 5, 3: 1, 2: 5, 0: 6},
    2: {11: -1, 9: 2, 8: 2, 7: -1, 6: -1, 5: 2, 4: 2, 2: -1, 0: 3},
    3: {11: 1, 10: 2, 9: 2, 4: 2, 3: 2, 2: 1, 0: -1},
    4: {11: 3, 10: 3, 8: 5, 7: 1, 6: 1, 5: 5, 3: 3, 2: 3, 0: 5},
    5: {11: 1, 10: -3, 9: -1, 8: 2, 7: -2, 6: -2, 5: 2, 4: -1, 3: -3, 2: 1, 0: -2},
    6: {11: -1, 10: -1, 9: -2, 8: -1, 7: -2, 6: -2, 5: -1, 4: -2, 3: -1, 2: -1, 0: -1},
}

D13 = {
    1: {11: 2, 9: 1, 8: 1, 7: 1, 6: 1, 5: 1, 4: 1, 2: 2, 0: 2},
    2: {11: -1, 10: -1, 7: -1, 6: -1, 3: -1, 2: -1},
    3: {11: 1, 10: 1, 9: 1, 8: 1, 5: 1, 4: 1, 3: 1, 2: 1, 0: 1},
    4: {10: 1, 9: -1, 8: 1, 5: 1, 4: -1, 3: 1, 0: 1},
    5: {10: -1, 9: -1, 7: -1, 6: -1, 4: -1, 3: -1, 0: -2},
    6: {8: -1, 5: -1},
}


def cyc_from_powers(n: int, powers: dict[int, int]) -> CycNum:
    poly = [0] * n
    for k, v in powers.items():
        poly[k % n] += v
    return CycNum.from_int_poly(n, poly)


def j11_spec(k: int) -> EtaQuotientSpec:
    return EtaQuotientSpec(eta=((11, 4), (1, -2)), gen=((11, 4 * k % 11, -1, 1), (11, 5 * k % 11, -2, 1)), level=11)


def j13_spec(k: int) -> EtaQuotientSpec:
    gen = tuple((13, j * k % 13, -e, 1) for j, e in ((2, 2), (3, 1), (4, 1), (5, 1), (6, 2)))
    return EtaQuotientSpec(eta=((13, 3), (1, -1)), gen=gen, level=13)


def rank11_rhs(bound: int, constants: Optional[dict] = None) -> QExp:
    constants = constants or C11
    out = QExp.zero(bound, 1, 11)
    for k in range(1, 6):
        out = out + eta_quotient(j11_spec(k), bound).scale(cyc_from_powers(11, constants[k]))
    return out.coarsen(1)


def rank13_rhs(bound: int, cs: Optional[dict] = None, ds: Optional[dict] = None) -> QExp:
    cs, ds = cs or C13, ds or D13
    ratio = eta_quotient(EtaQuotientSpec(eta=((13, 2), (1, -2))), bound)
    out = QExp.zero(bound, 1, 13)
    for k in range(1, 7):
        j = eta_quotient(j13_spec(k), bound)
        c = cyc_from_powers(13, cs[k])
        d = cyc_from_powers(13, ds[k])
        out = out + j.scale(c) + (ratio * j).scale(d * 13)
    return out.coarsen(1)


def verify_rank11(prec: int = 150, galois: int = 1) -> IdentityReport:
    """LHS is K_{11,0}; galois=g applies zeta -> zeta^g to every constant and to the rank side."""
    t0 = time.perf_counter()
    bound = prec + 1
    lhs = build_Kpm(11, 0, bound)
    consts = C11
    if galois != 1:
        lhs = lhs.galois(galois)
        consts = {k: {(e * galois) % 11: v for e, v in c.items()} for k, c in C11.items()}
    rhs = rank11_rhs(bound, consts)
    return compare_series("rank-11" if galois == 1 else f"rank-11-g{galois}", lhs, rhs, bound, t0)


def verify_rank13(prec: int = 150, galois: int = 1) -> IdentityReport:
    t0 = time.perf_counter()
    bound = prec + 1
    lhs = build_Kpm(13, 0, bound)
    cs, ds = C13, D13
    if galois != 1:
        lhs = lhs.galois(galois)
        cs = {k: {(e * galois) % 13: v for e, v in c.items()} for k, c in C13.items()}
        ds = {k: {(e * galois) % 13: v for e, v in c.items()} for k, c in D13.items()}
    rhs = rank13_rhs(bound, cs, ds)
    return compare_series("rank-13" if galois == 1 else f"rank-13-g{galois}", lhs, rhs, bound, t0)


def verify_kpm_closed(p: int, prec: int = 150, variant: str = "standard") -> IdentityReport:
    """U_{p,m}-built K_{p,m} against its explicit forms for every m."""
    t0 = time.perf_counter()
    bound = prec + 1
    base = eta_p2_Rp(p, p * bound)
    branches = {}
    for m in range(p):
        built = build_Kpm(p, m, bound, base)
        closed = Kpm_closed(p, m, bound, variant)
        sym, a = quadratic_branch(p, m)
        branches[m] = {"symbol": sym, "a": a}
        rep = compare_series(f"kpm-closed-{p}", built, closed, bound, t0)
        if not rep.ok:
            rep.details.update({"m": m, "variant": variant, "branches": branches})
            return rep
    return IdentityReport(
        f"kpm-closed-{p}", prec, "verified", seconds=time.perf_counter() - t0,
        details={"variant": variant, "branches": branches},
    )


def first_nonzero_Kp0(p: int, prec: int = 60) -> Optional[tuple[Fraction, CycNum]]:
    k = build_Kpm(p, 0, prec)
    if k.is_zero():
        return None
    return k.leading_exponent(), k.leading_coefficient()


# order formulas for K_{p,0} at the cusps of Gamma_1(p)


def kp_order_at_zero(p: int) -> tuple[str, Fraction]:
    """('>=', 0) for p = 5, 7 and ('=', -(p-5)(p-7)/(24p)) beyond."""
    _check_prime(p)
    if p in (5, 7):
        return ">=", Fraction(0)
    return "=", Fraction(-(p - 5) * (p - 7), 24 * p)


def kp_order_at_one_over(p: int, m: int) -> tuple[str, Fraction]:
    _check_prime(p)
    if not 2 <= m <= (p - 1) // 2:
        raise ValueError("need 2 <= m <= (p-1)/2")
    if 6 * m < p - 1:
        return "=", -Fraction(3, 2 * p) * (Fraction(p - 1, 6) - m) * (Fraction(p + 1, 6) - m)
    return ">=", Fraction(0)


def kp_order_at_m_over_p(p: int) -> tuple[str, Fraction]:
    _check_prime(p)
    return ">=", Fraction(p * p - 1, 24 * p)


def kp_order_at_infinity(p: int) -> tuple[str, Fraction]:
    """K_{p,0} starts at q^{ceil(s_p/p)}."""
    return ">=", Fraction(math.ceil(Fraction(sp(p), p)))


VERIFIERS: dict[str, Callable[..., IdentityReport]] = {
    "dyson-5": lambda prec=200: verify_dyson(5, prec),
    "dyson-7": lambda prec=200: verify_dyson(7, prec),
    "ramanujan-5": lambda prec=200: verify_ramanujan5(prec),
    "rank-11": lambda prec=150: verify_rank11(prec),
    "rank-13": lambda prec=150: verify_rank13(prec),
    "theta1id-5": lambda prec=30: verify_theta1id(5, prec),
    "theta1id-7": lambda prec=30: verify_theta1id(7, prec),
    "theta1id-11": lambda prec=30: verify_theta1id(11, prec),
    "theta1id-13": lambda prec=30: verify_theta1id(13, prec),
    "kpm-closed-11": lambda prec=150: verify_kpm_closed(11, prec),
    "kpm-closed-13": lambda prec=150: verify_kpm_closed(13, prec),
}
