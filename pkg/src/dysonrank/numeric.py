"""Complex evaluation on the upper half-plane and residual checks of transformation laws.

Everything runs in mpmath at DPS significant digits. Tolerances live in TOLERANCES.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import gmpy2
import mpmath as mp

from .modular import (
    S as S_MAT,
    FamilyMember,
    Mat2,
    eta_multiplier,
    family_apply,
    mu_multiplier,
)

DPS = 32

TOLERANCES = {
    "residual": 1e-8,  # relative residual for a transformation law to pass
    "min_imag": 0.05,  # conditioning bound on Im z
    "pole_distance": 0.05,  # minimal distance of a cosh zero from the Mordell contour
    "series_digits": DPS + 6,  # summation stops once terms drop below 10^-this
    "tail": 1e-14,  # neglected end pieces of period integrals
}


class NumericError(ArithmeticError):
    pass


@dataclass(frozen=True)
class EvalPoint:
    z: complex
    tol: float = TOLERANCES["residual"]

    def __post_init__(self):
        if complex(self.z).imag < TOLERANCES["min_imag"]:
            raise NumericError(f"Im z must be at least {TOLERANCES['min_imag']}")

    @property
    def mpz(self):
        return mp.mpc(self.z)


def _z(z):
    z = mp.mpc(z)
    if z.imag < TOLERANCES["min_imag"]:
        raise NumericError(f"Im z = {mp.nstr(z.imag, 5)} is below {TOLERANCES['min_imag']}")
    return z


def _eps():
    return mp.mpf(10) ** (-TOLERANCES["series_digits"])


def _e(x):
    """exp(2 pi i x)."""
    return mp.expjpi(2 * x)


def qpow(e, z):
    """q^e = exp(2 pi i e z)."""
    if isinstance(e, Fraction):
        e = mp.mpf(e.numerator) / e.denominator
    return mp.exp(2j * mp.pi * e * z)


def _f(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _bisum(term: Callable[[int], complex], center: int = 0, quiet: int = 6, cap: int = 200000):
    """sum over all integers n of term(n), walking outwards from center."""
    eps = _eps()
    total = term(center)
    small = 0
    k = 1
    while k < cap:
        a, b = term(center + k), term(center - k)
        total += a + b
        if abs(a) + abs(b) <= eps * max(1, abs(total)):
            small += 1
            if small >= quiet:
                return total
        else:
            small = 0
        k += 1
    raise NumericError("bilateral sum did not converge")


def _onesum(term: Callable[[int], complex], start: int = 0, quiet: int = 4, cap: int = 200000):
    eps = _eps()
    total = mp.mpc(0)
    small = 0
    n = start
    while n < start + cap:
        t = term(n)
        total += t
        if abs(t) <= eps * max(1, abs(total)):
            small += 1
            if small >= quiet:
                return total
        else:
            small = 0
        n += 1
    raise NumericError("sum did not converge")


def sqrt_miz(z):
    """sqrt(-i z), principal branch."""
    return mp.sqrt(-1j * z)


# q-products and eta


def qpochhammer_inf(z):
    z = _z(z)
    q = qpow(1, z)
    eps = _eps()
    prod = mp.mpc(1)
    qn = q
    while abs(qn) > eps:
        prod *= 1 - qn
        qn *= q
    return prod


def eta(z):
    z = _z(z)
    return qpow(Fraction(1, 24), z) * qpochhammer_inf(z)


def eta_pentagonal(z):
    """eta from the pentagonal-number sum; an independent route."""
    z = _z(z)
    return _bisum(lambda n: (-1) ** (n % 2) * qpow(Fraction((6 * n + 1) ** 2, 24), z))


# Appell-Lerch style sums


def rank_lambert(a: int, c: int, z):
    """N(a/c; z) from its Lambert-type sum."""
    z = _z(z)
    q = qpow(1, z)
    cs = mp.cos(2 * mp.pi * a / c)

    def term(n):
        qn = q ** n
        return (-1) ** n * (1 + qn) * (2 - 2 * cs) / (1 - 2 * cs * qn + qn * qn) * qpow(Fraction(n * (3 * n + 1), 2), z)

    return (1 + _onesum(term, 1)) / qpochhammer_inf(z)


def rank_eulerian(a: int, c: int, z):
    """R(zeta_c^a; q) = sum q^{n^2} / ((zeta q; q)_n (zeta^{-1} q; q)_n)."""
    z = _z(z)
    q = qpow(1, z)
    w = _e(mp.mpf(a) / c)
    eps = _eps()
    total = mp.mpc(1)
    den = mp.mpc(1)
    n = 1
    small = 0
    while True:
        qn = q ** n
        den *= (1 - w * qn) * (1 - qn / w)
        t = q ** (n * n) / den
        total += t
        if abs(t) <= eps * abs(total):
            small += 1
            if small >= 3:
                return total
        else:
            small = 0
        n += 1


def mac(a: int, c: int, z):
    z = _z(z)
    x = mp.mpf(a) / c

    def term(n):
        u = qpow(n + x, z)
        return (-1) ** (n % 2) * u / (1 - u) * qpow(Fraction(3 * n * (n + 1), 2), z)

    return _bisum(term) / qpochhammer_inf(z)


def mabc(a: int, b: int, c: int, z):
    z = _z(z)
    x = mp.mpf(a) / c
    w = _e(mp.mpf(b) / c)

    def term(n):
        u = qpow(n + x, z)
        return (-1) ** (n % 2) * u / (1 - w * u) * qpow(Fraction(3 * n * (n + 1), 2), z)

    return _bisum(term) / qpochhammer_inf(z)


def _k_branch(b: int, c: int) -> int:
    from .qfunctions import k_branch

    return k_branch(b, c)


def nabc(a: int, b: int, c: int, z):
    z = _z(z)
    k = _k_branch(b, c)
    A = mp.pi * a / c
    lead = 1j * _e(mp.mpf(-a) / (2 * c)) * qpow(Fraction(b, 2 * c), z) / (2 * (1 - _e(mp.mpf(-a) / c) * qpow(Fraction(b, c), z)))
    cs = mp.cos(2 * A - 2 * mp.pi * b * z / c)

    def term(m):
        qm = qpow(m, z)
        num = mp.sin(A - (mp.mpf(b) / c + 2 * k * m) * mp.pi * z) + mp.sin(A - (mp.mpf(b) / c - 2 * k * m) * mp.pi * z) * qm
        K = (-1) ** (m % 2) * num / (1 - 2 * cs * qm + qm * qm)
        return K * qpow(Fraction(m * (3 * m + 1), 2), z)

    return (lead + _onesum(term, 1)) / qpochhammer_inf(z)


# normalized forms


def nell(a: int, c: int, z, route: str = "lambert"):
    z = _z(z)
    base = rank_lambert(a, c, z) if route == "lambert" else rank_eulerian(a, c, z)
    return base * qpow(Fraction(-1, 24), z) / mp.sin(mp.pi * a / c)


def _m_exp(a: int, c: int) -> Fraction:
    x = Fraction(a, c)
    return Fraction(3, 2) * x * (1 - x) - Fraction(1, 24)


def mell(a: int, c: int, z):
    z = _z(z)
    return 2 * qpow(_m_exp(a, c), z) * mac(a, c, z)


def mabc_cal(a: int, b: int, c: int, z):
    z = _z(z)
    return 2 * qpow(_m_exp(a, c), z) * mabc(a, b, c, z)


def nabc_cal(a: int, b: int, c: int, z):
    z = _z(z)
    k = _k_branch(b, c)
    phase = mp.expjpi(mp.mpf(-2 * a * k) / c + mp.mpf(3 * b * (2 * a - c)) / (c * c)) * _e(mp.mpf(-b) / c)
    s = Fraction(b * k, c) - Fraction(3 * b * b, 2 * c * c) - Fraction(1, 24)
    return 4 * phase * qpow(s, z) * nabc(a, b, c, z)


# theta functions


def theta_tilde(k: int, N: int, z, check: bool = True):
    z = _z(z) if check else mp.mpc(z)
    return _bisum(lambda m: (N * m + k) * mp.expjpi(z * mp.mpf((N * m + k) ** 2) / N), -(k // N))


def _to_g(x) -> gmpy2.mpc:
    x = mp.mpc(x)
    parts = []
    for v in (x.real, x.imag):
        sign, man, exp, _ = v._mpf_
        g = gmpy2.mul_2exp(gmpy2.mpfr(man), exp) if man else gmpy2.mpfr(0)
        parts.append(-g if sign else g)
    return gmpy2.mpc(*parts)


def _from_g(g):
    parts = []
    for v in (g.real, g.imag):
        if v == 0:
            parts.append(mp.mpf(0))
        else:
            man, exp = v.as_mantissa_exp()
            parts.append(mp.mpf((int(man), int(exp))))
    return mp.mpc(*parts)


def _gauss_progression(tau, N: int, v0: int, h: int, weight: Callable[[int], complex], period: int):
    """sum_n weight(n) v_n e^{pi i tau v_n^2 / N}, v_n = v0 + n h, weight periodic in n.

    The term range comes from the Gaussian envelope exp(-pi Im(tau) v^2 / N); the
    exponentials are updated multiplicatively (two products per term) in gmpy2.
    """
    y = mp.im(tau)
    L = TOLERANCES["series_digits"] * mp.log(10) + 10
    vmax = mp.sqrt(N * L / (mp.pi * y))
    vmax = vmax + mp.sqrt(N / (mp.pi * y)) * mp.sqrt(max(mp.log(vmax), 1)) + abs(h)
    n0 = -round(v0 / h)
    vmin = min(abs(v0 + n * h) for n in (n0 - 1, n0, n0 + 1) if v0 + n * h)
    if mp.pi * y * vmin * vmin / N > 10 ** 6:
        return mp.mpc(0)  # far beyond every representable contribution
    n_lo = int(mp.floor((-vmax - v0) / abs(h))) if h > 0 else int(mp.floor((vmax - v0) / h))
    n_hi = int(mp.ceil((vmax - v0) / abs(h))) if h > 0 else int(mp.ceil((-vmax - v0) / h))
    with gmpy2.context(gmpy2.get_context(), precision=mp.mp.prec + 20):
        table = [_to_g(weight(j)) for j in range(period)]
        v = v0 + n0 * h
        E0 = _to_g(mp.expjpi(tau * mp.mpf(v * v) / N))
        S = _to_g(mp.expjpi(tau * mp.mpf(2 * h * h) / N))
        total = table[n0 % period] * v * E0
        for step, stop in ((1, n_hi), (-1, n_lo)):
            E = E0
            R = _to_g(mp.expjpi(tau * mp.mpf(2 * v * step * h + h * h) / N))
            vv = v
            for n in range(n0 + step, stop + step, step):
                E *= R
                R *= S
                vv += step * h
                w = table[n % period]
                if w:
                    total += w * (vv * E)
        return _from_g(total)


def theta_ac(a: int, c: int, z, check: bool = True):
    """Theta(a/c; z) = sum (-1)^n (6n+1) sin(pi a (6n+1)/c) e^{3 pi i z (n+1/6)^2}."""
    z = _z(z) if check else mp.mpc(z)

    def w(n):
        return (-1) ** (n % 2) * mp.sinpi(mp.mpf(a * (6 * n + 1)) / c)

    return _gauss_progression(z, 12, 1, 6, w, 2 * c)


def _theta1_pref(a: int, b: int, c: int):
    return _e(mp.mpf(3 * a * b) / (c * c)) * _e(mp.mpf(-a) / (2 * c))


_SIN3 = {0: 1, 1: 0, 2: -1}  # sin(pi(2n+1)/3) / (sqrt(3)/2)


def theta1(a: int, b: int, c: int, z, check: bool = True):
    """Theta_1(a,b,c; z) from the single sum over n with v = 6c(n/3 + 1/6 - b/c)."""
    z = _z(z) if check else mp.mpc(z)
    s3h = mp.sqrt(3) / 2

    def w(n):
        s = _SIN3[n % 3]
        return (-1) ** (n % 2) * s * s3h / (6 * c) * _e(mp.mpf(-n * a) / c) if s else 0

    return 6 * c * _theta1_pref(a, b, c) * _gauss_progression(z, 12 * c * c, c - 6 * b, 2 * c, w, 6 * c)


def theta1_defining(a: int, b: int, c: int, z):
    """Theta_1 through its finite combination of theta_tilde(., 12c^2)."""
    z = _z(z)
    total = mp.mpc(0)
    for m in range(6 * c):
        s = _SIN3[m % 3]
        if not s:
            continue
        w = (-1) ** (m % 2) * s * mp.sqrt(3) / 2 * _e(mp.mpf(-m * a) / c)
        total += w * theta_tilde((2 * m * c - 6 * b + c) % (12 * c * c), 12 * c * c, z)
    return _theta1_pref(a, b, c) * total


def theta2(a: int, b: int, c: int, z, check: bool = True):
    """Theta_2(a,b,c; z) as two progressions v = 6cL + 6a +- c."""
    z = _z(z) if check else mp.mpc(z)
    N = 12 * c * c
    total = mp.mpc(0)
    for sgn in (1, -1):

        def w(L, sgn=sgn):
            return (-1) ** (L % 2) * mp.expjpi(mp.mpf(-b * (6 * L + sgn)) / c)

        total += _gauss_progression(z, N, 6 * a + sgn * c, 6 * c, w, 2 * c)
    return total


def theta2_defining(a: int, b: int, c: int, z):
    z = _z(z)
    N = 12 * c * c
    total = mp.mpc(0)
    for l in range(2 * c):
        s = (-1) ** l
        total += s * mp.expjpi(mp.mpf(-b * (6 * l + 1)) / c) * theta_tilde((6 * c * l + 6 * a + c) % N, N, z)
        total += s * mp.expjpi(mp.mpf(-b * (6 * l - 1)) / c) * theta_tilde((6 * c * l + 6 * a - c) % N, N, z)
    return total


# correction factors


def _branch(x: Fraction, allow_zero: bool) -> int:
    if x in (Fraction(1, 6), Fraction(5, 6)):
        raise ValueError("a/c must avoid 1/6 and 5/6")
    if not (0 <= x < 1 if allow_zero else 0 < x < 1):
        raise ValueError("a/c out of range")
    return 0 if x < Fraction(1, 6) else (1 if x < Fraction(5, 6) else 2)


def eps1_ac(a: int, c: int, z):
    z = _z(z)
    x = Fraction(a, c)
    br = _branch(x, False)
    if br == 1:
        return mp.mpc(0)
    centre = Fraction(1, 6) if br == 0 else Fraction(5, 6)
    return -2 / sqrt_miz(z) * mp.expjpi(3 * _f((x - centre) ** 2) / z)


def eps1_abc(a: int, b: int, c: int, z):
    z = _z(z)
    x = Fraction(a, c)
    br = _branch(x, True)
    if br == 1:
        return mp.mpc(0)
    centre, root = (Fraction(1, 6), b) if br == 0 else (Fraction(5, 6), 5 * b)
    return _e(mp.mpf(root) / (2 * c)) / sqrt_miz(z) * mp.expjpi(3 * _f((x - centre) ** 2) / z)


def eps2_ac(a: int, c: int, z):
    z = _z(z)
    x = Fraction(a, c)
    br = _branch(x, False)
    if br == 1:
        return mp.mpc(0)
    centre = Fraction(1, 6) if br == 0 else Fraction(5, 6)
    return 2 * mp.expjpi(-3 * z * _f((x - centre) ** 2))


def eps2_abc(a: int, b: int, c: int, z):
    z = _z(z)
    x = Fraction(a, c)
    br = _branch(x, True)
    if br == 1:
        return mp.mpc(0)
    if br == 0:
        return 2 * _e(mp.mpf(-2 * b) / c) * mp.expjpi(-3 * z * _f((x - Fraction(1, 6)) ** 2))
    return 2 * mp.expjpi(-3 * z * _f((x - Fraction(5, 6)) ** 2))


def eps_branch(params: Sequence[int]) -> str:
    a, c = params[0], params[-1]
    return ("low", "middle", "high")[_branch(Fraction(a, c), len(params) == 3)]


def eps_function(kind: str, params: Sequence[int]) -> Callable:
    fns = {"eps1_ac": eps1_ac, "eps1_abc": eps1_abc, "eps2_ac": eps2_ac, "eps2_abc": eps2_abc}
    if kind not in fns:
        raise ValueError(f"unknown correction factor {kind!r}")
    fn = fns[kind]
    return lambda z: fn(*params, z)


# Mordell integrals


@dataclass
class QuadResult:
    value: complex
    error: float
    rules: dict = field(default_factory=dict)


def _pieces(lo, hi, width):
    n = max(1, int(mp.ceil((hi - lo) / width)))
    return [lo + (hi - lo) * mp.mpf(j) / n for j in range(n + 1)]


def _two_rule_quad(f, pts) -> QuadResult:
    ts = mp.quad(f, pts, method="tanh-sinh")
    gl = mp.quad(f, pts, method="gauss-legendre")
    return QuadResult(ts, float(abs(ts - gl)), {"tanh-sinh": ts, "gauss-legendre": gl})


def _gauss_cutoff(alpha, linear: float) -> mp.mpf:
    """X with 1.5 Re(alpha) X^2 - linear X beyond the target digits."""
    ra = mp.re(alpha)
    L = (TOLERANCES["series_digits"] + 5) * mp.log(10)
    return (linear + mp.sqrt(linear ** 2 + 6 * ra * L)) / (3 * ra)


def mordell_ac(a: int, c: int, alpha) -> QuadResult:
    """J(a/c; alpha) = int_0^inf e^{-3 alpha x^2/2} (cosh((3a/c-2) alpha x) + cosh((3a/c-1) alpha x)) / cosh(3 alpha x/2) dx."""
    alpha = mp.mpc(alpha)
    if mp.re(alpha) <= 0:
        raise ValueError("need Re alpha > 0")
    r = mp.mpf(3 * a) / c

    def f(x):
        ax = alpha * x
        return mp.exp(-1.5 * alpha * x * x) * (mp.cosh((r - 2) * ax) + mp.cosh((r - 1) * ax)) / mp.cosh(1.5 * ax)

    X = _gauss_cutoff(alpha, float(3 * abs(alpha)))
    width = min(1, 2 / mp.sqrt(abs(mp.im(alpha)) + 1))
    return _two_rule_quad(f, _pieces(0, X, width))


def mordell_abc(a: int, b: int, c: int, alpha) -> QuadResult:
    """J(a,b,c; alpha) over the real line."""
    alpha = mp.mpc(alpha)
    if mp.re(alpha) <= 0:
        raise ValueError("need Re alpha > 0")
    # zeros of cosh(3 alpha x/2 - 3 pi i b/c) sit at x = 2 pi i (k + 1/2 + 3b/c) / (3 alpha)
    shift = mp.mpf(3 * b) / c
    dist = min(
        abs(mp.im(2j * mp.pi * (k + mp.mpf(1) / 2 + shift) / (3 * alpha))) for k in range(-int(shift) - 3, 4)
    )
    if dist < TOLERANCES["pole_distance"]:
        raise NumericError("cosh zero too close to the real axis")
    z1, z2 = _e(mp.mpf(b) / c), _e(mp.mpf(2 * b) / c)
    x0 = mp.mpf(a) / c

    def f(x):
        ax = alpha * x
        return mp.exp(-1.5 * alpha * x * x + 3 * ax * x0) * (z1 * mp.exp(-ax) + z2 * mp.exp(-2 * ax)) / mp.cosh(1.5 * ax - 3j * mp.pi * mp.mpf(b) / c)

    X = _gauss_cutoff(alpha, float(6 * abs(alpha)))
    width = min(1, 2 / mp.sqrt(abs(mp.im(alpha)) + 1))
    return _two_rule_quad(f, _pieces(x0 - X, x0 + X, width))


# period integrals


def period_integral(theta: Callable, z, lower: str = "conj") -> QuadResult:
    """int_{lower}^{i inf} theta(tau) / sqrt(-i (tau + z)) d tau along a vertical ray.

    lower "conj" starts at -conj(z), where -i(tau + z) = 2 Im z + t is real and positive.
    lower "zero" starts at 0; the piece next to 0 is dropped once the integrand is
    below the tail tolerance at three successive halvings.
    """
    z = _z(z)
    if lower == "conj":
        base = -mp.conj(z)
        y = mp.im(z)

        def f(t):
            return theta(base + 1j * t) / mp.sqrt(2 * y + t) * 1j

        r = _two_rule_quad(f, [0, mp.mpf(1) / 4, 1, 4, mp.inf])
        return r
    if lower != "zero":
        raise ValueError("lower must be 'conj' or 'zero'")

    def g(t):
        return theta(1j * t) / mp.sqrt(t - 1j * z) * 1j

    t0 = mp.mpf(1) / 8
    tail = TOLERANCES["tail"]
    for _ in range(40):
        vals = [abs(g(t0 / 2 ** j)) for j in range(3)]
        if max(vals) < tail and vals[0] >= vals[1] >= vals[2]:
            break
        t0 /= 2
    else:
        raise NumericError("period integral: no small-t cutoff found")
    r = _two_rule_quad(g, [t0, 4 * t0, mp.mpf(1) / 2, 2, 8, mp.inf])
    r.error += float(t0 * vals[0])
    return r


def _theta_ac_ray(a, c, tau):
    return theta_ac(a, c, tau, check=False)


def _theta1_ray(a, b, c, tau):
    return theta1(a, b, c, tau, check=False)


def _theta2_ray(a, b, c, tau):
    return theta2(a, b, c, tau, check=False)


def T1_ac(a: int, c: int, z):
    r = period_integral(lambda t: _theta_ac_ray(a, c, t), z)
    return -1j / mp.sqrt(3) * r.value


def T2_ac(a: int, c: int, z):
    r = period_integral(lambda t: _theta1_ray(0, -a, c, t), z)
    return 1j / (3 * c) * r.value


def T1_abc(a: int, b: int, c: int, z):
    r = period_integral(lambda t: _theta1_ray(a, b, c, t), z)
    return _e(mp.mpf(-5 * b) / (2 * c)) / (3 * c) * r.value


def T2_abc(a: int, b: int, c: int, z):
    r = period_integral(lambda t: _theta2_ray(a, b, c, t), z)
    return _e(mp.mpf(-5 * b) / (2 * c)) * 1j * mp.sqrt(3) / (6 * c) * r.value


# the family


def G_value(m: FamilyMember, z):
    z = _z(z)
    a, b, c = m.a, m.b, m.c
    if m.kind == "F1_ac":
        return nell(a, c, z) - T1_ac(a, c, z)
    if m.kind == "F2_ac":
        return mell(a, c, z) + eps2_ac(a, c, z) - T2_ac(a, c, z)
    if m.kind == "F1_abc":
        return nabc_cal(a, b, c, z) - T1_abc(a, b, c, z)
    return mabc_cal(a, b, c, z) + eps2_abc(a, b, c, z) - T2_abc(a, b, c, z)


def F_value(m: FamilyMember, z):
    return eta(z) * G_value(m, z)


def stroke(F: Callable, A: Mat2, k, z):
    """(ad - bc)^{k/2} (cz + d)^{-k} F(Az), principal branch."""
    if A.det <= 0:
        raise ValueError("stroke needs det A > 0")
    z = mp.mpc(z)
    w = A.c * z + A.d
    if w == 0:
        raise ZeroDivisionError("cz + d = 0")
    k = mp.mpf(k) if not isinstance(k, Fraction) else _f(k)
    return mp.power(A.det, k / 2) * mp.power(w, -k) * F((A.a * z + A.b) / w)


# exact q-expansions evaluated numerically


def eval_qexp(f, z) -> tuple:
    """Partial sum of an exact QExp at z with a crude tail estimate from the last coefficients."""
    z = _z(z)
    total = mp.mpc(0)
    big = 0.0
    for e, c in f.items():
        v = c.to_mpc()
        big = max(big, float(abs(v)))
        total += v * qpow(e, z)
    pe = f.prec_exponent()
    tail = 0.0 if pe is None else float(max(big, 1) * abs(qpow(pe, z)) * 10)
    return total, tail


def eval_series(name: str, params: Sequence[int], z):
    """Evaluate a named function at z."""
    table = {
        "eta": lambda: eta(z),
        "qpoch": lambda: qpochhammer_inf(z),
        "Nac": lambda: rank_lambert(*params, z),
        "Nac_eulerian": lambda: rank_eulerian(*params, z),
        "Mac": lambda: mac(*params, z),
        "Mabc": lambda: mabc(*params, z),
        "Nabc": lambda: nabc(*params, z),
        "Nell": lambda: nell(*params, z),
        "Mell": lambda: mell(*params, z),
        "MabcCal": lambda: mabc_cal(*params, z),
        "NabcCal": lambda: nabc_cal(*params, z),
        "Theta_ac": lambda: theta_ac(*params, z),
        "Theta1": lambda: theta1(*params, z),
        "Theta2": lambda: theta2(*params, z),
        "theta_tilde": lambda: theta_tilde(*params, z),
        "eps1_ac": lambda: eps1_ac(*params, z),
        "eps1_abc": lambda: eps1_abc(*params, z),
        "eps2_ac": lambda: eps2_ac(*params, z),
        "eps2_abc": lambda: eps2_abc(*params, z),
        "G1_ac": lambda: G_value(FamilyMember.ac(1, *params), z),
        "G2_ac": lambda: G_value(FamilyMember.ac(2, *params), z),
        "G1_abc": lambda: G_value(FamilyMember.abc(1, *params), z),
        "G2_abc": lambda: G_value(FamilyMember.abc(2, *params), z),
    }
    if name not in table:
        raise ValueError(f"unknown function {name!r}")
    with mp.workdps(DPS):
        return table[name]()


# transformation laws


@dataclass
class ResidualReport:
    law: str
    params: tuple
    point: complex
    branch: str
    residual: float
    lhs_abs: float
    tol: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol * max(1.0, self.lhs_abs)

    def to_json(self) -> dict:
        d = asdict(self)
        d["point"] = [self.point.real, self.point.imag]
        d["params"] = list(self.params)
        d["pass"] = self.passed
        return d


def _minus_inv(z):
    return -1 / z


def _law_ntrans1(p, z):
    a, c = p
    return nell(a, c, z + 1), _e(mp.mpf(-1) / 24) * nell(a, c, z), ""


def _label_value(kind_fn, m: FamilyMember, z):
    return kind_fn(m, z)


def _hol(m: FamilyMember, z):
    """Holomorphic normalized function attached to a label (N, M, N(a,b,c), M(a,b,c))."""
    a, b, c = m.a, m.b, m.c
    if m.kind == "F1_ac":
        return nell(a, c, z)
    if m.kind == "F2_ac":
        return mell(a, c, z)
    if m.kind == "F1_abc":
        return nabc_cal(a, b, c, z)
    return mabc_cal(a, b, c, z)


def _t_law(m: FamilyMember, z):
    """hol(z+1) vs the T rule (same prefactors as the G family, times zeta_24^-1)."""
    f, out = family_apply(m, "T", level="G")
    return _hol(m, z + 1), f.to_mpc() * _hol(out, z)


def _law_ntrans2(p, z):
    a, b, c = p
    lhs, rhs = _t_law(FamilyMember.abc(1, a, b, c), z)
    return lhs, rhs, "a>=b" if a >= b else "a<b"


def _law_mtrans1(p, z):
    a, c = p
    lhs, rhs = _t_law(FamilyMember.ac(2, a, c), z)
    return lhs, rhs, ""


def _law_mtrans2(p, z):
    a, b, c = p
    lhs, rhs = _t_law(FamilyMember.abc(2, a, b, c), z)
    br = "a+b<c" if a + b < c else ("a+b=c" if a + b == c else "a+b>c")
    return lhs, rhs, br


def _law_ntrans3(p, z):
    a, c = p
    lhs = nell(a, c, _minus_inv(z)) / sqrt_miz(z)
    rhs = mell(a, c, z) + 2 * mp.sqrt(3) * sqrt_miz(z) * mordell_ac(a, c, -2j * mp.pi * z).value
    return lhs, rhs, ""


def _law_ntrans4(p, z):
    a, b, c = p
    lhs = nabc_cal(a, b, c, _minus_inv(z)) / sqrt_miz(z)
    J = mordell_abc(a, b, c, -2j * mp.pi * z).value
    rhs = mabc_cal(a, b, c, z) + _e(mp.mpf(-5 * b) / (2 * c)) * mp.sqrt(3) * sqrt_miz(z) * J
    return lhs, rhs, ""


def _law_mtrans3(p, z):
    a, c = p
    lhs = mell(a, c, _minus_inv(z)) / sqrt_miz(z)
    rhs = nell(a, c, z) - 2 * mp.sqrt(3) * 1j / z * mordell_ac(a, c, 2j * mp.pi / z).value
    return lhs, rhs, ""


def _law_mtrans4(p, z):
    a, b, c = p
    lhs = mabc_cal(a, b, c, _minus_inv(z)) / sqrt_miz(z)
    J = mordell_abc(a, b, c, 2j * mp.pi / z).value
    rhs = nabc_cal(a, b, c, z) - _e(mp.mpf(-5 * b) / (2 * c)) * mp.sqrt(3) * 1j / z * J
    return lhs, rhs, ""


def _law_tt1(p, z):
    a, b, c = p
    rhs = _e(mp.mpf(-3 * b * b) / (2 * c * c)) * _e(mp.mpf(1) / 24) * theta1(a + b, b, c, z)
    return theta1(a, b, c, z + 1), rhs, ""


def _law_tt2(p, z):
    a, b, c = p
    lhs = mp.power(-1j * z, mp.mpf(-3) / 2) * theta1(a, b, c, _minus_inv(z))
    return lhs, -mp.sqrt(3) * 1j / 2 * theta2(a, b, c, z), ""


def _law_tt3(p, z):
    a, b, c = p
    rhs = _e(mp.mpf(3 * a * a) / (2 * c * c)) * _e(mp.mpf(1) / 24) * theta2(a, b - a, c, z)
    return theta2(a, b, c, z + 1), rhs, ""


def _law_tt4(p, z):
    a, b, c = p
    lhs = mp.power(-1j * z, mp.mpf(-3) / 2) * theta2(a, b, c, _minus_inv(z))
    return lhs, 2 * mp.sqrt(3) * 1j / 3 * theta1(a, b, c, z), ""


def _law_thatrans1(p, z):
    a, c = p
    return theta_ac(a, c, z + 1), _e(mp.mpf(1) / 24) * theta_ac(a, c, z), ""


def _law_thatrans2(p, z):
    a, c = p
    lhs = mp.power(-1j * z, mp.mpf(-3) / 2) * theta_ac(a, c, _minus_inv(z))
    return lhs, mp.sqrt(3) / (3 * c) * theta1(0, -a, c, z), ""


def _law_jint1(p, z):
    a, c = p
    lhs = 2 * mp.sqrt(3) / (1j * z) * mordell_ac(a, c, 2j * mp.pi / z).value
    P = period_integral(lambda t: _theta_ac_ray(a, c, t), z, "zero").value
    return lhs, 1j / mp.sqrt(3) * P + eps1_ac(a, c, z), eps_branch(p)


def _law_jint2(p, z):
    a, c = p
    lhs = 2 * mp.sqrt(3) * sqrt_miz(z) * mordell_ac(a, c, -2j * mp.pi * z).value
    P = period_integral(lambda t: _theta1_ray(0, -a, c, t), z, "zero").value
    return lhs, -1j / (3 * c) * P + eps2_ac(a, c, z), eps_branch(p)


def _law_jint3(p, z):
    a, b, c = p
    lhs = mp.sqrt(3) / (-2j * z) * mordell_abc(a, b, c, 2j * mp.pi / z).value
    P = period_integral(lambda t: _theta1_ray(a, b, c, t), z, "zero").value
    return lhs, P / (6 * c) + eps1_abc(a, b, c, z), eps_branch(p)


def _law_jint4(p, z):
    a, b, c = p
    r = _e(mp.mpf(-5 * b) / (2 * c))
    lhs = r * mp.sqrt(3) * sqrt_miz(z) * mordell_abc(a, b, c, -2j * mp.pi * z).value
    P = period_integral(lambda t: _theta2_ray(a, b, c, t), z, "zero").value
    return lhs, -r * 1j * mp.sqrt(3) / (6 * c) * P + eps2_abc(a, b, c, z), eps_branch(p)


def _member(kind: str, p) -> FamilyMember:
    if kind.endswith("_ac"):
        return FamilyMember.ac(int(kind[1]), *p)
    return FamilyMember.abc(int(kind[1]), *p)


def _g_law(kind: str, gen: str):
    def law(p, z):
        m = _member(kind, p)
        f, out = family_apply(m, gen, level="G")
        if gen == "T":
            lhs = G_value(m, z + 1)
        else:
            lhs = G_value(m, _minus_inv(z)) / sqrt_miz(z)
        return lhs, f.to_mpc() * G_value(out, z), str(out)

    return law


def _law_mainthm(p, z):
    """F1(l/p)|_1 A = mu(A, l) F1(dl/p); params (p, l, a, b, c, d)."""
    prime, ell, a, b, c, d = p
    A = Mat2(a, b, c, d)
    mu, new = mu_multiplier(A, ell, prime)
    m = FamilyMember.ac(1, ell, prime)
    lhs = stroke(lambda w: F_value(m, w), A, 1, z)
    return lhs, mu.to_mpc() * F_value(FamilyMember.ac(1, new, prime), z), f"l'={new}"


def _law_eta_mult(p, z):
    A = Mat2(*p)
    return stroke(eta, A, Fraction(1, 2), z), eta_multiplier(A).to_mpc() * eta(z), ""


def _law_f20id(p, z):
    ell, prime = p
    lhs = G_value(FamilyMember.abc(2, 0, ell, prime), z)
    return lhs, 1j * _e(mp.mpf(-5 * ell) / (2 * prime)) * G_value(FamilyMember.ac(1, ell, prime), z), ""


def _law_f1f2id(p, z):
    """F1(b,b,c) = i zeta_c^{-5b} zeta_{c^2}^{3b^2} F2(b,c-b,c)."""
    b, c = p
    lhs = G_value(FamilyMember.abc(1, b, b, c), z)
    rhs = 1j * _e(mp.mpf(-5 * b) / c) * _e(mp.mpf(3 * b * b) / (c * c)) * G_value(FamilyMember.abc(2, b, c - b, c), z)
    return lhs, rhs, ""


LAWS: dict[str, Callable] = {
    "Ntrans1": _law_ntrans1,
    "Ntrans2": _law_ntrans2,
    "Mtrans1": _law_mtrans1,
    "Mtrans2": _law_mtrans2,
    "Ntrans3": _law_ntrans3,
    "Ntrans4": _law_ntrans4,
    "Mtrans3": _law_mtrans3,
    "Mtrans4": _law_mtrans4,
    "tt1": _law_tt1,
    "tt2": _law_tt2,
    "tt3": _law_tt3,
    "tt4": _law_tt4,
    "THAtrans1": _law_thatrans1,
    "THAtrans2": _law_thatrans2,
    "Jint1": _law_jint1,
    "Jint2": _law_jint2,
    "Jint3": _law_jint3,
    "Jint4": _law_jint4,
    "G1trans1": _g_law("F1_ac", "T"),
    "G2trans1": _g_law("F2_ac", "T"),
    "GG1trans1": _g_law("F1_abc", "T"),
    "GG2trans1": _g_law("F2_abc", "T"),
    "G1trans2": _g_law("F1_ac", "S"),
    "G2trans2": _g_law("F2_ac", "S"),
    "GG1trans2": _g_law("F1_abc", "S"),
    "GG2trans2": _g_law("F2_abc", "S"),
    "mainthm": _law_mainthm,
    "eta_mult": _law_eta_mult,
    "F20id": _law_f20id,
    "F1F2id": _law_f1f2id,
}


def check_transform(law: str, params: Sequence[int], z, tol: Optional[float] = None) -> ResidualReport:
    if law not in LAWS:
        raise ValueError(f"unknown law {law!r}")
    tol = TOLERANCES["residual"] if tol is None else tol
    started = time.perf_counter()
    with mp.workdps(DPS):
        zz = _z(z)
        lhs, rhs, branch = LAWS[law](tuple(params), zz)
        res = abs(lhs - rhs)
    return ResidualReport(
        law,
        tuple(params),
        complex(z),
        branch,
        float(res),
        float(abs(lhs)),
        tol,
        time.perf_counter() - started,
    )


POINTS = (1j, 0.25 + 1j, -1 / 3 + 0.8j, 0.1 + 0.6j)

# parameter sets chosen so every branch of every law is exercised
MATRIX_PARAMS: dict[str, list[tuple]] = {
    "Ntrans1": [(1, 5), (3, 7)],
    "Ntrans2": [(3, 1, 5), (1, 3, 5), (0, 2, 7)],
    "Mtrans1": [(1, 5), (5, 7)],
    "Mtrans2": [(1, 2, 5), (2, 3, 5), (4, 3, 5)],
    "Ntrans3": [(1, 5), (2, 7)],
    "Ntrans4": [(1, 2, 5), (0, 2, 7)],
    "Mtrans3": [(1, 5), (6, 7)],
    "Mtrans4": [(2, 2, 5), (0, 3, 7)],
    "tt1": [(1, 2, 5)],
    "tt2": [(1, 2, 5)],
    "tt3": [(3, 1, 5)],
    "tt4": [(1, 2, 5)],
    "THAtrans1": [(2, 5)],
    "THAtrans2": [(1, 5)],
    "Jint1": [(1, 7), (2, 7), (6, 7)],
    "Jint2": [(1, 7), (2, 5), (6, 7)],
    "Jint3": [(0, 2, 5), (2, 2, 5), (6, 2, 7)],
    "Jint4": [(0, 2, 5), (2, 3, 5), (6, 2, 7)],
    "G1trans1": [(1, 5)],
    "G2trans1": [(2, 5), (1, 7)],
    "GG1trans1": [(3, 1, 5), (1, 3, 5)],
    "GG2trans1": [(1, 2, 5), (2, 3, 5), (4, 3, 5)],
    "G1trans2": [(1, 5)],
    "G2trans2": [(2, 7)],
    "GG1trans2": [(1, 2, 5)],
    "GG2trans2": [(0, 3, 5)],
    "F20id": [(2, 5)],
    "F1F2id": [(2, 5)],
}

# matrix laws use their own points: z = -d/c + i/c puts both z and Az at height 1/c
MATRIX_CASES: dict[str, list[tuple]] = {
    "mainthm": [
        (5, 1, -2, -1, 5, 2),  # V_2 for p = 5
        (5, 2, 3, 1, 5, 2),
        (7, 3, -3, -1, 7, 2),
    ],
    "eta_mult": [(2, 1, 5, 3), (-3, 2, 7, -5), (1, 0, -4, 1), (0, -1, 1, 0)],
}

def matrix_point(law: str, case: tuple) -> complex:
    c, d = case[-2], case[-1]
    if c == 0:
        return 1j
    return complex(-d / c, 1 / abs(c))


def transform_matrix(points: Sequence[complex] = POINTS[:3]) -> list[tuple[str, tuple, complex]]:
    jobs = []
    for law, plist in MATRIX_PARAMS.items():
        for params in plist:
            for z in points:
                jobs.append((law, params, z))
    for law, cases in MATRIX_CASES.items():
        for case in cases:
            z0 = matrix_point(law, case)
            for shift in (0, 0.05, -0.05):
                jobs.append((law, case, z0 + shift))
    return jobs


def run_matrix(jobs=None, tol: Optional[float] = None) -> list[ResidualReport]:
    jobs = transform_matrix() if jobs is None else jobs
    return [check_transform(law, params, z, tol) for law, params, z in jobs]
