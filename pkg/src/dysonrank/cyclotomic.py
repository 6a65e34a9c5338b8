"""Exact arithmetic in cyclotomic fields and exact roots of unity.

Elements of Q(zeta_n) are stored in the power basis 1, zeta, ..., zeta^(phi(n)-1)
reduced modulo the n-th cyclotomic polynomial, which makes the representation
canonical: two equal elements of the same order have identical coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence, Union

import cmath

MAX_ORDER = 1000

Rational = Union[int, Fraction]


class CyclotomicError(ValueError):
    pass


class OrderOverflowError(CyclotomicError):
    pass


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=None)
def mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    if m > 1:
        result = -result
    return result


def _poly_divexact(num: list[int], den: Sequence[int]) -> list[int]:
    # den is monic; division is exact over Z
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + dn]
        out[i] = c
        if c:
            for j in range(dn + 1):
                num[i + j] -= c * den[j]
    if any(num[:dn]):
        raise CyclotomicError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first (recursive divisor method)."""
    if n < 1:
        raise CyclotomicError("order must be positive")
    poly = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        poly = _poly_divexact(poly, cyclotomic_poly(d))
    return tuple(poly)


@lru_cache(maxsize=64)
def power_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Row k holds x^k reduced modulo Phi_n, for 0 <= k < n."""
    phi = totient(n)
    cp = cyclotomic_poly(n)
    rows = []
    cur = [0] * phi
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            for j in range(phi):
                cur[j] -= top * cp[j]
    return tuple(rows)


def _check_order(n: int) -> None:
    if n < 1:
        raise CyclotomicError("order must be positive")
    if n > MAX_ORDER:
        raise OrderOverflowError(f"cyclotomic order {n} exceeds bound {MAX_ORDER}")


def _as_fraction(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def reduce_int_poly(n: int, poly: Sequence[int]) -> list[int]:
    """Reduce an integer polynomial in zeta_n to the power basis."""
    phi = totient(n)
    if len(poly) <= phi:
        return list(poly) + [0] * (phi - len(poly))
    table = power_table(n)
    out = list(poly[:phi])
    for k in range(phi, len(poly)):
        c = poly[k]
        if c:
            row = table[k % n]
            for j in range(phi):
                if row[j]:
                    out[j] += c * row[j]
    return out


class CycNum:
    """Element of Q(zeta_n)."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Iterable[Rational]):
        _check_order(order)
        cs = tuple(_as_fraction(c) for c in coeffs)
        if len(cs) != totient(order):
            raise CyclotomicError(
                f"expected {totient(order)} coefficients for order {order}, got {len(cs)}"
            )
        self.order = order
        self.coeffs = cs

    # constructors

    @classmethod
    def rational(cls, r: Rational, order: int = 1) -> CycNum:
        cs = [Fraction(0)] * totient(order)
        cs[0] = _as_fraction(r)
        return cls(order, cs)

    @classmethod
    def zero(cls, order: int = 1) -> CycNum:
        return cls.rational(0, order)

    @classmethod
    def one(cls, order: int = 1) -> CycNum:
        return cls.rational(1, order)

    @classmethod
    def zeta(cls, n: int, k: int = 1) -> CycNum:
        _check_order(n)
        return cls(n, power_table(n)[k % n])

    @classmethod
    def from_int_poly(cls, n: int, poly: Sequence[Rational]) -> CycNum:
        """sum_k poly[k] zeta_n^k for arbitrary k (reduced)."""
        _check_order(n)
        den = 1
        for c in poly:
            if isinstance(c, Fraction):
                den = lcm(den, c.denominator)
        ints = [int(c * den) for c in poly]
        red = reduce_int_poly(n, ints)
        return cls(n, (Fraction(c, den) for c in red))

    # structure

    @property
    def phi(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def embed(self, m: int) -> CycNum:
        """Image under the inclusion Q(zeta_n) -> Q(zeta_m), n | m."""
        n = self.order
        if m % n:
            raise CyclotomicError(f"cannot embed order {n} into order {m}")
        if m == n:
            return self
        _check_order(m)
        step = m // n
        phi_m = totient(m)
        table = power_table(m)
        den = self.common_denominator()
        acc = [0] * phi_m
        for k, c in enumerate(self.coeffs):
            if c:
                ci = int(c * den)
                row = table[(k * step) % m]
                for j in range(phi_m):
                    if row[j]:
                        acc[j] += ci * row[j]
        return CycNum(m, (Fraction(a, den) for a in acc))

    def common_denominator(self) -> int:
        den = 1
        for c in self.coeffs:
            den = lcm(den, c.denominator)
        return den

    def int_vector(self, den: int) -> list[int]:
        return [int(c * den) for c in self.coeffs]

    # arithmetic

    def _unify(self, other) -> tuple[CycNum, CycNum]:
        if not isinstance(other, CycNum):
            other = CycNum.rational(other, self.order)
        if other.order == self.order:
            return self, other
        m = lcm(self.order, other.order)
        _check_order(m)
        return self.embed(m), other.embed(m)

    def __add__(self, other) -> CycNum:
        if isinstance(other, (int, Fraction)):
            cs = list(self.coeffs)
            cs[0] += other
            return CycNum(self.order, cs)
        a, b = self._unify(other)
        return CycNum(a.order, (x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CycNum:
        return CycNum(self.order, (-x for x in self.coeffs))

    def __sub__(self, other) -> CycNum:
        return self + (-other)

    def __rsub__(self, other) -> CycNum:
        return (-self) + other

    def __mul__(self, other) -> CycNum:
        if isinstance(other, (int, Fraction)):
            return CycNum(self.order, (x * other for x in self.coeffs))
        if not isinstance(other, CycNum):
            return NotImplemented
        a, b = self._unify(other)
        if a.is_rational():
            return b * a.coeffs[0]
        if b.is_rational():
            return a * b.coeffs[0]
        da, db = a.common_denominator(), b.common_denominator()
        va, vb = a.int_vector(da), b.int_vector(db)
        prod = [0] * (len(va) + len(vb) - 1)
        for i, x in enumerate(va):
            if x:
                for j, y in enumerate(vb):
                    if y:
                        prod[i + j] += x * y
        red = reduce_int_poly(a.order, prod)
        den = da * db
        return CycNum(a.order, (Fraction(c, den) for c in red))

    __rmul__ = __mul__

    def __pow__(self, e: int) -> CycNum:
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNum.one(self.order)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> CycNum:
        if self.is_zero():
            raise ZeroDivisionError("division by zero")
        if self.is_rational():
            return CycNum.rational(1 / self.coeffs[0], self.order)
        # extended Euclid for a(x) against Phi_n(x) over Q
        r0 = [Fraction(c) for c in cyclotomic_poly(self.order)]
        r1 = _trim(list(self.coeffs))
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while not (len(r1) == 1 and r1[0] == 0):
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _trim(_poly_sub(s0, _poly_mul(q, s1)))
        if len(r0) != 1:
            raise CyclotomicError("element is not invertible")
        return CycNum.from_int_poly(self.order, [c / r0[0] for c in s0])

    def __truediv__(self, other) -> CycNum:
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / _as_fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other) -> CycNum:
        return self.inverse() * other

    def galois(self, g: int) -> CycNum:
        """Apply the automorphism zeta_n -> zeta_n^g, gcd(g, n) = 1."""
        n = self.order
        if gcd(g, n) != 1:
            raise CyclotomicError("Galois exponent must be a unit")
        poly = [Fraction(0)] * n
        for k, c in enumerate(self.coeffs):
            poly[(k * g) % n] += c
        return CycNum.from_int_poly(n, poly)

    def conj(self) -> CycNum:
        return self.galois(-1)

    def trace(self) -> Fraction:
        """Absolute trace to Q divided by the degree (independent of the ambient order)."""
        n = self.order
        tot = Fraction(0)
        for k, c in enumerate(self.coeffs):
            if c:
                d = n // gcd(k, n)
                tot += c * Fraction(mobius(d), totient(d))
        return tot

    # comparison

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        if not isinstance(other, CycNum):
            return NotImplemented
        if other.order == self.order:
            return self.coeffs == other.coeffs
        a, b = self._unify(other)
        return a.coeffs == b.coeffs

    def __hash__(self) -> int:
        return hash(self.trace())

    def __bool__(self) -> bool:
        return not self.is_zero()

    # numeric embedding

    def __complex__(self) -> complex:
        n = self.order
        return sum(
            (float(c) * cmath.exp(2j * cmath.pi * k / n) for k, c in enumerate(self.coeffs) if c),
            0j,
        )

    def to_mpc(self):
        import mpmath

        n = self.order
        total = mpmath.mpc(0)
        for k, c in enumerate(self.coeffs):
            if c:
                total += mpmath.mpf(c.numerator) / c.denominator * mpmath.expjpi(mpmath.mpf(2 * k) / n)
        return total

    # serialization

    def to_json(self) -> dict:
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, data: dict) -> CycNum:
        return cls(int(data["order"]), (Fraction(s) for s in data["coeffs"]))

    def __repr__(self) -> str:
        terms = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if k == 0 else (f"z{self.order}" if k == 1 else f"z{self.order}^{k}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"{c}*{mono}")
        body = " + ".join(terms).replace("+ -", "- ") if terms else "0"
        return f"CycNum({body})"


def _trim(p: list) -> list:
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]


def _poly_mul(a: list, b: list) -> list:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divmod(a: list, b: list) -> tuple[list, list]:
    a = list(a)
    b = _trim(list(b))
    if len(a) < len(b):
        return [Fraction(0)], _trim(a)
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(q) - 1, -1, -1):
        c = a[i + len(b) - 1] / lead
        q[i] = c
        if c:
            for j, y in enumerate(b):
                a[i + j] -= c * y
    rem = _trim(a[: len(b) - 1] or [Fraction(0)])
    return q, rem


def zeta(n: int, k: int = 1) -> CycNum:
    return CycNum.zeta(n, k)


def sqrt3() -> CycNum:
    """sqrt(3) = zeta_12 + zeta_12^{-1} = 2 cos(pi/6)."""
    return zeta(12, 1) + zeta(12, -1)


def imag_unit() -> CycNum:
    return zeta(4, 1)


def sin_pi(r: Fraction) -> CycNum:
    """sin(pi r) for rational r, as an element of Q(zeta_{4 den})."""
    r = _as_fraction(r)
    n = 2 * r.denominator
    n = lcm(n, 4)
    k = r.numerator * (n // (2 * r.denominator))
    return (zeta(n, k) - zeta(n, -k)) * zeta(n, -n // 4) * Fraction(1, 2)


def cos_pi(r: Fraction) -> CycNum:
    r = _as_fraction(r)
    n = 2 * r.denominator
    k = r.numerator
    return (zeta(n, k) + zeta(n, -k)) * Fraction(1, 2)


class UnitAngle:
    """Root of unity exp(pi i t), t a rational reduced modulo 2."""

    __slots__ = ("t",)

    def __init__(self, t: Rational = 0):
        self.t = _as_fraction(t) % 2

    @classmethod
    def root(cls, n: int, k: int = 1) -> UnitAngle:
        """zeta_n^k."""
        return cls(Fraction(2 * k, n))

    @classmethod
    def sign(cls, s: int) -> UnitAngle:
        if s not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        return cls(0 if s == 1 else 1)

    def __mul__(self, other: UnitAngle) -> UnitAngle:
        if not isinstance(other, UnitAngle):
            return NotImplemented
        return UnitAngle(self.t + other.t)

    def inverse(self) -> UnitAngle:
        return UnitAngle(-self.t)

    def __truediv__(self, other: UnitAngle) -> UnitAngle:
        return self * other.inverse()

    def __pow__(self, e: int) -> UnitAngle:
        return UnitAngle(self.t * e)

    def __eq__(self, other) -> bool:
        if isinstance(other, UnitAngle):
            return self.t == other.t
        if isinstance(other, int) and other in (1, -1):
            return self == UnitAngle.sign(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("UnitAngle", self.t))

    def is_one(self) -> bool:
        return self.t == 0

    @property
    def order(self) -> int:
        """Multiplicative order: smallest n with angle^n = 1."""
        return (self.t / 2).denominator

    def to_cyc(self) -> CycNum:
        den = self.t.denominator
        return zeta(2 * den, self.t.numerator)

    def __complex__(self) -> complex:
        return cmath.exp(1j * cmath.pi * float(self.t))

    def to_mpc(self):
        import mpmath

        return mpmath.expjpi(mpmath.mpf(self.t.numerator) / self.t.denominator)

    def __repr__(self) -> str:
        return f"UnitAngle({self.t})"

    def to_json(self) -> str:
        return str(self.t)
