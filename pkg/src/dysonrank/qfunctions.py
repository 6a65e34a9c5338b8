"""Constructors for the named q-series and the partition-rank oracle.

All `prec` arguments are exclusive exponent bounds: a returned series is exact
for every exponent strictly below `prec`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .cyclotomic import CycNum, UnitAngle, lcm, reduce_int_poly, sin_pi, sqrt3, zeta
from .series import QExp, SeriesError, invert

Number = Union[int, Fraction]


def _frac(x: Number) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _n_terms(prec: Number) -> int:
    """Number of integral exponents 0..n-1 lying below prec."""
    return max(0, math.ceil(_frac(prec)))


class _Dense:
    """Dense series over Z[x]/(x^n - 1) on a grid, used while building expansions.

    Row i stores the coefficient of q^((offset + i)/denom); the coefficient ring
    maps onto Q(zeta_n) by reduction modulo the n-th cyclotomic polynomial.
    """

    __slots__ = ("n", "rows", "offset", "denom")

    def __init__(self, n: int, length: int, offset: int = 0, denom: int = 1):
        self.n = n
        self.rows: list[Optional[list[int]]] = [None] * max(0, length)
        self.offset = offset
        self.denom = denom

    def add(self, j: int, k: int, c: int = 1) -> None:
        """Add c * x^k at numerator j (ignored outside the window)."""
        i = j - self.offset
        if 0 <= i < len(self.rows):
            row = self.rows[i]
            if row is None:
                row = self.rows[i] = [0] * self.n
            row[k % self.n] += c

    def divide_one_minus(self, step: int, k: int = 0) -> None:
        """Multiply by 1/(1 - x^k q^(step/denom)), step > 0."""
        n = self.n
        rows = self.rows
        for i in range(step, len(rows)):
            src = rows[i - step]
            if src is None:
                continue
            dst = rows[i]
            if dst is None:
                dst = rows[i] = [0] * n
            if k % n == 0:
                for t in range(n):
                    dst[t] += src[t]
            else:
                for t in range(n):
                    if src[t]:
                        dst[(t + k) % n] += src[t]

    def multiply_one_minus(self, step: int, k: int = 0) -> None:
        """Multiply by (1 - x^k q^(step/denom))."""
        n = self.n
        rows = self.rows
        for i in range(len(rows) - 1, step - 1, -1):
            src = rows[i - step]
            if src is None:
                continue
            dst = rows[i]
            if dst is None:
                dst = rows[i] = [0] * n
            for t in range(n):
                if src[t]:
                    dst[(t + k) % n] -= src[t]

    def add_shifted(self, other: _Dense, shift: int, k: int = 0, c: int = 1) -> None:
        """self += c * x^k * q^(shift/denom) * other."""
        n = self.n
        for i, src in enumerate(other.rows):
            if src is None:
                continue
            j = other.offset + i + shift - self.offset
            if not 0 <= j < len(self.rows):
                continue
            dst = self.rows[j]
            if dst is None:
                dst = self.rows[j] = [0] * n
            for t in range(n):
                if src[t]:
                    dst[(t + k) % n] += c * src[t]

    def to_qexp(self, order: Optional[int] = None, den: int = 1) -> QExp:
        """Reduce into Q(zeta_order); x maps to zeta_n which must divide into order."""
        n = self.n
        order = order or n
        step = order // n
        terms = {}
        for i, row in enumerate(self.rows):
            if row is None or not any(row):
                continue
            if step == 1:
                red = reduce_int_poly(order, row)
            else:
                poly = [0] * order
                for t, v in enumerate(row):
                    poly[t * step] += v
                red = reduce_int_poly(order, poly)
            if any(red):
                terms[self.offset + i] = CycNum(order, (Fraction(v, den) for v in red))
        return QExp(terms, self.denom, self.offset + len(self.rows), order)


# products and partitions


def pentagonal_terms(limit: int) -> Iterator[tuple[int, int]]:
    """(exponent, sign) of the Euler product (q;q)_inf for exponents < limit."""
    yield 0, 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if e1 >= limit:
            break
        s = -1 if k % 2 else 1
        yield e1, s
        e2 = k * (3 * k + 1) // 2
        if e2 < limit:
            yield e2, s
        k += 1


def euler_product(prec: Number, step: int = 1) -> QExp:
    """(q^step; q^step)_inf."""
    n = _n_terms(prec)
    return QExp({e * step: s for e, s in pentagonal_terms(_n_terms(Fraction(n, step)))}, 1, n)


@lru_cache(maxsize=16)
def _partition_numbers(n: int) -> tuple[int, ...]:
    p = [0] * n
    if n:
        p[0] = 1
    pent = [(e, s) for e, s in pentagonal_terms(n) if e > 0]
    for m in range(1, n):
        acc = 0
        for e, s in pent:
            if e > m:
                break
            acc += s * p[m - e]
        p[m] = -acc
    return tuple(p)


def partition_numbers(n: int) -> list[int]:
    """p(0), ..., p(n-1) by Euler's recurrence."""
    return list(_partition_numbers(n))


def partition_series(prec: Number, step: int = 1) -> QExp:
    """1/(q^step; q^step)_inf."""
    n = _n_terms(prec)
    p = _partition_numbers(_n_terms(Fraction(n, step)))
    return QExp({i * step: v for i, v in enumerate(p)}, 1, n)


def enumerate_partitions(n: int, largest: Optional[int] = None) -> Iterator[tuple[int, ...]]:
    """All partitions of n as non-increasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in enumerate_partitions(n - first, first):
            yield (first,) + rest


def partition_rank(parts: Sequence[int]) -> int:
    return (parts[0] - len(parts)) if parts else 0


RANK_ORACLE_BOUND = 120


@dataclass(frozen=True)
class RankTable:
    """Counts N(m, n) of partitions of n with rank m, for n <= n_max."""

    n_max: int
    counts: dict = field(repr=False)

    def N(self, m: int, n: int) -> int:
        return self.counts.get((m, n), 0)

    def residue_count(self, r: int, t: int, n: int) -> int:
        """N(r, t, n): partitions of n with rank congruent to r mod t."""
        return sum(v for (m, nn), v in self.counts.items() if nn == n and (m - r) % t == 0)

    def p(self, n: int) -> int:
        return sum(v for (m, nn), v in self.counts.items() if nn == n)

    def row(self, n: int) -> dict[int, int]:
        return {m: v for (m, nn), v in self.counts.items() if nn == n}


def rank_oracle(n_max: int, method: str = "box") -> RankTable:
    """Rank counts by direct combinatorics.

    method="enumerate" walks every partition; method="box" counts partitions with
    prescribed largest part L and number of parts k by the box recurrence
    B(n; k, L) = B(n; k-1, L) + B(n-k; k, L-1), then inclusion-exclusion.
    """
    if n_max > RANK_ORACLE_BOUND or n_max < 0:
        raise ValueError(f"rank oracle bound is 0..{RANK_ORACLE_BOUND}")
    counts: dict[tuple[int, int], int] = {(0, 0): 1}
    if method == "enumerate":
        for n in range(1, n_max + 1):
            for parts in enumerate_partitions(n):
                key = (partition_rank(parts), n)
                counts[key] = counts.get(key, 0) + 1
        return RankTable(n_max, counts)
    if method != "box":
        raise ValueError("method must be 'box' or 'enumerate'")
    size = n_max + 1
    # box[k][L] is the vector over n of partitions into at most k parts each <= L
    box = [[None] * size for _ in range(size)]
    unit = np.zeros(size, dtype=np.int64)
    unit[0] = 1
    for L in range(size):
        box[0][L] = unit
    for k in range(1, size):
        box[k][0] = unit
        for L in range(1, size):
            v = box[k - 1][L].copy()
            v[k:] += box[k][L - 1][: size - k]
            box[k][L] = v
    for k in range(1, size):
        for L in range(1, size):
            exact = box[k][L] - box[k - 1][L] - box[k][L - 1] + box[k - 1][L - 1]
            m = L - k
            for n in np.nonzero(exact)[0]:
                counts[(m, int(n))] = counts.get((m, int(n)), 0) + int(exact[n])
    return RankTable(n_max, counts)


# rank generating function


def _rank_lambert_numerator(c: int, a: int, n_terms: int) -> _Dense:
    """1 + sum_{n>=1} (-1)^n (1+q^n)(1-z)(1-1/z) q^{n(3n+1)/2}/((1-zq^n)(1-q^n/z)), z = x^a."""
    acc = _Dense(c, n_terms)
    acc.add(0, 0, 1)
    if a % c == 0:
        return acc
    n = 1
    while n * (3 * n + 1) // 2 < n_terms:
        base = n * (3 * n + 1) // 2
        sign = -1 if n % 2 else 1
        # S_k = sum_{j=0}^k z^{2j-k}; coefficient of q^{nk} is (2 - z - 1/z) S_k
        s = [0] * c
        s[0] = 1
        k = 0
        while base + n * k < n_terms:
            w = [0] * c
            for t in range(c):
                v = s[t]
                if v:
                    w[t] += 2 * v
                    w[(t + a) % c] -= v
                    w[(t - a) % c] -= v
            for shift in (0, n):
                j = base + n * k + shift
                if j < n_terms:
                    row = acc.rows[j]
                    if row is None:
                        row = acc.rows[j] = [0] * c
                    for t in range(c):
                        if w[t]:
                            row[t] += sign * w[t]
            # S_{k+1} = z^{-1} S_k + z^{k+1}
            s = [s[(t + a) % c] for t in range(c)]
            s[((k + 1) * a) % c] += 1
            k += 1
        n += 1
    return acc


def rank_series(c: int, a: int, prec: Number) -> QExp:
    """R(zeta_c^a, q) from the Lambert-series form with the 1/(q;q)_inf prefactor."""
    if c < 1:
        raise ValueError("c must be positive")
    n = _n_terms(prec)
    num = _rank_lambert_numerator(c, a, n).to_qexp(c)
    return num * partition_series(n)


def rank_series_eulerian(c: int, a: int, prec: Number) -> QExp:
    """R(zeta_c^a, q) = 1 + sum_{n>=1} q^{n^2}/((zq;q)_n (q/z;q)_n)."""
    N = _n_terms(prec)
    acc = _Dense(c, N)
    term = _Dense(c, N)
    term.add(0, 0, 1)
    acc.add(0, 0, 1)
    n = 1
    while n * n < N:
        term.divide_one_minus(n, a)
        term.divide_one_minus(n, -a)
        acc.add_shifted(term, n * n)
        n += 1
    return acc.to_qexp(c)


def rank_table_from_series(c: int, prec: int) -> dict[int, list[int]]:
    """Residue counts N(k, c, n) for n < prec, read off R(zeta_c, q) for prime c.

    For prime c the counts are determined by the reduced coefficient vector
    together with p(n), since 1 + zeta + ... + zeta^{c-1} = 0.
    """
    R = rank_series(c, 1, prec)
    p = partition_numbers(prec)
    out = {}
    for n in range(prec):
        coeff = R.coefficient(n).coeffs
        # sum_k N_k zeta^k with zeta^{c-1} = -(1 + ... + zeta^{c-2})
        # coefficient of zeta^k is N_k - N_{c-1}; total is p(n)
        diffs = [int(x) for x in coeff]
        last = Fraction(p[n] - sum(diffs), c)
        if last.denominator != 1:
            raise SeriesError("inconsistent rank coefficient")
        lv = int(last)
        out[n] = [d + lv for d in diffs] + [lv]
    return out


# Appell-Lerch style sums


def _appell_sum(a: int, c: int, b: int, N_grid: int) -> tuple[_Dense, Optional[CycNum]]:
    """sum_n (-1)^n q^{n+a/c}/(1 - zeta_c^b q^{n+a/c}) q^{3n(n+1)/2} on grid c.

    Returns the dense part and, when a = 0, the exact n = 0 constant 1/(1 - zeta_c^b)
    which has no geometric expansion.
    """
    acc = _Dense(c, N_grid)
    special = None
    # n >= 0: x/(1 - w x) = sum_{k>=1} w^{k-1} x^k
    n = 0
    while True:
        base = c * 3 * n * (n + 1) // 2
        step = c * n + a
        if base + max(step, 0) >= N_grid and n > 0:
            break
        if step == 0:
            special = (1 - zeta(c, b)).inverse() if b % c else None
            if special is None:
                raise SeriesError("singular term 1/(1 - q^0)")
        else:
            sign = -1 if n % 2 else 1
            k = 1
            while base + k * step < N_grid:
                acc.add(base + k * step, b * (k - 1), sign)
                k += 1
        n += 1
    # n <= -1: x/(1 - w x) = -w^{-1} sum_{k>=0} w^{-k} x^{-k}
    n = -1
    while True:
        base = c * 3 * n * (n + 1) // 2
        step = -(c * n + a)
        if base >= N_grid:
            break
        sign = -1 if n % 2 else 1
        k = 0
        while base + k * step < N_grid:
            acc.add(base + k * step, -b * (k + 1), -sign)
            k += 1
        n -= 1
    return acc, special


def mac_series(a: int, c: int, prec: Number) -> QExp:
    """M(a/c; z), 0 < a < c, on grid c."""
    if not 0 < a < c:
        raise ValueError("M(a/c) needs 0 < a < c")
    N = _n_terms(prec)
    dense, _ = _appell_sum(a, c, 0, N * c)
    inner = QExp(dense.to_qexp(1).terms, c, N * c, 1)
    return inner * partition_series(N)


def mabc_series(a: int, b: int, c: int, prec: Number) -> QExp:
    """M(a,b,c; z), 0 <= a < c, 0 < b < c, on grid c over Q(zeta_c)."""
    if not (0 <= a < c and 0 < b < c):
        raise ValueError("M(a,b,c) needs 0 <= a < c and 0 < b < c")
    N = _n_terms(prec)
    dense, special = _appell_sum(a, c, b, N * c)
    inner = QExp(dense.to_qexp(c).terms, c, N * c, c)
    if special is not None:
        inner = inner + QExp({0: special}, c, None, c)
    return inner * partition_series(N)


def k_branch(b: int, c: int) -> int:
    """k(b,c): 0, 1, 2, 3 on (0,1/6), (1/6,1/2), (1/2,5/6), (5/6,1)."""
    x = Fraction(b, c)
    if x in (0, Fraction(1, 6), Fraction(1, 2), Fraction(5, 6)) or not 0 < x < 1:
        raise ValueError(f"k(b,c) undefined at b/c = {x}")
    if x < Fraction(1, 6):
        return 0
    if x < Fraction(1, 2):
        return 1
    if x < Fraction(5, 6):
        return 2
    return 3


def _nabc_inner(a: int, b: int, c: int, N: int, form: str) -> QExp:
    """(q;q)_inf N(a,b,c;z) on grid 2c over Q(zeta_n), n = lcm(4, 2c)."""
    n = lcm(4, 2 * c)
    zi = n // 4
    z2c = n // (2 * c)
    zc = n // c
    k = k_branch(b, c)
    top = 2 * c * N
    # most negative exponent numerator: m(3m+1)/2*2c - b - 2kmc over m >= 1
    low = 0
    m = 1
    while True:
        e = c * m * (3 * m + 1) - b - 2 * k * m * c
        low = min(low, e)
        if e > top and m > 2 * k + 1:
            break
        m += 1
    offset = low
    L = top - offset
    total = _Dense(n, L, offset, 2 * c)
    # leading term: i zeta_{2c}^{-a} q^{b/(2c)} / (2 (1 - zeta_c^{-a} q^{b/c}))  (den 2)
    j = b
    t = 0
    while j < top:
        total.add(j, zi - a * z2c - a * zc * t, 1)
        j += 2 * b
        t += 1
    m = 1
    while True:
        shift = c * m * (3 * m + 1)
        terms_here = []
        # sin(A - y pi z) = (-i/2)(zeta_{2c}^a q^{-y/2} - zeta_{2c}^{-a} q^{y/2}); den 2
        for ynum, extra in ((b + 2 * k * m * c, 0), (b - 2 * k * m * c, 2 * c * m)):
            terms_here.append((shift + extra - ynum, -zi + a * z2c, 1))
            terms_here.append((shift + extra + ynum, -zi - a * z2c, -1))
        lowest = min(e for e, _, _ in terms_here)
        if lowest >= top:
            break
        sign = -1 if m % 2 else 1
        part = _Dense(n, top - lowest, lowest, 2 * c)
        for e, kk, s in terms_here:
            part.add(e, kk, s * sign)
        if form == "factored":
            part.divide_one_minus(2 * c * m - 2 * b, a * zc)
            part.divide_one_minus(2 * c * m + 2 * b, -a * zc)
        elif form == "cosine":
            _divide_cosine(part, a * zc, 2 * c * m, 2 * b)
        else:
            raise ValueError("form must be 'factored' or 'cosine'")
        total.add_shifted(part, 0)
        m += 1
    return total.to_qexp(n, den=2)


def _divide_cosine(d: _Dense, ka: int, s: int, t: int) -> None:
    """Multiply by 1/(1 - 2cos(theta) q^{s} + q^{2s}) where 2cos(theta) q^s = x^ka q^{s-t} + x^-ka q^{s+t}."""
    n = d.n
    rows = d.rows
    for i in range(len(rows)):
        acc = rows[i]
        for step, rot, coef in ((s - t, ka, 1), (s + t, -ka, 1), (2 * s, 0, -1)):
            if i - step >= 0 and rows[i - step] is not None:
                if acc is None:
                    acc = rows[i] = [0] * n
                src = rows[i - step]
                for u in range(n):
                    if src[u]:
                        acc[(u + rot) % n] += coef * src[u]


def nabc_series(a: int, b: int, c: int, prec: Number, form: str = "factored") -> QExp:
    """N(a,b,c; z) (Laurent in q^{1/(2c)}; window below prec)."""
    if not (0 <= a < c and 0 < b < c):
        raise ValueError("N(a,b,c) needs 0 <= a < c and 0 < b < c")
    N = _n_terms(prec)
    inner = _nabc_inner(a, b, c, N, form)
    return inner * partition_series(N + 4)


# normalized family


def eisenstein_style_sum(kind: str, params: Sequence[int], prec: Number) -> QExp:
    if kind == "Mac":
        a, c = params
        return mac_series(a, c, prec)
    if kind == "Nac":
        a, c = params
        return rank_series(c, a, prec)
    if kind == "Mabc":
        a, b, c = params
        return mabc_series(a, b, c, prec)
    if kind == "Nabc":
        a, b, c = params
        return nabc_series(a, b, c, prec)
    raise ValueError(f"unknown kind {kind!r}")


def csc_pi(r: Fraction) -> CycNum:
    return sin_pi(r).inverse()


def nell(a: int, c: int, prec: Number) -> QExp:
    """csc(a pi/c) q^{-1/24} N(a/c; z)."""
    if not 0 < a < c:
        raise ValueError("Nell needs 0 < a < c")
    return rank_series(c, a, prec + 1).shift(Fraction(-1, 24)).scale(csc_pi(Fraction(a, c))).truncate(prec)


def _m_shift(a: int, c: int) -> Fraction:
    x = Fraction(a, c)
    return Fraction(3, 2) * x * (1 - x) - Fraction(1, 24)


def mell(a: int, c: int, prec: Number) -> QExp:
    """2 q^{3a/(2c)(1-a/c) - 1/24} M(a/c; z)."""
    s = _m_shift(a, c)
    return mac_series(a, c, _frac(prec) - s + 1).shift(s).scale(2).truncate(prec)


def mabc_cal(a: int, b: int, c: int, prec: Number) -> QExp:
    s = _m_shift(a, c)
    return mabc_series(a, b, c, _frac(prec) - s + 1).shift(s).scale(2).truncate(prec)


def nabc_cal(a: int, b: int, c: int, prec: Number, form: str = "factored") -> QExp:
    """4 exp(-2 pi i (a/c) k + 3 pi i (b/c)(2a/c - 1)) zeta_c^{-b} q^{(b/c)k - 3b^2/(2c^2) - 1/24} N(a,b,c)."""
    k = k_branch(b, c)
    phase = UnitAngle(Fraction(-2 * a * k, c) + Fraction(3 * b * (2 * a - c), c * c)) * UnitAngle.root(c, -b)
    s = Fraction(b * k, c) - Fraction(3 * b * b, 2 * c * c) - Fraction(1, 24)
    base = nabc_series(a, b, c, _frac(prec) - s + 1, form)
    return base.shift(s).scale(phase.to_cyc() * 4).truncate(prec)


def normalized_family(kind: str, params: Sequence[int], prec: Number) -> QExp:
    if kind == "Nell":
        return nell(*params, prec)
    if kind == "Mell":
        return mell(*params, prec)
    if kind == "MabcCal":
        return mabc_cal(*params, prec)
    if kind == "NabcCal":
        return nabc_cal(*params, prec)
    raise ValueError(f"unknown kind {kind!r}")


# Eulerian sums


def phi_series(p: int, a: int, prec: Number) -> QExp:
    """Phi_{p,a}(q) = sum_{n>=0} q^{pn^2}/((q^a;q^p)_{n+1}(q^{p-a};q^p)_n), minus 1 when p < 6a < 3p."""
    if p <= 3 or not 1 <= a <= (p - 1) // 2:
        raise ValueError("Phi_{p,a} needs p > 3 and 1 <= a <= (p-1)/2")
    N = _n_terms(prec)
    acc = _Dense(1, N)
    term = _Dense(1, N)
    term.add(0, 0, 1)
    term.divide_one_minus(a)
    n = 0
    while p * n * n < N:
        acc.add_shifted(term, p * n * n)
        n += 1
        term.divide_one_minus(a + p * n)
        term.divide_one_minus(p - a + p * (n - 1))
    if p < 6 * a < 3 * p:
        acc.add(0, 0, -1)
    return acc.to_qexp(1)


def macid_lhs(a: int, c: int, prec: Number) -> QExp:
    """sum_n q^{cn^2}/((q^a;q^c)_{n+1}(q^{c-a};q^c)_n) for 0 < a < c."""
    N = _n_terms(prec)
    acc = _Dense(1, N)
    term = _Dense(1, N)
    term.add(0, 0, 1)
    term.divide_one_minus(a)
    n = 0
    while c * n * n < N:
        acc.add_shifted(term, c * n * n)
        n += 1
        term.divide_one_minus(a + c * n)
        term.divide_one_minus(c - a + c * (n - 1))
    return acc.to_qexp(1)


def lamid1_sides(c: int, a: int, prec: Number) -> tuple[QExp, QExp]:
    """Both sides of the Lambert identity at z = zeta_c^a.

    -1 + (1/(1-z)) sum_{n>=0} q^{n^2}/(zq, q/z; q)_n  versus
    (z/(q;q)_inf) sum_n (-1)^n q^{3n(n+1)/2}/(1 - z q^n).
    """
    N = _n_terms(prec)
    z = zeta(c, a)
    lhs_sum = rank_series_eulerian(c, a, N)
    lhs = lhs_sum.scale((1 - z).inverse()) - 1
    inner = _bilateral_plain(c, a, N, with_qn=False)
    rhs = (inner * partition_series(N)).scale(z)
    return lhs, rhs


def lamid2_sides(c: int, a: int, prec: Number) -> tuple[QExp, QExp]:
    """(1/(q)_inf) sum (-1)^n q^{3n(n+1)/2}/(1-zq^n) versus (z/(q)_inf) sum (-1)^n q^n q^{3n(n+1)/2}/(1-zq^n)."""
    N = _n_terms(prec)
    z = zeta(c, a)
    lhs = _bilateral_plain(c, a, N, with_qn=False) * partition_series(N)
    rhs = (_bilateral_plain(c, a, N, with_qn=True) * partition_series(N)).scale(z)
    return lhs, rhs


def _bilateral_plain(c: int, a: int, N: int, with_qn: bool) -> QExp:
    """sum_n (-1)^n q^{3n(n+1)/2} q^{n*with_qn} / (1 - z q^n), z = zeta_c^a, z != 1."""
    acc = _Dense(c, N)
    special = (1 - zeta(c, a)).inverse()
    # n >= 1: sum_k z^k q^{nk}
    n = 1
    while 3 * n * (n + 1) // 2 < N:
        base = 3 * n * (n + 1) // 2 + (n if with_qn else 0)
        sign = -1 if n % 2 else 1
        k = 0
        while base + n * k < N:
            acc.add(base + n * k, a * k, sign)
            k += 1
        n += 1
    # n <= -1: 1/(1 - z q^n) = -z^{-1} q^{-n} / (1 - z^{-1} q^{-n}) = -sum_{k>=1} z^{-k} q^{-nk}
    n = -1
    while True:
        base = 3 * n * (n + 1) // 2 + (n if with_qn else 0)
        if base - n >= N:
            break
        sign = -1 if n % 2 else 1
        k = 1
        while base - n * k < N:
            acc.add(base - n * k, -a * k, -sign)
            k += 1
        n -= 1
    out = acc.to_qexp(c)
    return out + QExp({0: special}, 1, None, c)


def mock_f_series(prec: Number) -> QExp:
    """f(q) = sum q^{n^2}/(-q;q)_n^2."""
    return rank_series_eulerian(2, 1, prec)


def mock_f_check(prec: Number) -> dict:
    N = _n_terms(prec)
    f = _mock_f_direct(N)
    r = rank_series(2, 1, N)
    diff = f.first_difference(r)
    return {"verified": diff is None, "prec": N, "first_difference": None if diff is None else str(diff)}


def _mock_f_direct(N: int) -> QExp:
    acc = _Dense(1, N)
    term = _Dense(1, N)
    term.add(0, 0, 1)
    acc.add(0, 0, 1)
    n = 1
    while n * n < N:
        # divide by (1 + q^n)^2 via 1/(1 - (-1) q^n) twice
        for _ in range(2):
            rows = term.rows
            for i in range(n, N):
                src = rows[i - n]
                if src is not None:
                    if rows[i] is None:
                        rows[i] = [0]
                    rows[i][0] -= src[0]
        acc.add_shifted(term, n * n)
        n += 1
    return acc.to_qexp(1)


# eta products


def eta(m: int = 1, prec: Number = 10) -> QExp:
    """eta(m z) = q^{m/24} (q^m; q^m)_inf on grid 24."""
    top = _frac(prec) * 24
    terms = {}
    limit = math.ceil((top - m) / (24 * m)) if top > m else 0
    for e, s in pentagonal_terms(max(limit, 0)):
        terms[m + 24 * m * e] = s
    return QExp(terms, 24, math.ceil(top))


def _bernoulli_p(x: Fraction) -> Fraction:
    f = x - math.floor(x)
    return f * f - f + Fraction(1, 6)


def eta_gen_exponent(t: int, r: int) -> Fraction:
    return Fraction(t, 2) * _bernoulli_p(Fraction(r, t))


def _gen_product(t: int, r: int, N: int) -> QExp:
    """prod_{n = +-r mod t, n > 0} (1 - q^n) to N terms, via the triple product."""
    r %= t
    if r == 0:
        raise ValueError("generalized eta needs r not divisible by t")
    theta = {}
    n = 0
    while True:
        hit = False
        for nn in (n, -n - 1) if n >= 0 else ():
            e = t * nn * (nn - 1) // 2 + r * nn
            if e < N:
                hit = True
                theta[e] = theta.get(e, 0) + (-1 if nn % 2 else 1)
        if not hit and n > 2:
            break
        n += 1
    return QExp(theta, 1, N) * partition_series(N, t)


def eta_gen(t: int, r: int, prec: Number, scale: int = 1) -> QExp:
    """eta_{t,r}(scale z) = q^{scale (t/2) P(r/t)} prod_{n = +-r (t)} (1 - q^{scale n})."""
    lead = eta_gen_exponent(t, r) * scale
    N = _n_terms((_frac(prec) - lead) / scale)
    prod = _gen_product(t, r, N)
    if scale != 1:
        from .series import substitute

        prod = substitute(prod, scale)
    return prod.shift(lead).truncate(prec)


def f_biagioli(N: int, rho: int, prec: Number) -> QExp:
    """f_{N,rho} = q^{(N-2rho)^2/(8N)} (q^rho, q^{N-rho}, q^N; q^N)_inf, by its theta series."""
    rho %= N
    if rho == 0:
        raise ValueError("f_{N,rho} needs N not dividing rho")
    lead = Fraction((N - 2 * rho) ** 2, 8 * N)
    limit = _frac(prec) - lead
    terms = {}
    n = 0
    while True:
        hit = False
        for nn in (n, -n - 1):
            e = N * nn * (nn - 1) // 2 + rho * nn
            if e < limit:
                hit = True
                terms[e] = terms.get(e, 0) + (-1 if nn % 2 else 1)
        if not hit and n > 2:
            break
        n += 1
    return QExp(terms, 1, math.ceil(limit)).shift(lead).truncate(prec)


@dataclass(frozen=True)
class EtaQuotientSpec:
    """prod eta(m z)^{r_m} * prod eta_{t,r}(s z)^{e} * prod f_{N,rho}^{e}."""

    eta: tuple = ()  # (m, r_m)
    gen: tuple = ()  # (t, r, exponent, scale)
    f: tuple = ()  # (N, rho, exponent)
    level: int = 0

    def __post_init__(self):
        for t, r, _, s in self.gen:
            if t <= 0 or r % t == 0 or s <= 0:
                raise ValueError(f"invalid generalized eta factor ({t}, {r})")
        for m, _ in self.eta:
            if m <= 0:
                raise ValueError("eta factors need positive m")
        if self.level:
            for m, _ in self.eta:
                if self.level % m:
                    raise ValueError(f"{m} does not divide the level {self.level}")

    def leading_exponent(self) -> Fraction:
        total = Fraction(0)
        for m, e in self.eta:
            total += Fraction(m * e, 24)
        for t, r, e, s in self.gen:
            total += eta_gen_exponent(t, r) * s * e
        for N, rho, e in self.f:
            total += Fraction((N - 2 * (rho % N)) ** 2, 8 * N) * e
        return total

    def is_pure_eta(self) -> bool:
        return not self.gen and not self.f


def eta_quotient(spec: EtaQuotientSpec, prec: Number) -> QExp:
    """Exact expansion below prec; each factor is expanded in normalized form (constant term 1)."""
    lead = spec.leading_exponent()
    rel = _frac(prec) - lead
    N = _n_terms(rel)
    if N <= 0:
        return QExp.zero(0).shift(lead).truncate(prec)
    factors: list[tuple[QExp, int]] = []
    for m, e in spec.eta:
        factors.append((euler_product(N, m), e))
    for t, r, e, s in spec.gen:
        base = _gen_product(t, r, _n_terms(Fraction(N, s)))
        if s != 1:
            from .series import substitute

            base = substitute(base, s).truncate(N)
        factors.append((base, e))
    for Nn, rho, e in spec.f:
        base = f_biagioli(Nn, rho, Fraction((Nn - 2 * (rho % Nn)) ** 2, 8 * Nn) + N)
        base = base.shift(-Fraction((Nn - 2 * (rho % Nn)) ** 2, 8 * Nn)).coarsen(1)
        factors.append((base, e))
    num = QExp.one(N)
    den = QExp.one(N)
    for ser, e in factors:
        if e > 0:
            num = num * ser ** e
        elif e < 0:
            den = den * ser ** (-e)
    result = num * invert(den) if spec.gen or spec.f or any(e < 0 for _, e in spec.eta) else num
    return result.shift(lead).truncate(prec)


# theta functions


def theta_tilde(k: int, N: int, prec: Number) -> QExp:
    """sum_m (Nm + k) q^{(Nm+k)^2/(2N)} on grid 2N."""
    top = _frac(prec) * 2 * N
    bound = math.isqrt(max(0, math.ceil(top))) + 1
    terms: dict[int, int] = {}
    m_lo = -(bound + abs(k)) // N - 1
    m_hi = (bound + abs(k)) // N + 1
    for m in range(m_lo, m_hi + 1):
        v = N * m + k
        e = v * v
        if e < top:
            terms[e] = terms.get(e, 0) + v
    return QExp(terms, 2 * N, math.ceil(top))


def _theta_grid_sum(weighted: dict, c: int, prec: Number) -> QExp:
    # helper: weighted maps residue k (mod 12c^2) -> CycNum weight
    out = None
    for k, w in weighted.items():
        t = theta_tilde(k, 12 * c * c, prec).scale(w)
        out = t if out is None else out + t
    return out


def _e(num: int, den: int) -> CycNum:
    """exp(2 pi i num/den) in its smallest cyclotomic field."""
    g = math.gcd(num, den)
    return zeta(den // g, num // g)


def _theta1_setup(a: int, b: int, c: int) -> tuple[int, CycNum]:
    pref = _e(3 * a * b, c * c) * _e(-a, 2 * c)
    order = lcm(12, pref.order)
    order = lcm(order, _e(a, c).order)
    return order, pref.embed(order)


def theta1(a: int, b: int, c: int, prec: Number) -> QExp:
    """Theta_1(a,b,c; z) from its defining sum over m mod 6c."""
    order, pref = _theta1_setup(a, b, c)
    s3h = sqrt3() * Fraction(1, 2)
    weights: dict[int, CycNum] = {}
    M = 12 * c * c
    for m in range(6 * c):
        sgn = {0: 1, 1: 0, 2: -1}[m % 3]
        if sgn == 0:
            continue
        w = s3h * (sgn * (-1 if m % 2 else 1)) * _e(-m * a, c)
        key = (2 * m * c - 6 * b + c) % M
        weights[key] = weights[key] + w.embed(order) if key in weights else w.embed(order)
    return _theta_grid_sum(weights, c, prec).scale(pref)


def theta1_closed(a: int, b: int, c: int, prec: Number) -> QExp:
    """Theta_1 via 6c zeta sum_n (-1)^n (n/3 + 1/6 - b/c) sin(pi(2n+1)/3) e(-na/c) q^{3(n/3+1/6-b/c)^2/2}."""
    order, pref = _theta1_setup(a, b, c)
    s3h = sqrt3() * Fraction(1, 2)
    top = _frac(prec) * 24 * c * c
    terms: dict[int, CycNum] = {}
    bound = math.isqrt(max(0, math.ceil(top))) + 2
    n_lo = (-bound - c) // (2 * c) - 1
    n_hi = (bound + 6 * b) // (2 * c) + 1
    for n in range(n_lo, n_hi + 1):
        sgn = {0: 1, 1: 0, 2: -1}[n % 3]
        if sgn == 0:
            continue
        v = 2 * n * c + c - 6 * b  # = 6c (n/3 + 1/6 - b/c)
        e = v * v
        if e >= top:
            continue
        w = s3h * (v * sgn * (-1 if n % 2 else 1)) * _e(-n * a, c)
        w = w.embed(order)
        terms[e] = terms[e] + w if e in terms else w
    return QExp(terms, 24 * c * c, math.ceil(top), order).scale(pref)


def theta2(a: int, b: int, c: int, prec: Number) -> QExp:
    """Theta_2(a,b,c; z) from its defining sum over l mod 2c."""
    M = 12 * c * c
    order = lcm(2 * c, 1)
    weights: dict[int, CycNum] = {}
    for l in range(2 * c):
        s = -1 if l % 2 else 1
        for eps in (1, -1):
            key = (6 * c * l + 6 * a + eps * c) % M
            w = zeta(2 * c, -b * (6 * l + eps)) * s
            weights[key] = weights[key] + w if key in weights else w
    return _theta_grid_sum(weights, c, prec).with_order(order)


def theta_ac(a: int, c: int, prec: Number) -> QExp:
    """Theta(a/c; z) = sum (-1)^n (6n+1) sin(pi a (6n+1)/c) q^{(6n+1)^2/24}."""
    top = _frac(prec) * 24
    bound = math.isqrt(max(0, math.ceil(top))) + 2
    terms: dict[int, CycNum] = {}
    for n in range(-bound // 6 - 1, bound // 6 + 2):
        v = 6 * n + 1
        e = v * v
        if e >= top:
            continue
        w = sin_pi(Fraction(a * v, c)) * (v * (-1 if n % 2 else 1))
        terms[e] = terms[e] + w if e in terms else w
    order = lcm(4, 2 * c)
    return QExp({e: w.embed(order) if w.order != order else w for e, w in terms.items()}, 24, math.ceil(top), order)


def theta_ac_via_theta2(a: int, c: int, prec: Number) -> QExp:
    """-(i/(2c)) Theta_2(0, -a, c; z)."""
    return theta2(0, -a, c, prec).scale(zeta(4, 1) * Fraction(-1, 2 * c))


def theta_family(kind: str, params: Sequence[int], prec: Number) -> QExp:
    if kind == "theta_tilde":
        return theta_tilde(*params, prec)
    if kind == "Theta1":
        return theta1(*params, prec)
    if kind == "Theta2":
        return theta2(*params, prec)
    if kind == "Theta_ac":
        return theta_ac(*params, prec)
    raise ValueError(f"unknown theta kind {kind!r}")


# epsilon monomials


def _eps_branch(x: Fraction) -> int:
    if x in (Fraction(1, 6), Fraction(5, 6)):
        raise ValueError("a/c must avoid 1/6 and 5/6")
    if x < Fraction(1, 6):
        return 0
    if x < Fraction(5, 6):
        return 1
    return 2


def eps2_ac(a: int, c: int) -> QExp:
    """epsilon_2(a/c; z) as an exact monomial (zero in the middle branch)."""
    x = Fraction(a, c)
    if not 0 < x < 1:
        raise ValueError("need 0 < a/c < 1")
    br = _eps_branch(x)
    if br == 1:
        return QExp.zero(None, 24 * c * c)
    centre = Fraction(1, 6) if br == 0 else Fraction(5, 6)
    return QExp.monomial(-Fraction(3, 2) * (x - centre) ** 2, 2)


def eps2_abc(a: int, b: int, c: int) -> QExp:
    x = Fraction(a, c)
    if not 0 <= x < 1:
        raise ValueError("need 0 <= a/c < 1")
    br = _eps_branch(x)
    if br == 1:
        return QExp.zero(None, 24 * c * c)
    if br == 0:
        return QExp.monomial(-Fraction(3, 2) * (x - Fraction(1, 6)) ** 2, zeta(c, -2 * b) * 2)
    return QExp.monomial(-Fraction(3, 2) * (x - Fraction(5, 6)) ** 2, 2)


def eps_monomial(kind: str, params: Sequence[int], z_form: str = "exact_q"):
    if z_form == "exact_q":
        if kind == "eps2_ac":
            return eps2_ac(*params)
        if kind == "eps2_abc":
            return eps2_abc(*params)
        if kind in ("eps1_ac", "eps1_abc"):
            raise ValueError("ε₁ is not a q-expansion")
        raise ValueError(f"unknown kind {kind!r}")
    if z_form == "numeric":
        from . import numeric

        return numeric.eps_function(kind, params)
    raise ValueError("z_form must be 'exact_q' or 'numeric'")


# string registry used by the command line


def _parse_ints(parts: Sequence[str], count: int, name: str) -> list[int]:
    if len(parts) != count:
        raise ValueError(f"series {name!r} expects {count} integer parameters")
    return [int(x) for x in parts]


def named_series(key: str, prec: Number) -> QExp:
    """Look up a series by registry key such as 'eta', 'eta_gen 5 1', 'Phi 5 2', 'Rank 5 1'."""
    parts = key.split()
    if not parts:
        raise ValueError("empty series name")
    name, args = parts[0], parts[1:]
    if name == "eta":
        m = _parse_ints(args, 1, name)[0] if args else 1
        return eta(m, prec)
    if name == "eta_gen":
        t, r = _parse_ints(args, 2, name)
        return eta_gen(t, r, prec)
    if name == "f":
        N, rho = _parse_ints(args, 2, name)
        return f_biagioli(N, rho, prec)
    if name == "Phi":
        p, a = _parse_ints(args, 2, name)
        return phi_series(p, a, prec)
    if name == "Rank":
        c, a = _parse_ints(args, 2, name)
        return rank_series(c, a, prec)
    if name == "partitions":
        return partition_series(prec)
    if name == "Mac":
        a, c = _parse_ints(args, 2, name)
        return mac_series(a, c, prec)
    if name == "Mabc":
        a, b, c = _parse_ints(args, 3, name)
        return mabc_series(a, b, c, prec)
    if name == "Nabc":
        a, b, c = _parse_ints(args, 3, name)
        return nabc_series(a, b, c, prec)
    if name in ("Nell", "Mell", "MabcCal", "NabcCal"):
        return normalized_family(name, [int(x) for x in args], prec)
    if name == "theta_tilde":
        k, N = _parse_ints(args, 2, name)
        return theta_tilde(k, N, prec)
    if name == "Theta1":
        return theta1(*_parse_ints(args, 3, name), prec)
    if name == "Theta2":
        return theta2(*_parse_ints(args, 3, name), prec)
    if name == "Theta_ac":
        return theta_ac(*_parse_ints(args, 2, name), prec)
    if name == "mock_f":
        return mock_f_series(prec)
    raise KeyError(f"unknown series {name!r}")


SERIES_NAMES = (
    "eta [m]", "eta_gen t r", "f N rho", "Phi p a", "Rank c a", "partitions", "Mac a c",
    "Mabc a b c", "Nabc a b c", "Nell a c", "Mell a c", "MabcCal a b c", "NabcCal a b c",
    "theta_tilde k N", "Theta1 a b c", "Theta2 a b c", "Theta_ac a c", "mock_f",
)
