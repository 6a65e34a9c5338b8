"""Truncated Puiseux series in q with cyclotomic coefficients.

A series lives on the exponent grid (1/D)Z.  Terms are kept sparsely as a map
from integer numerator j to a nonzero coefficient (meaning coeff * q^(j/D)), and
`prec` is the exclusive numerator bound of the window in which the series is
known: every exponent j/D with j < prec is exact, anything above is unknown.
`prec=None` marks an exact finite sum.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Mapping, Optional, Union

import gmpy2

from .cyclotomic import CycNum, lcm, reduce_int_poly

Scalar = Union[int, Fraction, CycNum]

DEFAULT_PREC = 600


class SeriesError(ValueError):
    pass


class PrecisionError(SeriesError):
    pass


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _pmin(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _padd(a: Optional[int], b: int) -> Optional[int]:
    return None if a is None else a + b


def _as_cyc(c: Scalar, order: int) -> CycNum:
    if isinstance(c, CycNum):
        return c.embed(lcm(c.order, order)) if c.order != order else c
    return CycNum.rational(c, order)


class QExp:
    """Truncated series sum_j coeff_j q^(j/denom) with j < prec."""

    __slots__ = ("denom", "order", "prec", "terms")

    def __init__(
        self,
        terms: Mapping[int, Scalar],
        denom: int = 1,
        prec: Optional[int] = None,
        order: Optional[int] = None,
    ):
        if denom < 1:
            raise SeriesError("grid denominator must be positive")
        if order is None:
            order = 1
            for c in terms.values():
                if isinstance(c, CycNum):
                    order = lcm(order, c.order)
        clean: dict[int, CycNum] = {}
        for j, c in terms.items():
            if prec is not None and j >= prec:
                continue
            cc = _as_cyc(c, order)
            if cc.order != order:
                raise SeriesError("coefficient order exceeds series order")
            if not cc.is_zero():
                clean[int(j)] = cc
        self.denom = denom
        self.order = order
        self.prec = prec
        self.terms = clean

    # construction helpers

    @classmethod
    def zero(cls, prec: Optional[int] = None, denom: int = 1, order: int = 1) -> QExp:
        return cls({}, denom, prec, order)

    @classmethod
    def one(cls, prec: Optional[int] = None, denom: int = 1, order: int = 1) -> QExp:
        return cls({0: 1}, denom, prec, order)

    @classmethod
    def monomial(
        cls, exponent: Union[int, Fraction], coeff: Scalar = 1, prec: Optional[Fraction] = None
    ) -> QExp:
        """coeff * q^exponent; `prec` is an exponent bound (not a numerator)."""
        e = Fraction(exponent)
        order = coeff.order if isinstance(coeff, CycNum) else 1
        D = e.denominator
        p = None
        if prec is not None:
            pf = Fraction(prec)
            D = lcm(D, pf.denominator)
            p = int(pf * D)
        return cls({int(e * D): coeff}, D, p, order)

    @classmethod
    def from_exponents(
        cls, pairs: Iterable[tuple[Fraction, Scalar]], prec: Optional[Fraction] = None
    ) -> QExp:
        pairs = [(Fraction(e), c) for e, c in pairs]
        D = 1
        order = 1
        for e, c in pairs:
            D = lcm(D, e.denominator)
            if isinstance(c, CycNum):
                order = lcm(order, c.order)
        p = None
        if prec is not None:
            pf = Fraction(prec)
            D = lcm(D, pf.denominator)
            p = int(pf * D)
        acc: dict[int, CycNum] = {}
        for e, c in pairs:
            j = int(e * D)
            cc = _as_cyc(c, order)
            acc[j] = acc[j] + cc if j in acc else cc
        return cls(acc, D, p, order)

    # basic structure

    def copy_with(self, terms=None, denom=None, prec="keep", order=None) -> QExp:
        return QExp(
            self.terms if terms is None else terms,
            self.denom if denom is None else denom,
            self.prec if prec == "keep" else prec,
            self.order if order is None else order,
        )

    @property
    def lo(self) -> int:
        if self.terms:
            return min(self.terms)
        return self.prec if self.prec is not None else 0

    def valuation(self) -> Optional[int]:
        """Smallest numerator with a nonzero coefficient, or None if zero in the window."""
        return min(self.terms) if self.terms else None

    def leading_exponent(self) -> Optional[Fraction]:
        v = self.valuation()
        return None if v is None else Fraction(v, self.denom)

    def leading_coefficient(self) -> Optional[CycNum]:
        v = self.valuation()
        return None if v is None else self.terms[v]

    def prec_exponent(self) -> Optional[Fraction]:
        return None if self.prec is None else Fraction(self.prec, self.denom)

    def is_zero(self) -> bool:
        """True when every coefficient in the known window vanishes."""
        return not self.terms

    def coefficient(self, exponent: Union[int, Fraction]) -> CycNum:
        e = Fraction(exponent)
        j = e * self.denom
        if self.prec is not None and j >= self.prec:
            raise PrecisionError(f"exponent {e} lies outside the known window")
        if j.denominator != 1:
            return CycNum.zero(self.order)
        return self.terms.get(int(j), CycNum.zero(self.order))

    def items(self) -> list[tuple[Fraction, CycNum]]:
        return [(Fraction(j, self.denom), self.terms[j]) for j in sorted(self.terms)]

    def __len__(self) -> int:
        return len(self.terms)

    # grid and ring unification

    def regrid(self, D: int) -> QExp:
        if D % self.denom:
            raise SeriesError(f"cannot regrid from denominator {self.denom} to {D}")
        if D == self.denom:
            return self
        k = D // self.denom
        return QExp(
            {j * k: c for j, c in self.terms.items()},
            D,
            None if self.prec is None else self.prec * k,
            self.order,
        )

    def coarsen(self, D: int) -> QExp:
        """Move to a coarser grid D | denom; every stored exponent must lie on it."""
        if self.denom % D:
            raise SeriesError("target grid must divide the current one")
        k = self.denom // D
        if any(j % k for j in self.terms):
            raise SeriesError("series has exponents off the target grid")
        return QExp(
            {j // k: c for j, c in self.terms.items()},
            D,
            None if self.prec is None else _ceil_div(self.prec, k),
            self.order,
        )

    def compact(self) -> QExp:
        """Smallest grid containing every stored exponent and the window bound."""
        g = self.denom
        for j in self.terms:
            g = gcd(g, j)
            if g == 1:
                return self
        if self.prec is not None:
            g = gcd(g, self.prec)
        return self.coarsen(self.denom // g) if g > 1 else self

    def with_order(self, n: int) -> QExp:
        if n % self.order:
            raise SeriesError(f"cannot embed coefficient order {self.order} into {n}")
        if n == self.order:
            return self
        return QExp({j: c.embed(n) for j, c in self.terms.items()}, self.denom, self.prec, n)

    def truncate(self, prec_exponent: Union[int, Fraction]) -> QExp:
        """Restrict the window to exponents below prec_exponent."""
        pf = Fraction(prec_exponent)
        D = lcm(self.denom, pf.denominator)
        f = self.regrid(D)
        p = _pmin(f.prec, int(pf * D))
        return QExp(f.terms, D, p, f.order)

    @staticmethod
    def unify(f: QExp, g: QExp) -> tuple[QExp, QExp]:
        D = lcm(f.denom, g.denom)
        n = lcm(f.order, g.order)
        return f.regrid(D).with_order(n), g.regrid(D).with_order(n)

    # arithmetic

    def __add__(self, other) -> QExp:
        if not isinstance(other, QExp):
            other = QExp({0: other}, self.denom, None)
        f, g = QExp.unify(self, other)
        prec = _pmin(f.prec, g.prec)
        terms = dict(f.terms)
        for j, c in g.terms.items():
            terms[j] = terms[j] + c if j in terms else c
        return QExp(terms, f.denom, prec, f.order)

    __radd__ = __add__

    def __neg__(self) -> QExp:
        return QExp({j: -c for j, c in self.terms.items()}, self.denom, self.prec, self.order)

    def __sub__(self, other) -> QExp:
        return self + (-other)

    def __rsub__(self, other) -> QExp:
        return (-self) + other

    def scale(self, c: Scalar) -> QExp:
        n = self.order
        if isinstance(c, CycNum):
            n = lcm(n, c.order)
        f = self.with_order(n)
        cc = _as_cyc(c, n)
        return QExp({j: v * cc for j, v in f.terms.items()}, f.denom, f.prec, n)

    def __mul__(self, other) -> QExp:
        if isinstance(other, QExp):
            return multiply(self, other)
        return self.scale(other)

    def __rmul__(self, other) -> QExp:
        return self.scale(other)

    def shift(self, exponent: Union[int, Fraction]) -> QExp:
        """Multiply by q^exponent."""
        e = Fraction(exponent)
        D = lcm(self.denom, e.denominator)
        f = self.regrid(D)
        s = int(e * D)
        return QExp({j + s: c for j, c in f.terms.items()}, D, _padd(f.prec, s), f.order)

    def __pow__(self, e: int) -> QExp:
        if e < 0:
            return invert(self) ** (-e)
        result = QExp.one(None, self.denom, self.order)
        base = self
        first = True
        while e:
            if e & 1:
                result = base if first else result * base
                first = False
            e >>= 1
            if e:
                base = base * base
        return result

    def __truediv__(self, other) -> QExp:
        if isinstance(other, QExp):
            return self * invert(other)
        if isinstance(other, CycNum):
            return self.scale(other.inverse())
        return self.scale(1 / Fraction(other))

    def map_coeffs(self, fn: Callable[[CycNum], CycNum], order: Optional[int] = None) -> QExp:
        out = {j: fn(c) for j, c in self.terms.items()}
        if order is None:
            order = self.order
            for c in out.values():
                order = lcm(order, c.order)
        return QExp(out, self.denom, self.prec, order)

    def galois(self, g: int) -> QExp:
        return self.map_coeffs(lambda c: c.galois(g), self.order)

    # comparison

    def first_difference(self, other: QExp) -> Optional[Fraction]:
        """Smallest exponent in the common window where the series differ, or None."""
        f, g = QExp.unify(self, other)
        prec = _pmin(f.prec, g.prec)
        keys = sorted(set(f.terms) | set(g.terms))
        zero = CycNum.zero(f.order)
        for j in keys:
            if prec is not None and j >= prec:
                break
            if f.terms.get(j, zero) != g.terms.get(j, zero):
                return Fraction(j, f.denom)
        return None

    def agrees_with(self, other: QExp) -> bool:
        return self.first_difference(other) is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, QExp):
            return NotImplemented
        f, g = QExp.unify(self, other)
        return f.prec == g.prec and f.terms == g.terms

    __hash__ = None  # type: ignore[assignment]

    # serialization

    def to_json(self) -> dict:
        lo = self.lo
        hi = self.prec if self.prec is not None else (max(self.terms) + 1 if self.terms else lo)
        zero = CycNum.zero(self.order)
        return {
            "denom": self.denom,
            "lo": lo,
            "prec": self.prec,
            "order": self.order,
            "coeffs": [self.terms.get(j, zero).to_json() for j in range(lo, hi)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> QExp:
        lo = int(data["lo"])
        terms = {lo + i: CycNum.from_json(c) for i, c in enumerate(data["coeffs"])}
        order = int(data.get("order") or 1)
        for c in terms.values():
            order = lcm(order, c.order)
        return cls(terms, int(data["denom"]), data["prec"], order)

    def __repr__(self) -> str:
        shown = []
        for e, c in self.items()[:6]:
            shown.append(f"({c!r})q^{e}")
        more = " + ..." if len(self.terms) > 6 else ""
        tail = "" if self.prec is None else f" + O(q^{self.prec_exponent()})"
        return "QExp(" + (" + ".join(shown) or "0") + more + tail + ")"


# operators


def substitute(f: QExp, t: Union[int, Fraction]) -> QExp:
    """q -> q^t for a positive rational t."""
    t = Fraction(t)
    if t <= 0:
        raise SeriesError("substitution exponent must be positive")
    return QExp(
        {j * t.numerator: c for j, c in f.terms.items()},
        f.denom * t.denominator,
        None if f.prec is None else f.prec * t.numerator,
        f.order,
    )


def _integral(f: QExp, what: str) -> QExp:
    try:
        return f.coarsen(1)
    except SeriesError:
        raise SeriesError(f"{what} requires integral expansion") from None


def u_operator(f: QExp, p: int, m: int) -> QExp:
    """F|U_{p,m} = q^{m/p} sum_n a(pn+m) q^n, returned on the grid 1/p."""
    if not 0 <= m < p:
        raise SeriesError("residue must satisfy 0 <= m < p")
    g = _integral(f, "U-operator")
    return QExp({j: c for j, c in g.terms.items() if j % p == m}, p, g.prec, g.order)


def dissect(f: QExp, t: int, r: int) -> QExp:
    """Terms whose (integral) exponent is congruent to r modulo t."""
    if t < 1:
        raise SeriesError("modulus must be positive")
    g = _integral(f, "dissection")
    r %= t
    return QExp({j: c for j, c in g.terms.items() if j % t == r}, 1, g.prec, g.order)


def leading_exponent(f: QExp) -> Optional[Fraction]:
    return f.leading_exponent()


# multiplication kernel


def _row_vectors(f: QExp, keys: list[int], den: int) -> list[list[int]]:
    return [f.terms[j].int_vector(den) for j in keys]


def _series_den(f: QExp, keys: Iterable[int]) -> int:
    den = 1
    for j in keys:
        den = lcm(den, f.terms[j].common_denominator())
    return den


def multiply(f: QExp, g: QExp) -> QExp:
    f, g = QExp.unify(f, g)
    D, order = f.denom, f.order
    if not f.terms and f.prec is None or not g.terms and g.prec is None:
        return QExp.zero(None, D, order)
    vf = f.valuation() if f.terms else f.prec
    vg = g.valuation() if g.terms else g.prec
    prec = _pmin(_padd(g.prec, vf), _padd(f.prec, vg))
    if not f.terms or not g.terms:
        return QExp.zero(prec, D, order)
    fk = sorted(j for j in f.terms if prec is None or j < prec - vg)
    gk = sorted(j for j in g.terms if prec is None or j < prec - vf)
    if not fk or not gk:
        return QExp.zero(prec, D, order)
    step = 0
    for j in fk:
        step = gcd(step, j - vf)
    for j in gk:
        step = gcd(step, j - vg)
    step = step or 1
    lf = (fk[-1] - vf) // step + 1
    lg = (gk[-1] - vg) // step + 1
    if len(fk) * len(gk) <= 4 * (lf + lg) or len(fk) == 1 or len(gk) == 1:
        terms = _sparse_product(f, g, fk, gk, prec)
    else:
        terms = _kronecker_product(f, g, fk, gk, vf, vg, step, lf, lg, prec)
    return QExp(terms, D, prec, order)


def _sparse_product(f: QExp, g: QExp, fk, gk, prec) -> dict[int, CycNum]:
    n = f.order
    if n == 1:
        acc: dict[int, Fraction] = {}
        for i in fk:
            a = f.terms[i].coeffs[0]
            for j in gk:
                k = i + j
                if prec is not None and k >= prec:
                    break
                acc[k] = acc.get(k, 0) + a * g.terms[j].coeffs[0]
        return {k: CycNum.rational(v) for k, v in acc.items() if v}
    den_f = _series_den(f, fk)
    den_g = _series_den(g, gk)
    fv = {i: f.terms[i].int_vector(den_f) for i in fk}
    gv = {j: g.terms[j].int_vector(den_g) for j in gk}
    phi = len(next(iter(fv.values())))
    raw: dict[int, list[int]] = {}
    for i in fk:
        a = fv[i]
        for j in gk:
            k = i + j
            if prec is not None and k >= prec:
                break
            b = gv[j]
            row = raw.get(k)
            if row is None:
                row = raw[k] = [0] * (2 * phi - 1)
            for s, x in enumerate(a):
                if x:
                    for t, y in enumerate(b):
                        if y:
                            row[s + t] += x * y
    den = den_f * den_g
    out = {}
    for k, row in raw.items():
        red = reduce_int_poly(n, row)
        if any(red):
            out[k] = CycNum(n, (Fraction(c, den) for c in red))
    return out


def _pack(rows_by_index: dict[int, list[int]], length: int, stride: int, width: int, phi: int) -> int:
    zero = bytes(width)
    pos_chunks = []
    neg_chunks = []
    any_neg = False
    blank = zero * stride
    for i in range(length):
        row = rows_by_index.get(i)
        if row is None:
            pos_chunks.append(blank)
            neg_chunks.append(blank)
            continue
        pc = []
        nc = []
        for x in row:
            if x >= 0:
                pc.append(x.to_bytes(width, "little"))
                nc.append(zero)
            else:
                any_neg = True
                pc.append(zero)
                nc.append((-x).to_bytes(width, "little"))
        pad = zero * (stride - phi)
        pos_chunks.append(b"".join(pc) + pad)
        neg_chunks.append(b"".join(nc) + pad)
    pos = gmpy2.mpz(int.from_bytes(b"".join(pos_chunks), "little"))
    if not any_neg:
        return pos
    return pos - gmpy2.mpz(int.from_bytes(b"".join(neg_chunks), "little"))


def _kronecker_product(f, g, fk, gk, vf, vg, step, lf, lg, prec) -> dict[int, CycNum]:
    n = f.order
    den_f = _series_den(f, fk)
    den_g = _series_den(g, gk)
    fv = {(i - vf) // step: f.terms[i].int_vector(den_f) for i in fk}
    gv = {(j - vg) // step: g.terms[j].int_vector(den_g) for j in gk}
    phi = len(next(iter(fv.values())))
    stride = 2 * phi - 1
    ma = max(abs(x) for r in fv.values() for x in r)
    mb = max(abs(x) for r in gv.values() for x in r)
    bound = ma * mb * min(len(fv), len(gv)) * phi
    width = (bound.bit_length() + 2 + 7) // 8
    A = _pack(fv, lf, stride, width, phi)
    B = _pack(gv, lg, stride, width, phi)
    C = A * B
    nout = lf + lg - 1
    ndig = nout * stride
    half = 1 << (8 * width - 1)
    offset = int.from_bytes((b"\x00" * (width - 1) + b"\x80") * ndig, "little")
    buf = int(C + offset).to_bytes(ndig * width + 1, "little")
    base = vf + vg
    den = den_f * den_g
    out = {}
    frombytes = int.from_bytes
    for r in range(nout):
        k = base + r * step
        if prec is not None and k >= prec:
            break
        off = r * stride * width
        row = [
            frombytes(buf[off + s * width: off + (s + 1) * width], "little") - half
            for s in range(stride)
        ]
        if not any(row):
            continue
        red = reduce_int_poly(n, row)
        if any(red):
            out[k] = CycNum(n, (Fraction(c, den) for c in red))
    return out


# inversion


def invert(f: QExp, prec: Optional[int] = None) -> QExp:
    """1/f within the window of f.  For exact f an explicit `prec` numerator is required."""
    v = f.valuation()
    if v is None:
        raise SeriesError("non-invertible leading term")
    c0 = f.terms[v]
    if c0.is_zero():
        raise SeriesError("non-invertible leading term")
    window = f.prec
    if window is None:
        if prec is None:
            if len(f.terms) == 1:
                return QExp({-v: c0.inverse()}, f.denom, None, f.order)
            raise PrecisionError("inverting an exact polynomial needs an explicit precision")
        window = prec + 2 * v
    # normalized h = f / (c0 q^v) = 1 + ..., known for numerators < window - v
    n_known = window - v
    if n_known <= 0:
        raise PrecisionError("precision exhausted")
    c0i = c0.inverse()
    h = QExp({j - v: c * c0i for j, c in f.terms.items() if j - v < n_known}, f.denom, n_known, f.order)
    y = _newton_inverse(h, n_known)
    return QExp({j - v: c * c0i for j, c in y.terms.items()}, f.denom, n_known - v, f.order)


def _newton_inverse(h: QExp, n: int) -> QExp:
    """Inverse of a series with constant term 1, known for numerators < n."""
    D, order = h.denom, h.order
    one = QExp.one(None, D, order)
    y = one  # exact polynomial approximant, correct below numerator k
    k = 1
    while k < n:
        k = min(2 * k, n)
        hk = QExp({j: c for j, c in h.terms.items() if j < k}, D, k, order)
        e = one - hk * y
        y = QExp((y + y * e).terms, D, None, order)
        y = QExp({j: c for j, c in y.terms.items() if j < k}, D, None, order)
    return QExp(y.terms, D, n, order)
