"""Truncated Laurent series in chi = xi - xi0 with exact coefficients."""

from __future__ import annotations

from typing import Sequence

from .arith import render
from .errors import TruncationTooShort


def _min_prec(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class LaurentSeries:
    """``sum_i coeffs[i] * chi**(offset + i) + O(chi**(prec + 1))``.

    ``prec`` is the largest exponent whose coefficient is known; ``None``
    marks an exact (finite) series. Coefficients are elements of one sympy
    fraction field, ``field``.
    """

    __slots__ = ("offset", "coeffs", "prec", "field")

    def __init__(self, offset: int, coeffs: Sequence, prec: int | None, field):
        self.offset = offset
        self.coeffs = list(coeffs)
        self.field = field
        if prec is not None:
            keep = prec - offset + 1
            if keep < len(self.coeffs):
                self.coeffs = self.coeffs[:max(keep, 0)]
        self.prec = prec

    @classmethod
    def monomial(cls, coeff, power: int, field):
        return cls(power, [field(coeff) if not hasattr(coeff, "field") else coeff], None, field)

    @classmethod
    def zero(cls, field, prec=None):
        return cls(0, [], prec, field)

    def __repr__(self):
        terms = [f"({render(c)})*chi^{self.offset + i}" for i, c in enumerate(self.coeffs) if c]
        tail = "" if self.prec is None else f" + O(chi^{self.prec + 1})"
        return (" + ".join(terms) or "0") + tail

    @property
    def last(self) -> int:
        """Largest exponent stored (exact series) or known (truncated)."""
        if self.prec is not None:
            return self.prec
        return self.offset + len(self.coeffs) - 1

    def coeff(self, e: int):
        if self.prec is not None and e > self.prec:
            raise TruncationTooShort(f"coefficient of chi^{e} requested, series known to chi^{self.prec}")
        i = e - self.offset
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def valuation(self):
        for i, c in enumerate(self.coeffs):
            if c:
                return self.offset + i
        return None

    def truncate(self, prec: int) -> "LaurentSeries":
        return LaurentSeries(self.offset, self.coeffs, _min_prec(self.prec, prec), self.field)

    def __neg__(self):
        return LaurentSeries(self.offset, [-c for c in self.coeffs], self.prec, self.field)

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries(0, [self.field(other) if not hasattr(other, "field") else other],
                                  None, self.field)
        off = min(self.offset, other.offset)
        prec = _min_prec(self.prec, other.prec)
        top = max(self.offset + len(self.coeffs), other.offset + len(other.coeffs)) - 1
        if prec is not None:
            top = min(top, prec)
        coeffs = [self.coeff(e) + other.coeff(e) for e in range(off, top + 1)]
        return LaurentSeries(off, coeffs, prec, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return LaurentSeries(self.offset, [c * x for x in self.coeffs], self.prec, self.field)

    def mul(self, other: "LaurentSeries", upto: int | None = None) -> "LaurentSeries":
        """Product, optionally computing only exponents <= ``upto``."""
        off = self.offset + other.offset
        prec = None
        if self.prec is not None:
            prec = self.prec + other.offset
        if other.prec is not None:
            p2 = other.prec + self.offset
            prec = p2 if prec is None else min(prec, p2)
        if upto is not None:
            prec = upto if prec is None else min(prec, upto)
        a, b = self.coeffs, other.coeffs
        top = off + len(a) + len(b) - 2
        if prec is not None:
            top = min(top, prec)
        n = top - off + 1
        zero = self.field.zero
        out = [zero] * max(n, 0)
        for i, x in enumerate(a):
            if i >= n:
                break
            if not x:
                continue
            for j in range(min(len(b), n - i)):
                y = b[j]
                if y:
                    out[i + j] = out[i + j] + x * y
        return LaurentSeries(off, out, prec, self.field)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def pow(self, k: int, upto: int | None = None) -> "LaurentSeries":
        if k == 0:
            return LaurentSeries(0, [self.field.one], None, self.field)
        out = self
        for _ in range(k - 1):
            out = out.mul(self, upto)
        return out if upto is None else out.truncate(upto)

    def derivative(self) -> "LaurentSeries":
        coeffs = [c * (self.offset + i) for i, c in enumerate(self.coeffs)]
        prec = None if self.prec is None else self.prec - 1
        return LaurentSeries(self.offset - 1, coeffs, prec, self.field)

    def map(self, f, field) -> "LaurentSeries":
        return LaurentSeries(self.offset, [f(c) for c in self.coeffs], self.prec, field)

    def is_zero_through(self, e: int) -> bool:
        return all(not self.coeff(k) for k in range(self.offset, e + 1))

    def first_nonzero(self):
        """``(exponent, coefficient)`` of the first nonzero known coefficient, or None."""
        for i, c in enumerate(self.coeffs):
            if c:
                return self.offset + i, c
        return None


def falling(x: int, k: int) -> int:
    """Falling factorial x (x-1) ... (x-k+1); the k-th derivative factor of chi^x."""
    out = 1
    for i in range(k):
        out *= x - i
    return out


class _Node:
    __slots__ = ("offset", "cache")

    def __init__(self, offset):
        self.offset = offset
        self.cache = {}

    def get(self, i):
        v = self.cache.get(i)
        if v is None:
            v = self.cache[i] = self._compute(i)
        return v


class _Leaf(_Node):
    __slots__ = ("coeffs", "zero")

    def __init__(self, offset, coeffs, zero):
        super().__init__(offset)
        self.coeffs = coeffs
        self.zero = zero

    def get(self, i):
        return self.coeffs[i] if i < len(self.coeffs) else self.zero


class _One(_Node):
    __slots__ = ("one", "zero")

    def __init__(self, one, zero):
        super().__init__(0)
        self.one, self.zero = one, zero

    def get(self, i):
        return self.one if i == 0 else self.zero


class _Deriv(_Node):
    __slots__ = ("leaf", "k")

    def __init__(self, leaf, k):
        super().__init__(leaf.offset - k)
        self.leaf, self.k = leaf, k

    def _compute(self, i):
        c = self.leaf.get(i)
        return c * falling(self.leaf.offset + i, self.k) if c else c


class _Mul(_Node):
    __slots__ = ("a", "b")

    def __init__(self, a, b):
        super().__init__(a.offset + b.offset)
        self.a, self.b = a, b

    def _compute(self, i):
        acc = None
        for x in range(i + 1):
            f = self.a.get(x)
            if not f:
                continue
            g = self.b.get(i - x)
            if g:
                acc = f * g if acc is None else acc + f * g
        return acc if acc is not None else self.a.get(0) * 0


class CoefficientStream:
    """Lazily computed Laurent coefficients of differential monomials in a growing series.

    ``coeffs`` is the (mutable, appendable) coefficient list of
    ``u = sum coeffs[i] chi^(offset+i)``; entries not yet appended read as
    zero. Products are memoised per index, so extending the series one term
    at a time costs O(index) per monomial and step. After appending
    coefficient ``i`` call :meth:`settle` so memoised entries at index ``i``
    computed with the placeholder zero are discarded.
    """

    def __init__(self, offset: int, coeffs: list, field):
        self.field = field
        self.leaf = _Leaf(offset, coeffs, field.zero)
        self._derivs = {0: self.leaf}
        self._powers = {}
        self._monos = {}
        self._nodes = []
        self._one = _One(field.one, field.zero)

    def _deriv(self, k):
        if k not in self._derivs:
            self._derivs[k] = self._track(_Deriv(self.leaf, k))
        return self._derivs[k]

    def _track(self, node):
        self._nodes.append(node)
        return node

    def _power(self, k, e):
        if e == 1:
            return self._deriv(k)
        key = (k, e)
        if key not in self._powers:
            self._powers[key] = self._track(_Mul(self._power(k, e - 1), self._deriv(k)))
        return self._powers[key]

    def node(self, mon):
        mon = tuple(mon)
        if mon not in self._monos:
            acc = None
            for k, e in enumerate(mon):
                if e:
                    p = self._power(k, e)
                    acc = p if acc is None else self._track(_Mul(acc, p))
            self._monos[mon] = acc if acc is not None else self._one
        return self._monos[mon]

    def valuation(self, mon) -> int:
        """Exponent of the first coefficient of ``prod u_k^mon[k]``."""
        return self.node(mon).offset

    def coeff(self, mon, exponent: int):
        """Coefficient of chi^exponent in ``prod u_k^mon[k]``."""
        n = self.node(mon)
        i = exponent - n.offset
        return n.get(i) if i >= 0 else self.field.zero

    def settle(self, index: int):
        for n in self._nodes:
            n.cache.pop(index, None)
