"""Exact scalars: rationals and rational functions in one parameter.

Rationals are ``gmpy2.mpq``.  :class:`RatFunc` is an element of Q(t) kept in
canonical form (coprime numerator and denominator, monic denominator), so
equality is structural.  The parameter ``t`` plays whatever role the caller
needs: a generic central charge, or a formal coordinate such as the point
``z`` in a coordinate change.
"""

from __future__ import annotations

import re
from math import comb, factorial
from typing import Union

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


# -- dense polynomials over Q, little-endian tuples -------------------------

def _trim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def padd(p, q):
    if len(p) < len(q):
        p, q = q, p
    out = list(p)
    for i, c in enumerate(q):
        out[i] = out[i] + c
    return _trim(out)


def psub(p, q):
    return padd(p, tuple(-c for c in q))


def pmul(p, q):
    if not p or not q:
        return ()
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return _trim(out)


def pscale(p, c):
    if not c:
        return ()
    return _trim(a * c for a in p)


def pdivmod(p, q):
    """Division with remainder in Q[t]."""
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    p = [mpq(c) for c in p]
    dq = len(q) - 1
    lead = mpq(q[-1])
    out = [ZERO] * max(len(p) - dq, 0)
    for k in range(len(p) - dq - 1, -1, -1):
        c = mpq(p[k + dq]) / lead if isinstance(p[k + dq], int) else p[k + dq] / lead
        out[k] = c
        if c:
            for j, b in enumerate(q):
                p[k + j] -= c * b
    return _trim(out), _trim(p[:dq])


def pgcd(p, q):
    while q:
        p, q = q, pdivmod(p, q)[1]
    if not p:
        return ()
    return pscale(p, mpq(1) / mpq(p[-1]))


def peval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pstr(p, var):
    terms = []
    for i in range(len(p) - 1, -1, -1):
        c = p[i]
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{c}*{mono}")
    if not terms:
        return "0"
    s = " + ".join(terms)
    return s.replace("+ -", "- ")


class RatFunc:
    """Element of Q(t) in canonical form."""

    __slots__ = ("num", "den", "_hash")
    var = "t"

    def __init__(self, num, den=(1,), _canonical=False):
        if not _canonical:
            num = _trim(mpq(c) for c in num)
            den = _trim(mpq(c) for c in den)
            if not den:
                raise ZeroDivisionError("zero denominator")
            if not num:
                den = (ONE,)
            else:
                g = pgcd(num, den)
                if len(g) > 1:
                    num = pdivmod(num, g)[0]
                    den = pdivmod(den, g)[0]
                lead = den[-1]
                if lead != 1:
                    num = pscale(num, mpq(1) / lead)
                    den = pscale(den, mpq(1) / lead)
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def t(cls):
        return cls((ZERO, ONE), (ONE,), _canonical=True)

    @classmethod
    def const(cls, c):
        c = mpq(c)
        return cls((c,) if c else (), (ONE,), _canonical=True)

    def is_poly(self):
        return len(self.den) == 1

    def is_const(self):
        return len(self.den) == 1 and len(self.num) <= 1

    def const_value(self):
        return self.num[0] if self.num else ZERO

    # -- arithmetic ------------------------------------------------------
    @staticmethod
    def _coerce(x):
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, (int, type(ONE))):
            return RatFunc.const(x)
        return RatFunc.const(mpq(x))

    def __add__(self, other):
        if not isinstance(other, RatFunc):
            if not other:
                return self
            other = RatFunc._coerce(other)
        if len(self.den) == 1 and len(other.den) == 1:
            return RatFunc(padd(self.num, other.num), (ONE,), _canonical=True)
        if self.den == other.den:
            return RatFunc(padd(self.num, other.num), self.den)
        return RatFunc(padd(pmul(self.num, other.den), pmul(other.num, self.den)),
                       pmul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(tuple(-c for c in self.num), self.den, _canonical=True)

    def __sub__(self, other):
        return self + (-RatFunc._coerce(other))

    def __rsub__(self, other):
        return RatFunc._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, RatFunc):
            if not other:
                return RatFunc((), (ONE,), _canonical=True)
            c = mpq(other)
            return RatFunc(tuple(a * c for a in self.num), self.den, _canonical=True)
        if len(self.den) == 1 and len(other.den) == 1:
            return RatFunc(pmul(self.num, other.num), (ONE,), _canonical=True)
        return RatFunc(pmul(self.num, other.num), pmul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other):
        if not isinstance(other, RatFunc):
            c = mpq(other)
            if not c:
                raise ZeroDivisionError("division by zero")
            return self * (mpq(1) / c)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return RatFunc._coerce(other) * self.inverse()

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            return self.inverse() ** (-k)
        out = RatFunc.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparison ------------------------------------------------------
    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        try:
            c = mpq(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.is_const() and self.const_value() == c

    def __hash__(self):
        if self._hash is None:
            if self.is_const():
                self._hash = hash(self.const_value())
            else:
                self._hash = hash((self.num, self.den))
        return self._hash

    def __call__(self, x):
        d = peval(self.den, x)
        if not d:
            raise ZeroDivisionError("evaluation at a pole")
        return mpq(peval(self.num, x)) / d if isinstance(d, int) else peval(self.num, x) / d

    def __repr__(self):
        return f"RatFunc({self})"

    def __str__(self):
        n = _pstr(self.num, self.var)
        if len(self.den) == 1:
            return n
        return f"({n})/({_pstr(self.den, self.var)})"


Scalar = Union[int, "mpq", RatFunc]

GENERIC = "generic"
_RAT = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_scalar(text):
    """Parse ``"p/q"``, an integer, or ``"generic"`` (the parameter t)."""
    if isinstance(text, (int, type(ONE))):
        return mpq(text)
    s = str(text).strip()
    if s == GENERIC:
        return RatFunc.t()
    m = _RAT.match(s)
    if not m:
        raise ValueError(f"not an exact rational: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2) or 1)
    if den == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return mpq(num, den)


def scalar_to_str(x):
    if isinstance(x, RatFunc):
        if x.is_const():
            return str(x.const_value())
        return str(x)
    return str(mpq(x))


def binom(m, k):
    """Binomial coefficient C(m, k) for any integer m and k >= 0."""
    if k < 0:
        return 0
    if m >= 0:
        return comb(m, k)
    # C(m, k) = (-1)^k C(k - m - 1, k)
    return (-1) ** k * comb(k - m - 1, k)


def inv_factorial(k):
    return mpq(1, factorial(k))


def to_rational_if_const(x):
    if isinstance(x, RatFunc) and x.is_const():
        return x.const_value()
    return x
