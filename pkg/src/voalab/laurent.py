"""Truncated Laurent series and rational functions with explicit pole data."""

from __future__ import annotations

from math import comb

from gmpy2 import mpq

from .scalars import ONE, binom, scalar_to_str


class LaurentPoly:
    """Finite Laurent polynomial, optionally a truncation of a series.

    ``prec`` is the first exponent whose coefficient is *not* known; ``None``
    means the object is an exact Laurent polynomial.
    """

    __slots__ = ("coeffs", "prec")

    def __init__(self, coeffs=None, prec=None):
        c = {}
        for k, v in (coeffs or {}).items():
            if prec is not None and k >= prec:
                continue
            if v:
                c[int(k)] = v
        self.coeffs = c
        self.prec = prec

    @classmethod
    def monomial(cls, k, c=ONE, prec=None):
        return cls({k: c}, prec)

    def coeff(self, k):
        if self.prec is not None and k >= self.prec:
            raise ValueError(f"coefficient of z^{k} is beyond the truncation order {self.prec}")
        return self.coeffs.get(k, 0)

    def residue(self):
        return self.coeff(-1)

    def valuation(self):
        return min(self.coeffs) if self.coeffs else None

    def items(self):
        return sorted(self.coeffs.items())

    def __bool__(self):
        return bool(self.coeffs)

    def _prec_min(self, other):
        if self.prec is None:
            return other.prec
        if other.prec is None:
            return self.prec
        return min(self.prec, other.prec)

    def __add__(self, other):
        if not isinstance(other, LaurentPoly):
            other = LaurentPoly({0: other})
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0) + v
        return LaurentPoly(out, self._prec_min(other))

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.coeffs.items()}, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return LaurentPoly({k: v * c for k, v in self.coeffs.items()}, self.prec)

    def shift(self, k):
        """Multiply by z^k."""
        return LaurentPoly({e + k: v for e, v in self.coeffs.items()},
                           None if self.prec is None else self.prec + k)

    def __mul__(self, other):
        if not isinstance(other, LaurentPoly):
            return self.scale(other)
        prec = None
        va, vb = self.valuation(), other.valuation()
        if self.prec is not None:
            prec = self.prec + (vb if vb is not None else 0)
        if other.prec is not None:
            p2 = other.prec + (va if va is not None else 0)
            prec = p2 if prec is None else min(prec, p2)
        out = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                if prec is not None and i + j >= prec:
                    continue
                out[i + j] = out.get(i + j, 0) + a * b
        return LaurentPoly(out, prec)

    __rmul__ = __mul__

    def truncate(self, prec):
        if self.prec is not None and prec > self.prec:
            raise ValueError("cannot raise the precision of a truncated series")
        return LaurentPoly(self.coeffs, prec)

    def __eq__(self, other):
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.coeffs == other.coeffs and self.prec == other.prec

    def agrees_with(self, other, upto):
        """Coefficients for all exponents < ``upto`` coincide."""
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(k) == other.coeff(k) for k in keys if k < upto)

    def __repr__(self):
        terms = ", ".join(f"{k}: {scalar_to_str(v)}" for k, v in self.items())
        return f"LaurentPoly({{{terms}}}, prec={self.prec})"


def series_residue(f):
    """Coefficient of z^-1 of a (truncated) Laurent series."""
    return f.residue()


def binomial_series(m, a, prec):
    """(1 + a z)^m as a power series truncated at z^prec."""
    return LaurentPoly({j: binom(m, j) * a ** j for j in range(max(prec, 0))}, prec)


def _shifted_poly(num, x):
    """Coefficients of N(x + z) in z."""
    out = {}
    for i, c in enumerate(num):
        if not c:
            continue
        for k in range(i + 1):
            term = c * comb(i, k) * x ** (i - k) if i > k else c
            out[k] = out.get(k, 0) + term
    return out


class RationalFunction:
    """N(z) / prod_p (z - p)^{m_p} with finite poles ``p`` listed explicitly.

    The numerator is a little-endian coefficient tuple over any exact field;
    pole locations may themselves be field elements (e.g. a formal point).
    """

    __slots__ = ("num", "poles")

    def __init__(self, num, poles=None):
        num = list(num)
        while num and not num[-1]:
            num.pop()
        self.num = tuple(num)
        self.poles = {p: m for p, m in (poles or {}).items() if m > 0}

    @classmethod
    def constant(cls, c):
        return cls((c,))

    @classmethod
    def monomial(cls, k, c=ONE):
        """c z^k for any integer k."""
        if k >= 0:
            return cls((0,) * k + (c,))
        return cls((c,), {0: -k})

    def __bool__(self):
        return bool(self.num)

    def degree_bound(self):
        """Order of growth at infinity: deg N - sum of pole orders."""
        if not self.num:
            return None
        return len(self.num) - 1 - sum(self.poles.values())

    def __call__(self, x):
        acc = mpq(0)
        for c in reversed(self.num):
            acc = acc * x + c
        for p, m in self.poles.items():
            acc = acc / (x - p) ** m
        return acc

    def laurent_at(self, x, prec):
        """Laurent expansion in z = zeta - x, known below z^prec."""
        val = -self.poles.get(x, 0)
        need = prec - val
        out = LaurentPoly(_shifted_poly(self.num, x), prec=max(need, 0))
        for p, m in self.poles.items():
            if p == x:
                continue
            d = x - p
            series = binomial_series(-m, mpq(1) / d, max(need, 0)).scale((mpq(1) / d) ** m)
            out = out * series
        return out.shift(val).truncate(prec) if need > 0 else LaurentPoly({}, prec)

    def laurent_at_infinity(self, prec):
        """Expansion in w = 1/zeta, known below w^prec."""
        if not self.num:
            return LaurentPoly({}, prec)
        dn = len(self.num) - 1
        mtot = sum(self.poles.values())
        val = mtot - dn
        need = prec - val
        if need <= 0:
            return LaurentPoly({}, prec)
        top = LaurentPoly({dn - i: c for i, c in enumerate(self.num)}, None)
        out = top.truncate(need)
        for p, m in self.poles.items():
            out = out * binomial_series(-m, -p, need)
        return out.shift(val).truncate(prec)

    def mul(self, other):
        poles = dict(self.poles)
        for p, m in other.poles.items():
            poles[p] = poles.get(p, 0) + m
        num = [0] * (len(self.num) + len(other.num) - 1) if self.num and other.num else []
        for i, a in enumerate(self.num):
            for j, b in enumerate(other.num):
                num[i + j] = num[i + j] + a * b
        return RationalFunction(num, poles)

    def to_json(self):
        return {
            "numerator": [scalar_to_str(c) for c in self.num],
            "poles": [[scalar_to_str(p), m] for p, m in sorted(self.poles.items(), key=lambda t: scalar_to_str(t[0]))],
        }

    def __repr__(self):
        return f"RationalFunction({self.to_json()})"
