"""Concrete vertex operator algebras truncated at a weight cutoff.

Basis vectors are PBW monomials applied to the vacuum, labelled by
partitions written as weakly decreasing tuples.  For the Heisenberg algebra
the label ``(k1, ..., kr)`` is ``a_{-k1} ... a_{-kr} 1``; for the Virasoro
algebra it is ``L_{-k1} ... L_{-kr} 1`` with every part at least 2.

Modes ``Y(e_a)_n e_b`` are produced by the reconstruction recursion for a
strongly generated algebra and cached.  The cutoff bounds what callers may
ask for; internal recursion is free to pass through higher weights.
"""

from __future__ import annotations

import json
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .linalg import vaxpy
from .scalars import GENERIC, RatFunc, binom, parse_scalar, scalar_to_str

VACUUM = ()


class CutoffError(ValueError):
    """A requested vector or mode output lies above the weight cutoff."""


@lru_cache(maxsize=None)
def partitions(n, min_part=1, max_part=None):
    """Partitions of n as decreasing tuples, in lexicographic order."""
    if max_part is None:
        max_part = n
    if n == 0:
        return ((),)
    out = []
    for first in range(min_part, min(n, max_part) + 1):
        for rest in partitions(n - first, min_part, first):
            out.append((first,) + rest)
    return tuple(sorted(out))


class GradedBasis:
    """Partition-indexed homogeneous basis of V^{<=K}."""

    def __init__(self, min_part, cutoff):
        self.min_part = min_part
        self.cutoff = cutoff

    def weight(self, label):
        return sum(label)

    def of_weight(self, n):
        if n < 0:
            return ()
        return partitions(n, self.min_part)

    def upto(self, n=None):
        n = self.cutoff if n is None else n
        out = []
        for k in range(n + 1):
            out.extend(self.of_weight(k))
        return out

    def dims(self, n=None):
        n = self.cutoff if n is None else n
        return [len(self.of_weight(k)) for k in range(n + 1)]

    def __contains__(self, label):
        return (isinstance(label, tuple) and sum(label) <= self.cutoff
                and all(p >= self.min_part for p in label)
                and list(label) == sorted(label, reverse=True))


class _Store:
    """Caches shared by all cutoff views of one algebra."""

    def __init__(self):
        self.gen = {}
        self.mode = {}
        self.virasoro = {}


class VertexAlgebra:
    """Common machinery; subclasses provide the generator and its modes."""

    name = ""
    gen_weight = 1
    min_part = 1

    def __init__(self, cutoff, central_charge, store=None):
        if cutoff < 2:
            raise ValueError(f"cutoff must be at least 2 so that the conformal vector exists, got {cutoff}")
        self.cutoff = cutoff
        self.central_charge = central_charge
        self.basis = GradedBasis(self.min_part, cutoff)
        self._store = store or _Store()

    # -- views -----------------------------------------------------------
    def with_cutoff(self, cutoff):
        """Same algebra, same caches, different cutoff."""
        new = object.__new__(type(self))
        new.__dict__.update(self.__dict__)
        if cutoff < 2:
            raise ValueError("cutoff must be at least 2")
        new.cutoff = cutoff
        new.basis = GradedBasis(self.min_part, cutoff)
        return new

    def descriptor(self):
        c = self.central_charge
        cstr = GENERIC if isinstance(c, RatFunc) and not c.is_const() else scalar_to_str(c)
        return {"voa": self.name, "central_charge": cstr, "cutoff": self.cutoff}

    def to_json(self):
        return json.dumps(self.descriptor(), sort_keys=True)

    vacuum = VACUUM

    def weight(self, label):
        return sum(label)

    def vec_weights(self, v):
        return {sum(k) for k in v}

    def check_label(self, label):
        if sum(label) > self.cutoff:
            raise CutoffError(f"vector of weight {sum(label)} exceeds cutoff {self.cutoff}")

    # -- to be provided --------------------------------------------------
    def _split(self, label):
        """Return (m, rest) with label = g_(m) rest."""
        raise NotImplementedError

    def _gen(self, j, label):
        """g_(j) applied to a basis vector, any weight."""
        raise NotImplementedError

    @property
    def conformal(self):
        raise NotImplementedError

    # -- modes -----------------------------------------------------------
    def gen_act(self, j, label):
        key = (j, label)
        cache = self._store.gen
        out = cache.get(key)
        if out is None:
            out = self._gen(j, label)
            cache[key] = out
        return out

    def gen_vec(self, j, v):
        acc = {}
        for lab, c in v.items():
            vaxpy(acc, self.gen_act(j, lab), c)
        return acc

    def _mode(self, a, n, b):
        """Y(e_a)_n e_b with no cutoff check (memoised)."""
        if not a:
            return {b: 1} if n == -1 else {}
        wa, wb = sum(a), sum(b)
        if wa + wb - n - 1 < 0:
            return {}
        key = (a, n, b)
        cache = self._store.mode
        out = cache.get(key)
        if out is not None:
            return out
        m, u = self._split(a)
        if not u and m == -1:
            out = self.gen_act(n, b)
        else:
            out = {}
            wu = sum(u)
            gw = self.gen_weight
            j = 0
            # (g_(m) u)_(n) = sum_j (-1)^j C(m,j) [g_(m-j) u_(n+j) - (-1)^m u_(m+n-j) g_(j)]
            sgn_m = -1 if m % 2 else 1
            while n + j < wu + wb or j < gw + wb:
                c = binom(m, j) * (-1 if j % 2 else 1)
                if n + j < wu + wb:
                    inner = self._mode(u, n + j, b)
                    for lab, x in inner.items():
                        vaxpy(out, self.gen_act(m - j, lab), c * x)
                if j < gw + wb:
                    inner = self.gen_act(j, b)
                    for lab, x in inner.items():
                        vaxpy(out, self._mode(u, m + n - j, lab), -sgn_m * c * x)
                j += 1
        cache[key] = out
        return out

    def mode(self, a, n, b):
        """Y(e_a)_n e_b, raising CutoffError beyond the cutoff."""
        self.check_label(a)
        self.check_label(b)
        w = sum(a) + sum(b) - n - 1
        if w > self.cutoff:
            raise CutoffError(f"Y(e_{a})_{n} e_{b} has weight {w} > cutoff {self.cutoff}")
        return self._mode(a, n, b)

    def mode_vec(self, u, n, v):
        acc = {}
        for a, x in u.items():
            for b, y in v.items():
                vaxpy(acc, self.mode(a, n, b), x * y)
        return acc

    def _mode_vec(self, u, n, v):
        acc = {}
        for a, x in u.items():
            for b, y in v.items():
                vaxpy(acc, self._mode(a, n, b), x * y)
        return acc

    # -- Virasoro modes --------------------------------------------------
    def L(self, n, label):
        """L(n) e_label = Y(omega)_{n+1} e_label (no cutoff check)."""
        key = (n, label)
        cache = self._store.virasoro
        out = cache.get(key)
        if out is None:
            out = self._mode_vec(self.conformal, n + 1, {label: 1})
            cache[key] = out
        return out

    def L_vec(self, n, v):
        acc = {}
        for lab, c in v.items():
            vaxpy(acc, self.L(n, lab), c)
        return acc


class Heisenberg(VertexAlgebra):
    """Rank-one free boson: [a_m, a_n] = m delta_{m+n,0}."""

    name = "heisenberg"
    gen_weight = 1
    min_part = 1

    def __init__(self, cutoff, store=None):
        super().__init__(cutoff, mpq(1), store)

    def _split(self, label):
        return -label[0], label[1:]

    def _gen(self, j, label):
        if j < 0:
            return {tuple(sorted(label + (-j,), reverse=True)): 1}
        if j == 0:
            return {}
        mult = label.count(j)
        if not mult:
            return {}
        lst = list(label)
        lst.remove(j)
        return {tuple(lst): j * mult}

    @property
    def conformal(self):
        return {(1, 1): mpq(1, 2)}

    @property
    def alpha(self):
        return (1,)


class Virasoro(VertexAlgebra):
    """Vacuum Virasoro algebra; the generator field is omega, g_(j) = L(j-1)."""

    name = "virasoro"
    gen_weight = 2
    min_part = 2

    def _split(self, label):
        return 1 - label[0], label[1:]

    def _gen(self, j, label):
        return self._Lmono(j - 1, label)

    def _Lmono(self, p, mono):
        cache = self._store.gen
        key = ("L", p, mono)
        out = cache.get(key)
        if out is not None:
            return out
        if not mono:
            out = {} if p >= -1 else {(-p,): 1}
        elif p == 0:
            out = {mono: sum(mono)}
        elif -p >= mono[0]:
            out = {(-p,) + mono: 1}
        else:
            k = mono[0]
            rest = mono[1:]
            out = {}
            for lab, x in self._Lmono(p, rest).items():
                vaxpy(out, self._Lmono(-k, lab), x)
            if p + k:
                for lab, x in self._Lmono(p - k, rest).items():
                    vaxpy(out, {lab: 1}, (p + k) * x)
            if p == k:
                cc = mpq(p ** 3 - p, 12) * self.central_charge
                vaxpy(out, {rest: 1}, cc)
        cache[key] = out
        return out

    @property
    def conformal(self):
        return {(2,): 1}

    def L(self, n, label):
        return self.gen_act(n + 1, label)


def build_heisenberg(cutoff):
    if cutoff < 2:
        raise ValueError(f"cutoff must be at least 2, got {cutoff}")
    return Heisenberg(cutoff)


def build_virasoro(c, cutoff):
    """``c`` is a rational, a string ``"p/q"``, or ``"generic"``."""
    if cutoff < 2:
        raise ValueError(f"cutoff must be at least 2, got {cutoff}")
    if isinstance(c, str):
        c = parse_scalar(c)
    return Virasoro(cutoff, c)


def build_voa(descriptor):
    """Build from ``{"voa": ..., "central_charge": ..., "cutoff": K}``."""
    if isinstance(descriptor, str):
        descriptor = json.loads(descriptor)
    kind = descriptor.get("voa")
    cutoff = int(descriptor.get("cutoff", 6))
    if kind == "heisenberg":
        return build_heisenberg(cutoff)
    if kind == "virasoro":
        return build_virasoro(descriptor.get("central_charge", GENERIC), cutoff)
    raise ValueError(f"unknown voa {kind!r}")


def mode_action(V, a, n, v):
    """Y(e_a)_n v for a basis label ``a`` and a vector ``v``."""
    return V.mode_vec({a: 1}, n, v)


def exp_L(V, n, v, coeff=1, stop=None):
    """exp(coeff * L(n)) v for n != 0, truncated when L(n) is nilpotent on v.

    For n < 0 the series is infinite; ``stop`` bounds the number of terms.
    """
    acc = dict(v)
    term = dict(v)
    k = 1
    while term and (stop is None or k <= stop):
        term = V.L_vec(n, term)
        if not term:
            break
        vaxpy(acc, term, mpq(1, factorial(k)) * coeff ** k)
        k += 1
    return acc


def skew_symmetry_defect(V, a, b):
    """Y(a,z)b - e^{zL(-1)}Y(b,-z)a coefficientwise, for basis labels.

    Returns a dict n -> difference vector for every mode n that is nonzero on
    either side.
    """
    wa, wb = sum(a), sum(b)
    out = {}
    top = wa + wb - 1
    # coefficient of z^{-n-1}: Y(a)_n b = sum_{j>=0} (-1)^{n+j+1} L(-1)^j/j! Y(b)_{n+j} a
    for n in range(top, top - V.cutoff - 1, -1):
        if wa + wb - n - 1 > V.cutoff:
            break
        lhs = V.mode(a, n, b)
        rhs = {}
        j = 0
        while n + j <= top:
            y = V._mode(b, n + j, a)
            for _ in range(j):
                y = V.L_vec(-1, y)
            sign = -1 if (n + j + 1) % 2 else 1
            vaxpy(rhs, y, mpq(sign, factorial(j)))
            j += 1
        diff = dict(lhs)
        vaxpy(diff, rhs, -1)
        if diff:
            out[n] = diff
    return out
