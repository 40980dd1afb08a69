"""Propagation of partial conformal blocks on P^1.

The main geometry is the sphere q with outgoing points inf (level a_inf)
and 0 (level a0) and one incoming point 1 carrying the vacuum module V.  A
functional phi on V with levels (a_inf, a0) propagates to rational functions

    F_{v,w}(zeta) = N(zeta) / (zeta^A (zeta - 1)^B),
    A = wt v + a0,  B = wt v + wt w,  deg N <= A + B + a_inf - wt v,

whose expansion at 1 is sum_n phi(Y(v)_n w) (zeta - 1)^{-n-1}.  The new
functionals Y_-(v)_k phi and Y'_+(v)_k phi are read off at 0 and at inf.
"""

from __future__ import annotations

import json
import random
from math import factorial

from gmpy2 import mpq

from . import geometry as geo
from .laurent import LaurentPoly, RationalFunction
from .linalg import solve_linear
from .modules import VacuumModule
from .scalars import binom, scalar_to_str
from .voa import CutoffError


class PropagationError(ValueError):
    pass


class NoSolutionError(PropagationError):
    """The prescribed local data do not glue: phi is not a block at these levels."""


class AmbiguityError(PropagationError):
    """Too few matching coefficients to pin down the rational function."""


class SectionConstructionError(PropagationError):
    """No interpolating section was found below the pole budget cap."""


# -- functionals -------------------------------------------------------------

class Functional:
    """Linear functional on the vacuum module V at the incoming point of q."""

    levels = (0, 0)

    def __init__(self, voa, levels):
        self.voa = voa
        self.levels = tuple(levels)
        self._memo = {}

    def value(self, label):
        out = self._memo.get(label)
        if out is None:
            out = self._value(label)
            self._memo[label] = out
        return out

    def _value(self, label):
        raise NotImplementedError

    def __call__(self, vec):
        total = 0
        for lab, c in vec.items():
            x = self.value(lab)
            if x:
                total = total + c * x
        return total

    def describe(self):
        return {"kind": type(self).__name__, "levels": list(self.levels)}


class MatrixCoefficient(Functional):
    """x -> <b', Y(x)_{wt x + wt a - wt b - 1} a>, the three-point block with a at 0, b' at inf.

    Exact at every weight, which makes it the functional of choice for deep checks.
    """

    def __init__(self, voa, a, b):
        super().__init__(voa, (voa.weight(b), voa.weight(a)))
        self.a, self.b = a, b

    def _value(self, x):
        V = self.voa
        n = V.weight(x) + V.weight(self.a) - V.weight(self.b) - 1
        return V._mode(x, n, self.a).get(self.b, 0)

    def describe(self):
        d = super().describe()
        d.update(a=list(self.a), b=list(self.b))
        return d


class QuotientFunctional(Functional):
    """A functional on a truncated quotient, given on its representatives."""

    def __init__(self, voa, quotient, values, levels, cutoff):
        super().__init__(voa, levels)
        self.quotient = quotient
        self.values = dict(values)
        self.cutoff = cutoff

    def _value(self, label):
        if self.voa.weight(label) > self.cutoff:
            raise CutoffError(f"functional known only up to weight {self.cutoff}")
        proj = self.quotient.project({label: 1})
        total = 0
        for r, c in proj.items():
            x = self.values.get(r, 0)
            if x:
                total = total + c * x
        return total


class TableFunctional(Functional):
    """Explicit values on basis labels up to a cutoff (zero beyond the table)."""

    def __init__(self, voa, values, levels, cutoff):
        super().__init__(voa, levels)
        self.values = dict(values)
        self.cutoff = cutoff

    def _value(self, label):
        if self.voa.weight(label) > self.cutoff:
            raise CutoffError(f"table functional known only up to weight {self.cutoff}")
        return self.values.get(label, 0)


def random_functional(voa, cutoff, levels=(0, 0), seed=0, lo=-3, hi=3):
    rng = random.Random(seed)
    vals = {lab: mpq(rng.randint(lo, hi)) for lab in voa.basis.upto(cutoff)}
    return TableFunctional(voa, vals, levels, cutoff)


class DerivedFunctional(Functional):
    """Y_-(v)_k phi, Y'_+(v)_k phi or Y_+(v)_k phi, evaluated by propagation."""

    def __init__(self, base, kind, v, k, route="A"):
        V = base.voa
        wt = V.weight(v)
        a_inf, a0 = base.levels
        if kind == "minus":
            levels = (a_inf, a0 + max(0, wt - k - 1))
        elif kind == "plus":
            levels = (a_inf + max(0, wt - k - 1), a0)
        elif kind == "plus_prime":
            levels = (a_inf + max(0, k + 1 - wt), a0)
        else:
            raise ValueError(f"unknown functional mode kind {kind!r}")
        super().__init__(V, levels)
        self.base, self.kind, self.v, self.k, self.route = base, kind, v, k, route
        self.prop = propagator(base)

    def _value(self, w):
        if self.kind == "minus":
            return self.prop.minus(self.v, self.k, w, self.route)
        if self.kind == "plus_prime":
            return self.prop.plus_prime(self.v, self.k, w, self.route)
        return self.prop.plus(self.v, self.k, w, self.route)

    def describe(self):
        d = super().describe()
        d.update(kind=self.kind, v=list(self.v), k=self.k, base=self.base.describe())
        return d


def Y_minus(phi, v, k, route="A"):
    return DerivedFunctional(phi, "minus", v, k, route)


def Y_plus(phi, v, k, route="A"):
    return DerivedFunctional(phi, "plus", v, k, route)


def Y_plus_prime(phi, v, k, route="A"):
    return DerivedFunctional(phi, "plus_prime", v, k, route)


# -- dense exact inverses -----------------------------------------------------

def _inverse(M):
    n = len(M)
    A = [list(r) + [mpq(1) if i == j else mpq(0) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            raise ZeroDivisionError("singular interpolation matrix")
        A[c], A[p] = A[p], A[c]
        inv = mpq(1) / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for r in range(n):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [row[n:] for row in A]


_SHAPES = {}


def _shape(A, B, U):
    """Inverse of M[r][i] = C(i - A, r), r, i < U (the expansion at 1)."""
    key = (A, B, U)
    out = _SHAPES.get(key)
    if out is None:
        M = [[mpq(binom(i - A, r)) for i in range(U)] for r in range(U)]
        out = _inverse(M)
        _SHAPES[key] = out
    return out


# -- propagated functions -----------------------------------------------------

class PropagatedFunction:
    """N(zeta) / (zeta^A (zeta - 1)^B) with exact numerator coefficients."""

    __slots__ = ("num", "A", "B", "_rf")

    def __init__(self, num, A, B):
        self.num = tuple(num)
        self.A, self.B = A, B
        self._rf = None

    @property
    def rational(self):
        if self._rf is None:
            self._rf = RationalFunction(self.num, {mpq(0): self.A, mpq(1): self.B})
        return self._rf

    def __call__(self, x):
        return self.rational(x)

    def at_zero(self, prec):
        return self.rational.laurent_at(mpq(0), prec)

    def at_one(self, prec):
        return self.rational.laurent_at(mpq(1), prec)

    def at_infinity(self, prec):
        return self.rational.laurent_at_infinity(prec)

    def is_zero(self):
        return not any(self.num)

    def to_json(self):
        return self.rational.to_json()


class QPropagator:
    """Propagation of one functional on q, with per-(v, w) caching."""

    def __init__(self, phi, extra=2):
        self.phi = phi
        self.V = phi.voa
        self.extra = extra
        self._cache = {}

    def shape(self, v, w):
        V = self.V
        a_inf, a0 = self.phi.levels
        wv = V.weight(v)
        A = wv + a0
        B = wv + V.weight(w)
        U = A + B + a_inf - wv + 1
        return A, B, U

    def data(self, v, w, r):
        """Coefficient of (zeta-1)^{r-B}: phi(Y(v)_{B-r-1} w); output weight r."""
        A, B, U = self.shape(v, w)
        return self.phi(self.V._mode(v, B - r - 1, w))

    def F(self, v, w, depth=None):
        """The propagated function for basis labels v, w."""
        key = (v, w, depth)
        out = self._cache.get(key)
        if out is not None:
            return out
        A, B, U = self.shape(v, w)
        depth = U + self.extra if depth is None else depth
        if U <= 0:
            for r in range(depth):
                if self.data(v, w, r):
                    raise NoSolutionError(f"phi(Y({v})_{B - r - 1}{w}) != 0 but no function is allowed")
            out = PropagatedFunction((), A, B)
        else:
            if depth < U:
                raise AmbiguityError(f"matching depth {depth} < {U} unknowns for ({v}, {w})")
            d = [self.data(v, w, r) for r in range(depth)]
            inv = _shape(A, B, U)
            num = []
            for i in range(U):
                s = 0
                for r in range(U):
                    if inv[i][r] and d[r]:
                        s = s + inv[i][r] * d[r]
                num.append(s)
            for r in range(U, depth):
                s = 0
                for i in range(U):
                    c = binom(i - A, r)
                    if c and num[i]:
                        s = s + c * num[i]
                if s != d[r]:
                    raise NoSolutionError(
                        f"local data at 1 do not glue for v={v}, w={w}: coefficient {r - B} "
                        f"is {scalar_to_str(d[r])}, forced value {scalar_to_str(s)}")
            out = PropagatedFunction(num, A, B)
        self._cache[key] = out
        return out

    # -- linear extensions over vectors ---------------------------------
    def value(self, v, w, x):
        """F_{v,w}(x) for vectors v, w (dicts) at a point x."""
        total = 0
        for a, c in v.items():
            for b, d in w.items():
                f = self.F(a, b)
                if not f.is_zero():
                    total = total + c * d * f(x)
        return total

    # -- functional modes, route A (expansions) ---------------------------
    def minus(self, v, k, w, route="A"):
        if route == "B":
            return minus_by_section(self.phi, v, k, w)
        f = self.F(v, w)
        if f.is_zero():
            return 0
        return f.at_zero(-k).coeff(-k - 1)

    def plus_prime(self, v, k, w, route="A"):
        if route == "B":
            return plus_prime_by_section(self.phi, v, k, w)
        f = self.F(v, w)
        if f.is_zero():
            return 0
        # coefficient of zeta^{-k-1} is the coefficient of w^{k+1}
        return f.at_infinity(k + 2).coeff(k + 1)

    def plus(self, v, k, w, route="A"):
        """Y_+(v)_k = sum_j (-1)^{wt v}/j! Y'_+(L(1)^j v)_{-k-j-2+2 wt v}."""
        V = self.V
        h = V.weight(v)
        sign = -1 if h % 2 else 1
        total = 0
        term = {v: mpq(1)}
        j = 0
        while term:
            idx = -k - j - 2 + 2 * h
            for u, c in term.items():
                x = self.plus_prime(u, idx, w, route)
                if x:
                    total = total + mpq(sign, factorial(j)) * c * x
            term = V.L_vec(1, term)
            j += 1
        return total


_PROPAGATORS = {}


def propagator(phi):
    p = _PROPAGATORS.get(id(phi))
    if p is None or p.phi is not phi:
        p = QPropagator(phi)
        _PROPAGATORS[id(phi)] = p
    return p


# -- route B: interpolating sections ---------------------------------------

def _interpolating_section(conditions, columns, cap):
    """Solve for column coefficients meeting ``conditions`` with growing pole budget.

    ``columns(T)`` lists the ansatz at pole budget T at 1; ``conditions``
    maps a column list to (rows, rhs).  Raises SectionConstructionError at the cap.
    """
    for T in range(cap + 1):
        cols = columns(T)
        rows, rhs = conditions(cols)
        sol, _ = solve_linear(rows, cols, rhs)
        if sol is not None:
            return sol
    raise SectionConstructionError(f"no interpolating section with pole order <= {cap} at 1")


def _expansion_rows(cols, x, lo, hi, target):
    """Rows forcing the expansion at x to equal ``target`` for lo <= e < hi."""
    rows, rhs = [], []
    for e in range(lo, hi):
        row = {}
        for col in cols:
            for ee, c in geo.column_expansion(col, x, hi):
                if ee == e:
                    row[col] = c
        rows.append(row)
        rhs.append(target.get(e, 0))
    return rows, rhs


_UNBOUNDED = 10 ** 6


def _residue_at_one(phi, v, cols, w):
    V = phi.voa.with_cutoff(_UNBOUNDED)
    sigma = geo.RationalSection({v: cols})
    X = geo.PointedSphere([mpq(1)], [])
    return phi(geo.residue_act(X, VacuumModule(V), sigma, 0, w))


def minus_by_section(phi, v, k, w, cap=None):
    """<Y_-(v)_k phi, w> = -phi(sigma *_1 w) with sigma = f U^{-1} v dzeta, f = zeta^k mod zeta^A at 0."""
    V = phi.voa
    a_inf, a0 = phi.levels
    h = V.weight(v)
    A = h + a0
    D = h - a_inf - 2
    if k >= A:
        return 0
    cap = a0 + a_inf + 1 + (cap or 4)
    s = max(0, -k)

    def columns(T):
        cols = [geo.mono(d) for d in range(D + 1)]
        cols += [geo.pole(mpq(0), m) for m in range(1, s + 1)]
        cols += [geo.pole(mpq(1), m) for m in range(1, T + 1)]
        return cols

    def conditions(cols):
        rows, rhs = _expansion_rows(cols, mpq(0), -s, A, {k: 1})
        r2, b2 = _expansion_rows(cols, geo.INF, -max(D, 0), -D, {})
        return rows + r2, rhs + b2

    sol = _interpolating_section(conditions, columns, cap)
    return -_residue_at_one(phi, v, sol, {w: 1})


def plus_prime_by_section(phi, v, k, w, cap=None):
    """<Y'_+(v)_k phi, w> = phi(sigma *_1 w) with deg(f - zeta^k) <= D and f = O(zeta^A) at 0."""
    V = phi.voa
    a_inf, a0 = phi.levels
    h = V.weight(v)
    A = h + a0
    D = h - a_inf - 2
    if k <= D:
        return 0
    cap = a0 + a_inf + 1 + (cap or 4)
    top = max(k, A - 1)

    def columns(T):
        cols = [geo.mono(d) for d in range(top + 1)]
        cols += [geo.pole(mpq(1), m) for m in range(1, T + 1)]
        return cols

    def conditions(cols):
        rows, rhs = _expansion_rows(cols, mpq(0), 0, A, {})
        r2, b2 = _expansion_rows(cols, geo.INF, -top, -D, {-k: 1})
        return rows + r2, rhs + b2

    sol = _interpolating_section(conditions, columns, cap)
    return _residue_at_one(phi, v, sol, {w: 1})


# -- general spheres ----------------------------------------------------------

def _denominator(X, v_wt, w_wts):
    poles = {}
    for mp, ww in zip(X.incoming, w_wts):
        poles[mp.point] = v_wt + ww
    for mp in X.finite_outgoing():
        poles[mp.point] = v_wt + mp.level
    return poles


def propagate(phi, X, v, w, W=None, depth=None):
    """Propagated rational function of phi for basis labels v (algebra) and w (module).

    ``phi`` is any callable on module vectors; ``W`` is the module attached
    to the incoming points (a MultiModule for several points).  Incoming
    points must be finite; infinity is outgoing or unmarked.  The answer is
    cross-checked with the strong residue test before it is returned.
    """
    if X.infinity_role() == "incoming":
        raise geo.GeometryError("propagation needs infinity to be outgoing or unmarked")
    if W is None:
        W = VacuumModule(phi.voa)
    slots = geo._Slots(W, len(X.incoming))
    V = slots.voa
    h = V.weight(v)
    w_wts = [slots.weight(i, w) for i in range(len(X.incoming))]
    poles = _denominator(X, h, w_wts)
    a_inf = X.infinity_level()
    dinf = (a_inf if a_inf is not None else 0) - h
    U = dinf + sum(poles.values()) + 1
    depth = (U + 2) if depth is None else depth
    if U <= 0:
        num = ()
    else:
        if depth < U:
            raise AmbiguityError(f"matching depth {depth} < {U} unknowns")
        basis = [RationalFunction((0,) * i + (mpq(1),), poles) for i in range(U)]
        rows, rhs = [], []
        for i, mp in enumerate(X.incoming):
            B = poles[mp.point]
            exps = [f.laurent_at(mp.point, -B + depth) for f in basis]
            for e in range(-B, -B + depth):
                rows.append({j: ex.coeff(e) for j, ex in enumerate(exps) if ex.coeff(e)})
                rhs.append(phi(slots.act(i, v, -e - 1, w)))
        sol, rank = solve_linear(rows, list(range(U)), rhs)
        if sol is None:
            raise NoSolutionError(f"local data do not glue for v={v}, w={w}")
        if rank < U:
            raise AmbiguityError(f"rank {rank} < {U}: raise the matching depth")
        num = [sol.get(i, 0) for i in range(U)]
    F = RationalFunction(num, poles)
    return F


def strong_residue_certificate(F, X, v_wt, w_wts, levels, depth):
    """Run the strong residue test on F dzeta with the data a block supplies.

    Incoming points carry the expansion known to ``depth`` coefficients;
    outgoing points only the pole bound.
    """
    exps = {}
    for mp, ww in zip(X.incoming, w_wts):
        B = v_wt + ww
        exps[mp.point] = F.laurent_at(mp.point, -B + depth)
    for mp in X.finite_outgoing():
        exps[mp.point] = LaurentPoly({}, -(v_wt + mp.level))
    a_inf = X.infinity_level()
    bound = (a_inf if a_inf is not None else 0) - v_wt
    exps[geo.INF] = LaurentPoly({}, -bound - 2)
    return geo.strong_residue_test(exps)


def certify_q(prop, v, w):
    """Strong residue test for F_{v,w} of a q-propagator."""
    A, B, U = prop.shape(v, w)
    a_inf, a0 = prop.phi.levels
    h = prop.V.weight(v)
    depth = max(U, 0) + prop.extra
    data = {r - B: prop.data(v, w, r) for r in range(depth)}
    exps = {
        mpq(1): LaurentPoly(data, -B + depth),
        mpq(0): LaurentPoly({}, -A),
        geo.INF: LaurentPoly({}, -(a_inf - h) - 2),
    }
    return geo.strong_residue_test(exps)


# -- double propagation --------------------------------------------------------

class DoubleBlock:
    """G(z) = F^2(v1, v2, w)(z, p2) as a rational function in z for fixed p2."""

    def __init__(self, num, A, B, C, p2):
        self.num, self.A, self.B, self.C, self.p2 = tuple(num), A, B, C, p2
        poles = {mpq(0): A, mpq(1): B}
        poles[p2] = poles.get(p2, 0) + C
        self.rational = RationalFunction(self.num, poles)

    def __call__(self, z):
        return self.rational(z)


def double_propagate(phi, v1, v2, w, p2, order=8):
    """Double propagation on q at a second point p2 (rational or formal).

    Inputs: the principal part at p2 from F_{Y(v1)_k v2, w}(p2), k >= 0, and
    the first coefficients at 1 from F_{v2, Y(v1)_n w}(p2).  Returns the
    DoubleBlock; ``property_suite`` checks everything else.
    """
    V = phi.voa
    prop = propagator(phi)
    a_inf, a0 = phi.levels
    h1, h2, hw = V.weight(v1), V.weight(v2), V.weight(w)
    A, B, C = h1 + a0, h1 + hw, h1 + h2
    U = A + B + C + a_inf - h1 + 1
    if U <= 0:
        return DoubleBlock((), A, B, C, p2)
    basis = [DoubleBlock((0,) * i + (mpq(1),), A, B, C, p2).rational for i in range(U)]
    rows, rhs = [], []
    exps = [f.laurent_at(p2, 0) for f in basis]
    for k in range(C):
        e = -k - 1
        rows.append({j: ex.coeff(e) for j, ex in enumerate(exps) if ex.coeff(e)})
        x = V._mode(v1, k, v2)
        rhs.append(prop.value(x, {w: 1}, p2))
    n_one = U - C
    exps1 = [f.laurent_at(mpq(1), -B + n_one) for f in basis]
    for e in range(-B, -B + n_one):
        rows.append({j: ex.coeff(e) for j, ex in enumerate(exps1) if ex.coeff(e)})
        y = V._mode(v1, -e - 1, w)
        rhs.append(prop.value({v2: 1}, y, p2))
    sol, rank = solve_linear(rows, list(range(U)), rhs)
    if sol is None:
        raise NoSolutionError("double propagation data are inconsistent")
    if rank < U:
        raise AmbiguityError(f"double propagation rank {rank} < {U}")
    return DoubleBlock([sol.get(i, 0) for i in range(U)], A, B, C, p2)


def property_suite(phi, v1, v2, w, p2, order=8, swap_points=None):
    """Exact checks of properties (1)-(4) for one triple; returns a failure list.

    (1) the expansion at 1 equals F_{v2, Y(v1, z) w}(p2) on ``order``
        coefficients beyond the ones used as input;
    (2) the regular part at p2 equals F_{Y(v1, z) v2, w}(p2) on ``order`` coefficients;
    (3) for v1 = vacuum, G is the constant F_{v2,w}(p2);
    (4) G^{v1,v2}_{p2}(p1) = G^{v2,v1}_{p1}(p2) at the sample points.
    """
    V = phi.voa
    prop = propagator(phi)
    G = double_propagate(phi, v1, v2, w, p2, order)
    failures = []
    A, B, C = G.A, G.B, G.C
    a_inf = phi.levels[0]
    U = A + B + C + a_inf - V.weight(v1) + 1
    n_one = max(U - C, 0)
    lo1 = -B + n_one
    ex1 = G.rational.laurent_at(mpq(1), lo1 + order)
    for e in range(lo1, lo1 + order):
        want = prop.value({v2: 1}, V._mode(v1, -e - 1, w), p2)
        if ex1.coeff(e) != want:
            failures.append(("expansion_at_1", e, ex1.coeff(e), want))
    ex2 = G.rational.laurent_at(p2, order)
    for e in range(0, order):
        want = prop.value(V._mode(v1, -e - 1, v2), {w: 1}, p2)
        if ex2.coeff(e) != want:
            failures.append(("diagonal", e, ex2.coeff(e), want))
    if v1 == V.vacuum:
        const = prop.value({v2: 1}, {w: 1}, p2)
        for z in (mpq(3), mpq(-2), mpq(5, 7)):
            if z != p2 and G(z) != const:
                failures.append(("vacuum", z, G(z), const))
    for p1 in (swap_points or [mpq(-1), mpq(3, 2)]):
        if p1 in (p2, 0, 1):
            continue
        lhs = G(p1)
        rhs = double_propagate(phi, v2, v1, w, p1, order)(p2)
        if lhs != rhs:
            failures.append(("swap", p1, lhs, rhs))
    return failures


def dump_propagation(prop, pairs):
    """JSON document of propagated functions for (v, w) label pairs."""
    items = []
    for v, w in pairs:
        f = prop.F(v, w)
        items.append({"v": list(v), "w": list(w), "function": f.to_json()})
    return json.dumps({"functional": prop.phi.describe(), "functions": items}, sort_keys=True)
