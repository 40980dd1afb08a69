"""Higher Zhu algebras on a weight truncation.

Two constructions of the quotient V / O~_n(V) are compared: the geometric
one (coinvariants of the sphere q at levels (n, n)) and the classical one,
spanned by Res z^{-2n-2} Y((1+z)^{L(0)+n} u, z) v dz.  Products, the quotient
by Z_n(V), the algebra laws and the top-level representation are checked
exactly below the cutoff.
"""

from __future__ import annotations

from gmpy2 import mpq

from . import geometry as geo
from . import propagation as prop
from .linalg import Quotient, vaxpy
from .modules import ContragredientModule, VacuumModule, omega_subspace, span_contains
from .scalars import binom, scalar_to_str
from .voa import CutoffError


class MembershipError(ValueError):
    """The vector does not lie in Omega_n(W)."""


# -- the classical spanning set ------------------------------------------------

def on_generator(V, n, u, v):
    """sum_j C(wt u + n, j) Y(u)_{j-2n-2} v for basis labels u, v."""
    acc = {}
    top = V.weight(u) + n
    for j in range(top + 1):
        c = binom(top, j)
        if c:
            vaxpy(acc, V._mode(u, j - 2 * n - 2, v), c)
    return acc


def o_n_spanning(V, n, K):
    """All generators with top weight wt u + wt v + 2n + 1 <= K."""
    out = []
    for wu in range(K + 1):
        for wv in range(K - wu - 2 * n):
            for u in V.basis.of_weight(wu):
                for v in V.basis.of_weight(wv):
                    g = on_generator(V, n, u, v)
                    if g:
                        out.append(g)
    return out


def _labels(V, K):
    labs = []
    for w in range(K, -1, -1):
        labs.extend(V.basis.of_weight(w))
    return labs


def otilde_quotient(V, n, K, cap=None):
    """V^{<=K} modulo O~_n generators of top weight <= cap (default K)."""
    cap = K if cap is None else cap
    q = Quotient(_labels(V, K))
    for g in o_n_spanning(V, n, cap):
        if max(V.weight(k) for k in g) <= K:
            q.add_relation(g)
    return q


def geometric_quotient(V, n, K):
    """Coinvariants of q at levels (n, n) with sections up to weight K, budget K+1."""
    fq = geo.FusionQuotient(geo.q_sphere(n, n), VacuumModule(V), K, K + 1, K)
    return fq


# -- products --------------------------------------------------------------------

def diamond_L(V, n, u, v):
    """u <>_L v = Res sum_m (-1)^m C(m+n,n) (1+z)^{wt u+n} z^{-m-n-1} Y(u,z) v dz."""
    acc = {}
    wu = V.weight(u)
    for m in range(n + 1):
        cm = (-1) ** m * binom(m + n, n)
        for j in range(wu + n + 1):
            c = binom(wu + n, j)
            if c:
                vaxpy(acc, V._mode(u, j - m - n - 1, v), cm * c)
    return acc


def diamond_R(V, n, u, v):
    """u <>_R v = Res sum_m (-1)^n C(m+n,n) (1+z)^{wt v+m-1} z^{-m-n-1} Y(v,z) u dz."""
    acc = {}
    wu, wv = V.weight(u), V.weight(v)
    for m in range(n + 1):
        cm = (-1) ** n * binom(m + n, n)
        j = 0
        # (1+z)^{-1} is an infinite series; stop once the modes vanish
        while j - m - n - 1 < wu + wv:
            c = binom(wv + m - 1, j)
            if c:
                vaxpy(acc, V._mode(v, j - m - n - 1, u), cm * c)
            if wv + m - 1 >= 0 and j >= wv + m - 1:
                break
            j += 1
    return acc


def _bilinear(op, V, n, x, y):
    acc = {}
    for a, c in x.items():
        for b, d in y.items():
            vaxpy(acc, op(V, n, a, b), c * d)
    return acc


def diamond(V, n, x, y, side="L"):
    """Product of vectors (dicts) with the chosen side."""
    return _bilinear(diamond_L if side == "L" else diamond_R, V, n, x, y)


def omega_vector(V):
    return dict(V.conformal)


def z_generator(V, n, v):
    """omega <>_L v - v <>_R omega."""
    w = omega_vector(V)
    out = diamond(V, n, w, {v: 1}, "L")
    vaxpy(out, diamond(V, n, {v: 1}, w, "R"), -1)
    return out


def l0_plus_lm1(V, v):
    out = {v: mpq(V.weight(v))} if V.weight(v) else {}
    vaxpy(out, V.L(-1, v))
    return out


# -- the ZhuData bundle ---------------------------------------------------------------

class ZhuData:
    """A~_n(V) and A_n(V) on V^{<=K} with their product tables."""

    def __init__(self, V, n, K, pipeline="otilde"):
        if K < 2:
            raise ValueError("cutoff must be at least 2")
        self.V = V.with_cutoff(max(V.cutoff, K + 2))
        self.n, self.K = n, K
        Vk = self.V
        if pipeline == "geometric":
            self.tilde = geometric_quotient(Vk, n, K).quotient
        else:
            self.tilde = otilde_quotient(Vk, n, K)
        self.zn_relations = [l0_plus_lm1(Vk, v) for w in range(K) for v in Vk.basis.of_weight(w)]
        self.full = otilde_quotient(Vk, n, K)
        for r in self.zn_relations:
            self.full.add_relation(r)
        self.stable = self._stability()

    # -- bookkeeping -------------------------------------------------
    def weight_of(self, vec):
        return max((self.V.weight(k) for k in vec), default=0)

    def _stability(self):
        """K >= 2n + 1 and the classes below K do not move when the generator cap grows by 2."""
        if self.K < 2 * self.n + 1:
            return False
        wider = otilde_quotient(self.V.with_cutoff(self.K + 2), self.n, self.K + 2)
        for w in range(self.K + 1):
            for lab in self.V.basis.of_weight(w):
                a = self.tilde.project({lab: 1})
                b = wider.project({lab: 1})
                if a != b:
                    return False
        return True

    @property
    def tilde_reps(self):
        return self.tilde.representatives

    @property
    def reps(self):
        return self.full.representatives

    @property
    def zn_dim(self):
        return self.tilde.dim - self.full.dim

    def tilde_dims(self):
        out = [0] * (self.K + 1)
        for r in self.tilde_reps:
            out[self.V.weight(r)] += 1
        return out

    def dims(self):
        out = [0] * (self.K + 1)
        for r in self.reps:
            out[self.V.weight(r)] += 1
        return out

    def project(self, vec, tilde=False):
        if self.weight_of(vec) > self.K:
            raise CutoffError(f"vector of weight {self.weight_of(vec)} lies above the cutoff {self.K}")
        return (self.tilde if tilde else self.full).project(vec)

    def fits(self, *weights):
        return sum(weights) + 2 * self.n <= self.K

    def product(self, x, y, side="L", tilde=False):
        return self.project(diamond(self.V, self.n, x, y, side), tilde)

    def product_table(self):
        """[[i, j, coeffs]] over representative pairs whose product lies below the cutoff."""
        reps = self.reps
        index = {r: i for i, r in enumerate(reps)}
        table = []
        for i, a in enumerate(reps):
            for j, b in enumerate(reps):
                if not self.fits(self.V.weight(a), self.V.weight(b)):
                    continue
                p = self.product({a: 1}, {b: 1})
                coeffs = sorted(((index[k], scalar_to_str(c)) for k, c in p.items()))
                table.append([i, j, [[k, c] for k, c in coeffs]])
        return table

    def to_json(self):
        return {
            "voa": self.V.name,
            "level": self.n,
            "cutoff": self.K,
            "reps": [list(r) for r in self.reps],
            "product": self.product_table(),
            "stable": self.stable,
            "tilde_dims": self.tilde_dims(),
            "dims": self.dims(),
            "zn_dim": self.zn_dim,
        }

    # -- laws ------------------------------------------------------------
    def check_laws(self):
        """Unit, L = R mod Z_n, associativity, omega central and the Z_n identity."""
        V, n, K = self.V, self.n, self.K
        one = {V.vacuum: 1}
        failures = []
        self.laws_checked = 0
        labels = V.basis.upto(K)
        for v in labels:
            wv = V.weight(v)
            if self.fits(wv):
                self.laws_checked += 2
                if self.product(one, {v: 1}, "L", tilde=True) != self.project({v: 1}, tilde=True):
                    failures.append(("unit_L", v))
                if self.product({v: 1}, one, "R", tilde=True) != self.project({v: 1}, tilde=True):
                    failures.append(("unit_R", v))
            if self.fits(wv, 2):
                self.laws_checked += 3
                zg = z_generator(V, n, v)
                diff = dict(zg)
                vaxpy(diff, l0_plus_lm1(V, v), -1)
                if self.project(diff, tilde=True):
                    failures.append(("z_identity", v))
                if n == 0 and self.project(zg, tilde=True):
                    failures.append(("z0_nonzero", v))
                # omega is central in A_n
                if self.product(omega_vector(V), {v: 1}) != self.product({v: 1}, omega_vector(V)):
                    failures.append(("omega_central", v))
        reps = self.tilde_reps
        for a in reps:
            for b in reps:
                wa, wb = V.weight(a), V.weight(b)
                if not self.fits(wa, wb):
                    continue
                self.laws_checked += 1
                if self.product({a: 1}, {b: 1}, "L") != self.product({a: 1}, {b: 1}, "R"):
                    failures.append(("L_equals_R", a, b))
                for c in reps:
                    wc = V.weight(c)
                    if not self.fits(wa, wb, wc, 2 * n):
                        continue
                    self.laws_checked += 1
                    ab = self.product({a: 1}, {b: 1}, "L", tilde=True)
                    lhs = self.product(ab, {c: 1}, "R", tilde=True)
                    bc = self.product({b: 1}, {c: 1}, "R", tilde=True)
                    rhs = self.product({a: 1}, bc, "L", tilde=True)
                    if lhs != rhs:
                        failures.append(("associativity", a, b, c))
        return failures


def build_A_n(V, n, K, pipeline="otilde"):
    return ZhuData(V, n, K, pipeline)


def pipelines_agree(V, n, K):
    """Geometric and classical quotients give identical projection maps on V^{<=K}."""
    Vk = V.with_cutoff(max(V.cutoff, K))
    geo_q = geometric_quotient(Vk, n, K).quotient
    cls_q = otilde_quotient(Vk, n, K)
    return geo_q == cls_q, geo_q, cls_q


# -- functionals on A~_n -------------------------------------------------------------

def dual_functionals(data, tilde=True):
    """The dual basis of the representatives, as QuotientFunctionals at levels (n, n)."""
    q = data.tilde if tilde else data.full
    out = []
    for r in q.representatives:
        out.append(prop.QuotientFunctional(data.V, q, {r: mpq(1)}, (data.n, data.n), data.K))
    return out


def diamond_dual_check(phi, u, v, n):
    """<phi, u <>_L v> = <Y'_+(u)_{wt u-1} phi, v> and <phi, u <>_R v> = <Y_-(v)_{wt v-1} phi, u>."""
    V = phi.voa
    P = prop.propagator(phi)
    lhs_l = phi(diamond_L(V, n, u, v))
    rhs_l = P.plus_prime(u, V.weight(u) - 1, v)
    lhs_r = phi(diamond_R(V, n, u, v))
    rhs_r = P.minus(v, V.weight(v) - 1, u)
    return lhs_l == rhs_l and lhs_r == rhs_r


def laurent_vacuum_checks(phi, v):
    """F_{v,1} is a Laurent polynomial with value phi(v) at 1, and F_{v,1} = z^{-wt v} phi(v) decides A_n^*."""
    V = phi.voa
    P = prop.propagator(phi)
    f = P.F(v, V.vacuum)
    rf = f.rational
    # as a function on C^x minus 1 it must be a Laurent polynomial: no pole at 1
    at_one = rf.laurent_at(mpq(1), 1)
    polynomial = all(e >= 0 for e in at_one.coeffs)
    value = at_one.coeff(0) if polynomial else None
    h = V.weight(v)
    monomial = all(f(x) == x ** (-h) * phi({v: 1}) for x in (mpq(2), mpq(-3), mpq(1, 5)))
    return {"laurent": polynomial, "value_at_1": value == phi({v: 1}), "monomial": monomial}


def vanishing_pattern(phi, levels, vcap, kspan=3):
    """Y_-(v)_k phi = 0 for k >= wt v + a0 and Y_+(v)_k phi = 0 for k >= wt v + a_inf.

    ``phi`` is propagated at its own levels; ``levels`` are the target ones.
    Checked on every basis v, w up to ``vcap`` and k within ``kspan`` of the bound.
    """
    V = phi.voa
    P = prop.propagator(phi)
    a_inf, a0 = levels
    for v in V.basis.upto(vcap):
        h = V.weight(v)
        for w in V.basis.upto(vcap):
            for k in range(h + a0, h + a0 + kspan):
                if P.minus(v, k, w):
                    return False
            for k in range(h + a_inf, h + a_inf + kspan):
                if P.plus(v, k, w):
                    return False
    return True


def kills_relations(phi, levels, K):
    """phi vanishes on every sigma . w of the sphere q at the given levels, below K."""
    X = geo.q_sphere(*levels)
    V = phi.voa.with_cutoff(max(phi.voa.cutoff, K))
    for r in geo.relations(X, VacuumModule(V), K, K + 1, K):
        if phi(r):
            return False
    return True


class SumFunctional(prop.Functional):
    """Linear combination of functionals; levels are the componentwise maxima."""

    def __init__(self, terms):
        terms = list(terms)
        V = terms[0][1].voa
        lv = tuple(max(f.levels[i] for _, f in terms) for i in (0, 1))
        super().__init__(V, lv)
        self.terms = terms

    def _value(self, label):
        total = 0
        for c, f in self.terms:
            x = f.value(label)
            if x:
                total = total + c * x
        return total


class Relevelled(prop.Functional):
    """The same functional regarded at other (typically larger) levels."""

    def __init__(self, phi, levels):
        super().__init__(phi.voa, levels)
        self.phi = phi

    def _value(self, label):
        return self.phi.value(label)


# -- universal property ----------------------------------------------------------------

def universal_property_check(V, a, b, u, k, xs):
    """T(b' (x) a) = phi_{a,b} intertwines Y_- with Y(u)_k on a and Y_+ with Y'(u)_k on b'."""
    big = V.with_cutoff(10 ** 6)
    phi = prop.MatrixCoefficient(big, a, b)
    P = prop.propagator(phi)
    failures = []
    ya = big._mode(u, k, a)
    dual = ContragredientModule(VacuumModule(big))
    yb = dual.act(u, k, b)
    for x in xs:
        lhs = P.minus(u, k, x)
        rhs = sum((c * prop.MatrixCoefficient(big, lab, b).value(x) for lab, c in ya.items()), 0)
        if lhs != rhs:
            failures.append(("minus", x, lhs, rhs))
        lhs = P.plus(u, k, x)
        rhs = sum((c * prop.MatrixCoefficient(big, a, lab).value(x) for lab, c in yb.items()), 0)
        if lhs != rhs:
            failures.append(("plus", x, lhs, rhs))
    return failures


# -- top level representation ------------------------------------------------------------

def omega_basis(W, n, cutoff):
    vcap = 2 * cutoff + n + 2
    if isinstance(W, VacuumModule) and W.voa.cutoff < vcap:
        # constraint vectors may sit above the cutoff; the wider view shares caches
        W = VacuumModule(W.voa.with_cutoff(vcap))
    return omega_subspace(W, n, cutoff, vcap=vcap)


def top_level_rep(V, n, W, v, w, omega=None):
    """o(v) w = Y_W(v)_{wt v - 1} w for w in Omega_n(W)."""
    if omega is not None:
        wt = max((W.weight(k) for b in list(omega) + [w] for k in b), default=0)
        if not span_contains(omega, [w], _module_labels(W, wt)):
            raise MembershipError("vector is not in Omega_n(W)")
    acc = {}
    for a, c in v.items():
        vaxpy(acc, W.act_vec({a: 1}, V.weight(a) - 1, w), c)
    return acc


def _module_labels(W, K):
    out = []
    for n in range(K + 1):
        out.extend(W.basis(n))
    return out


def check_top_level(V, n, W, ucap, wcap):
    """o(u <>_L v) w = o(u) o(v) w and o kills O~_n generators, on Omega_n(W)^{<=wcap}."""
    omega = omega_basis(W, n, wcap)
    failures = []
    checks = 0
    labs = V.basis.upto(ucap)
    for w in omega:
        for u in labs:
            for v in labs:
                prod = diamond_L(V, n, u, v)
                lhs = top_level_rep(V, n, W, prod, w, omega)
                rhs = top_level_rep(V, n, W, {u: 1}, top_level_rep(V, n, W, {v: 1}, w, omega), omega)
                checks += 1
                if lhs != rhs:
                    failures.append(("multiplicative", u, v, w))
        for g in o_n_spanning(V, n, 2 * ucap + 2 * n + 1):
            checks += 1
            if top_level_rep(V, n, W, g, w, omega):
                failures.append(("kills_O", g, w))
    return {"omega_dim": len(omega), "checks": checks, "failures": failures, "pass": not failures}


def commutation_check(phi, pairs, xs):
    """Y_+(u)_j Y_-(v)_k phi = Y_-(v)_k Y_+(u)_j phi on the test vectors ``xs``."""
    failures = []
    for (u, j), (v, k) in pairs:
        a = prop.Y_plus(prop.Y_minus(phi, v, k), u, j)
        b = prop.Y_minus(prop.Y_plus(phi, u, j), v, k)
        for x in xs:
            if a.value(x) != b.value(x):
                failures.append((u, j, v, k, x))
    return failures
