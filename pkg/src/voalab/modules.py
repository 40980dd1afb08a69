"""Modules over a truncated VOA: the vacuum module, contragredients,
Jacobi verification and the subspaces Omega_a(W)."""

from __future__ import annotations

from math import factorial

from gmpy2 import mpq

from .linalg import Echelon, SparseMatrix, kernel_basis, vaxpy
from .scalars import binom
from .voa import CutoffError


class ModuleRep:
    """Interface: a graded module with a mode action by ``voa``.

    ``act(a, n, w)`` returns Y_W(e_a)_n e_w for basis labels; ``weight`` is the
    grading operator eigenvalue.
    """

    voa = None
    cutoff = 0

    def weight(self, w):
        raise NotImplementedError

    def basis(self, n):
        raise NotImplementedError

    def basis_upto(self, n=None):
        n = self.cutoff if n is None else n
        out = []
        for k in range(n + 1):
            out.extend(self.basis(k))
        return out

    def act(self, a, n, w):
        raise NotImplementedError

    def act_vec(self, u, n, v):
        acc = {}
        for a, x in u.items():
            for b, y in v.items():
                vaxpy(acc, self.act(a, n, b), x * y)
        return acc

    def out_weight(self, a, n, w):
        return self.voa.weight(a) + self.weight(w) - n - 1

    def L(self, n, w):
        return self.act_vec(self.voa.conformal, n + 1, {w: 1})

    def L_vec(self, n, v):
        return self.act_vec(self.voa.conformal, n + 1, v)


class VacuumModule(ModuleRep):
    """V as a module over itself."""

    def __init__(self, voa):
        self.voa = voa
        self.cutoff = voa.cutoff

    def weight(self, w):
        return sum(w)

    def basis(self, n):
        return self.voa.basis.of_weight(n)

    def act(self, a, n, w):
        return self.voa.mode(a, n, w)

    def L(self, n, w):
        return self.voa.L(n, w)


def contragredient_op(W, v, n, w):
    """Y'(v)_n w = sum_k (-1)^{wt v}/k! Y(L(1)^k v)_{-n-k-2+2 wt v} w.

    ``v`` and ``w`` are vectors; ``v`` must be homogeneous.
    """
    V = W.voa
    wts = V.vec_weights(v)
    if len(wts) > 1:
        raise ValueError("contragredient mode needs a homogeneous vector")
    if not v:
        return {}
    h = wts.pop()
    acc = {}
    term = dict(v)
    k = 0
    sign = -1 if h % 2 else 1
    while term:
        vaxpy(acc, W.act_vec(term, -n - k - 2 + 2 * h, w), mpq(sign, factorial(k)))
        term = V.L_vec(1, term)
        k += 1
    return acc


class ContragredientModule(ModuleRep):
    """W' with the same labels standing for the dual basis vectors."""

    def __init__(self, W):
        self.base = W
        self.voa = W.voa
        self.cutoff = W.cutoff
        self._cache = {}

    def weight(self, w):
        return self.base.weight(w)

    def basis(self, n):
        return self.base.basis(n)

    def act(self, a, n, b):
        key = (a, n, b)
        out = self._cache.get(key)
        if out is not None:
            return out
        target = self.voa.weight(a) + self.weight(b) - n - 1
        if target > self.cutoff:
            raise CutoffError(f"contragredient mode output weight {target} exceeds cutoff {self.cutoff}")
        out = {}
        if target >= 0:
            for c in self.base.basis(target):
                x = contragredient_op(self.base, {a: 1}, n, {c: 1}).get(b)
                if x:
                    out[c] = x
        self._cache[key] = out
        return out


def contragredient(W):
    return ContragredientModule(W)


def matrix_of(W, a, n, source_weight):
    """Dense matrix of Y_W(e_a)_n on W(source_weight) with labelled axes."""
    src = list(W.basis(source_weight))
    tgt = list(W.basis(W.voa.weight(a) + source_weight - n - 1))
    cols = {}
    for s in src:
        cols[s] = W.act(a, n, s)
    return [[cols[s].get(t, 0) for s in src] for t in tgt], src, tgt


# -- Jacobi identity --------------------------------------------------------

def jacobi_required_cutoff(wu, wv, ww, m, n, h):
    """Largest weight touched by the three sums of the Jacobi identity."""
    total = wu + wv + ww - m - n - h - 2
    return max(total, wu + wv - n - 1, wv + ww - h - 1, wu + ww - m - 1)


def jacobi_check(W, u, v, w, m, n, h):
    """LHS - RHS of the Jacobi identity on W; an empty dict means it holds.

    ``u``, ``v`` are homogeneous vectors of the algebra, ``w`` a homogeneous
    vector of W.
    """
    V = W.voa
    wu = _hom_weight(V.vec_weights(u))
    wv = _hom_weight(V.vec_weights(v))
    ww = _hom_weight({W.weight(k) for k in w})
    if not u or not v or not w:
        return {}
    need = jacobi_required_cutoff(wu, wv, ww, m, n, h)
    if need > W.cutoff:
        raise CutoffError(f"Jacobi instance needs cutoff {need} > {W.cutoff}")
    lhs = {}
    l = 0
    while n + l < wu + wv:
        c = binom(m, l)
        if c:
            inner = V.mode_vec(u, n + l, v)
            if inner:
                vaxpy(lhs, W.act_vec(inner, m + h - l, w), c)
        if m >= 0 and l >= m:
            break
        l += 1
    rhs = {}
    l = 0
    while h + l < wv + ww:
        c = binom(n, l) * (-1 if l % 2 else 1)
        if c:
            inner = W.act_vec(v, h + l, w)
            if inner:
                vaxpy(rhs, W.act_vec(u, m + n - l, inner), c)
        if n >= 0 and l >= n:
            break
        l += 1
    l = 0
    while m + l < wu + ww:
        c = binom(n, l) * (-1 if (l + n) % 2 else 1)
        if c:
            inner = W.act_vec(u, m + l, w)
            if inner:
                vaxpy(rhs, W.act_vec(v, n + h - l, inner), -c)
        if n >= 0 and l >= n:
            break
        l += 1
    vaxpy(lhs, rhs, -1)
    return lhs


def _hom_weight(ws):
    if len(ws) > 1:
        raise ValueError("expected a homogeneous vector")
    return ws.pop() if ws else 0


def virasoro_bracket_defect(W, m, n, w):
    """[L(m),L(n)]w - (m-n)L(m+n)w - (m^3-m)/12 c delta w."""
    lhs = W.L_vec(m, W.L(n, w))
    vaxpy(lhs, W.L_vec(n, W.L(m, w)), -1)
    vaxpy(lhs, W.L(m + n, w), -(m - n))
    if m + n == 0:
        vaxpy(lhs, {w: 1}, -mpq(m ** 3 - m, 12) * W.voa.central_charge)
    return lhs


def grading_defect(W, a, n, w):
    """[L(0), Y(e_a)_n] - Y(L(0)e_a)_n + (n+1) Y(e_a)_n on e_w."""
    V = W.voa
    y = W.act(a, n, w)
    lhs = {k: x * W.weight(k) for k, x in y.items() if W.weight(k)}
    vaxpy(lhs, y, -W.weight(w))
    vaxpy(lhs, y, -V.weight(a))
    vaxpy(lhs, y, n + 1)
    return lhs


# -- Omega subspaces --------------------------------------------------------

def omega_subspace(W, level, cutoff=None, vcap=None):
    """Basis of {w : Y(v)_k w = 0 for homogeneous v and k >= wt v + level}.

    Works weight by weight; ``vcap`` bounds the weights of the constraint
    vectors v (defaults to the cutoff, which is exhaustive on W^{<=cutoff}).
    """
    V = W.voa
    K = W.cutoff if cutoff is None else cutoff
    vcap = K if vcap is None else vcap
    out = []
    for N in range(K + 1):
        cols = list(W.basis(N))
        if not cols:
            continue
        rows = []
        for wv in range(vcap + 1):
            for v in V.basis.of_weight(wv):
                for k in range(wv + level, wv + N):
                    images = {c: W.act(v, k, c) for c in cols}
                    targets = set()
                    for img in images.values():
                        targets.update(img)
                    for t in sorted(targets):
                        rows.append({c: images[c][t] for c in cols if t in images[c]})
        out.extend(kernel_basis(SparseMatrix(rows, cols)))
    return out


def span_contains(basis, vectors, order):
    e = Echelon(order)
    for b in basis:
        e.add(b)
    return all(not e.reduce(v) for v in vectors)
