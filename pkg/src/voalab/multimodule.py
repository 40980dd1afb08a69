"""Tensor-product modules over products of VOAs.

A multi-module label is a tuple with one module label per slot.  Each slot
i carries the action Y_i of its own algebra; the combined vertex operator
of the tensor algebra is assembled from slot actions.
"""

from __future__ import annotations

from itertools import product

from .linalg import vaxpy
from .modules import ModuleRep, VacuumModule, contragredient, jacobi_check
from .voa import CutoffError


def _compositions(total, caps):
    """Tuples (o_1..o_N) of naturals with o_i <= caps[i] summing to total."""
    if not caps:
        if total == 0:
            yield ()
        return
    head, rest = caps[0], caps[1:]
    for o in range(min(head, total) + 1):
        for tail in _compositions(total - o, rest):
            yield (o,) + tail


class MultiModule:
    """W_1 (x) ... (x) W_N with Y_i acting in slot i."""

    def __init__(self, factors):
        self.factors = list(factors)
        if not self.factors:
            raise ValueError("need at least one factor")
        self.cutoff = min(f.cutoff for f in self.factors)
        self.voas = [f.voa for f in self.factors]

    @property
    def size(self):
        return len(self.factors)

    # -- grading ---------------------------------------------------------
    def slot_weight(self, i, label):
        return self.factors[i].weight(label[i])

    def multiweight(self, label):
        return tuple(f.weight(x) for f, x in zip(self.factors, label))

    def weight(self, label):
        return sum(self.multiweight(label))

    def basis_multi(self, ns):
        return [tuple(t) for t in product(*(f.basis(n) for f, n in zip(self.factors, ns)))]

    def basis(self, n):
        out = []
        for ns in _compositions(n, [f.cutoff for f in self.factors]):
            out.extend(self.basis_multi(ns))
        return out

    def basis_upto(self, n=None):
        n = self.cutoff if n is None else n
        out = []
        for k in range(n + 1):
            out.extend(self.basis(k))
        return out

    def dim_multi(self, ns):
        d = 1
        for f, n in zip(self.factors, ns):
            d *= len(f.basis(n))
        return d

    # -- slot actions ----------------------------------------------------
    def slot_act(self, i, a, n, label):
        """Y_i(e_a)_n applied to a basis label."""
        img = self.factors[i].act(a, n, label[i])
        return {label[:i] + (x,) + label[i + 1:]: c for x, c in img.items()}

    def slot_act_vec(self, i, u, n, v):
        acc = {}
        for a, x in u.items():
            for lab, y in v.items():
                vaxpy(acc, self.slot_act(i, a, n, lab), x * y)
        return acc

    def slot_L_vec(self, i, n, v):
        return self.slot_act_vec(i, self.voas[i].conformal, n + 1, v)

    def slot_L0(self, i, v):
        return self.slot_L_vec(i, 0, v)

    # -- combined vertex operator ----------------------------------------
    def tensor_mode(self, vs, k, w, count=False):
        """Y_W(v_1 (x) ... (x) v_N)_k w as sum over k_1+...+k_N = k+1-N.

        ``vs`` is a tuple of algebra labels, ``w`` a multi label.  Only the
        finitely many slot-mode tuples with every output weight in range can
        contribute; with ``count=True`` also return how many did.
        """
        N = self.size
        wv = [voa.weight(a) for voa, a in zip(self.voas, vs)]
        ww = self.multiweight(w)
        total = sum(wv) + sum(ww) - k - 1
        out = {}
        nonzero = 0
        if total >= 0:
            if total > self.cutoff:
                raise CutoffError(f"tensor mode output weight {total} exceeds cutoff {self.cutoff}")
            caps = [f.cutoff for f in self.factors]
            for outs in _compositions(total, caps):
                ks = [wv[i] + ww[i] - 1 - outs[i] for i in range(N)]
                vec = {w: 1}
                for i in range(N):
                    if not vec:
                        break
                    vec = self.slot_act_vec(i, {vs[i]: 1}, ks[i], vec)
                if vec:
                    nonzero += 1
                    vaxpy(out, vec)
        if count:
            return out, nonzero
        return out


class TensorVOA:
    """V_1 (x) ... (x) V_N viewed as a single algebra through its modes."""

    def __init__(self, voas):
        self.voas = list(voas)
        self.vacuum_module = MultiModule([VacuumModule(V) for V in self.voas])
        self.cutoff = self.vacuum_module.cutoff
        self.central_charge = sum(V.central_charge for V in self.voas)

    @property
    def vacuum(self):
        return tuple(V.vacuum for V in self.voas)

    @property
    def conformal(self):
        out = {}
        for i, V in enumerate(self.voas):
            for lab, c in V.conformal.items():
                key = tuple(lab if j == i else W.vacuum for j, W in enumerate(self.voas))
                out[key] = out.get(key, 0) + c
        return out

    def weight(self, label):
        return sum(V.weight(x) for V, x in zip(self.voas, label))

    def vec_weights(self, v):
        return {self.weight(k) for k in v}

    def mode(self, a, n, b):
        return self.vacuum_module.tensor_mode(a, n, b)

    def mode_vec(self, u, n, v):
        acc = {}
        for a, x in u.items():
            for b, y in v.items():
                vaxpy(acc, self.mode(a, n, b), x * y)
        return acc

    def L_vec(self, n, v):
        return self.mode_vec(self.conformal, n + 1, v)


class TensorModuleView(ModuleRep):
    """A MultiModule seen as a module over the TensorVOA via tensor_mode."""

    def __init__(self, multi):
        self.multi = multi
        self.voa = TensorVOA(multi.voas)
        self.cutoff = multi.cutoff

    def weight(self, w):
        return self.multi.weight(w)

    def basis(self, n):
        return self.multi.basis(n)

    def act(self, a, n, w):
        return self.multi.tensor_mode(a, n, w)


def tensor_module(factors):
    """Tensor product of modules; a single factor is returned unchanged."""
    if len(factors) == 1:
        return factors[0]
    return MultiModule(factors)


def verify_tensor_jacobi(W, samples):
    """Jacobi identity for the combined vertex operator on sample instances.

    ``samples`` holds (u, v, w, m, n, h) with u, v tuples of algebra labels and
    w a multi label.  Returns a report dict.
    """
    view = TensorModuleView(W)
    failures = []
    for u, v, w, m, n, h in samples:
        diff = jacobi_check(view, {u: 1}, {v: 1}, {w: 1}, m, n, h)
        if diff:
            failures.append(((u, v, w, m, n, h), diff))
    return {"checked": len(samples), "failures": failures, "pass": not failures}


def slot_round_trip(W, i, a, n, w):
    """Y_W(1 (x) .. e_a .. (x) 1)_n w minus Y_i(e_a)_n w."""
    vs = tuple(a if j == i else V.vacuum for j, V in enumerate(W.voas))
    diff = W.tensor_mode(vs, n, w)
    vaxpy(diff, W.slot_act(i, a, n, w), -1)
    return diff


def slot_commutator(W, i, a, m, j, b, n, w):
    """[Y_i(e_a)_m, Y_j(e_b)_n] w."""
    x = W.slot_act_vec(i, {a: 1}, m, W.slot_act(j, b, n, w))
    vaxpy(x, W.slot_act_vec(j, {b: 1}, n, W.slot_act(i, a, m, w)), -1)
    return x


def multigrading_defect(W, i, a, n, w):
    """Labels in Y_i(e_a)_n w whose multiweight is not the predicted one."""
    target = list(W.multiweight(w))
    target[i] += W.voas[i].weight(a) - n - 1
    target = tuple(target)
    return [lab for lab in W.slot_act(i, a, n, w) if W.multiweight(lab) != target]


def slot_grading_defect(W, j, i, a, n, w):
    """[L_j(0), Y_i(e_a)_n] w - delta_ij (Y_i(L(0) e_a)_n - (n+1) Y_i(e_a)_n) w."""
    y = W.slot_act(i, a, n, w)
    lhs = W.slot_L0(j, y)
    vaxpy(lhs, W.slot_act_vec(i, {a: 1}, n, W.slot_L0(j, {w: 1})), -1)
    if i == j:
        V = W.voas[i]
        vaxpy(lhs, y, -(V.weight(a) - n - 1))
    return lhs


def slot_contragredient(W):
    """Contragredient of a tensor module, built factor by factor."""
    return MultiModule([contragredient(f) for f in W.factors])
