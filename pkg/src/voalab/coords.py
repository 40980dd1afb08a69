"""Change-of-coordinate operators U(rho) = rho'(0)^{L(0)} exp(sum c_n L(n))."""

from __future__ import annotations

from dataclasses import dataclass, field

from gmpy2 import mpq

from .linalg import vaxpy
from .scalars import RatFunc


class DegenerateMapError(ValueError):
    """The map has vanishing linear term (or a constant term)."""


def _exact(x):
    return mpq(x) if isinstance(x, int) else x


def _trunc(p, N):
    p = [_exact(x) for x in p[: N + 1]]
    return p + [mpq(0)] * max(0, N + 1 - len(p))


def _vector_field(c, g, N):
    """sum_n c_n z^{n+1} g'(z), truncated at z^N; series as coefficient lists."""
    out = [0] * (N + 1)
    for i in range(1, len(g)):
        if not g[i]:
            continue
        d = i * g[i]
        for n, cn in enumerate(c, start=1):
            e = i - 1 + n + 1
            if e > N:
                break
            if cn:
                out[e] = out[e] + cn * d
    return out


def exp_flow(c, N):
    """exp(sum c_n z^{n+1} d/dz) z as coefficients of z^0..z^N."""
    total = [0] * (N + 1)
    if N >= 1:
        total[1] = 1
    term = list(total)
    k = 1
    while any(term):
        term = _vector_field(c, term, N)
        term = [x * mpq(1, k) for x in term]
        total = [a + b for a, b in zip(total, term)]
        k += 1
    return total


@dataclass
class CoordMap:
    """rho(z) = leading * exp(sum_n c_n z^{n+1} d/dz) z, known to order len(c)+1."""

    leading: object
    c: list = field(default_factory=list)

    def __post_init__(self):
        self.leading = _exact(self.leading)
        self.c = [_exact(x) for x in self.c]

    @property
    def order(self):
        return len(self.c)

    def series(self, N=None):
        N = self.order + 1 if N is None else N
        s = exp_flow(self.c[: max(N - 1, 0)], N)
        return [self.leading * x for x in s]

    def restrict(self, K):
        return CoordMap(self.leading, list(self.c[:K]))


def fit_coefficients(rho, K=None):
    """Fit (leading, c_1..c_K) from the coefficients rho[k] of z^k.

    ``rho`` must hold at least K+2 entries (orders 0..K+1).
    """
    rho = [_exact(x) for x in rho]
    if K is None:
        K = len(rho) - 2
    rho = _trunc(rho, K + 1)
    if rho[0]:
        raise DegenerateMapError("map does not fix 0")
    if not rho[1]:
        raise DegenerateMapError("rho'(0) = 0")
    lead = rho[1]
    target = [x / lead for x in rho]
    c = [0] * K
    for n in range(1, K + 1):
        s = exp_flow(c[: n - 1], n + 1)
        c[n - 1] = target[n + 1] - s[n + 1]
    return CoordMap(lead, c)


def compose_series(p, q, N):
    """(p o q)(z) truncated at z^N, for q(0) = 0."""
    p = _trunc(p, N)
    q = _trunc(q, N)
    out = [0] * (N + 1)
    power = [1] + [0] * N  # q^0
    for k in range(N + 1):
        if k:
            nxt = [0] * (N + 1)
            for i, a in enumerate(power):
                if not a:
                    continue
                for j in range(1, N + 1 - i):
                    if q[j]:
                        nxt[i + j] = nxt[i + j] + a * q[j]
            power = nxt
        if p[k]:
            for i in range(N + 1):
                if power[i]:
                    out[i] = out[i] + p[k] * power[i]
    return out


def compose(r1, r2):
    """rho1 o rho2 as a CoordMap of the shared order."""
    K = min(r1.order, r2.order)
    N = K + 1
    return fit_coefficients(compose_series(r1.series(N), r2.series(N), N), K)


def _slot_ops(W, slot):
    if slot is None:
        return W.L_vec, W.weight
    return (lambda n, v: W.slot_L_vec(slot, n, v)), (lambda k: W.slot_weight(slot, k))


def _exp_positive(W, c, v, slot, sign=1):
    Lv, _ = _slot_ops(W, slot)
    acc = dict(v)
    term = dict(v)
    k = 1
    while term:
        nxt = {}
        for n, cn in enumerate(c, start=1):
            if cn:
                vaxpy(nxt, Lv(n, term), cn * sign)
        term = {key: x * mpq(1, k) for key, x in nxt.items()}
        vaxpy(acc, term)
        k += 1
    return acc


def _power_grading(W, x, v, slot):
    _, wt = _slot_ops(W, slot)
    out = {}
    for key, y in v.items():
        z = y * x ** wt(key)
        if z:
            out[key] = z
    return out


def _need(W, v, slot):
    _, wt = _slot_ops(W, slot)
    return max((wt(k) for k in v), default=0)


def apply_U(rho, W, v, slot=None):
    """U(rho) v on a module (or on one slot of a multi-module)."""
    if not rho.leading:
        raise DegenerateMapError("rho'(0) = 0")
    need = _need(W, v, slot)
    if rho.order < need:
        raise ValueError(f"map known to order {rho.order + 1}, need {need + 1}")
    return _power_grading(W, rho.leading, _exp_positive(W, rho.c[:need], v, slot), slot)


def apply_U_inverse(rho, W, v, slot=None):
    need = _need(W, v, slot)
    w = _power_grading(W, mpq(1) / rho.leading, v, slot)
    return _exp_positive(W, rho.c[:need], w, slot, sign=-1)


def scaling_map(a, K):
    return CoordMap(a, [0] * K)


def gamma_series(z, N):
    """gamma_z(t) = 1/(z+t) - 1/z, coefficients of t^0..t^N."""
    return [0] + [(-1) ** k * (mpq(1) / z) ** (k + 1) for k in range(1, N + 1)]


def gamma_map(z, K):
    return fit_coefficients(gamma_series(z, K + 1), K)


def formal_z():
    return RatFunc.t()


def closed_form_gamma(W, z, v, slot=None):
    """e^{z L(1)} (-z^{-2})^{L(0)} v with the sign read as (-1)^{L(0)}."""
    _, wt = _slot_ops(W, slot)
    Lv, _ = _slot_ops(W, slot)
    scaled = {}
    for key, y in v.items():
        n = wt(key)
        scaled[key] = y * (-1) ** n * (mpq(1) / z) ** (2 * n)
    acc = dict(scaled)
    term = dict(scaled)
    k = 1
    while term:
        term = {key: x * z * mpq(1, k) for key, x in Lv(1, term).items()}
        vaxpy(acc, term)
        k += 1
    return acc


def check_representation(r1, r2, W, samples, slot=None):
    """Report on U(r1 o r2) v == U(r1) U(r2) v for each sample vector."""
    comp = compose(r1, r2)
    failures = []
    for v in samples:
        lhs = apply_U(comp, W, v, slot)
        rhs = apply_U(r1, W, apply_U(r2, W, v, slot), slot)
        diff = dict(lhs)
        vaxpy(diff, rhs, -1)
        if diff:
            failures.append((v, diff))
    return {"checked": len(samples), "failures": failures, "pass": not failures}


def check_gamma_scaling(W, v, slot=None):
    """U(gamma_z) z^{L(0)} v - z^{-L(0)} U(gamma_1) v with z formal."""
    z = formal_z()
    K = _need(W, v, slot)
    lhs = apply_U(gamma_map(z, K), W, _power_grading(W, z, v, slot), slot)
    rhs = _power_grading(W, mpq(1) / z, apply_U(gamma_map(mpq(1), K), W, v, slot), slot)
    vaxpy(lhs, rhs, -1)
    return lhs
