"""Normalized sewing of truncated blocks, sewn relations and a numeric probe.

A sewing contracts a block psi on W (x) M (x) M' grade by grade against
q^{L~(0)} inserted along the pairing of M with its contragredient:

    S psi(w) = sum_n q^n sum_{a in M(n)} psi(w, e_a, e_a^dual).

All exact statements are per-coefficient identities.  The convergence probe
is floating point and only advisory.
"""

from __future__ import annotations

from itertools import product
from math import isfinite

import numpy as np
from gmpy2 import mpq

from . import propagation as prop
from .laurent import LaurentPoly
from .linalg import vaxpy
from .modules import VacuumModule, contragredient_op
from .scalars import RatFunc, binom, scalar_to_str
from .voa import CutoffError


class InsufficientDataError(ValueError):
    """Too few nonzero coefficients for a radius estimate."""


# -- generic sewing -------------------------------------------------------------

class SewingTask:
    """A block ``psi(w, labels)`` sewn along modules ``pairings``.

    ``labels`` holds one basis label of M_r per sewing variable q_r; the
    dual vector at the contragredient slot is the dual basis element with the
    same label.  ``lowest`` gives the lowest weight of each M_r, so that
    L~(0) = L(0) - lowest.
    """

    def __init__(self, psi, pairings, lowest=None):
        self.psi = psi
        self.pairings = list(pairings)
        self.lowest = list(lowest) if lowest is not None else [0] * len(self.pairings)

    @property
    def variables(self):
        return len(self.pairings)

    def grade_basis(self, r, n):
        M = self.pairings[r]
        g = self.lowest[r] + n
        if g > M.cutoff and not getattr(M, "complete", False):
            raise CutoffError(f"grade {g} of sewing module {r} lies above its cutoff {M.cutoff}")
        return M.basis(g)

    def term_count(self, exps):
        """Number of inserted tensor terms at the multi-grade ``exps``."""
        c = 1
        for r, n in enumerate(exps):
            c *= len(self.grade_basis(r, n))
        return c


def _orders(task, order):
    if isinstance(order, int):
        return [order] * task.variables
    order = list(order)
    if len(order) != task.variables:
        raise ValueError("one truncation order per sewing variable is required")
    return order


def sewing_series(task, w, order):
    """Coefficients {exponents: value} of S psi(w) for exponents up to ``order``.

    Raises CutoffError when a grade lies beyond the module truncation.
    """
    orders = _orders(task, order)
    out = {}
    for exps in product(*(range(o + 1) for o in orders)):
        bases = [task.grade_basis(r, n) for r, n in enumerate(exps)]
        total = 0
        for labels in product(*bases):
            x = task.psi(w, labels)
            if x:
                total = total + x
        if total:
            out[exps] = total
    return out


def series_to_json(series):
    return [{"exponents": list(e), "coeff": scalar_to_str(c)} for e, c in sorted(series.items())]


def vacuum_pairing_task(V, value):
    """Sewing along M = V^{<=0}: only the pair (1, 1^dual) contributes."""
    M = VacuumModule(V.with_cutoff(max(V.cutoff, 2)))

    class _Lowest:
        voa = M.voa
        cutoff = 0
        complete = True  # nothing above grade 0, as opposed to truncated

        def basis(self, n):
            return M.basis(n) if n == 0 else []

    return SewingTask(lambda w, labels: value(w), [_Lowest()])


# -- the sphere instance: phi (x) <Y(u, 1) w, w'> -------------------------------------

def sphere_sewing_task(phi, u):
    """phi on V (x) the three-point block <Y(u,1) w, w'>, sewn along V."""
    V = phi.voa
    M = VacuumModule(V)
    wu = V.weight(u)

    def psi(w, labels):
        (m,) = labels
        n = wu + V.weight(w) - V.weight(m) - 1
        c = V._mode(u, n, w).get(m, 0)
        if not c:
            return 0
        return phi.value(m) * c

    return SewingTask(psi, [M])


def sphere_sewing_closed_form(phi, u, w, order):
    """sum_n q^{wt u + wt w - n - 1} phi(Y(u)_n w) for exponents 0..order."""
    V = phi.voa
    top = V.weight(u) + V.weight(w)
    out = {}
    for e in range(order + 1):
        x = phi(V._mode(u, top - e - 1, w))
        if x:
            out[(e,)] = x
    return out


def sphere_sewing_check(phi, pairs, order):
    """Contraction and closed form agree for each (u, w) in ``pairs``."""
    failures = []
    for u, w in pairs:
        a = sewing_series(sphere_sewing_task(phi, u), w, order)
        b = sphere_sewing_closed_form(phi, u, w, order)
        if a != b:
            failures.append((u, w))
    return {"checked": len(pairs), "failures": failures, "pass": not failures}


# -- sewing versus propagation --------------------------------------------------------

def sewn_block_series(phi, u, w, prec):
    """sum_n q^{-n-1} phi(Y(u)_n w), known below q^prec."""
    V = phi.voa
    top = V.weight(u) + V.weight(w)
    coeffs = {}
    for e in range(-top, prec):
        coeffs[e] = phi(V._mode(u, -e - 1, w))
    return LaurentPoly(coeffs, prec)


def sewing_vs_propagation(phi, pairs, order=8):
    """The sewn series equals the expansion of the propagated function at 1.

    Exponents are compared from the principal part up to q^order.  Returns a
    report with the first differing coefficient on failure.
    """
    P = prop.propagator(phi)
    checked = 0
    nonzero = 0
    for u, w in pairs:
        direct = sewn_block_series(phi, u, w, order + 1)
        expanded = P.F(u, w).at_one(order + 1)
        lo = -(phi.voa.weight(u) + phi.voa.weight(w))
        for e in range(lo, order + 1):
            a, b = direct.coeff(e), expanded.coeff(e)
            checked += 1
            if a:
                nonzero += 1
            if a != b:
                return {"pass": False, "checked": checked, "nonzero": nonzero,
                        "first_mismatch": {"u": list(u), "w": list(w), "exponent": e,
                                           "sewn": scalar_to_str(a), "propagated": scalar_to_str(b)}}
    return {"pass": True, "checked": checked, "nonzero": nonzero, "first_mismatch": None}


# -- sewn relations ---------------------------------------------------------------------

def sewn_relation_value(phi, v, u, w, m, l, prec):
    """S psi applied to the section v f(zeta) d zeta, as a series in q.

    The sewn block puts u at 1+q and w at 1; the section is
    f = zeta^{wt v + a0} (zeta - 1 - q)^{-m} (zeta - 1)^{-l}, which meets the
    outgoing conditions at 0 and, when m + l >= a0 + a_inf + 2, at infinity.
    The result is known below q^prec.
    """
    V = phi.voa
    a_inf, a0 = phi.levels
    hv = V.weight(v)
    A = hv + a0
    total = LaurentPoly({}, prec)
    wu, ww = V.weight(u), V.weight(w)
    # residue at 1+q in z = zeta - 1 - q: (1+q+z)^A z^{-m} (q+z)^{-l}
    # (q+z)^{-l} = q^{-l} sum_j C(-l, j) (z/q)^j
    for e in range(-m, hv + wu):
        acc = {}
        # coefficient of z^e: sum over i (from (1+q+z)^A) and j
        for j in range(e + m + 1):
            i = e + m - j
            if i > A:
                continue
            cj = binom(-l, j)
            if not cj:
                continue
            # C(A, i) z^i (1+q)^{A-i}
            ci = binom(A, i)
            for s in range(A - i + 1):
                c = ci * binom(A - i, s) * cj
                if c:
                    k = s - l - j
                    acc[k] = acc.get(k, 0) + c
        poly = LaurentPoly({k: c for k, c in acc.items() if c})
        if not poly.coeffs:
            continue
        x = V._mode(v, e, u)
        for lab, c in x.items():
            total = total + (poly * sewn_block_series(phi, lab, w, prec - min(poly.coeffs))).scale(c)
    # residue at 1 in z = zeta - 1: (1+z)^A (z - q)^{-m} z^{-l}
    # (z - q)^{-m} = (-q)^{-m} sum_j C(-m, j) (-z/q)^j
    for e in range(-l, hv + ww):
        acc = {}
        for j in range(e + l + 1):
            i = e + l - j
            if i > A:
                continue
            c = binom(A, i) * binom(-m, j) * (-1) ** (m + j)
            if c:
                k = -m - j
                acc[k] = acc.get(k, 0) + c
        poly = LaurentPoly({k: c for k, c in acc.items() if c})
        if not poly.coeffs:
            continue
        x = V._mode(v, e, w)
        for lab, c in x.items():
            total = total + (poly * sewn_block_series(phi, u, lab, prec - min(poly.coeffs))).scale(c)
    return total


def sewn_relation_check(phi, family, order):
    """Every coefficient of S psi(sigma . (u (x) w)) vanishes below q^order.

    ``family`` holds tuples (v, u, w, m, l).  Returns a report whose
    ``witness`` is the first nonzero coefficient found.
    """
    a_inf, a0 = phi.levels
    checked = 0
    for v, u, w, m, l in family:
        if m + l < a0 + a_inf + 2:
            raise ValueError("section does not meet the outgoing condition at infinity")
        val = sewn_relation_value(phi, v, u, w, m, l, order)
        checked += 1
        for e in sorted(val.coeffs):
            if e < order and val.coeffs[e]:
                return {"pass": False, "checked": checked,
                        "witness": {"v": list(v), "u": list(u), "w": list(w), "m": m, "l": l,
                                    "exponent": e, "coeff": scalar_to_str(val.coeffs[e])}}
    return {"pass": True, "checked": checked, "witness": None}


def away_from_discs_value(phi, v, w, l):
    """A section v zeta^{wt v + a0} (zeta - 1)^{-l} d zeta that misses the sewn point.

    Its sewn relation is the unsewn one, phi(sigma . w).
    """
    V = phi.voa
    a_inf, a0 = phi.levels
    A = V.weight(v) + a0
    acc = {}
    for e in range(-l, V.weight(v) + V.weight(w)):
        c = binom(A, e + l)
        if c:
            vaxpy(acc, V._mode(v, e, w), c)
    return phi(acc)


# -- a two-sided residue identity ----------------------------------------------------

def u_gamma_one(V, u):
    """e^{L(1)} (-1)^{L(0)} u for a basis label u."""
    sign = -1 if V.weight(u) % 2 else 1
    out = {}
    term = {u: mpq(sign)}
    k = 0
    fact = 1
    while term:
        vaxpy(out, term, mpq(1, fact))
        term = V.L_vec(1, term)
        k += 1
        fact *= k
    return out


def two_sided_residue_check(V, u, i, j, wcap):
    """Coefficient form of the two-sided residue identity for f = xi^i varpi^j.

    <m', u_{wt u + i - j - 1} m> = sum_x <Y'(x)_{wt x + j - i - 1} m', m>
    over the homogeneous pieces x of e^{L(1)} (-1)^{L(0)} u, for all basis
    m of weight <= wcap and m' of the matching weight.
    """
    W = VacuumModule(V)
    pieces = {}
    for lab, c in u_gamma_one(V, u).items():
        pieces.setdefault(V.weight(lab), {})[lab] = c
    failures = []
    checked = 0
    for n in range(wcap + 1):
        target = n + j - i
        if target < 0:
            continue
        for m in W.basis(n):
            lhs = V._mode(u, V.weight(u) + i - j - 1, m)
            # the adjoint action on m pairs with m' to give <Y'(x)_k m', m>
            rhs = {}
            for h, x in pieces.items():
                vaxpy(rhs, contragredient_op(W, x, h + j - i - 1, {m: 1}))
            for mp in W.basis(target):
                checked += 1
                if lhs.get(mp, 0) != rhs.get(mp, 0):
                    failures.append((m, mp))
    return {"checked": checked, "failures": failures, "pass": not failures}


# -- the Heisenberg four-point function ---------------------------------------------------

def heisenberg_four_point_task(V, z1):
    """Sew <1', Y(alpha, z1) m> with <m', Y(alpha, 1) 1> along V.

    The result is <1', Y(alpha, z1) q^{L(0)} Y(alpha, 1) 1> = q (z1 - q)^{-2}.
    """
    alpha = (1,)
    inv = mpq(1) / z1

    def psi(w, labels):
        (m,) = labels
        N = V.weight(m)
        left = V._mode(alpha, N, m).get(V.vacuum, 0)
        if not left:
            return 0
        right = V._mode(alpha, -N, V.vacuum).get(m, 0)
        return left * right * inv ** (N + 1)

    return SewingTask(psi, [VacuumModule(V)])


def heisenberg_two_point_oracle(V, z1, order):
    """q <1', Y(alpha, z1) Y(alpha, q) 1> from direct modes, q^0..q^order."""
    alpha = (1,)
    inv = mpq(1) / z1
    out = {}
    for k in range(order + 1):
        # q^{k} comes from z2^{k-1}, i.e. alpha_{-k}; then alpha_{k} returns to the vacuum
        inner = V._mode(alpha, -k, V.vacuum)
        total = 0
        for lab, c in inner.items():
            x = V._mode(alpha, k, lab).get(V.vacuum, 0)
            if x:
                total = total + c * x * inv ** (k + 1)
        if total:
            out[(k,)] = total
    return out


def heisenberg_closed_form(z1, order):
    """Taylor coefficients of q (z1 - q)^{-2} = sum_k k q^k z1^{-k-1}."""
    inv = mpq(1) / z1
    return {(k,): k * inv ** (k + 1) for k in range(1, order + 1)}


def heisenberg_four_point(V, order, z1=None):
    """Sewn series, oracle and closed form for the Heisenberg four-point function."""
    z1 = RatFunc.t() if z1 is None else z1
    sewn = sewing_series(heisenberg_four_point_task(V, z1), V.vacuum, order)
    return {
        "sewn": sewn,
        "oracle": heisenberg_two_point_oracle(V, z1, order),
        "closed_form": heisenberg_closed_form(z1, order),
    }


# -- numeric probe --------------------------------------------------------------------------

def convergence_probe(coeffs, num_terms=None):
    """Radius estimate from log|a_n| = c - n log R + b log n by least squares.

    ``coeffs`` is a sequence a_0, a_1, ... of exact or float values.  At
    least 8 nonzero coefficients are required.  Advisory only.
    """
    seq = list(coeffs)
    if num_terms is not None:
        seq = seq[:num_terms]
    pts = [(n, abs(float(a))) for n, a in enumerate(seq) if a and float(a) != 0.0]
    if len(pts) < 8:
        raise InsufficientDataError(f"need at least 8 nonzero coefficients, got {len(pts)}")
    ns = np.array([n for n, _ in pts], dtype=float)
    logs = np.log(np.array([a for _, a in pts]))
    # the log n column absorbs polynomial prefactors; it needs n >= 1
    use_log = ns.min() >= 1
    cols = [np.ones_like(ns), ns] + ([np.log(ns)] if use_log else [])
    X = np.stack(cols, axis=1)
    beta, *_ = np.linalg.lstsq(X, logs, rcond=None)
    radius = float(np.exp(-beta[1]))
    root = [float(a) ** (-1.0 / n) for n, a in pts if n >= 1]
    out = {
        "radius": radius,
        "root_test_last": root[-1] if root else None,
        "window": [int(ns.min()), int(ns.max())],
        "terms": len(pts),
        "coefficients": [float(a) for _, a in pts],
    }
    if not isfinite(radius):
        out["radius"] = None
    return out


def series_coefficients(series, length):
    """Univariate series dict {(k,): c} as a coefficient list."""
    return [series.get((k,), 0) for k in range(length)]
