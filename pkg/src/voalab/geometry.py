"""Pointed spheres, VOA-valued rational 1-forms, residue actions and
truncated fusion quotients, all in the global standard coordinate zeta.

A section is stored as a map ``v label -> {column: coefficient}`` and means
sum_v f_v(zeta) U(zeta)^{-1} e_v dzeta, where each f_v is a linear
combination of the columns

* ``("pole", x, m)``  for (zeta - x)^{-m}, m >= 1,
* ``("mono", d)``     for zeta^d, d >= 0.

At a finite point the local coordinate is the standard one, zeta - x; at
infinity it is the reciprocal one, w = 1/zeta.  Moving from the trivialisation
U(zeta) to U(1/zeta) is the operator e^{zeta L(1)} (-zeta^{-2})^{L(0)}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .laurent import RationalFunction
from .linalg import Quotient, SparseMatrix, kernel_basis, vaxpy
from .modules import contragredient_op
from .multimodule import MultiModule
from .scalars import binom, padd, parse_scalar, pmul, pscale, scalar_to_str

INF = "inf"
STANDARD = "standard"
RECIPROCAL = "reciprocal"


class GeometryError(ValueError):
    """Invalid pointed sphere (coincident points, bad coordinates, ...)."""


def parse_point(p):
    if isinstance(p, str) and p.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    if isinstance(p, str) and p.strip() == "generic":
        raise GeometryError("marked points must be rationals or inf")
    try:
        return parse_scalar(p)
    except ValueError as exc:
        raise GeometryError(str(exc)) from None


def point_to_str(p):
    return INF if p == INF else scalar_to_str(p)


@dataclass(frozen=True)
class MarkedPoint:
    point: object
    coord: str = STANDARD
    level: int = 0

    @property
    def is_inf(self):
        return self.point == INF


def _default_coord(p):
    return RECIPROCAL if p == INF else STANDARD


class PointedSphere:
    """P^1 with incoming points (modules sit here) and outgoing points with levels."""

    def __init__(self, incoming, outgoing=()):
        self.incoming = [self._mk(p, incoming=True) for p in incoming]
        self.outgoing = [self._mk(p, incoming=False) for p in outgoing]
        self.validate()

    @staticmethod
    def _mk(p, incoming):
        if isinstance(p, MarkedPoint):
            return p
        if isinstance(p, tuple):
            pt = parse_point(p[0]) if isinstance(p[0], str) else p[0]
            level = 0 if incoming or len(p) < 2 else int(p[1])
            return MarkedPoint(pt, _default_coord(pt), level)
        pt = parse_point(p) if isinstance(p, str) else p
        return MarkedPoint(pt, _default_coord(pt), 0)

    def validate(self):
        if not self.incoming:
            raise GeometryError("at least one incoming point is required")
        seen = set()
        for mp in self.incoming + self.outgoing:
            if mp.point != INF and not isinstance(mp.point, type(mpq(0))):
                raise GeometryError(f"marked point {mp.point!r} is not a rational or inf")
            if mp.point in seen:
                raise GeometryError(f"coincident marked points at {point_to_str(mp.point)}")
            seen.add(mp.point)
            if mp.coord != _default_coord(mp.point):
                raise GeometryError(
                    f"coordinate {mp.coord!r} at {point_to_str(mp.point)} is not supported; "
                    "use 'standard' at finite points and 'reciprocal' at inf")
            if mp.level < 0:
                raise GeometryError("levels must be natural numbers")

    # -- JSON ------------------------------------------------------------
    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            inc = [MarkedPoint(parse_point(str(d["point"])), d.get("coord", None) or "", 0)
                   for d in doc.get("incoming", [])]
            out = [MarkedPoint(parse_point(str(d["point"])), d.get("coord", None) or "", int(d.get("a", 0)))
                   for d in doc.get("outgoing", [])]
        except (KeyError, TypeError, AttributeError) as exc:
            raise GeometryError(f"malformed geometry descriptor: {exc}") from None
        inc = [MarkedPoint(m.point, m.coord or _default_coord(m.point), 0) for m in inc]
        out = [MarkedPoint(m.point, m.coord or _default_coord(m.point), m.level) for m in out]
        return cls(inc, out)

    def descriptor(self):
        return {
            "incoming": [{"point": point_to_str(m.point), "coord": m.coord} for m in self.incoming],
            "outgoing": [{"point": point_to_str(m.point), "coord": m.coord, "a": m.level}
                         for m in self.outgoing],
        }

    def to_json(self):
        return json.dumps(self.descriptor(), sort_keys=True)

    # -- queries ---------------------------------------------------------
    @property
    def incoming_points(self):
        return [m.point for m in self.incoming]

    def infinity_role(self):
        if any(m.is_inf for m in self.incoming):
            return "incoming"
        if any(m.is_inf for m in self.outgoing):
            return "outgoing"
        return None

    def infinity_level(self):
        for m in self.outgoing:
            if m.is_inf:
                return m.level
        return None

    def finite_outgoing(self):
        return [m for m in self.outgoing if not m.is_inf]

    def finite_incoming(self):
        return [m for m in self.incoming if not m.is_inf]


def q_sphere(a_inf=0, a0=0):
    """The sphere with outgoing inf (level a_inf) and 0 (level a0), incoming 1."""
    return PointedSphere([mpq(1)], [(INF, a_inf), (mpq(0), a0)])


# -- columns ----------------------------------------------------------------

def pole(x, m):
    return ("pole", x, m)


def mono(d):
    return ("mono", d)


@lru_cache(maxsize=None)
def column_expansion(col, x, prec):
    """Coefficients (exponent, value) of a column at x below exponent ``prec``.

    At a finite x the variable is z = zeta - x, at INF it is w = 1/zeta.
    """
    out = []
    if col[0] == "pole":
        p, m = col[1], col[2]
        if x == INF:
            # (1/w - p)^{-m} = w^m (1 - p w)^{-m}
            j = 0
            while m + j < prec:
                c = binom(-m, j) * (-p) ** j if j else mpq(1)
                if c:
                    out.append((m + j, c))
                if not p:
                    break
                j += 1
        elif x == p:
            if -m < prec:
                out.append((-m, mpq(1)))
        else:
            d = x - p
            for j in range(max(prec, 0)):
                out.append((j, binom(-m, j) * (mpq(1) / d) ** (m + j)))
    else:
        dd = col[1]
        if x == INF:
            if -dd < prec:
                out.append((-dd, mpq(1)))
        else:
            for j in range(min(dd, prec - 1) + 1):
                c = binom(dd, j) * x ** (dd - j) if dd > j else mpq(1)
                if c:
                    out.append((j, c))
    return tuple(out)


def combo_expansion(cols, x, prec):
    """Expansion of sum c * column as a dict exponent -> coefficient."""
    acc = {}
    for col, c in cols.items():
        for e, y in column_expansion(col, x, prec):
            v = acc.get(e, 0) + c * y
            if v:
                acc[e] = v
            else:
                acc.pop(e, None)
    return acc


def combo_to_rational(cols):
    """Collapse a column combination into one RationalFunction."""
    orders = {}
    for col in cols:
        if col[0] == "pole":
            orders[col[1]] = max(orders.get(col[1], 0), col[2])

    def lin_power(p, k):
        out = (mpq(1),)
        for _ in range(k):
            out = pmul(out, (-p, mpq(1)))
        return out

    num = ()
    for col, c in cols.items():
        if col[0] == "pole":
            term = lin_power(col[1], orders[col[1]] - col[2])
            others = [q for q in orders if q != col[1]]
        else:
            term = (0,) * col[1] + (mpq(1),)
            others = list(orders)
        for q in others:
            term = pmul(term, lin_power(q, orders[q]))
        num = padd(num, pscale(term, c))
    return RationalFunction(num, orders)


class RationalSection:
    """sum_v f_v U(zeta)^{-1} e_v dzeta with f_v given by column combinations."""

    def __init__(self, terms, key=0):
        self.terms = {v: dict(cols) for v, cols in terms.items() if cols}
        self.key = key

    def __bool__(self):
        return bool(self.terms)

    def function(self, v):
        return combo_to_rational(self.terms.get(v, {}))

    def expansion(self, v, x, prec):
        return combo_expansion(self.terms.get(v, {}), x, prec)

    def to_json(self):
        return {
            "key": self.key,
            "terms": [{"v": list(v) if isinstance(v, tuple) else v, "f": self.function(v).to_json()}
                      for v in sorted(self.terms, key=str)],
        }


# -- module slots -----------------------------------------------------------

class _Slots:
    """Uniform access to the action at each incoming point."""

    def __init__(self, W, n):
        self.W = W
        self.multi = isinstance(W, MultiModule)
        if self.multi and W.size != n:
            raise GeometryError(f"module has {W.size} slots but the sphere has {n} incoming points")
        if not self.multi and n != 1:
            raise GeometryError("a single module needs exactly one incoming point; pass a MultiModule")
        self.voa = W.voas[0] if self.multi else W.voa

    def voa_of(self, i):
        return self.W.voas[i] if self.multi else self.W.voa

    def weight(self, i, w):
        return self.W.slot_weight(i, w) if self.multi else self.W.weight(w)

    def act(self, i, a, n, w):
        return self.W.slot_act(i, a, n, w) if self.multi else self.W.act(a, n, w)

    def act_vec(self, i, u, n, vec):
        acc = {}
        for a, x in u.items():
            for lab, y in vec.items():
                vaxpy(acc, self.act(i, a, n, lab), x * y)
        return acc

    def contra(self, i, v, n, vec):
        """Y'(v)_n at slot i, the contragredient-twisted action."""
        if not self.multi:
            return contragredient_op(self.W, v, n, vec)
        V = self.voa_of(i)
        view = _SlotView(self, i, V)
        return contragredient_op(view, v, n, vec)


class _SlotView:
    def __init__(self, slots, i, voa):
        self.slots, self.i, self.voa = slots, i, voa

    def act_vec(self, u, n, vec):
        return self.slots.act_vec(self.i, u, n, vec)


# -- section enumeration ----------------------------------------------------

def _vweight(V, v):
    return V.weight(v)


def _column_key(X, wt, col):
    """Bound on (output weight - wt w) of the residue of this column at any incoming point."""
    best = None
    for mp in X.incoming:
        if mp.is_inf:
            kmax = col[1] if col[0] == "mono" else -col[2]
            s = kmax + 1 - wt
        elif col[0] == "pole" and col[1] == mp.point:
            s = wt + col[2] - 1
        else:
            s = wt - 1
        best = s if best is None else max(best, s)
    return best


def _finite_columns(X, k):
    cols = []
    for mp in X.finite_incoming():
        for m in range(1, k + 1):
            cols.append(pole(mp.point, m))
    return cols


def _outgoing_rows(X, wt, cols, tag):
    rows = []
    for mp in X.finite_outgoing():
        order = wt + mp.level
        for e in range(order):
            row = {}
            for col in cols:
                for ee, c in column_expansion(col, mp.point, order):
                    if ee == e:
                        row[(tag, col)] = c
            rows.append(row)
    return rows


@lru_cache(maxsize=None)
def _shape_kernel(X_json, wt, E, k):
    """Kernel for one v of weight ``wt`` when infinity is outgoing."""
    X = PointedSphere.from_json(X_json)
    a_inf = X.infinity_level()
    D = wt - a_inf - 2
    cols = _finite_columns(X, k) + [mono(d) for d in range(D + 1)]
    keyed = sorted(cols, key=lambda c: (_column_key(X, wt, c), str(c)))
    order = [(0, c) for c in keyed]
    rows = _outgoing_rows(X, wt, keyed, 0)
    # deg f <= D: the w = 1/zeta expansion vanishes below w^{-D}
    for e in range(-D):
        row = {}
        for col in keyed:
            for ee, c in column_expansion(col, INF, -D):
                if ee == e:
                    row[(0, col)] = c
        rows.append(row)
    out = []
    for vec in kernel_basis(SparseMatrix(rows, order)):
        cmb = {c: x for (_, c), x in vec.items()}
        key = max(_column_key(X, wt, c) for c in cmb)
        out.append((key, tuple(sorted(cmb.items(), key=str))))
    return tuple(sorted(out, key=lambda t: t[0]))


def _pushforward_rows(X, V, E, k, vlist, cols_of, allowed):
    """Conditions at infinity (incoming or unmarked) via e^{zeta L(1)}(-zeta^{-2})^{L(0)}.

    The u-component of the pushed-forward 1-form in w = 1/zeta is
    sum_{v,j} f_v(1/w) w^{2 wt v - 2 - j} (-1)^{wt v + 1} [L(1)^j v]_u / j!,
    and every exponent below ``-allowed`` must vanish.
    """
    conds = {}
    for v in vlist:
        h = V.weight(v)
        term = {v: mpq(1)}
        j = 0
        while term:
            shift = 2 * h - 2 - j
            sign = 1 if (h + 1) % 2 == 0 else -1
            scale = mpq(sign, factorial(j))
            for col in cols_of[v]:
                # exponents of col(1/w) below -allowed - shift matter
                for e, c in column_expansion(col, INF, -allowed - shift):
                    for u, x in term.items():
                        key = (u, e + shift)
                        conds.setdefault(key, {})
                        r = conds[key]
                        y = r.get((v, col), 0) + scale * c * x
                        if y:
                            r[(v, col)] = y
                        else:
                            r.pop((v, col), None)
            term = V.L_vec(1, term)
            j += 1
    return [conds[key] for key in sorted(conds, key=str)]


def section_basis(X, V, E, k):
    """Spanning set of global sections with v of weight <= E and pole budget k.

    Returns a list of RationalSection sorted by ``key``; the residue of a
    section against w has weight at most key + wt w.
    """
    role = X.infinity_role()
    vlist = V.basis.upto(E) if hasattr(V, "basis") else []
    if role == "outgoing":
        out = []
        X_json = X.to_json()
        for v in vlist:
            wt = V.weight(v)
            for key, cmb in _shape_kernel(X_json, wt, E, k):
                out.append(RationalSection({v: dict(cmb)}, key))
        out.sort(key=lambda s: s.key)
        return out
    return _joint_sections(X, V, E, k, vlist, role)


def _joint_sections(X, V, E, k, vlist, role):
    allowed = k if role == "incoming" else 0
    cols_of = {}
    for v in vlist:
        wt = V.weight(v)
        D = wt + E + k - 2
        cols_of[v] = _finite_columns(X, k) + [mono(d) for d in range(D + 1)]
    labelled = []
    for v in vlist:
        wt = V.weight(v)
        for c in cols_of[v]:
            labelled.append(((_column_key(X, wt, c), str(v), str(c)), (v, c)))
    labelled.sort(key=lambda t: t[0])
    order = [lab for _, lab in labelled]
    keys = {lab: t[0] for t, lab in labelled}
    rows = _pushforward_rows(X, V, E, k, vlist, cols_of, allowed)
    for v in vlist:
        wt = V.weight(v)
        for r in _outgoing_rows(X, wt, cols_of[v], v):
            rows.append(r)
    out = []
    for vec in kernel_basis(SparseMatrix(rows, order)):
        terms = {}
        for (v, c), x in vec.items():
            terms.setdefault(v, {})[c] = x
        key = max(keys[lab] for lab in vec)
        out.append(RationalSection(terms, key))
    out.sort(key=lambda s: s.key)
    return out


# -- residue actions --------------------------------------------------------

def residue_act(X, W, sigma, i, w, route="contragredient"):
    """sigma *_i w for a basis label (or vector) w at incoming point i.

    At infinity ``route="contragredient"`` uses -sum_k g_k Y'(v)_k and
    ``route="pushforward"`` expands U(1/zeta) sigma directly; the two must agree.
    """
    slots = _Slots(W, len(X.incoming))
    wvec = w if isinstance(w, dict) else {w: 1}
    mp = X.incoming[i]
    V = slots.voa_of(i)
    acc = {}
    for lab, wc in wvec.items():
        ww = slots.weight(i, lab)
        for v, cols in sigma.terms.items():
            h = V.weight(v)
            if not mp.is_inf:
                for e, c in combo_expansion(cols, mp.point, h + ww).items():
                    vaxpy(acc, slots.act(i, v, e, lab), c * wc)
            elif route == "contragredient":
                for e, c in combo_expansion(cols, INF, ww + 2 - h).items():
                    # zeta^{-e} coefficient, Y'(v)_{-e}
                    vaxpy(acc, slots.contra(i, {v: 1}, -e, {lab: 1}), -c * wc)
            else:
                vaxpy(acc, _pushforward_residue(slots, i, V, v, cols, lab), wc)
    return acc


def _pushforward_residue(slots, i, V, v, cols, lab):
    h = V.weight(v)
    ww = slots.weight(i, lab)
    acc = {}
    term = {v: mpq(1)}
    j = 0
    while term:
        shift = 2 * h - 2 - j
        sign = 1 if (h + 1) % 2 == 0 else -1
        scale = mpq(sign, factorial(j))
        hu = h - j
        for e, c in combo_expansion(cols, INF, hu + ww - shift).items():
            n = e + shift
            for u, x in term.items():
                vaxpy(acc, slots.act(i, u, n, lab), scale * c * x)
        term = V.L_vec(1, term)
        j += 1
    return acc


def section_action(X, W, sigma, w, route="contragredient"):
    """sigma . w = sum_i sigma *_i w for a multi label w."""
    acc = {}
    for i in range(len(X.incoming)):
        vaxpy(acc, residue_act(X, W, sigma, i, w, route))
    return acc


# -- truncated fusion quotients ---------------------------------------------

def quotient_labels(W, K):
    """W^{<=K} labels in descending weight, so representatives have low weight."""
    labs = []
    for n in range(K, -1, -1):
        labs.extend(W.basis(n))
    return labs


def relations(X, W, E, k, K, sections=None):
    """All sigma . w with key + wt w <= K."""
    slots = _Slots(W, len(X.incoming))
    if sections is None:
        sections = section_basis(X, slots.voa, E, k)
    out = []
    for n in range(K + 1):
        for w in W.basis(n):
            for s in sections:
                if s.key + n > K:
                    break
                r = section_action(X, W, s, w)
                if r:
                    out.append(r)
    return out


class FusionQuotient:
    """W^{<=K} modulo the relations generated by a section family."""

    def __init__(self, X, W, E, k, K):
        self.X, self.W, self.E, self.k, self.K = X, W, E, k, K
        self.quotient = Quotient(quotient_labels(W, K))
        self.n_relations = 0
        for r in relations(X, W, E, k, K):
            self.quotient.add_relation(r)
            self.n_relations += 1

    @property
    def dim(self):
        return self.quotient.dim

    @property
    def representatives(self):
        return self.quotient.representatives

    def project(self, v):
        return self.quotient.project(v)

    def dims_by_weight(self):
        out = [0] * (self.K + 1)
        for lab in self.representatives:
            out[self.W.weight(lab)] += 1
        return out

    def to_json(self):
        return {
            "geometry": self.X.descriptor(),
            "E": self.E, "k": self.k, "cutoff": self.K,
            "dim": self.dim,
            "dims_by_weight": self.dims_by_weight(),
            "representatives": [_label_json(r) for r in self.representatives],
            "relations": self.n_relations,
        }


def _label_json(lab):
    if isinstance(lab, tuple) and lab and isinstance(lab[0], tuple):
        return [list(x) for x in lab]
    return list(lab)


def coinvariant_quotient(X, W, E, k, K):
    return FusionQuotient(X, W, E, k, K)


def budget_sweep(X, W, schedule, K):
    """Quotients for increasing (E, k) pairs; reports monotonicity and stabilisation."""
    dims = []
    last = None
    for E, k in schedule:
        last = FusionQuotient(X, W, E, k, K)
        dims.append(last.dim)
    monotone = all(a >= b for a, b in zip(dims, dims[1:]))
    stable = len(dims) >= 2 and dims[-1] == dims[-2]
    return {"schedule": [list(s) for s in schedule], "dims": dims,
            "monotone": monotone, "stable": stable, "final": last}


# -- strong residue test ----------------------------------------------------

class ResidueTestResult:
    def __init__(self, passed, witness=None, value=0, n_tests=0):
        self.passed = passed
        self.witness = witness
        self.value = value
        self.n_tests = n_tests

    def __bool__(self):
        return self.passed

    def __repr__(self):
        return f"ResidueTestResult(passed={self.passed}, n_tests={self.n_tests})"


def residue_test_functions(data):
    """Basis of rational functions nu allowed against the given precisions.

    ``data`` maps point -> precision p: nu may have a pole of order <= p
    there (p > 0), or must vanish to order -p (p < 0).  Unlisted points are
    regular; nu is regular at infinity unless INF is listed.
    """
    cols = [mono(0)]
    for x, p in data.items():
        if x == INF:
            cols.extend(mono(d) for d in range(1, p + 1))
        else:
            cols.extend(pole(x, m) for m in range(1, p + 1))
    rows = []
    for x, p in data.items():
        if p < 0:
            for e in range(-p):
                row = {}
                for col in cols:
                    for ee, c in column_expansion(col, x, -p):
                        if ee == e:
                            row[col] = c
                rows.append(row)
    return kernel_basis(SparseMatrix(rows, cols))


def strong_residue_test(expansions):
    """Decide whether local 1-form expansions glue to a global rational 1-form.

    ``expansions`` maps point -> LaurentPoly (with ``prec``) in the local
    coordinate; at INF this is the coefficient of dw for w = 1/zeta.  Passes
    iff sum_j Res_j(s_j nu) = 0 for every allowed test function nu;
    otherwise returns a witness nu.
    """
    data = {x: s.prec for x, s in expansions.items()}
    if any(p is None for p in data.values()):
        raise ValueError("every expansion needs a finite precision")
    basis = residue_test_functions(data)
    for nu in basis:
        total = 0
        for x, s in expansions.items():
            loc = combo_expansion(nu, x, -s.valuation() if s else 0) if s else {}
            for e, c in s.coeffs.items():
                total = total + c * loc.get(-1 - e, 0)
        if total:
            return ResidueTestResult(False, combo_to_rational(nu), total, len(basis))
    return ResidueTestResult(True, None, 0, len(basis))


def function_expansions(F, points, precs):
    """Local 1-form expansions of F(zeta) dzeta at the points, for residue tests."""
    out = {}
    for x in points:
        p = precs[x]
        if x == INF:
            out[x] = -F.laurent_at_infinity(p + 2).shift(-2)
        else:
            out[x] = F.laurent_at(x, p)
    return out
