from math import comb

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from voalab import build_heisenberg
from voalab.geometry import (INF, GeometryError, PointedSphere, RationalSection, coinvariant_quotient,
                             combo_expansion, combo_to_rational, function_expansions, mono,
                             pole, q_sphere, relations, residue_act, section_basis,
                             strong_residue_test)
from voalab.laurent import LaurentPoly, RationalFunction
from voalab.linalg import Echelon
from voalab.modules import VacuumModule, contragredient, contragredient_op
from voalab.multimodule import MultiModule
from voalab.propagation import MatrixCoefficient

VAC = ()
A = (1,)


@pytest.fixture(scope="module")
def V():
    return build_heisenberg(6)


def in_span(sections, v, target):
    cols = sorted({c for s in sections for c in s.terms.get(v, {})} | set(target), key=str)
    e = Echelon(cols)
    for s in sections:
        if v in s.terms:
            e.add(s.terms[v])
    return not e.reduce(target)


# -- validation ------------------------------------------------------------------------

def test_validation():
    with pytest.raises(GeometryError):
        PointedSphere([], [(INF, 0)])
    with pytest.raises(GeometryError):
        PointedSphere([mpq(1)], [(mpq(1), 0)])
    with pytest.raises(GeometryError):
        PointedSphere.from_json({"incoming": [{"point": "1", "coord": "reciprocal"}]})
    with pytest.raises(GeometryError):
        PointedSphere.from_json({"incoming": [{"point": "generic"}]})
    with pytest.raises(GeometryError):
        PointedSphere.from_json({"incoming": [{"pt": "1"}]})


def test_json_round_trip():
    X = q_sphere(1, 2)
    Y = PointedSphere.from_json(X.to_json())
    assert Y.descriptor() == X.descriptor()
    assert Y.infinity_role() == "outgoing" and Y.infinity_level() == 1
    assert [m.level for m in Y.finite_outgoing()] == [2]


# -- sections --------------------------------------------------------------------------

def test_q_sections_contain_spanning_family(V):
    X = q_sphere(0, 0)
    S = section_basis(X, V, 2, 3)
    # zeta (zeta - 1)^{-2} = (zeta-1)^{-1} + (zeta-1)^{-2}
    assert in_span(S, A, {pole(mpq(1), 1): 1, pole(mpq(1), 2): 1})
    # zeta / (zeta - 1) is not regular enough at infinity
    assert not in_span(S, A, {mono(0): 1, pole(mpq(1), 1): 1})


@pytest.mark.parametrize("n", [0, 1])
def test_level_conditions_at_the_outgoing_points(V, n):
    k = 2 * n + 4
    X = q_sphere(n, n)
    S = section_basis(X, V, 3, k)
    for s in S:
        for v, cols in s.terms.items():
            f = combo_to_rational(cols)
            wt = V.weight(v)
            # vanishing of order wt v + n at 0
            assert min(combo_expansion(cols, mpq(0), wt + n + 1), default=wt + n) >= wt + n
            # at infinity only powers zeta^j with j <= wt v - n - 2
            lo = f.laurent_at_infinity(n + 3 - wt + 1)
            assert lo.valuation() is None or lo.valuation() >= n + 2 - wt
    for v in V.basis.upto(3):
        wt = V.weight(v)
        for m in range(2 * n + 2, k + 1):
            assert in_span(S, v, _shifted_monomial(wt + n, m))


def _shifted_monomial(d, m):
    """zeta^d (zeta-1)^{-m} in columns, via zeta = (zeta-1) + 1."""
    out = {}
    for i in range(d + 1):
        j = i - m
        if j < 0:
            out[pole(mpq(1), -j)] = out.get(pole(mpq(1), -j), 0) + comb(d, i)
        else:
            for l in range(j + 1):
                c = comb(d, i) * comb(j, l) * (-1) ** (j - l)
                out[mono(l)] = out.get(mono(l), 0) + c
    return {k: c for k, c in out.items() if c}


def test_empty_basis_without_room(V):
    X = PointedSphere([mpq(0)])
    assert section_basis(X, V, 0, 0) == []


# -- residue actions -------------------------------------------------------------------

def test_residue_at_finite_point(V):
    W = VacuumModule(V)
    X = PointedSphere([mpq(0)], [(INF, 3)])
    sigma_cols = {pole(mpq(0), 2): 1, mono(1): 3}
    s = RationalSection({A: sigma_cols})
    for w in V.basis.upto(3):
        ref = {}
        for k, c in [(-2, 1), (1, 3)]:
            for lab, x in W.act(A, k, w).items():
                ref[lab] = ref.get(lab, 0) + c * x
        ref = {k: x for k, x in ref.items() if x}
        assert residue_act(X, W, s, 0, w) == ref
    deep = RationalSection({A: {mono(5): 1}})
    assert residue_act(X, W, deep, 0, VAC) == {}


def test_residue_at_infinity_routes_agree(V):
    W = MultiModule([VacuumModule(V), contragredient(VacuumModule(V))])
    X = PointedSphere([mpq(0), INF])
    D = VacuumModule(V)
    for v in [A, (1, 1), (2,)]:
        s = RationalSection({v: {mono(2): 1, pole(mpq(0), 1): 5}})
        for w in W.basis_upto(2):
            a = residue_act(X, W, s, 1, w, route="contragredient")
            b = residue_act(X, W, s, 1, w, route="pushforward")
            assert a == b
        # g = zeta^2 + 5 zeta^{-1}: -(Y'(v)_2 + 5 Y'(v)_{-1}) on a single module
        Xs = PointedSphere([INF], [(mpq(0), 4)])
        for w in V.basis.upto(2):
            ref = contragredient_op(D, {v: 1}, 2, {w: 1})
            for lab, x in contragredient_op(D, {v: 1}, -1, {w: 1}).items():
                ref[lab] = ref.get(lab, 0) + 5 * x
            ref = {k: -x for k, x in ref.items() if x}
            assert residue_act(Xs, D, s, 0, w) == ref


# -- quotients -------------------------------------------------------------------------

def test_two_point_quotient_is_the_pairing(V):
    W = MultiModule([VacuumModule(V), contragredient(VacuumModule(V))])
    X = PointedSphere([mpq(0), INF])
    for K in range(2, 5):
        Q = coinvariant_quotient(X, W, 3, 3, K)
        assert Q.dim == 1
        assert Q.representatives == [(VAC, VAC)]
        for n, d in enumerate(Q.dims_by_weight()):
            assert d <= len(V.basis.of_weight(n))


def test_q_quotient_level_zero(V):
    Q = coinvariant_quotient(q_sphere(0, 0), VacuumModule(V), 6, 6, 6)
    e = Echelon(sorted(Q.representatives, key=str))
    for lab in [VAC, A, (1, 1)]:
        assert e.add(Q.project({lab: 1}))
    assert Q.dims_by_weight()[:3] == [1, 1, 1]


def test_matrix_coefficients_kill_relations(V):
    W = VacuumModule(V)
    X = q_sphere(1, 1)
    phi = MatrixCoefficient(V, A, A)
    for r in relations(X, W, 3, 4, 5):
        assert phi(r) == 0


# -- strong residue test ----------------------------------------------------------------

def test_residue_test_examples():
    zero = {mpq(0): LaurentPoly({}, 2), INF: LaurentPoly({}, 1)}
    assert strong_residue_test(zero).passed
    F = RationalFunction((mpq(1), mpq(2)), {mpq(0): 2, mpq(1): 1})
    pts = [mpq(0), mpq(1), INF]
    exps = function_expansions(F, pts, {mpq(0): 2, mpq(1): 1, INF: 0})
    assert strong_residue_test(exps).passed
    single = {mpq(0): LaurentPoly({-1: 1}, 1)}
    res = strong_residue_test(single)
    assert not res.passed
    assert res.value == 1
    assert res.witness(mpq(5)) == 1


small = st.builds(mpq, st.integers(-4, 4), st.integers(1, 3))


@settings(max_examples=40, deadline=None)
@given(st.lists(small, min_size=1, max_size=4), st.integers(1, 3), st.integers(1, 2), small)
def test_residue_theorem(num, m0, m1, bump):
    F = RationalFunction(tuple(num), {mpq(0): m0, mpq(2): m1})
    pts = [mpq(0), mpq(2), INF]
    precs = {mpq(0): m0, mpq(2): m1, INF: max(len(num) - 1 - m0 - m1, 0)}
    exps = function_expansions(F, pts, precs)
    assert strong_residue_test(exps).passed
    if bump:
        s = exps[mpq(0)]
        exps[mpq(0)] = s + LaurentPoly({-1: bump}, s.prec)
        assert not strong_residue_test(exps).passed
