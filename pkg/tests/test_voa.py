import json

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from voalab import CutoffError, build_heisenberg, build_virasoro, build_voa
from voalab.modules import (VacuumModule, contragredient, contragredient_op, grading_defect,
                            jacobi_check, matrix_of, omega_subspace, span_contains,
                            virasoro_bracket_defect)
from voalab.scalars import RatFunc
from voalab.voa import mode_action, skew_symmetry_defect

VAC = ()
ALPHA = (1,)
OMEGA = (2,)


def p(n):
    return int(sympy.partition(n)) if n >= 0 else 0


# -- construction -------------------------------------------------------------------

def test_heisenberg_dims(heis):
    assert heis.basis.dims(5) == [p(n) for n in range(6)] == [1, 1, 2, 3, 5, 7]


def test_virasoro_dims(vir_half):
    # partitions of n with parts >= 2 number p(n) - p(n-1)
    oracle = [p(n) - p(n - 1) for n in range(7)]
    assert vir_half.basis.dims(6) == oracle == [1, 0, 1, 1, 2, 2, 4]


def test_heisenberg_alpha_modes(heis):
    assert heis.mode(ALPHA, 1, ALPHA) == {VAC: 1}
    assert heis.mode(ALPHA, 0, ALPHA) == {}
    assert heis.L(0, ALPHA) == {ALPHA: 1}


@pytest.mark.parametrize("c", [mpq(1, 2), mpq(-22, 5), RatFunc.t()])
def test_virasoro_central_term(c):
    V = build_virasoro(c, 6)
    assert V.mode(OMEGA, 3, OMEGA) == {VAC: c / 2}
    assert V.mode(OMEGA, 1, OMEGA) == {OMEGA: 2}


def test_mode_action_examples(heis, vir_half):
    v = {(2, 1): mpq(3), (1, 1, 1): mpq(-1, 2)}
    assert mode_action(heis, VAC, -1, v) == v
    assert mode_action(heis, ALPHA, -1, {ALPHA: 1}) == {(1, 1): 1}
    assert mode_action(vir_half, OMEGA, 0, {OMEGA: 1}) == vir_half.L(-1, OMEGA) == {(3,): 1}


def test_cutoff_is_a_hard_error():
    V = build_heisenberg(4)
    with pytest.raises(CutoffError):
        V.mode((2, 2), -1, (1,))
    with pytest.raises(CutoffError):
        V.mode((5,), 0, VAC)
    # :da da:_{-1} a_{-1}1 picks up a_{-5} a_1 twice, with (4)(-2) each time
    assert V.with_cutoff(6).mode((2, 2), -1, (1,)) == {(2, 2, 1): 1, (5,): -16}


def test_descriptor_round_trip(vir_generic):
    doc = vir_generic.to_json()
    assert json.loads(doc) == {"voa": "virasoro", "central_charge": "generic", "cutoff": 8}
    again = build_voa(doc)
    assert again.basis.dims() == vir_generic.basis.dims()
    assert build_voa({"voa": "virasoro", "central_charge": "1/2", "cutoff": 4}).central_charge == mpq(1, 2)
    with pytest.raises(ValueError):
        build_voa({"voa": "lattice"})


# -- Jacobi ----------------------------------------------------------------------------

def test_jacobi_vacuum(heis):
    W = VacuumModule(heis)
    for m, n, h in [(0, 0, 0), (-2, 1, 2), (2, -2, -1)]:
        assert jacobi_check(W, {VAC: 1}, {VAC: 1}, {VAC: 1}, m, n, h) == {}


def test_jacobi_examples(heis, vir_half):
    a = {ALPHA: 1}
    assert jacobi_check(VacuumModule(heis), a, a, a, 0, 0, -1) == {}
    w = {OMEGA: 1}
    assert jacobi_check(VacuumModule(vir_half), w, w, w, 1, 0, 0) == {}


def test_jacobi_detects_a_broken_table():
    V = build_heisenberg(6)
    good = V.mode((1, 1), 1, ALPHA)
    assert good == {ALPHA: 2}
    V._store.mode[((1, 1), 1, ALPHA)] = {ALPHA: 3}
    a, b = {ALPHA: 1}, {(1, 1): 1}
    bad = [jacobi_check(VacuumModule(V), b, a, a, m, 0, 0) for m in range(-2, 3)]
    assert any(bad)


# -- structural invariants ---------------------------------------------------------------

@pytest.mark.parametrize("name", ["heis", "vir_half", "vir_generic"])
def test_weight_bookkeeping(name, request):
    V = request.getfixturevalue(name).with_cutoff(6)
    labs = V.basis.upto(6)
    for a in labs:
        for b in labs:
            for n in range(-3, V.weight(a) + V.weight(b)):
                if V.weight(a) + V.weight(b) - n - 1 > 6:
                    continue
                for k in V.mode(a, n, b):
                    assert V.weight(k) == V.weight(a) + V.weight(b) - n - 1


@pytest.mark.parametrize("name", ["heis", "vir_half"])
def test_skew_symmetry(name, request):
    V = request.getfixturevalue(name).with_cutoff(6)
    labs = V.basis.upto(6)
    for a in labs:
        for b in labs:
            if V.weight(a) + V.weight(b) <= 6:
                assert skew_symmetry_defect(V, a, b) == {}


@pytest.mark.parametrize("name", ["heis", "vir_half", "vir_generic"])
def test_virasoro_bracket(name, request):
    V = request.getfixturevalue(name)
    W = VacuumModule(V)
    for m in range(-4, 5):
        for n in range(-4, 5):
            top = V.cutoff - abs(m) - abs(n)
            for w in V.basis.upto(max(top, -1)):
                assert virasoro_bracket_defect(W, m, n, w) == {}


def test_grading_property(heis, vir_half):
    for V in (heis, vir_half):
        W = VacuumModule(V)
        for a in V.basis.upto(3):
            for w in V.basis.upto(3):
                for n in range(-2, 4):
                    assert grading_defect(W, a, n, w) == {}


# -- contragredient ---------------------------------------------------------------------

def test_contragredient_transpose(heis):
    W = VacuumModule(heis)
    Wd = contragredient(W)
    for n in (-1, 0, 1):
        for m in range(4):
            mat, src, tgt = matrix_of(Wd, ALPHA, n, m)
            for i, t in enumerate(tgt):
                for j, s in enumerate(src):
                    assert mat[i][j] == contragredient_op(W, {ALPHA: 1}, n, {t: 1}).get(s, 0)


def test_contragredient_primary(heis, vir_half):
    W = VacuumModule(heis)
    for w in heis.basis.upto(4):
        for n in range(-2, 3):
            y = heis.mode(ALPHA, n, w) if 1 + heis.weight(w) - n - 1 <= 8 else None
            yd = contragredient_op(W, {ALPHA: 1}, n, {w: 1})
            ref = heis.mode(ALPHA, -n, w)
            assert yd == {k: -x for k, x in ref.items()}
            if n == 0:
                assert yd == {k: -x for k, x in y.items()}
    # omega is quasi-primary of weight 2 in both algebras: Y'(omega)_n = Y(omega)_{2-n}
    for V in (heis, vir_half):
        W = VacuumModule(V)
        for w in V.basis.upto(4):
            for n in range(0, 4):
                assert contragredient_op(W, V.conformal, n, {w: 1}) == V.mode_vec(V.conformal, 2 - n, {w: 1})


# -- Omega subspaces -----------------------------------------------------------------------

def test_omega_subspaces():
    V = build_heisenberg(4)
    W = VacuumModule(V)
    om0 = omega_subspace(W, 0)
    assert span_contains(om0, [{VAC: 1}], V.basis.upto())
    assert len(om0) == 1
    om1 = omega_subspace(W, 1)
    assert span_contains(om1, [{VAC: 1}, {ALPHA: 1}], V.basis.upto())
    assert len(om1) == 2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(-2, 2), st.integers(-2, 2))
def test_jacobi_random_instances(i, j, m, n):
    V = build_heisenberg(8)
    labs = V.basis.upto(3)
    u, v = labs[i % len(labs)], labs[j % len(labs)]
    for w in V.basis.upto(2):
        assert jacobi_check(VacuumModule(V), {u: 1}, {v: 1}, {w: 1}, m, n, 0) == {}
