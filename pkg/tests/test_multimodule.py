from itertools import product

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from voalab import build_heisenberg, build_virasoro
from voalab.modules import VacuumModule
from voalab.multimodule import (MultiModule, TensorModuleView, multigrading_defect,
                                slot_commutator, slot_contragredient, slot_grading_defect,
                                slot_round_trip, tensor_module, verify_tensor_jacobi)
from voalab.scalars import RatFunc

VAC = ()
A = (1,)
OM = (2,)


@pytest.fixture(scope="module")
def hh():
    V = build_heisenberg(9)
    return MultiModule([VacuumModule(V), VacuumModule(V)])


@pytest.fixture(scope="module")
def hv():
    return MultiModule([VacuumModule(build_heisenberg(9)),
                        VacuumModule(build_virasoro(RatFunc.t(), 9))])


def test_single_factor_is_unchanged():
    W = VacuumModule(build_heisenberg(4))
    assert tensor_module([W]) is W
    assert isinstance(tensor_module([W, W]), MultiModule)


def test_slots_commute(hh):
    for w in hh.basis_upto(4):
        assert slot_commutator(hh, 0, A, 0, 1, A, -1, w) == {}
        for m, n in product(range(-2, 3), repeat=2):
            if hh.weight(w) + 3 - m - n - 2 <= 9:
                assert slot_commutator(hh, 0, A, m, 1, (1, 1), n, w) == {}


def test_mixed_dims(hv):
    for n1 in range(5):
        for n2 in range(5):
            oracle = int(sympy.partition(n1)) * (int(sympy.partition(n2)) - int(sympy.partition(n2 - 1))
                                                 if n2 else 1)
            assert hv.dim_multi((n1, n2)) == oracle


def test_tensor_mode_examples(hh):
    w = ((2,), (1, 1))
    assert hh.tensor_mode((VAC, VAC), -1, w) == {w: 1}
    for k in range(-2, 3):
        assert hh.tensor_mode((A, VAC), k, w) == hh.slot_act(0, A, k, w)
    vac = (VAC, VAC)
    # alpha(z) (x) alpha(z): modes a_{k1} (x) a_{k2} with k1 + k2 = k - 1
    assert hh.tensor_mode((A, A), 1, vac) == {}
    assert hh.tensor_mode((A, A), 0, vac) == {}
    assert hh.tensor_mode((A, A), -1, vac) == {(A, A): 1}
    assert hh.tensor_mode((A, A), -2, vac) == {((2,), A): 1, (A, (2,)): 1}


def test_tensor_jacobi_examples(hh, hv):
    samples = [((VAC, VAC), (VAC, VAC), (VAC, VAC), 0, 0, 0)]
    assert verify_tensor_jacobi(hh, samples)["pass"]
    rep = verify_tensor_jacobi(hh, [((A, A), (A, A), (VAC, VAC), 0, 0, -1)])
    assert rep["pass"] and rep["checked"] == 1
    u, v = (A, VAC), (VAC, OM)
    samples = [(u, v, w, m, n, h) for w in hv.basis_upto(2)
               for m, n, h in product(range(-2, 3), repeat=3)]
    assert verify_tensor_jacobi(hv, samples)["pass"]
    # the two modes live in different slots, so they commute outright
    for w in hv.basis_upto(2):
        for m, n in product(range(-2, 3), repeat=2):
            x = hv.tensor_mode(u, m, w)
            left = {}
            for lab, c in x.items():
                for k, y in hv.tensor_mode(v, n, lab).items():
                    left[k] = left.get(k, 0) + c * y
            x = hv.tensor_mode(v, n, w)
            right = {}
            for lab, c in x.items():
                for k, y in hv.tensor_mode(u, m, lab).items():
                    right[k] = right.get(k, 0) + c * y
            assert {k: c for k, c in left.items() if c} == {k: c for k, c in right.items() if c}


def test_round_trip_and_gradings(hv):
    for i in range(2):
        V = hv.voas[i]
        for a in V.basis.upto(3):
            for w in hv.basis_upto(2):
                for n in range(-2, 3):
                    assert slot_round_trip(hv, i, a, n, w) == {}
                    assert multigrading_defect(hv, i, a, n, w) == []
                    for j in range(2):
                        assert slot_grading_defect(hv, j, i, a, n, w) == {}


def test_tensor_view_conformal(hv):
    view = TensorModuleView(hv)
    # total L(0) is the sum of slot L(0)
    for w in hv.basis_upto(3):
        assert view.L(0, w) == ({w: hv.weight(w)} if hv.weight(w) else {})


def test_slot_contragredient_shape(hh):
    D = slot_contragredient(hh)
    assert D.size == 2
    assert D.dim_multi((2, 1)) == hh.dim_multi((2, 1))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 3), st.integers(-2, 2), st.integers(0, 3), st.integers(-2, 2), st.integers(0, 6))
def test_random_slot_commutators(ia, m, ib, n, iw):
    V = build_heisenberg(8)
    W = MultiModule([VacuumModule(V), VacuumModule(V)])
    labs = V.basis.upto(2)
    a, b = labs[ia % len(labs)], labs[ib % len(labs)]
    w = W.basis_upto(2)[iw % len(W.basis_upto(2))]
    assert slot_commutator(W, 0, a, m, 1, b, n, w) == {}
