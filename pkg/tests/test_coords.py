import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from voalab import build_heisenberg, build_virasoro
from voalab.coords import (CoordMap, DegenerateMapError, apply_U, apply_U_inverse,
                           check_gamma_scaling, check_representation, closed_form_gamma,
                           compose_series, fit_coefficients, gamma_map, scaling_map)
from voalab.modules import VacuumModule
from voalab.scalars import RatFunc

zs = sympy.Symbol("z")


def lie_series(lead, cs, N):
    """lead * exp(sum c_n z^{n+1} d/dz) z to order z^N, by sympy."""
    X = sum(sympy.Rational(int(c.numerator), int(c.denominator)) * zs ** (n + 1)
            for n, c in enumerate(cs, start=1))
    term, total = zs, zs
    for k in range(1, N + 1):
        term = sympy.expand(X * sympy.diff(term, zs)) / k
        total += term
    poly = sympy.Poly(sympy.series(total, zs, 0, N + 1).removeO(), zs)
    return [lead * mpq(str(poly.coeff_monomial(zs ** k))) for k in range(N + 1)]


def as_series(expr, N):
    s = sympy.series(expr, zs, 0, N + 1).removeO()
    return [mpq(str(sympy.Poly(s, zs).coeff_monomial(zs ** k))) for k in range(N + 1)]


def test_fit_scaling():
    r = fit_coefficients([0, 5, 0, 0, 0], 3)
    assert r.leading == 5
    assert r.c == [0, 0, 0]


def test_fit_gamma_one():
    rho = as_series(1 / (1 + zs) - 1, 7)
    r = fit_coefficients(rho, 6)
    assert r.leading == -1
    assert r.c == [-1, 0, 0, 0, 0, 0]
    assert lie_series(r.leading, r.c, 7) == rho


def test_fit_quadratic():
    # order-by-order elimination: z/(1-z) has c_1 = 1, then z^3 forces c_2 = -1
    r = fit_coefficients([0, 1, 1, 0, 0], 3)
    assert r.leading == 1
    assert r.c[:2] == [1, -1]
    assert lie_series(r.leading, r.c, 4)[:5] == [0, 1, 1, 0, 0]


def test_degenerate_maps():
    with pytest.raises(DegenerateMapError):
        fit_coefficients([1, 1, 0])
    with pytest.raises(DegenerateMapError):
        fit_coefficients([0, 0, 1])


def test_identity_acts_trivially(heis):
    W = VacuumModule(heis)
    v = {(2, 1): mpq(1, 3), (1, 1, 1): 2}
    assert apply_U(scaling_map(1, 4), W, v) == v


def test_gamma_z_on_alpha(heis):
    z = RatFunc.t()
    W = VacuumModule(heis)
    out = apply_U(gamma_map(z, 3), W, {(1,): 1})
    assert out == {(1,): -1 / (z * z)}


def test_gamma_one_on_virasoro():
    V = build_virasoro(mpq(1, 2), 6)
    W = VacuumModule(V)
    g = fit_coefficients(as_series(1 / (1 + zs) - 1, 7), 6)
    assert apply_U(g, W, {(2,): 1}) == {(2,): 1}
    # L(1) L(-3) 1 = 4 omega, so e^{L(1)} (-1)^{L(0)} L(-3)1 = -L(-3)1 - 4 omega
    assert apply_U(g, W, {(3,): 1}) == {(3,): -1, (2,): -4}
    for v in V.basis.upto(6):
        assert apply_U(g, W, {v: 1}) == closed_form_gamma(W, mpq(1), {v: 1})


def test_representation_examples():
    V = build_virasoro(mpq(1, 2), 6)
    W = VacuumModule(V)
    samples = [{v: 1} for v in V.basis.upto(6)]
    r1 = fit_coefficients([0, 1, 1, 0, 0, 0, 0, 0], 6)
    ident = scaling_map(1, 6)
    assert check_representation(r1, ident, W, samples)["pass"]
    rep = check_representation(scaling_map(2, 6), scaling_map(3, 6), W, samples)
    assert rep["pass"]
    for v in V.basis.upto(6):
        assert apply_U(scaling_map(6, 6), W, {v: 1}) == {v: mpq(6) ** V.weight(v)}
    r2 = fit_coefficients(as_series(zs / (1 - zs), 7), 6)
    assert check_representation(r1, r2, W, [{(2,): 1}])["pass"]


def test_compose_series_matches_sympy():
    p = as_series(zs + zs ** 2, 6)
    q = as_series(zs / (1 - zs), 6)
    assert compose_series(p, q, 6) == as_series((zs / (1 - zs)) + (zs / (1 - zs)) ** 2, 6)


def test_gamma_scaling_identity(heis, vir_generic):
    for V in (heis.with_cutoff(5), vir_generic.with_cutoff(6)):
        W = VacuumModule(V)
        for v in V.basis.upto():
            assert check_gamma_scaling(W, {v: 1}) == {}


coeffs = st.builds(mpq, st.integers(-3, 3), st.integers(1, 3))
leads = st.sampled_from([mpq(-2), mpq(-1), mpq(1, 2), mpq(3)])


@settings(max_examples=25, deadline=None)
@given(leads, st.lists(coeffs, min_size=5, max_size=5))
def test_fit_round_trip(lead, cs):
    r = CoordMap(lead, cs)
    again = fit_coefficients(r.series(6), 5)
    assert again == r


@settings(max_examples=15, deadline=None)
@given(leads, st.lists(coeffs, min_size=4, max_size=4))
def test_inverse_undoes_U(lead, cs):
    W = VacuumModule(build_heisenberg(4))
    r = CoordMap(lead, cs)
    for v in W.basis_upto():
        assert apply_U_inverse(r, W, apply_U(r, W, {v: 1})) == {v: 1}
