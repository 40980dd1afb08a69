from math import comb

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from voalab.laurent import LaurentPoly, RationalFunction, series_residue
from voalab.linalg import Echelon, Quotient, SparseMatrix, kernel_basis, quotient_data
from voalab.scalars import RatFunc, binom, parse_scalar, scalar_to_str


# -- scalars -------------------------------------------------------------------

def test_rational_field_is_exact():
    a, b, c = mpq(1, 3), mpq(-2, 7), mpq(5, 11)
    assert (a + b) + c == a + (b + c)
    assert a * (mpq(1) / a) == 1
    assert isinstance(mpq(1) / 3, type(mpq(1)))


def test_ratfunc_canonical_form():
    t = RatFunc.t()
    f = (t * t - 1) / (t - 1)
    assert f == t + 1
    assert f.den == (1,)
    g = (2 * t) / (4 * t * t)
    assert g == RatFunc.const(1) / (2 * t)
    assert g.den[-1] == 1
    assert hash(RatFunc.const(3)) == hash(mpq(3))


def test_ratfunc_field_axioms():
    t = RatFunc.t()
    x = (t + 2) / (t - 3)
    assert x * x.inverse() == 1
    assert (x + t) - t == x
    assert x(mpq(1)) == mpq(-3, 2)
    with pytest.raises(ZeroDivisionError):
        x(3)


def test_parse_scalar():
    assert parse_scalar("1/2") == mpq(1, 2)
    assert parse_scalar("-7") == -7
    assert parse_scalar("generic") == RatFunc.t()
    for bad in ["one/half", "1/0", "0.5", ""]:
        with pytest.raises(ValueError):
            parse_scalar(bad)
    assert scalar_to_str(mpq(-3, 4)) == "-3/4"


def test_binom_negative_upper():
    assert binom(-1, 3) == -1
    assert binom(-2, 2) == 3
    assert binom(5, 2) == 10
    assert binom(3, -1) == 0


# -- Laurent series -------------------------------------------------------------

def test_residue_trivial():
    assert series_residue(LaurentPoly({-1: 1})) == 1
    f = LaurentPoly({2: 3, -1: 5, -3: -1})
    assert series_residue(f) == 5


def test_residue_binomial():
    # (1+z)^3 z^-2; oracle: binomial theorem coefficients
    cube = LaurentPoly({k: comb(3, k) for k in range(4)})
    f = cube * LaurentPoly({-2: 1})
    assert series_residue(f) == comb(3, 1) == 3
    assert f.coeffs == {-2: 1, -1: 3, 0: 3, 1: 1}


def test_no_stored_zeros():
    f = LaurentPoly({0: 1, 1: 0}) + LaurentPoly({0: -1})
    assert f.coeffs == {}
    assert not f


def test_truncated_coefficients_are_guarded():
    f = LaurentPoly({0: 1}, prec=2)
    assert f.coeff(1) == 0
    with pytest.raises(ValueError):
        f.coeff(2)


def test_rational_function_expansions():
    # 1/(z-1) at 0 is -(1 + z + z^2 + ...)
    f = RationalFunction((1,), {1: 1})
    assert f.laurent_at(0, 4).coeffs == {0: -1, 1: -1, 2: -1, 3: -1}
    # at infinity, in w = 1/z: w + w^2 + ...
    assert f.laurent_at_infinity(4).coeffs == {1: 1, 2: 1, 3: 1}
    assert f.laurent_at(1, 2).coeffs == {-1: 1}
    assert f(mpq(3)) == mpq(1, 2)


# -- linear algebra ---------------------------------------------------------------

def _span_equal(a, b, cols):
    ea, eb = Echelon(cols), Echelon(cols)
    for v in a:
        ea.add(v)
    for v in b:
        eb.add(v)
    return ea.rows == eb.rows


def test_kernel_trivial():
    z = SparseMatrix.from_dense([[0, 0], [0, 0]])
    assert _span_equal(kernel_basis(z), [{0: 1}, {1: 1}], [0, 1])
    e = SparseMatrix.from_dense([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert kernel_basis(e) == []


def test_kernel_hand_reduction():
    m = SparseMatrix.from_dense([[1, 1], [2, 2]])
    k = kernel_basis(m)
    assert len(k) == 1
    assert _span_equal(k, [{0: 1, 1: -1}], [0, 1])


def test_quotient_data():
    reps, proj = quotient_data(["a", "b"], [])
    assert reps == ["a", "b"]
    assert proj({"a": 2}) == {"a": 2}

    reps, proj = quotient_data([1, 2], [{1: 1, 2: -1}])
    assert len(reps) == 1
    assert proj({1: 1}) == proj({2: 1})

    reps, proj = quotient_data([1, 2, 3], [{1: 1, 2: 1}, {2: 1, 3: 1}])
    assert len(reps) == 1
    assert proj({1: 1}) == proj({3: 1})
    assert proj({1: 1, 2: 1}) == {}


def test_quotient_equality_is_structural():
    a = Quotient([1, 2, 3], [{1: 1, 2: 1}])
    b = Quotient([1, 2, 3], [{1: 2, 2: 2}])
    c = Quotient([1, 2, 3], [{2: 1, 3: 1}])
    assert a == b
    assert a != c


def test_pivot_is_smallest_column():
    e = Echelon(["x", "y", "z"])
    e.add({"z": 1, "y": 2})
    assert e.pivots() == ["y"]
    e.add({"x": 3, "z": 3})
    assert e.pivots() == ["x", "y"]
    assert e.rows["x"] == {"x": 1, "z": 1}


# -- properties -------------------------------------------------------------------

matrices = st.integers(1, 20).flatmap(
    lambda r: st.integers(1, 20).flatmap(
        lambda c: st.lists(st.lists(st.integers(-3, 3), min_size=c, max_size=c),
                           min_size=r, max_size=r)))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_rank_nullity(data):
    m = SparseMatrix.from_dense(data)
    ker = kernel_basis(m)
    ncols = len(data[0])
    assert m.rank() + len(ker) == ncols
    for k in ker:
        assert all(x == 0 for x in m.apply(k))
    assert m.rank() == sympy.Matrix(data).rank()


@settings(max_examples=50, deadline=None)
@given(matrices)
def test_echelon_is_deterministic(data):
    a = SparseMatrix.from_dense(data).rref()
    b = SparseMatrix.from_dense(data).rref()
    assert a.rows == b.rows
    assert a.pivots() == b.pivots()


laurents = st.dictionaries(st.integers(-4, 4), st.integers(-5, 5), max_size=6).map(LaurentPoly)
rationals = st.builds(mpq, st.integers(-9, 9), st.integers(1, 9))


@given(laurents, laurents)
def test_residue_of_product(f, g):
    direct = sum(a * g.coeff(-1 - i) for i, a in f.coeffs.items())
    assert series_residue(f * g) == direct


@given(laurents, laurents, rationals)
def test_residue_is_linear(f, g, c):
    assert series_residue(f + g.scale(c)) == series_residue(f) + c * series_residue(g)


@given(rationals, rationals, rationals.filter(bool))
def test_field_arithmetic_stays_rational(a, b, c):
    x = (a + b) / c
    assert type(x) is type(mpq(1))
    assert x * c == a + b
