import random

import pytest
from hypothesis import given, strategies as st

from jrfl.errors import DivisionByZero, PrecisionExhausted
from jrfl.local_fields import (
    LaurentScalar,
    LocalField,
    PlaceData,
    SplitPair,
    eta,
    format_scalar,
    frobenius,
    parse_scalar,
    quadratic_extension,
    residue_field,
    scalar_arith,
    sqrt_in_quadratic,
)

from conftest import inert, laurent, split
from oracles import convolve, quad_mul

F5 = residue_field(5)
F25 = quadratic_extension(5)
F49 = quadratic_extension(7)


def s(coeffs, val=0, prec=None, field=F5):
    return LaurentScalar(coeffs, val, prec, field)


# -- oracles ---------------------------------------------------------------


@pytest.mark.parametrize("F", [F25, F49])
def test_quadratic_multiplication_table_matches_polynomial_oracle(F):
    for x in range(F.size):
        for y in range(F.size):
            assert F.mul(x, y) == quad_mul(F, x, y)


@given(laurent(F25, nonzero=True), laurent(F25, nonzero=True))
def test_product_matches_convolution_oracle(a, b):
    val, coeffs = convolve(a, b)
    assert a * b == LaurentScalar(coeffs, val, None, F25)
    assert (a * b).valuation() == a.valuation() + b.valuation()


def test_valuation_additive_on_random_pairs():
    rng = random.Random(1)
    lf = LocalField(inert(5))
    for _ in range(1000):
        a = lf.random(rng, val=rng.randint(-3, 3), unit=True)
        b = lf.random(rng, val=rng.randint(-3, 3), unit=True)
        assert scalar_arith(a, b, "mul").valuation() == a.valuation() + b.valuation()


# -- examples --------------------------------------------------------------


def test_mul_by_inverse_uniformizer():
    assert scalar_arith(s([0, 1, 1]), s([1], -1), "mul") == s([1, 1])


def test_geometric_series_to_precision():
    q = scalar_arith(s([1]), s([1, 4]), "div", prec=6)
    assert q.prec == 6
    assert list(q.coeffs) == [1] * 6


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        scalar_arith(s([1]), s([]), "div")


def test_truncated_zero_has_unknown_valuation():
    with pytest.raises(PrecisionExhausted):
        LaurentScalar([], 0, 3, F5).valuation()


def test_frobenius_fixes_base_coefficients():
    a = LaurentScalar([1, 2, 3], 0, None, F25)
    assert frobenius(a) == a


def test_frobenius_swaps_split_pairs():
    x, y = s([1, 2]), s([3])
    p = frobenius(SplitPair(x, y))
    assert p.left == y and p.right == x


@given(laurent(F25))
def test_frobenius_is_involution(a):
    assert frobenius(frobenius(a)) == a


@given(laurent(F25), laurent(F25))
def test_frobenius_is_ring_homomorphism(a, b):
    assert frobenius(a * b) == frobenius(a) * frobenius(b)
    assert frobenius(a + b) == frobenius(a) + frobenius(b)


@given(laurent(F25))
def test_norm_is_rational(a):
    n = a * frobenius(a)
    assert all(F25.is_base_element(c) for c in n.coeffs)


def test_sqrt_of_one():
    assert sqrt_in_quadratic(1, 5) == 1


@pytest.mark.parametrize("p", [5, 7])
def test_sqrt_exhaustive(p):
    F = quadratic_extension(p)
    for c in range(1, p):
        r = sqrt_in_quadratic(c, p)
        assert quad_mul(F, r, r) == c
        # least root in encoding order
        assert all(quad_mul(F, t, t) != c for t in range(r))


def test_sqrt_two_in_f25():
    r = sqrt_in_quadratic(2, 5)
    assert F25.mul(r, r) == 2 and not F25.is_base_element(r)


def test_eta_examples():
    place = inert()
    assert eta(s([3]), place) == 1
    assert eta(s([1], 1), place) == -1
    assert eta(s([2, 1], 2), place) == 1
    assert eta(s([1], 1), split()) == 1


@given(laurent(F25, nonzero=True), laurent(F25, nonzero=True))
def test_eta_multiplicative(a, b):
    place = inert()
    assert eta(a * b, place) == eta(a, place) * eta(b, place)


@given(laurent(F25, nonzero=True), laurent(F25), laurent(F25))
def test_field_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a


@given(laurent(F25, nonzero=True))
def test_exact_quotient_roundtrip(a):
    b = LaurentScalar([1, 2], 1, None, F25)
    assert (a * b).exact_quotient(b) == a


@given(st.integers(1, 8), laurent(F25, nonzero=True))
def test_inverse_to_precision(prec, a):
    inv = a.inverse(prec)
    prod = a * inv
    assert (prod - LaurentScalar([1], 0, None, F25)).is_zero_to_precision()


def test_wire_format_roundtrip():
    rng = random.Random(3)
    lf = LocalField(inert(7))
    for _ in range(200):
        a = lf.random(rng, val=rng.randint(-2, 2))
        assert parse_scalar(format_scalar(a), lf.residue) == a
    lfs = LocalField(split(7))
    for _ in range(50):
        a = lfs.random(rng)
        back = parse_scalar(format_scalar(a), lfs.residue)
        assert back.left == a.left and back.right == a.right


def test_wire_format_shape():
    assert format_scalar(s([1, 2], -1, 4)) == "-1:4:[1,2]"
    assert format_scalar(s([1], 0)) == "0:inf:[1]"


def test_place_rejects_small_characteristic():
    with pytest.raises(ValueError):
        PlaceData(5, n=3)
