import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspspin.exactnum import (
    R2,
    R3,
    T,
    FieldElement,
    Isometry,
    LorentzVector,
    format_field,
    minkowski_inner,
    parse_field,
    sign,
)

small = st.fractions(min_value=-50, max_value=50, max_denominator=30)
elements = st.builds(FieldElement, small, small, small, small)
nonzero = elements.filter(lambda x: not x.is_zero())


def test_basis_squares():
    assert R2 * R2 == 2
    assert R3 * R3 == 3
    assert (R2 * R3) * (R2 * R3) == 6
    assert T * 3 == R3


def test_sign_of_close_values():
    # 99/70 approximates sqrt(2) from above
    assert sign(R2 - Fraction(99, 70)) < 0
    assert sign(R2 - Fraction(140, 99)) > 0
    assert sign(R2 + R3 - R2 * R3) > 0


def test_format_parse():
    x = FieldElement(Fraction(-1, 2), 0, 3, Fraction(2, 7))
    assert parse_field(format_field(x)) == x
    assert format_field(FieldElement(0, 0, 0, 1)) == "1*r6"
    assert parse_field("r2 + r2") == 2 * R2
    with pytest.raises(ValueError):
        parse_field("1 2")


@given(elements, elements, elements)
def test_ring_laws(x, y, z):
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x


@given(nonzero)
def test_inverse(x):
    assert x * x.inverse() == 1


@given(elements)
def test_sign_matches_float(x):
    f = float(x)
    if abs(f) > 1e-9:
        assert sign(x) == (1 if f > 0 else -1)
    assert sign(-x) == -sign(x)


@given(elements, elements)
def test_order_is_total_and_additive(x, y):
    assert (x < y) + (x == y) + (x > y) == 1
    assert (x < y) == (x + 1 < y + 1)


@given(elements)
def test_format_roundtrip(x):
    assert parse_field(format_field(x)) == x


def test_minkowski_inner():
    e1 = LorentzVector([R2, 1, 1, 1, R3])
    assert minkowski_inner(e1, e1) == 4


def test_determinant():
    assert Isometry.diagonal([1, -1, -1, -1, -1]).det() == 1
    assert Isometry.diagonal([1, 1, 1, 1, -1]).det() == -1
    m = Isometry([[1, 2, 0, 0, 0], [3, 4, 0, 0, 0], [0, 0, 1, 0, 0], [0, 0, 0, 1, 0], [0, 0, 0, 0, R2]])
    assert m.det() == -2 * R2
