from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tensorcert.scalars import (
    GF,
    QQ,
    NotInvertibleError,
    eps_ring,
    parse_field,
    parse_scalar,
    scalar_arith,
)


def test_parse_examples():
    assert parse_scalar("3/4", QQ).value == Fraction(3, 4)
    assert parse_scalar("5", GF(3)).value == 2
    assert parse_scalar("-1", GF(5)).value == 4
    with pytest.raises(ZeroDivisionError):
        parse_scalar("1/0", QQ)
    with pytest.raises(ValueError):
        parse_scalar("x", QQ)


def test_parse_field():
    assert parse_field("Q") == QQ
    assert parse_field("F7") == GF(7)
    e = parse_field("eps(F2,3)")
    assert e.is_eps and e.base == GF(2) and e.order == 3
    with pytest.raises(ValueError):
        parse_field("F4")
    with pytest.raises(ValueError):
        parse_field("R")


def test_eps_truncation():
    F = eps_ring(QQ, 2)
    one_plus = parse_scalar("[1,1]", F)
    one_minus = parse_scalar("[1,-1]", F)
    assert scalar_arith(one_plus, one_minus, "mul") == parse_scalar("1", F)
    e = parse_scalar("[0,1]", F)
    assert (e * e).is_zero()
    with pytest.raises(NotInvertibleError):
        e.inverse()


def test_eps_inverse():
    F = eps_ring(GF(5), 4)
    a = parse_scalar("[2,1,3]", F)
    assert a * a.inverse() == parse_scalar("1", F)


def test_rational_sum():
    a, b = parse_scalar("2/3", QQ), parse_scalar("1/6", QQ)
    assert scalar_arith(a, b, "add").value == Fraction(5, 6)
    assert str(scalar_arith(a, b, "div")) == "4"


def test_field_mismatch():
    with pytest.raises(ValueError):
        scalar_arith(parse_scalar("1", GF(3)), parse_scalar("1", GF(5)), "add")


def test_division_by_zero_mod_p():
    with pytest.raises(ZeroDivisionError):
        parse_scalar("1", GF(7)) / 0


def test_float_rejected():
    with pytest.raises(TypeError):
        QQ.convert(0.5)


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_field_axioms_mod7(a, b, c):
    F = GF(7)
    x, y, z = (parse_scalar(str(v), F) for v in (a, b, c))
    assert (x + y) * z == x * z + y * z
    assert x - x == 0
    if not y.is_zero():
        assert (x / y) * y == x


@given(st.lists(st.integers(-9, 9), min_size=3, max_size=3),
       st.lists(st.integers(-9, 9), min_size=3, max_size=3))
def test_eps_ring_commutative(a, b):
    F = eps_ring(QQ, 3)
    x = parse_scalar("[" + ",".join(map(str, a)) + "]", F)
    y = parse_scalar("[" + ",".join(map(str, b)) + "]", F)
    assert x * y == y * x
    # truncation is a ring map
    lo = eps_ring(QQ, 2)
    assert F.truncate((x * y).value, 2) == lo.mul(F.truncate(x.value, 2), F.truncate(y.value, 2))
