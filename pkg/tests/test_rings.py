import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moorecalc.errors import RingError
from moorecalc.rings import QQ, ZZ, IntegersMod, augment, is_invertible, make_ring, polynomial, square_zero

RING_SPECS = ["Q", "Z", "Z/6", "F2", "Q[x,y;M=2]", "Z/6<e>", "Q[x;M=3]<e:4>"]


def _triples(ring, seed):
    rng = random.Random(seed)
    return [ring.random(rng, 3) for _ in range(3)]


@pytest.mark.parametrize("spec", RING_SPECS)
@given(seed=st.integers(0, 10**6))
@settings(max_examples=25, deadline=None)
def test_ring_axioms(spec, seed):
    R = make_ring(spec)
    a, b, c = _triples(R, seed)
    assert R.eq(R.add(a, b), R.add(b, a))
    assert R.eq(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c)))
    assert R.eq(R.mul(a, R.add(b, c)), R.add(R.mul(a, b), R.mul(a, c)))
    assert R.eq(R.mul(a, b), R.mul(b, a))
    assert R.eq(R.mul(R.one, a), a)
    assert R.is_zero(R.add(a, R.neg(a)))


def test_make_ring_forms():
    assert make_ring("Q") == QQ
    assert make_ring("ZZ") == ZZ
    assert make_ring("F2") == IntegersMod(2)
    assert make_ring("Z/6").modulus == 6
    R = make_ring("Q[x:2,y;M=3]")
    assert R.names == ("x", "y") and R.gen_degrees == (2, 0) and R.truncation == 3
    S = make_ring("Q<e1,e2>")
    assert S.square_zero and S.truncation == 1


@pytest.mark.parametrize("bad", ["R", "Q[x", "Q[x:1]", "Q[t]", "Q[x,x]", "Q[x;K=2]", "Z/1"])
def test_make_ring_rejects(bad):
    with pytest.raises(RingError):
        make_ring(bad)


def test_truncation_kills_high_monomials():
    R = make_ring("Q[x;M=2]")
    x = R.element(R.gen("x"))
    assert (x ** 2).raw and not (x ** 3).raw
    E = make_ring("Q<e,f>")
    e, f = E.element(E.gen("e")), E.element(E.gen("f"))
    assert (e * f).is_zero() and (e * e).is_zero()


def test_polynomial_inverse_is_geometric_series():
    R = polynomial(QQ, ["x"], truncation=4)
    x = R.element(R.gen("x"))
    inv = (1 + x).inverse()
    assert inv == 1 - x + x ** 2 - x ** 3 + x ** 4
    assert (inv * (1 + x)) == 1
    assert R.inverse(R.gen("x")) is None


def test_units_of_residue_rings():
    Z6 = IntegersMod(6)
    assert Z6.inverse(5) == 5
    assert Z6.inverse(2) is None and Z6.inverse(3) is None
    assert ZZ.inverse(-1) == -1 and ZZ.inverse(2) is None


def test_augmentation_splits_base_and_kernel():
    R = make_ring("Q[x,y;M=2]")
    a = R(2) + R.element(R.gen("x")) * 3
    base, ker = augment(a)
    assert base == QQ(2)
    assert ker == R.element(R.gen("x")) * 3
    ok, inv = is_invertible(a)
    assert ok and a * inv == 1


def test_coercion_of_fractions():
    assert QQ.coerce(__import__("fractions").Fraction(1, 2)) == QQ.inverse(QQ.from_int(2))
    with pytest.raises(RingError):
        ZZ.coerce(__import__("fractions").Fraction(1, 2))
    assert IntegersMod(5).coerce(__import__("fractions").Fraction(1, 2)) == 3


def test_formatting():
    R = make_ring("Q[x,y;M=2]")
    x, y = R.element(R.gen("x")), R.element(R.gen("y"))
    assert str(x + x * y) == "x + x*y"
    assert str(R(0)) == "0"
    assert str(QQ(-1) / 2) == "-1/2"


def test_square_zero_degrees_must_be_even():
    with pytest.raises(RingError):
        square_zero(QQ, ["e"], [3])
