import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moorecalc.errors import ContextMismatch, NotInvertible, SeriesError
from moorecalc.rings import QQ, ZZ, IntegersMod
from moorecalc.series import (
    CommSeries,
    GradingContext,
    NcSeries,
    comm_compose,
    comm_derivative,
    comm_inverse,
    divide_by_2t,
    divide_by_t,
    format_word,
    graded_commutator,
    nc_mul,
    tilde,
)

from conftest import rand_nc, rand_series

seeds = st.integers(0, 10**6)


@given(seed=seeds, d=st.integers(0, 1))
@settings(max_examples=40, deadline=None)
def test_nc_product_associative_and_distributive(seed, d):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, d, 6)
    a, b, c = (rand_nc(ctx, rng, 2, constant=True) for _ in range(3))
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


def test_graded_commutator_signs():
    odd = GradingContext(QQ, 1, 6)
    t = NcSeries.t(odd)
    assert graded_commutator(t, t) == 2 * (t * t)
    tau = NcSeries.tau(odd)
    assert graded_commutator(tau, t) == tau * t + t * tau
    even = GradingContext(QQ, 0, 6)
    te, taue = NcSeries.t(even), NcSeries.tau(even)
    assert graded_commutator(taue, te) == taue * te - te * taue
    assert not graded_commutator(te, te)


def test_commutator_needs_homogeneous_input():
    ctx = GradingContext(QQ, 0, 4)
    mixed = NcSeries.t(ctx) + NcSeries.tau(ctx)
    with pytest.raises(SeriesError):
        graded_commutator(mixed, NcSeries.t(ctx))


def test_trusted_order_of_products():
    ctx = GradingContext(QQ, 0, 10)
    a = NcSeries(ctx, {"t": QQ.one}, order=4)
    b = NcSeries(ctx, {"tt": QQ.one}, order=6)
    # a is exact through 4, val(b) = 2 -> 6; b exact through 6, val(a) = 1 -> 7
    assert nc_mul(a, b).order == 6


def test_equality_up_to_trusted_order():
    ctx = GradingContext(QQ, 0, 10)
    a = CommSeries(ctx, [0, 1, 0, 5])
    b = CommSeries(ctx, [0, 1, 0, 5, 7])
    assert a == b
    assert not (CommSeries(ctx, [0, 1, 1]) == b)


def test_format_word():
    assert format_word("TTtT") == "tau^2*t*tau"
    assert format_word("") == "1"


def test_context_mismatch():
    a = CommSeries.t(GradingContext(QQ, 0, 4))
    b = CommSeries.t(GradingContext(ZZ, 0, 4))
    with pytest.raises(ContextMismatch):
        a + b


def test_inverse_example():
    ctx = GradingContext(QQ, 0, 9)
    f = CommSeries.from_dict(ctx, {1: 1, 3: 1})
    g = comm_inverse(f)
    assert g == CommSeries.from_dict(ctx, {1: 1, 3: -1, 5: 3, 7: -12, 9: 55})


def _lagrange_inverse(f, n):
    """[t^n] f^-1 = (1/n) [t^(n-1)] (t/f)^n."""
    g = divide_by_t(f).reciprocal()
    return (g ** n).raw(n - 1) / n


@given(seed=seeds)
@settings(max_examples=30, deadline=None)
def test_inverse_matches_lagrange(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 0, 7)
    f = rand_series(ctx, rng, start=2) + CommSeries.monomial(ctx, 1, rng.choice([1, -2, 3]))
    g = comm_inverse(f)
    for n in range(1, 8):
        assert g.raw(n) == _lagrange_inverse(f, n)
    assert comm_compose(f, g) == CommSeries.t(ctx)
    assert comm_compose(g, f) == CommSeries.t(ctx)


@given(seed=seeds)
@settings(max_examples=30, deadline=None)
def test_composition_associative_and_chain_rule(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 0, 6)
    f, g, h = (rand_series(ctx, rng) for _ in range(3))
    assert comm_compose(comm_compose(f, g), h) == comm_compose(f, comm_compose(g, h))
    lhs = comm_derivative(comm_compose(f, g))
    rhs = comm_compose(comm_derivative(f), g) * comm_derivative(g)
    assert lhs == rhs


def test_inverse_needs_unit_linear_term():
    ctx = GradingContext(ZZ, 0, 5)
    with pytest.raises(NotInvertible):
        comm_inverse(CommSeries.from_dict(ctx, {1: 2}))
    assert comm_inverse(CommSeries.from_dict(ctx, {1: -1, 2: 1})) is not None


def test_tilde_and_division():
    ctx = GradingContext(QQ, 1, 8)
    w = CommSeries.from_dict(ctx, {2: 1, 6: 3})
    wt = tilde(w)
    assert wt.raw(1) == 1 and wt.raw(3) == 3
    with pytest.raises(SeriesError):
        tilde(CommSeries.t(ctx))
    assert divide_by_2t(CommSeries.from_dict(ctx, {2: 1})) == CommSeries.from_dict(ctx, {1: QQ.inverse(QQ.from_int(2))})
    with pytest.raises(NotInvertible):
        divide_by_2t(CommSeries.from_dict(GradingContext(ZZ, 1, 4), {2: 1}))
    with pytest.raises(NotInvertible):
        divide_by_2t(CommSeries.from_dict(GradingContext(IntegersMod(4), 1, 4), {2: 1}))


def test_divide_and_reciprocal():
    ctx = GradingContext(QQ, 0, 6)
    f = CommSeries.from_dict(ctx, {1: 1, 2: 1})
    g = CommSeries.from_dict(ctx, {2: 1, 3: 1})
    assert g.divide(f) == CommSeries.t(ctx)
    one_plus_t = 1 + CommSeries.t(ctx)
    assert one_plus_t * one_plus_t.reciprocal() == 1 + CommSeries.zero(ctx)


def test_to_nc_and_back():
    ctx = GradingContext(QQ, 0, 6)
    f = CommSeries.from_dict(ctx, {1: 2, 4: -1})
    assert f.to_nc().to_comm() == f
    with pytest.raises(SeriesError):
        NcSeries.tau(ctx).to_comm()
