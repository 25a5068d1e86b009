import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moorecalc.calculus import Derivation, bracket, is_square_zero
from moorecalc.deform import (
    AutomorphismJet,
    DeformationJet,
    DeformationOverBase,
    RingMap,
    classify_miniversal,
    conjugate_jet,
    extend_automorphism,
    extend_jet,
    integrate_infinitesimal,
    jet_order_check,
    obstruction,
    obstructions_cohomologous_check,
    pointed_action_trivial,
    pointed_conjugate,
    pointed_pairs,
    product_formula,
    push_out,
    random_pointed_pair,
    trivialize,
)
from moorecalc.errors import HypothesisError, StructureError
from moorecalc.hochschild import differential_oracle, solve_coboundary
from moorecalc.moore import GaugePair, MooreStructure, universal_even, universal_odd
from moorecalc.parsing import parse_derivation
from moorecalc.rings import QQ, IntegersMod, make_ring
from moorecalc.series import CommSeries, GradingContext, NcSeries

from conftest import ctx_for, gauge_jet, rand_deformation, rand_series

seeds = st.integers(0, 10**6)


def _even_jet_candidate(ctx, rng, order):
    """Even-case jet with random t-series coefficients, or None if invalid."""
    m = MooreStructure(ctx)
    coeffs = [Derivation.from_parts(ctx, A=rand_series(ctx, rng, density=0.3, order=4).extend(ctx.order),
                                    B=rand_series(ctx, rng, density=0.3, order=4).extend(ctx.order))
              for _ in range(order)]
    J = DeformationJet(m, coeffs)
    return J if jet_order_check(J) else None


def even_jet(ctx, rng, order):
    while True:
        J = _even_jet_candidate(ctx, rng, order)
        if J is not None:
            return J


# ------------------------------------------------------------ base changes


def test_push_out_identity():
    ctx = ctx_for("Q[x,y;M=2]", 1, 6)
    D = rand_deformation(ctx, random.Random(5))
    assert push_out(RingMap.identity(ctx.ring), D) == D


def test_push_out_universal_odd():
    uni = universal_odd(1, 3, truncation=2, order=6)
    E = make_ring("Q<e>")
    f = RingMap(uni.ctx.ring, E, {"w1": E.gen("e")})
    out = push_out(f, DeformationOverBase(uni))
    ctxE = GradingContext(E, 1, 6)
    e = E.element(E.gen("e"))
    assert out.structure == MooreStructure(ctxE, w=CommSeries.from_dict(ctxE, {2: e}))


def test_push_out_universal_even_to_square_zero():
    uni = universal_even(0, 4, truncation=2, order=4)
    Q = make_ring("Q<u1,u2,u3,u4>")
    f = RingMap(uni.ctx.ring, Q, {f"u{i}": Q.gen(f"u{i}") for i in range(1, 5)})
    out = push_out(f, DeformationOverBase(uni))
    ctx = GradingContext(Q, 0, 4)
    u = CommSeries.from_dict(ctx, {i: Q.element(Q.gen(f"u{i}")) for i in range(1, 5)})
    assert out.structure == MooreStructure(ctx, u=u)


def test_push_out_functorial():
    rng = random.Random(9)
    ctx = ctx_for("Q[x,y;M=2]", 0, 5)
    D = rand_deformation(ctx, rng)
    A = ctx.ring
    B = make_ring("Q[z;M=2]")
    C = make_ring("Q<e>")
    f = RingMap(A, B, {"x": B.gen("z"), "y": B.mul(B.gen("z"), B.gen("z"))})
    g = RingMap(B, C, {"z": C.gen("e")})
    assert push_out(g, push_out(f, D)) == push_out(g.compose(f), D)


def test_push_out_rejects_bad_maps():
    ctx = ctx_for("Q[x;M=2]", 0, 4)
    D = rand_deformation(ctx, random.Random(1))
    B = make_ring("Q<e>")
    with pytest.raises(StructureError):
        push_out(RingMap(ctx.ring, B, {"x": B.one}), D)
    with pytest.raises(StructureError):
        push_out(RingMap(B, ctx.ring, {}), D)


# ------------------------------------------------------------ pointed pairs


def test_pointed_conjugation_witness():
    L = make_ring("Q[x,y;M=4]")
    ctx = GradingContext(L, 0, 6)
    x, y = L.element(L.gen("x")), L.element(L.gen("y"))
    D = DeformationOverBase(MooreStructure(ctx, u=CommSeries.from_dict(ctx, {1: x})))
    p = GaugePair(CommSeries.zero(ctx), CommSeries.from_dict(ctx, {1: 1 + y}))
    out = pointed_conjugate(p, D)
    assert out.structure == MooreStructure(ctx, u=CommSeries.from_dict(ctx, {1: x + x * y}))
    assert out.undeformed == D.undeformed


def test_pointed_conjugate_identity_and_errors():
    ctx = ctx_for("Q<e>", 1, 6)
    D = rand_deformation(ctx, random.Random(2))
    assert pointed_conjugate(GaugePair.identity(ctx), D) == D
    bad = GaugePair(CommSeries.zero(ctx), CommSeries.from_dict(ctx, {1: 2}))
    with pytest.raises(StructureError, match="pointed"):
        pointed_conjugate(bad, D)


@given(seed=seeds, d=st.integers(0, 1), ring=st.sampled_from(["Q<e>", "Q<a,b>", "Z<e>"]))
@settings(max_examples=25, deadline=None)
def test_pointed_action_trivial_on_square_zero(seed, d, ring):
    rng = random.Random(seed)
    ctx = ctx_for(ring, d, 6)
    if ctx.odd and ctx.ring.inverse(ctx.ring.from_int(2)) is None:
        ctx = ctx_for("Q<e>", d, 6)
    c = classify_miniversal(rand_deformation(ctx, rng), check_uniqueness=False)
    D = c.conjugated
    p = random_pointed_pair(ctx, rng)
    assert pointed_conjugate(p, D) == D


def test_pointed_action_nontrivial_off_square_zero():
    ctx = ctx_for("Q[x,y;M=2]", 0, 4)
    D = DeformationOverBase(MooreStructure(ctx, u=CommSeries.from_dict(ctx, {1: ctx.ring.element(ctx.ring.gen("x"))})))
    assert not pointed_action_trivial(D, pointed_pairs(ctx, 2))


# ---------------------------------------------------------- classification


def test_classify_odd_example():
    E = make_ring("Q<e>")
    ctx = GradingContext(E, 1, 6)
    e = E.element(E.gen("e"))
    D = DeformationOverBase(MooreStructure(ctx, v=CommSeries.from_dict(ctx, {2: e}),
                                           w=CommSeries.from_dict(ctx, {2: e})))
    c = classify_miniversal(D)
    assert c.agrees and c.unique and c.infinitesimal
    assert c.gauge.G == CommSeries.from_dict(ctx, {1: -e / 2})
    assert c.f.to_dict()["w1"] == "e"
    assert c.used_generators == ["w1"]


def test_classify_even_example():
    ctx = ctx_for("Q[l;M=3]", 0, 5)
    lam = ctx.ring.element(ctx.ring.gen("l"))
    D = DeformationOverBase(MooreStructure(ctx, u=CommSeries.from_dict(ctx, {1: lam})))
    c = classify_miniversal(D)
    assert c.agrees and c.unique is None and not c.infinitesimal
    assert c.used_generators == ["u1"]
    assert c.gauge.G.is_zero() and c.gauge.F == CommSeries.t(ctx)


def test_classify_universal_is_identity():
    # order 7 so that the normal form is trusted through t^6 and sees w3
    uni = universal_odd(1, 3, truncation=2, order=7)
    c = classify_miniversal(DeformationOverBase(uni))
    assert c.agrees
    assert c.gauge.G.is_zero()
    assert all(v == k for k, v in c.f.to_dict().items())


def test_classify_errors():
    ctx = ctx_for("Q<e>", 1, 6)
    D = DeformationOverBase(MooreStructure(ctx, w=CommSeries.monomial(ctx, 2)))
    with pytest.raises(StructureError, match="trivial"):
        classify_miniversal(D)
    ctxZ = ctx_for("Z<e>", 1, 6)
    e = ctxZ.ring.element(ctxZ.ring.gen("e"))
    with pytest.raises(HypothesisError):
        classify_miniversal(DeformationOverBase(MooreStructure(ctxZ, w=CommSeries.from_dict(ctxZ, {2: e}))))


@given(seed=seeds, d=st.integers(0, 1), ring=st.sampled_from(["Q<e>", "Q<a,b>", "Q[x;M=2]", "Q[x,y;M=2]"]))
@settings(max_examples=25, deadline=None)
def test_classify_round_trip(seed, d, ring):
    rng = random.Random(seed)
    ctx = ctx_for(ring, d, 6)
    D = rand_deformation(ctx, rng)
    c = classify_miniversal(D)
    assert c.agrees
    assert c.pushed.structure == pointed_conjugate(c.gauge, D).structure
    if c.infinitesimal:
        assert c.unique


# --------------------------------------------------------------- jets


def test_jet_order_check_examples():
    ctx = GradingContext(QQ, 0, 8)
    m0 = MooreStructure(ctx)
    J = DeformationJet(m0, [parse_derivation("t^2 dtau", ctx)])
    assert jet_order_check(J).holds
    assert jet_order_check(J.padded(4)).holds
    assert jet_order_check(DeformationJet(m0, [None, None, None])).holds
    odd = GradingContext(QQ, 1, 8)
    bad = DeformationJet(MooreStructure(odd), [parse_derivation("t dtau", odd)])
    check = jet_order_check(bad)
    assert not check.holds and check.failing_k == 1


def test_jet_strict_degrees():
    ctx = GradingContext(QQ, 1, 8, strict=True)
    # |s| = 4 and |t| = -3: s m_1 has degree -1 when m_1 has degree -5
    with pytest.raises(StructureError, match="degree"):
        DeformationJet(MooreStructure(ctx), [parse_derivation("t dt", ctx)])
    with pytest.raises(StructureError, match="even degree"):
        DeformationJet(MooreStructure(ctx), [], s_degree=3)


def test_obstruction_examples():
    ctx = GradingContext(QQ, 0, 8)
    J = DeformationJet(MooreStructure(ctx), [parse_derivation("t^2 dt", ctx)])
    obs = obstruction(J)
    assert obs == parse_derivation("2t^3 dt", ctx)
    assert not bracket(obs, J.m)
    assert not extend_jet(J).extendible
    odd = GradingContext(QQ, 1, 8)
    J1 = DeformationJet(MooreStructure(odd), [parse_derivation("t^2 dt", odd)])
    assert obstruction(J1).is_zero()
    bad = DeformationJet(MooreStructure(odd), [parse_derivation("t dtau", odd)])
    with pytest.raises(StructureError):
        obstruction(bad)


@given(seed=seeds)
@settings(max_examples=20, deadline=None)
def test_extendibility_matches_coboundary(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 0, 8)
    J = even_jet(ctx, rng, rng.randint(1, 3))
    obs = obstruction(J)
    assert not bracket(obs, J.m)
    ext = extend_jet(J)
    sol = solve_coboundary(obs, J.structure)
    assert ext.extendible == sol.is_coboundary
    if ext.extendible:
        assert jet_order_check(ext.jet).holds and ext.jet.order == J.order + 1


@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_odd_jet_dual_route(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 1, 8)
    m = MooreStructure(ctx, w=CommSeries.monomial(ctx, 2))
    J = gauge_jet(m, 3, rng)
    assert jet_order_check(J).holds
    assert is_square_zero(J.realize()).holds
    # lifting the jet one order without m4 must agree on both routes as well
    longer = J.padded(4)
    assert jet_order_check(longer).holds == is_square_zero(longer.realize()).holds


# ------------------------------------------------------------- automorphisms


def test_extend_automorphism_product_formula():
    ctx = GradingContext(QQ, 0, 8)
    psi1 = AutomorphismJet.from_components(ctx, [(NcSeries.word(ctx, "tt"), None)])
    psi2 = extend_automorphism(psi1, {}, 2)
    assert product_formula(psi2.components(), "TT", 2) == CommSeries.monomial(ctx, 4).to_nc()
    assert psi2.check_multiplicative()
    ident = extend_automorphism(AutomorphismJet.identity(ctx, 1), {}, 3)
    for k in range(1, 4):
        assert ident.component(k).is_zero()
    assert psi2.unit_preserved


def test_integrate_examples():
    ctx = GradingContext(QQ, 0, 8)
    m0 = MooreStructure(ctx)
    psi = integrate_infinitesimal(parse_derivation("t dt", ctx), 1, 4, m0)
    from fractions import Fraction
    for k, c in enumerate([1, 1, Fraction(1, 2), Fraction(1, 6), Fraction(1, 24)]):
        img = psi.component(k).image("t") if k else NcSeries.t(ctx)
        assert img == NcSeries.t(ctx).scale(QQ.coerce(c))
    zero = integrate_infinitesimal(Derivation.zero(ctx), 2, 4, m0)
    assert all(zero.component(k).is_zero() for k in range(1, 5))
    F2 = GradingContext(IntegersMod(2), 0, 8)
    with pytest.raises(HypothesisError, match="requires rationals"):
        integrate_infinitesimal(parse_derivation("t dt", F2), 1, 3, MooreStructure(F2))


@given(seed=seeds)
@settings(max_examples=10, deadline=None)
def test_integrated_jets_commute(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 0, 8)
    m = MooreStructure(ctx, u=CommSeries.monomial(ctx, 2))
    # even cocycles: A t^(2i) dtau parts are even; keep only cocycles
    phi = Derivation.from_parts(ctx, B=rand_series(ctx, rng, "odd", density=0.5, order=3).extend(8))
    if bracket(phi, m.derivation):
        phi = Derivation.zero(ctx)
    psi = integrate_infinitesimal(phi, 2, 6, m)
    assert psi.check_multiplicative()


# --------------------------------------------------------------- trivialize


def test_trivialize_trivial_jet():
    ctx = GradingContext(QQ, 1, 8)
    J = DeformationJet(MooreStructure(ctx), [None, None])
    r = trivialize(J, 4)
    assert r.trivial and r.steps == []


def test_trivialize_coboundary_in_one_step():
    ctx = GradingContext(QQ, 1, 10)
    m0 = MooreStructure(ctx)
    eta = parse_derivation("(t + 3t^3) dtau", ctx)
    J = DeformationJet(m0, [differential_oracle(eta, m0)])
    r = trivialize(J, 1)
    assert r.trivial and len(r.steps) == 1
    k, xi = r.steps[0]
    assert k == 1 and xi == -eta


def test_trivialize_char2_stuck_and_certificate():
    F2 = IntegersMod(2)
    ctx = GradingContext(F2, 0, 8)
    J = DeformationJet(MooreStructure(ctx), [None, parse_derivation("t^2 dtau", ctx)])
    assert jet_order_check(J).holds
    r = trivialize(J, 4)
    assert not r.trivial and r.stuck_k == 2 and r.stuck_class
    S = make_ring("F2[s;M=4]")
    cs = GradingContext(S, 0, 8)
    s = S.element(S.gen("s"))
    pair = GaugePair(CommSeries.from_dict(cs, {1: s}), CommSeries.t(cs))
    out = pointed_conjugate(pair, DeformationOverBase(MooreStructure(cs)))
    assert out.structure == MooreStructure(cs, u=CommSeries.from_dict(cs, {2: s * s}))


@given(seed=seeds)
@settings(max_examples=10, deadline=None)
def test_trivialize_rigid_ambient(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 1, 8)
    m = MooreStructure(ctx, w=CommSeries.monomial(ctx, 2))
    r = trivialize(gauge_jet(m, 4, rng), 4)
    assert r.trivial
    assert all(r.final.coefficient(k).is_zero() for k in range(1, 5))


def test_trivialize_requires_normal_form():
    ctx = GradingContext(QQ, 1, 8)
    m = MooreStructure(ctx, v=CommSeries.monomial(ctx, 2))
    with pytest.raises(StructureError):
        trivialize(DeformationJet(m, [None]), 2)


# -------------------------------------------------------- equivalent jets


def test_equivalent_jets_identity():
    ctx = GradingContext(QQ, 0, 8)
    J = DeformationJet(MooreStructure(ctx), [parse_derivation("t^2 dt", ctx)])
    res = obstructions_cohomologous_check(J, J, AutomorphismJet.identity(ctx, 1))
    assert res.cohomologous and res.identity_holds and res.xi.is_zero()


@given(seed=seeds)
@settings(max_examples=15, deadline=None)
def test_equivalent_jets_random(seed):
    rng = random.Random(seed)
    ctx = GradingContext(QQ, 0, 8)
    J1 = even_jet(ctx, rng, rng.randint(1, 2))
    n = J1.order
    # tau is odd and t even here, so a parity-preserving jet only moves t
    comps = [(None, rand_series(ctx, rng, density=0.4, order=3).extend(8).to_nc()) for _ in range(n + 1)]
    psi = AutomorphismJet.from_components(ctx, comps)
    J2 = conjugate_jet(psi, J1, n)
    assert jet_order_check(J2).holds
    res = obstructions_cohomologous_check(J1, J2, psi)
    assert res.identity_holds and res.cohomologous


def test_equivalent_jets_rejects_inequivalent():
    ctx = GradingContext(QQ, 0, 8)
    J1 = DeformationJet(MooreStructure(ctx), [parse_derivation("t^2 dt", ctx)])
    J2 = DeformationJet(MooreStructure(ctx), [parse_derivation("t^2 dtau", ctx)])
    with pytest.raises(StructureError, match="not equivalent"):
        obstructions_cohomologous_check(J1, J2, AutomorphismJet.identity(ctx, 1))
