import random

import pytest

from moorecalc.calculus import Derivation
from moorecalc.moore import GaugePair, MooreStructure
from moorecalc.rings import QQ, ZZ, IntegersMod, make_ring
from moorecalc.series import CommSeries, GradingContext, NcSeries

RINGS = {"Q": QQ, "Z": ZZ, "Z/6": IntegersMod(6)}

# lines collected by test_acceptance, echoed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return random.Random(1234)


def rand_coeff(ring, rng, size=3):
    return ring.random(rng, size)


def rand_series(ctx, rng, parity=None, start=1, density=0.6, size=3, order=None):
    """Random CommSeries with zero constant term; parity 'even'/'odd' restricts powers."""
    ring = ctx.ring
    order = ctx.order if order is None else order
    coeffs = [ring.zero] * (order + 1)
    for i in range(start, order + 1):
        if parity == "even" and i % 2:
            continue
        if parity == "odd" and not i % 2:
            continue
        if rng.random() < density:
            coeffs[i] = ring.random(rng, size)
    return CommSeries(ctx, coeffs)


def rand_nc(ctx, rng, max_len=3, density=0.3, size=3, constant=False):
    ring = ctx.ring
    terms = {}
    for n in range(0 if constant else 1, max_len + 1):
        for k in range(2 ** n):
            if rng.random() < density:
                word = "".join("T" if (k >> j) & 1 else "t" for j in range(n))
                terms[word] = ring.random(rng, size)
    return NcSeries(ctx, terms)


def rand_homogeneous_nc(ctx, rng, parity, max_len=3, density=0.4):
    s = rand_nc(ctx, rng, max_len, density)
    return s.parity_part(parity)


def rand_derivation(ctx, rng, parity=None, max_len=3, normalised=False, density=0.4):
    """Random derivation; ``parity`` selects the homogeneous part."""
    if normalised:
        xi = Derivation.from_parts(ctx, A=rand_series(ctx, rng, density=density, order=max_len),
                                   B=rand_series(ctx, rng, density=density, order=max_len))
    else:
        xi = Derivation(ctx, rand_nc(ctx, rng, max_len, density), rand_nc(ctx, rng, max_len, density))
    if parity is None:
        return xi
    return xi.homogeneous_parts().get(parity, Derivation.zero(ctx))


def rand_structure(ctx, rng, density=0.6):
    if ctx.odd:
        return MooreStructure(ctx, v=rand_series(ctx, rng, "even", density=density),
                              w=rand_series(ctx, rng, "even", density=density))
    return MooreStructure(ctx, u=rand_series(ctx, rng, density=density))


def rand_pair(ctx, rng, density=0.5):
    """Random gauge pair; even-case pairs have G = 0 so they preserve parity."""
    ring = ctx.ring
    parity = "odd" if ctx.odd else None
    G = rand_series(ctx, rng, parity, density=density) if ctx.odd else CommSeries.zero(ctx)
    F = rand_series(ctx, rng, parity, start=2 if not ctx.odd else 3, density=density)
    units = [u for u in (1, -1, 2, 3, 5) if ring.inverse(ring.from_int(u)) is not None]
    F = F + CommSeries.monomial(ctx, 1, rng.choice(units))
    return GaugePair(G, F)


def ctx_for(ring_spec, d, order=8, strict=False):
    ring = RINGS.get(ring_spec) or make_ring(ring_spec)
    return GradingContext(ring, d, order, strict)


def rand_nil_series(ctx, rng, parity=None, size=2, density=0.5, start=1):
    """Series whose coefficients lie in the augmentation ideal of a polynomial base."""
    ring = ctx.ring
    coeffs = [ring.zero] * (ctx.order + 1)
    for i in range(start, ctx.order + 1):
        if (parity == "even" and i % 2) or (parity == "odd" and not i % 2):
            continue
        if rng.random() < density:
            coeffs[i] = ring.random_nilpotent(rng, size, 0.5)
    return CommSeries(ctx, coeffs)


def rand_deformation(ctx, rng, density=0.5):
    """Random deformation of the trivial structure over a polynomial base."""
    from moorecalc.deform import DeformationOverBase

    if ctx.odd:
        m = MooreStructure(ctx, v=rand_nil_series(ctx, rng, "even", density=density),
                           w=rand_nil_series(ctx, rng, "even", density=density))
    else:
        m = MooreStructure(ctx, u=rand_nil_series(ctx, rng, density=density))
    return DeformationOverBase(m)


def gauge_jet(m, order, rng, density=0.3):
    """Jet over ``m`` obtained by conjugating with a random pair over R[s]/(s^(order+1))."""
    from moorecalc.deform import DeformationJet
    from moorecalc.moore import act

    J0 = DeformationJet(m, [None] * order)
    ctxL = J0.jet_context()
    L = ctxL.ring
    G = [L.zero] * (ctxL.order + 1)
    F = [L.zero] * (ctxL.order + 1)
    F[1] = L.one
    step = 2 if m.odd else 1
    for i in range(1, ctxL.order + 1, step):
        if m.odd:
            G[i] = L.random_nilpotent(rng, 2, density)
        F[i] = L.add(F[i], L.random_nilpotent(rng, 2, density))
    pair = GaugePair(CommSeries(ctxL, G), CommSeries(ctxL, F))
    mL = m.map_coefficients(lambda c: L.embed(c, m.ctx.ring), ctxL)
    M = act(pair, mL).derivation
    return DeformationJet.from_realized(m, M, m.ctx, order)
