"""Deformations of Moore structures.

Two settings share this module:

* deformations over an augmented base ``eps: Lambda -> R`` (push-outs,
  pointed conjugation, miniversal classification);
* one-parameter jets ``m + s m_1 + ... + s^n m_n``.  A jet is realised as a
  single derivation over ``R[s]/(s^(n+1))`` and its structure equations,
  obstructions and gauge steps are read off coefficient by coefficient.

Maps of base rings are given on generators; the base ``R`` is always sent to
itself by the identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from math import factorial

from .calculus import (
    Derivation,
    Endomorphism,
    apply_derivation,
    bracket,
    conjugate,
    invert_endo,
)
from .errors import HypothesisError, MooreError, StructureError
from .hochschild import solve_coboundary
from .moore import (
    GaugePair,
    MooreStructure,
    act,
    normal_form,
    trivial_derivation,
    universal_even,
    universal_odd,
)
from .rings import PolynomialRing, Ring, polynomial
from .series import TAU, T, CommSeries, GradingContext, NcSeries

__all__ = [
    "RingMap",
    "DeformationOverBase",
    "push_out",
    "pointed_conjugate",
    "pointed_pairs",
    "random_pointed_pair",
    "pointed_action_trivial",
    "Classification",
    "classify_miniversal",
    "jet_ring",
    "default_s_degree",
    "DeformationJet",
    "JetCheck",
    "jet_order_check",
    "obstruction",
    "is_cocycle",
    "ExtensionResult",
    "extend_jet",
    "AutomorphismJet",
    "product_formula",
    "extend_automorphism",
    "integrate_infinitesimal",
    "conjugate_jet",
    "TrivializeResult",
    "trivialize",
    "ObstructionComparison",
    "obstructions_cohomologous_check",
]

LETTERS = (TAU, T)


# ------------------------------------------------------------------ base maps


def _gen_raws(ring: Ring):
    if isinstance(ring, PolynomialRing):
        return {n: ring.gen(n) for n in ring.names}
    return {}


class RingMap:
    """Unital map of augmented rings ``source -> target`` given on generators.

    Only the top-level generators of ``source`` are moved; coefficients from
    the base ring are embedded into ``target`` unchanged.
    """

    def __init__(self, source: Ring, target: Ring, images: dict | None = None):
        self.source = source
        self.target = target
        names = source.names if isinstance(source, PolynomialRing) else ()
        images = dict(images or {})
        unknown = set(images) - set(names)
        if unknown:
            raise StructureError(f"no generators {sorted(unknown)} in {source}")
        self.images = {}
        for n in names:
            img = images.get(n, target.zero)
            if hasattr(img, "raw") and hasattr(img, "ring"):
                img = target.coerce(img)
            elif isinstance(img, (int,)):
                img = target.from_int(img)
            self.images[n] = img

    @classmethod
    def identity(cls, ring: Ring):
        return cls(ring, ring, _gen_raws(ring))

    def _embed_base(self, c):
        src = self.source.base if isinstance(self.source, PolynomialRing) else self.source
        return self.target.embed(c, src)

    def apply(self, raw):
        src, tgt = self.source, self.target
        if not isinstance(src, PolynomialRing):
            return tgt.embed(raw, src)
        out = tgt.zero
        imgs = [self.images[n] for n in src.names]
        for mono, c in raw:
            term = self._embed_base(c)
            for img, e in zip(imgs, mono):
                if e:
                    term = tgt.mul(term, tgt.power(img, e))
            out = tgt.add(out, term)
        return out

    __call__ = apply

    def check_augmented(self) -> bool:
        """Generator images lie in the augmentation ideal of the target."""
        tgt = self.target
        src_base = self.source.base if isinstance(self.source, PolynomialRing) else self.source
        if tgt.base != src_base and tgt != src_base:
            return False
        return all(tgt.base.is_zero(tgt.augment(img)[0]) for img in self.images.values())

    def check_well_defined(self) -> bool:
        """Monomials killed by the source truncation must map to zero."""
        src = self.source
        if not isinstance(src, PolynomialRing):
            return True
        k = len(src.names)
        top = src.truncation + 1
        tgt = self.target
        imgs = [self.images[n] for n in src.names]
        for mono in product(range(top + 1), repeat=k):
            if sum(mono) != top:
                continue
            val = tgt.one
            for img, e in zip(imgs, mono):
                val = tgt.mul(val, tgt.power(img, e))
            if not tgt.is_zero(val):
                return False
        return True

    def compose(self, first: "RingMap") -> "RingMap":
        """``self o first``."""
        if first.target != self.source:
            raise StructureError("ring maps do not compose: target/source mismatch")
        return RingMap(first.source, self.target, {n: self.apply(img) for n, img in first.images.items()})

    def to_dict(self):
        return {n: self.target.format(img) for n, img in sorted(self.images.items())}

    def __str__(self):
        body = ", ".join(f"{n} -> {v}" for n, v in self.to_dict().items())
        return f"{self.source} -> {self.target}: {{{body}}}"


# ---------------------------------------------------- deformations over a base


class DeformationOverBase:
    """A Moore structure over ``Lambda`` seen as a deformation of its ``eps``-image."""

    def __init__(self, structure: MooreStructure, undeformed: MooreStructure | None = None):
        self.structure = structure
        ring = structure.ctx.ring
        self.base_ring = ring
        base = ring.base
        ctx0 = structure.ctx.over(base)
        self.undeformed = structure.map_coefficients(lambda c: ring.augment(c)[0], ctx0)
        if undeformed is not None and not (self.undeformed == undeformed):
            raise StructureError("structure does not reduce to the given undeformed structure")

    @property
    def ctx(self) -> GradingContext:
        return self.structure.ctx

    @property
    def order(self) -> int:
        return self.structure.order

    @property
    def is_infinitesimal(self) -> bool:
        """``(ker eps)^2 = 0``."""
        ring = self.base_ring
        if not isinstance(ring, PolynomialRing):
            return True
        return ring.square_zero or ring.truncation <= 1

    def __eq__(self, other):
        if not isinstance(other, DeformationOverBase):
            return NotImplemented
        return self.structure == other.structure

    __hash__ = None

    def __str__(self):
        return f"{self.structure} over {self.base_ring}"


def push_out(f: RingMap, D: DeformationOverBase) -> DeformationOverBase:
    """Apply ``f`` to every coefficient of the deformation."""
    if f.source != D.base_ring:
        raise StructureError(f"map source {f.source} is not the base {D.base_ring}")
    if not f.check_augmented():
        raise StructureError("base map is not compatible with the augmentations")
    if not f.check_well_defined():
        raise StructureError("base map does not respect the source truncation")
    ctx = D.ctx.over(f.target)
    return DeformationOverBase(D.structure.map_coefficients(f.apply, ctx), D.undeformed)


def pointed_conjugate(p: GaugePair, D: DeformationOverBase) -> DeformationOverBase:
    """Conjugate by a pair that reduces to the identity under ``eps``."""
    if not p.is_pointed():
        raise StructureError("pair is not pointed: its eps-image is not the identity")
    return DeformationOverBase(act(p, D.structure), D.undeformed)


def _nilpotent_basis(ring: Ring):
    """Monomial basis of the augmentation ideal (top-level generators)."""
    if not isinstance(ring, PolynomialRing):
        return []
    one = ring.base.one
    zero_mono = (0,) * len(ring.names)
    return [((m, one),) for m in ring.monomials() if m != zero_mono]


def pointed_pairs(ctx: GradingContext, degree: int | None = None):
    """Pairs ``(0, t + e t^i)`` for ``e`` a basis monomial of ``ker eps``.

    In the odd case only odd ``i`` occur.  ``degree`` bounds ``i``.
    """
    degree = ctx.order if degree is None else degree
    ring = ctx.ring
    step = 2 if ctx.odd else 1
    out = []
    for e in _nilpotent_basis(ring):
        for i in range(1, degree + 1, step):
            coeffs = [ring.zero] * (ctx.order + 1)
            coeffs[1] = ring.one
            coeffs[i] = ring.add(coeffs[i], e)
            out.append(GaugePair(CommSeries.zero(ctx), CommSeries(ctx, coeffs)))
    return out


def random_pointed_pair(ctx: GradingContext, rng, with_G=False, size=3, density=0.4):
    """Random pointed pair; ``G = 0`` unless ``with_G``."""
    ring = ctx.ring
    step = 2 if ctx.odd else 1

    def nil():
        if isinstance(ring, PolynomialRing):
            return ring.random_nilpotent(rng, size, density)
        return ring.zero

    F = [ring.zero] * (ctx.order + 1)
    F[1] = ring.one
    G = [ring.zero] * (ctx.order + 1)
    for i in range(1, ctx.order + 1, step):
        F[i] = ring.add(F[i], nil())
        if with_G:
            G[i] = nil()
    return GaugePair(CommSeries(ctx, G), CommSeries(ctx, F))


def pointed_action_trivial(D: DeformationOverBase, pairs=None) -> bool:
    """True when every given pointed pair fixes ``D`` exactly."""
    if pairs is None:
        pairs = pointed_pairs(D.ctx, D.order)
    return all(pointed_conjugate(p, D) == D for p in pairs)


@dataclass
class Classification:
    """Outcome of :func:`classify_miniversal`."""

    gauge: GaugePair
    f: RingMap
    universal: MooreStructure
    pushed: DeformationOverBase
    conjugated: DeformationOverBase
    agrees: bool
    infinitesimal: bool
    unique: bool | None
    used_generators: list = field(default_factory=list)

    def to_dict(self):
        return {
            "gauge": {"G": str(self.gauge.G), "F": str(self.gauge.F)},
            "f": self.f.to_dict(),
            "used_generators": list(self.used_generators),
            "agrees": self.agrees,
            "infinitesimal": self.infinitesimal,
            "unique": self.unique,
            "normal_form": str(self.conjugated.structure),
        }


def classify_miniversal(D: DeformationOverBase, check_uniqueness: bool = True) -> Classification:
    """Gauge and classifying map from the universal structure for a deformation of ``m0``.

    Odd case: the gauge ``(-v/2t, t)`` brings ``D`` to ``m0 + u dtau`` and
    ``f`` sends ``w_i`` to the ``t^(2i)`` coefficient of ``u``.  Even case: the
    gauge is the identity and ``f`` sends ``u_i`` to the ``t^i`` coefficient.
    For infinitesimal bases uniqueness is checked by confirming that the
    pointed pair basis acts trivially on the normal form.
    """
    if not D.undeformed.is_trivial():
        raise StructureError("classification needs a deformation of the trivial structure")
    ctx = D.ctx
    ring = ctx.ring
    base = ring.base
    trunc = ring.truncation if isinstance(ring, PolynomialRing) else 1
    order = D.order
    if ctx.odd:
        if ring.inverse(ring.from_int(2)) is None:
            raise HypothesisError(f"odd classification needs 2 invertible in {ring}")
        nf = normal_form(D.structure)
        gauge, u = nf.pair, nf.u
        K = max(1, order // 2)
        uni = universal_odd(ctx.d, K, truncation=max(trunc, 1), order=order, base=base)
        powers = {f"w{i}": 2 * i for i in range(1, K + 1)}
    else:
        gauge = GaugePair.identity(ctx)
        u = D.structure.u
        K = max(1, order)
        uni = universal_even(ctx.d, K, truncation=max(trunc, 1), order=order, base=base)
        powers = {f"u{i}": i for i in range(1, K + 1)}
    images = {n: u.raw(k) for n, k in powers.items()}
    f = RingMap(uni.ctx.ring, ring, images)
    conjugated = pointed_conjugate(gauge, D)
    pushed = push_out(f, DeformationOverBase(uni))
    agrees = pushed.structure == conjugated.structure
    used = [n for n, img in images.items() if not ring.is_zero(img)]
    unique = None
    if D.is_infinitesimal and check_uniqueness:
        unique = pointed_action_trivial(conjugated)
    return Classification(gauge, f, uni, pushed, conjugated, agrees, D.is_infinitesimal,
                          unique, used)


# ----------------------------------------------------------------------- jets


def default_s_degree(d: int) -> int:
    """``d`` for even structures, ``2d + 2`` for odd ones."""
    return 2 * d + 2 if d % 2 else d


def jet_ring(ring: Ring, order: int, s_degree: int = 0, name: str = "s") -> PolynomialRing:
    """``ring[s]/(s^(order+1))``."""
    while name in ring.generator_names:
        name += "_"
    return polynomial(ring, (name,), (s_degree,), order)


def _power_of_s(L: PolynomialRing, k: int):
    return ((((k,), L.base_ring.one),) if k <= L.truncation else ())


def _lift_series(a: NcSeries, ctxL: GradingContext, k: int = 0) -> NcSeries:
    L = ctxL.ring
    sk = _power_of_s(L, k)
    R = L.base_ring
    return a.map_coefficients(lambda c: L.mul(L.embed(c, R), sk), ctxL)


def _coeff_series(a: NcSeries, ctxR: GradingContext, k: int) -> NcSeries:
    L = a.ctx.ring
    return a.map_coefficients(lambda c: L.coefficient(c, (k,)), ctxR)


def _lift_derivation(xi: Derivation, ctxL, k=0) -> Derivation:
    return Derivation(ctxL, _lift_series(xi.tau_image, ctxL, k), _lift_series(xi.t_image, ctxL, k))


def _coeff_derivation(xi: Derivation, ctxR, k) -> Derivation:
    return Derivation(ctxR, _coeff_series(xi.tau_image, ctxR, k), _coeff_series(xi.t_image, ctxR, k))


def _vanishes(a: NcSeries) -> bool:
    return not a.terms


class DeformationJet:
    """``m + s m_1 + ... + s^n m_n`` with normalised coefficients ``m_i``.

    ``ambient`` is a :class:`MooreStructure` (needed for coboundary solving)
    or a bare derivation.  ``None`` entries in ``coefficients`` mean zero.
    """

    def __init__(self, ambient, coefficients, s_degree: int | None = None):
        if isinstance(ambient, MooreStructure):
            self.structure = ambient
            self.m = ambient.derivation
        else:
            self.structure = None
            self.m = ambient
        ctx = self.m.ctx
        self.ctx = ctx
        self.s_degree = default_s_degree(ctx.d) if s_degree is None else s_degree
        if self.s_degree % 2:
            raise StructureError("the jet parameter must have even degree")
        coeffs = []
        for i, c in enumerate(coefficients, 1):
            if c is None:
                c = Derivation.zero(ctx)
            if c.ctx is not ctx:
                ctx.check_same(c.ctx)
            if not c.is_normalised():
                raise StructureError(f"m{i} is not a normalised derivation")
            if ctx.strict:
                bad = c.degrees() - {-1 - i * self.s_degree}
                if bad:
                    raise StructureError(
                        f"m{i} must have degree {-1 - i * self.s_degree}, found {sorted(bad)}"
                    )
            coeffs.append(c)
        self.coefficients = coeffs

    @property
    def order(self) -> int:
        return len(self.coefficients)

    def coefficient(self, i: int) -> Derivation:
        if i == 0:
            return self.m
        if i <= self.order:
            return self.coefficients[i - 1]
        return Derivation.zero(self.ctx)

    def padded(self, order: int) -> "DeformationJet":
        coeffs = [self.coefficient(i) for i in range(1, order + 1)]
        return DeformationJet(self.structure or self.m, coeffs, self.s_degree)

    def jet_context(self, order: int | None = None) -> GradingContext:
        order = self.order if order is None else order
        return self.ctx.over(jet_ring(self.ctx.ring, order, self.s_degree))

    def realize(self, order: int | None = None) -> Derivation:
        """The single derivation ``sum s^i m_i`` over ``R[s]/(s^(order+1))``."""
        order = self.order if order is None else order
        ctxL = self.jet_context(order)
        total = _lift_derivation(self.m, ctxL)
        for i in range(1, order + 1):
            c = self.coefficient(i)
            if not c.is_zero():
                total = total + _lift_derivation(c, ctxL, i)
        return total

    @classmethod
    def from_realized(cls, ambient, M: Derivation, ctxR, order: int, s_degree=None):
        coeffs = [_coeff_derivation(M, ctxR, i) for i in range(1, order + 1)]
        return cls(ambient, coeffs, s_degree)

    def to_dict(self):
        return {
            "s_degree": self.s_degree,
            "order": self.order,
            "coefficients": [str(c) for c in self.coefficients],
        }

    def __str__(self):
        parts = [f"m{i}: {c}" for i, c in enumerate(self.coefficients, 1) if not c.is_zero()]
        return "; ".join(parts) if parts else "0"


@dataclass
class JetCheck:
    holds: bool
    failing_k: int | None = None
    residue: Derivation | None = None

    def __bool__(self):
        return self.holds


def _structure_sum(J: DeformationJet, k: int, include_cross: bool) -> Derivation:
    """Generator values of ``sum_{i+j=k, i,j>0} m_i m_j`` (+ ``[m_k, m]``)."""
    ctx = J.ctx
    imgs = []
    for x in LETTERS:
        acc = NcSeries.zero(ctx)
        for i in range(1, k):
            mi, mj = J.coefficient(i), J.coefficient(k - i)
            if mi.is_zero() or mj.is_zero():
                continue
            acc = acc + apply_derivation(mi, mj.image(x))
        imgs.append(acc)
    total = Derivation(ctx, *imgs)
    if include_cross:
        mk = J.coefficient(k)
        if not mk.is_zero():
            total = total + bracket(mk, J.m)
    return total


def jet_order_check(J: DeformationJet) -> JetCheck:
    """Structure equations ``sum_{i+j=k} m_i m_j + [m_k, m] = 0`` for ``k <= n``.

    The cross term uses the graded bracket, so for odd coefficients this is
    exactly ``m_s^2 = 0`` over ``R[s]/(s^(n+1))``.
    """
    for k in range(1, J.order + 1):
        E = _structure_sum(J, k, True)
        if not (_vanishes(E.tau_image) and _vanishes(E.t_image)):
            return JetCheck(False, k, E)
    return JetCheck(True)


def is_cocycle(xi: Derivation, m: Derivation) -> bool:
    b = bracket(xi, m)
    return _vanishes(b.tau_image) and _vanishes(b.t_image)


def obstruction(J: DeformationJet) -> Derivation:
    """``Obs = sum_{i+j=n+1} m_i m_j`` on generators, checked to be a cocycle."""
    check = jet_order_check(J)
    if not check:
        raise StructureError(f"jet fails its structure equation at k={check.failing_k}")
    obs = _structure_sum(J, J.order + 1, False)
    if not obs.is_normalised():
        raise MooreError("obstruction is not a normalised derivation")
    if not is_cocycle(obs, J.m):
        raise MooreError("obstruction failed the cocycle check")
    return obs


@dataclass
class ExtensionResult:
    extendible: bool
    obstruction: Derivation
    jet: DeformationJet | None
    residue: Derivation | None

    def __bool__(self):
        return self.extendible


def extend_jet(J: DeformationJet) -> ExtensionResult:
    """Extend by ``m_(n+1) = -eta`` where ``[eta, m] = Obs``, if such ``eta`` exists."""
    if J.structure is None:
        raise StructureError("extending a jet needs a Moore structure as ambient")
    obs = obstruction(J)
    if obs.is_zero():
        new = DeformationJet(J.structure, J.coefficients + [Derivation.zero(J.ctx)], J.s_degree)
        return ExtensionResult(True, obs, new, None)
    sol = solve_coboundary(obs, J.structure, check_cocycle=False)
    if not sol:
        return ExtensionResult(False, obs, None, sol.residue)
    new = DeformationJet(J.structure, J.coefficients + [-sol.preimage], J.s_degree)
    check = jet_order_check(new)
    if not check:
        raise MooreError(f"extended jet fails its structure equation at k={check.failing_k}")
    return ExtensionResult(True, obs, new, None)


# ---------------------------------------------------------- automorphism jets


class AutomorphismJet:
    """``phi_s = 1 + s phi_1 + ...`` realised as an endomorphism over ``R[s]/(s^(n+1))``."""

    def __init__(self, endo: Endomorphism, ctxR: GradingContext, s_degree: int = 0):
        L = endo.ctx.ring
        if not isinstance(L, PolynomialRing) or len(L.names) != 1:
            raise StructureError("automorphism jets live over R[s]/(s^(n+1))")
        self.endo = endo
        self.ctxR = ctxR
        self.s_degree = s_degree
        self.order = L.truncation
        ident = Endomorphism.identity(ctxR)
        base = self.component(0)
        if not (base == ident):
            raise StructureError("setting s = 0 must give the identity")
        one = NcSeries.one(endo.ctx)
        self.unit_preserved = endo(one) == one

    @classmethod
    def identity(cls, ctxR, order: int, s_degree: int = 0):
        ctxL = ctxR.over(jet_ring(ctxR.ring, order, s_degree))
        return cls(Endomorphism.identity(ctxL), ctxR, s_degree)

    @classmethod
    def from_components(cls, ctxR, components, s_degree: int = 0):
        """``components[k-1] = (phi_k(tau), phi_k(t))`` as series over ``R``."""
        order = len(components)
        ctxL = ctxR.over(jet_ring(ctxR.ring, order, s_degree))
        imgs = [NcSeries.tau(ctxL), NcSeries.t(ctxL)]
        for k, pair in enumerate(components, 1):
            for idx, a in enumerate(pair):
                if a is None:
                    continue
                if a.has_constant():
                    raise StructureError(f"phi_{k} images must have zero constant term")
                imgs[idx] = imgs[idx] + _lift_series(a, ctxL, k)
        return cls(Endomorphism(ctxL, *imgs), ctxR, s_degree)

    @property
    def ctx(self):
        return self.endo.ctx

    def component(self, k: int) -> Endomorphism:
        """``phi_k`` on generators (an additive map for ``k >= 1``)."""
        imgs = [_coeff_series(self.endo.image(x), self.ctxR, k) for x in LETTERS]
        if k == 0:
            return Endomorphism(self.ctxR, *imgs)
        return _GeneratorImages(self.ctxR, *imgs)

    def components(self):
        return [self.component(k) for k in range(self.order + 1)]

    def check_multiplicative(self, word_length: int = 3) -> bool:
        """Product formula against the realised endomorphism on all short words."""
        comps = self.components()
        L = self.ctx.ring
        for n in range(1, word_length + 1):
            for letters in product(LETTERS, repeat=n):
                word = "".join(letters)
                img = self.endo(NcSeries.word(self.ctx, word))
                for k in range(self.order + 1):
                    expected = product_formula(comps, word, k)
                    got = _coeff_series(img, self.ctxR, k)
                    if not (got == expected):
                        return False
        return True

    def inverse(self) -> "AutomorphismJet":
        return AutomorphismJet(invert_endo(self.endo), self.ctxR, self.s_degree)

    def lifted(self, order: int) -> "AutomorphismJet":
        """The same jet with zero components up to ``order``."""
        comps = []
        for k in range(1, order + 1):
            if k <= self.order:
                c = self.component(k)
                comps.append((c.tau_image, c.t_image))
            else:
                comps.append((None, None))
        return AutomorphismJet.from_components(self.ctxR, comps, self.s_degree)

    def to_dict(self):
        out = {"s_degree": self.s_degree, "order": self.order, "components": []}
        for k in range(1, self.order + 1):
            c = self.component(k)
            out["components"].append({"tau": str(c.tau_image), "t": str(c.t_image)})
        return out

    def __str__(self):
        return str(self.endo)


class _GeneratorImages:
    """Generator images of a non-multiplicative component ``phi_k``."""

    __slots__ = ("ctx", "tau_image", "t_image")

    def __init__(self, ctx, tau_image, t_image):
        self.ctx = ctx
        self.tau_image = tau_image
        self.t_image = t_image

    def image(self, letter):
        return self.tau_image if letter == TAU else self.t_image

    def is_zero(self):
        return not self.tau_image and not self.t_image


def product_formula(components, word: str, k: int) -> NcSeries:
    """``phi_k(x_1...x_m) = sum_{i_1+...+i_m=k} phi_(i_1)(x_1)...phi_(i_m)(x_m)``."""
    ctx = components[0].ctx
    # table[j] = phi_j(prefix)
    table = [NcSeries.one(ctx)] + [NcSeries.zero(ctx) for _ in range(k)]
    for letter in word:
        new = []
        for j in range(k + 1):
            acc = NcSeries.zero(ctx)
            for a in range(j + 1):
                if table[a]:
                    img = components[j - a].image(letter)
                    if img:
                        acc = acc + table[a] * img
            new.append(acc)
        table = new
    return table[k]


def extend_automorphism(psi: AutomorphismJet, images=None, new_order: int | None = None,
                        word_length: int = 3) -> AutomorphismJet:
    """Extend ``psi`` by prescribing ``phi_k`` on generators for ``n < k <= new_order``.

    ``images`` maps ``k`` to ``(phi_k(tau), phi_k(t))``; missing entries are
    zero.  The result is checked against the product formula.
    """
    images = dict(images or {})
    if new_order is None:
        new_order = max([psi.order + 1, *images])
    if new_order < psi.order:
        raise StructureError("new order is below the current order")
    comps = []
    for k in range(1, new_order + 1):
        if k <= psi.order:
            if k in images:
                raise StructureError(f"phi_{k} is already fixed by the jet")
            c = psi.component(k)
            comps.append((c.tau_image, c.t_image))
        else:
            comps.append(images.get(k, (None, None)))
    new = AutomorphismJet.from_components(psi.ctxR, comps, psi.s_degree)
    if not new.check_multiplicative(word_length):
        raise MooreError("extended automorphism fails the product formula")
    return new


def _lift_to_jet_ctx(xi: Derivation, order: int, s_degree: int):
    ctxL = xi.ctx.over(jet_ring(xi.ctx.ring, order, s_degree))
    return _lift_derivation(xi, ctxL), ctxL


def integrate_infinitesimal(phi_k: Derivation, k: int, order: int, m,
                            s_degree: int | None = None, word_length: int = 3) -> AutomorphismJet:
    """``exp(s^k phi_k)`` truncated at ``s^order``.

    Needs rationals and an even cocycle ``phi_k``.  The result is checked to
    be multiplicative (against the exponential applied to words directly) and
    to commute with ``m``.
    """
    ctx = phi_k.ctx
    ring = ctx.ring
    if not ring.has_rationals:
        raise HypothesisError(f"exponential integration requires rationals; {ring} has none")
    md = m.derivation if isinstance(m, MooreStructure) else m
    if phi_k.parity != 0:
        raise StructureError("only even derivations exponentiate to automorphisms")
    if not is_cocycle(phi_k, md):
        raise StructureError("phi_k is not a cocycle: [phi_k, m] != 0")
    if k < 1:
        raise StructureError("k must be positive")
    s_degree = default_s_degree(ctx.d) if s_degree is None else s_degree
    ctxL = ctx.over(jet_ring(ring, order, s_degree))

    def exp_on(a: NcSeries) -> NcSeries:
        total = _lift_series(a, ctxL)
        cur = a
        for j in range(1, order // k + 1):
            cur = apply_derivation(phi_k, cur)
            if not cur:
                break
            inv = ring.inverse(ring.from_int(factorial(j)))
            total = total + _lift_series(cur.scale(inv), ctxL, k * j)
        return total

    endo = Endomorphism(ctxL, *(exp_on(NcSeries.word(ctx, x)) for x in LETTERS))
    jet = AutomorphismJet(endo, ctx, s_degree)
    for n in range(1, word_length + 1):
        for letters in product(LETTERS, repeat=n):
            word = NcSeries.word(ctx, "".join(letters))
            if not (endo(_lift_series(word, ctxL)) == exp_on(word)):
                raise MooreError("exponential is not multiplicative")
    mL = _lift_derivation(md, ctxL)
    for x in LETTERS:
        lhs = endo(mL.image(x))
        rhs = apply_derivation(mL, endo.image(x))
        if not (lhs == rhs):
            raise MooreError("exponential does not commute with m")
    return jet


# ------------------------------------------------------------ trivialisation


def conjugate_jet(psi: AutomorphismJet, J: DeformationJet, order: int | None = None) -> DeformationJet:
    """``psi m_s psi^-1`` as a jet of the given order (default: the jet's)."""
    order = J.order if order is None else order
    if psi.order != order:
        psi = psi.lifted(order)
    M = J.realize(order)
    ctxL = M.ctx
    if psi.ctx.ring != ctxL.ring:
        raise StructureError("automorphism and jet live over different parameter rings")
    endo = Endomorphism(ctxL, psi.endo.tau_image, psi.endo.t_image)
    C = conjugate(endo, M)
    base = _coeff_derivation(C, J.ctx, 0)
    if not (base == J.m):
        raise MooreError("conjugation changed the ambient structure")
    return DeformationJet.from_realized(J.structure or J.m, C, J.ctx, order, J.s_degree)


def _step_automorphism(xi: Derivation, k: int, order: int, s_degree: int) -> AutomorphismJet:
    """``tau -> tau + s^k xi(tau)``, ``t -> t + s^k xi(t)``."""
    comps = [(None, None)] * order
    comps[k - 1] = (xi.tau_image, xi.t_image)
    return AutomorphismJet.from_components(xi.ctx, comps, s_degree)


@dataclass
class TrivializeResult:
    trivial: bool
    steps: list  # (k, xi)
    order: int
    stuck_k: int | None = None
    stuck_cocycle: Derivation | None = None
    stuck_class: Derivation | None = None
    final: DeformationJet | None = None

    def __bool__(self):
        return self.trivial

    def to_dict(self):
        out = {
            "trivial": self.trivial,
            "order": self.order,
            "steps": [{"k": k, "xi": str(xi)} for k, xi in self.steps],
        }
        if not self.trivial:
            out["stuck"] = {
                "k": self.stuck_k,
                "cocycle": str(self.stuck_cocycle),
                "class": str(self.stuck_class),
            }
        return out


def trivialize(J: DeformationJet, max_order: int) -> TrivializeResult:
    """Remove jet coefficients one order at a time by gauge steps.

    At order ``k`` the leading coefficient ``m_k`` is a cocycle; if
    ``[eta, m] = m_k`` has a solution, conjugating by ``1 + s^k xi`` with
    ``xi = -eta`` kills it.  Otherwise the procedure stops and reports the
    class of ``m_k``.  Being stuck does not prove the jet is nontrivial when
    integration is unavailable.
    """
    if J.structure is None:
        raise StructureError("trivialize needs a Moore structure as ambient")
    if J.structure.odd and J.structure.v:
        raise StructureError("ambient structure must be in normal form (v = 0)")
    cur = J.padded(max_order)
    check = jet_order_check(cur)
    if not check:
        raise StructureError(f"jet fails its structure equation at k={check.failing_k}")
    steps = []
    for k in range(1, max_order + 1):
        mk = cur.coefficient(k)
        if mk.is_zero():
            continue
        sol = solve_coboundary(mk, J.structure)
        if not sol:
            return TrivializeResult(False, steps, max_order, k, mk, sol.residue, cur)
        xi = -sol.preimage
        step = _step_automorphism(xi, k, max_order, J.s_degree)
        new = conjugate_jet(step, cur)
        for j in range(1, k + 1):
            if not new.coefficient(j).is_zero():
                raise MooreError(f"gauge step at order {k} left coefficient m{j} nonzero")
        steps.append((k, xi))
        cur = new
    return TrivializeResult(True, steps, max_order, final=cur)


@dataclass
class ObstructionComparison:
    cohomologous: bool
    xi: Derivation
    identity_holds: bool
    obs1: Derivation
    obs2: Derivation

    def __bool__(self):
        return self.cohomologous


def obstructions_cohomologous_check(J1: DeformationJet, J2: DeformationJet,
                                    psi: AutomorphismJet) -> ObstructionComparison:
    """Compare obstructions of two jets equivalent through order ``n``.

    ``xi`` is the ``s^(n+1)`` discrepancy between ``J2`` (extended by zero)
    and ``psi J1 psi^-1``; the check reports whether ``Obs2 = Obs1 + [xi, m]``
    and whether ``Obs2 - Obs1`` is a coboundary.
    """
    n = J1.order
    if J2.order != n:
        raise StructureError("jets must have the same order")
    conj = conjugate_jet(psi, J1, n)
    for i in range(1, n + 1):
        if not (conj.coefficient(i) == J2.coefficient(i)):
            raise StructureError(f"jets are not equivalent through order {n} (differ at m{i})")
    obs1, obs2 = obstruction(J1), obstruction(J2)
    wide = conjugate_jet(psi, J1, n + 1)
    xi = -wide.coefficient(n + 1)
    expected = obs1 + bracket(xi, J1.m)
    identity_holds = (expected.tau_image == obs2.tau_image) and (expected.t_image == obs2.t_image)
    diff = obs2 - obs1
    if diff.is_zero():
        cohomologous = True
    elif J1.structure is None:
        raise StructureError("coboundary test needs a Moore structure as ambient")
    else:
        cohomologous = bool(solve_coboundary(diff, J1.structure))
    return ObstructionComparison(cohomologous, xi, identity_holds, obs1, obs2)
