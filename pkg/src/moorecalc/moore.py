"""Moore structures, the (G, F) gauge group and normal forms.

A Moore structure is the derivation

* even ``d``: ``m = m0 + u(t) dtau``,
* odd ``d``:  ``m = m0 + v(t) dt + w(t) dtau`` with ``v``, ``w`` even series,

where ``m0`` sends ``tau -> tau^2`` and ``t -> [tau, t]``.

The odd-case action of a pair has a closed formula::

    new v = 2tG + t v(F) / F
    new w = -G v(F) / F + w(F) - G^2

and the even case is computed by conjugation.  :func:`act` always returns a
structure; :func:`act_by_conjugation` is the generic route used to check it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import Derivation, Endomorphism, conjugate, invert_endo, is_square_zero
from .errors import HypothesisError, NotInvertible, SeriesError, StructureError
from .rings import QQ, Ring, polynomial
from .series import (
    CommSeries,
    GradingContext,
    NcSeries,
    comm_compose,
    comm_inverse,
    divide_by_2t,
    graded_commutator,
)

__all__ = [
    "MooreStructure",
    "GaugePair",
    "make_moore",
    "trivial_derivation",
    "pair_compose",
    "pair_invert",
    "act",
    "act_by_conjugation",
    "conjugate_dtau_power",
    "conjugate_dt_power",
    "conjugate_trivial",
    "normal_form",
    "verify_equivalence",
    "universal_odd",
    "universal_even",
]


def trivial_derivation(ctx: GradingContext) -> Derivation:
    """``m0``: ``tau -> tau^2``, ``t -> [tau, t]``."""
    tau, t = NcSeries.tau(ctx), NcSeries.t(ctx)
    return Derivation(ctx, tau * tau, graded_commutator(tau, t))


def _series(ctx, s):
    if s is None:
        return CommSeries.zero(ctx)
    if isinstance(s, NcSeries):
        return s.to_comm()
    return s


def _check_strict(ctx, series, degree, label):
    bad = series.degrees() - {degree}
    if bad:
        raise StructureError(f"{label} must be homogeneous of degree {degree}, found {sorted(bad)}")


class MooreStructure:
    """Even (``u``) or odd (``v``, ``w``) Moore structure over a context."""

    __slots__ = ("ctx", "u", "v", "w", "_derivation")

    def __init__(self, ctx: GradingContext, u=None, v=None, w=None):
        self.ctx = ctx
        self._derivation = None
        if ctx.odd:
            if u is not None:
                raise StructureError("odd Moore structures are given by (v, w), not u")
            self.u = None
            self.v, self.w = _series(ctx, v), _series(ctx, w)
            checks = (("v", self.v, -(ctx.d + 3)), ("w", self.w, -2))
        else:
            if v is not None or w is not None:
                raise StructureError("even Moore structures are given by u alone")
            self.u = _series(ctx, u)
            self.v = self.w = None
            checks = (("u", self.u, -2),)
        ring = ctx.ring
        for label, s, degree in checks:
            if not ring.is_zero(s.coeffs[0]):
                raise StructureError(f"{label} must have zero constant term")
            if ctx.odd and not s.is_even_series():
                raise StructureError(f"{label} must contain only even powers of t")
            if ctx.strict:
                _check_strict(ctx, s, degree, label)

    @property
    def odd(self) -> bool:
        return self.ctx.odd

    @property
    def order(self) -> int:
        if self.odd:
            return min(self.v.order, self.w.order)
        return self.u.order

    @property
    def dtau_part(self) -> CommSeries:
        return self.w if self.odd else self.u

    @property
    def dt_part(self) -> CommSeries:
        return self.v if self.odd else CommSeries.zero(self.ctx)

    @property
    def derivation(self) -> Derivation:
        if self._derivation is None:
            m0 = trivial_derivation(self.ctx)
            self._derivation = Derivation(
                self.ctx,
                m0.tau_image + self.dtau_part.to_nc(),
                m0.t_image + self.dt_part.to_nc(),
            )
        return self._derivation

    def is_trivial(self) -> bool:
        return self.dtau_part.is_zero() and self.dt_part.is_zero()

    def is_normal(self) -> bool:
        return not self.odd or self.v.is_zero()

    def with_order(self, order: int) -> "MooreStructure":
        ctx = self.ctx.with_order(order)
        lift = lambda s: CommSeries(ctx, s.coeffs)  # noqa: E731
        if self.odd:
            return MooreStructure(ctx, v=lift(self.v), w=lift(self.w))
        return MooreStructure(ctx, u=lift(self.u))

    def map_coefficients(self, fn, ctx) -> "MooreStructure":
        if self.odd:
            return MooreStructure(
                ctx, v=self.v.map_coefficients(fn, ctx), w=self.w.map_coefficients(fn, ctx)
            )
        return MooreStructure(ctx, u=self.u.map_coefficients(fn, ctx))

    @classmethod
    def from_derivation(cls, m: Derivation) -> "MooreStructure":
        """Read ``(u)`` or ``(v, w)`` back off a derivation of Moore shape."""
        ctx = m.ctx
        m0 = trivial_derivation(ctx)
        rest_tau = m.tau_image - m0.tau_image
        rest_t = m.t_image - m0.t_image
        if not (rest_tau.is_t_only() and rest_t.is_t_only()):
            raise StructureError("derivation is not of Moore form (tau-words beyond m0)")
        a, b = rest_tau.to_comm(), rest_t.to_comm()
        if ctx.odd:
            return cls(ctx, v=b, w=a)
        if b:
            raise StructureError("even Moore structures have no dt-part beyond m0")
        return cls(ctx, u=a)

    def __eq__(self, other):
        if not isinstance(other, MooreStructure):
            return NotImplemented
        if self.odd != other.odd:
            return False
        if self.odd:
            return self.v == other.v and self.w == other.w
        return self.u == other.u

    __hash__ = None

    def __str__(self):
        if self.odd:
            return f"m0 + ({self.v})*dt + ({self.w})*dtau"
        return f"m0 + ({self.u})*dtau"

    def __repr__(self):
        kind = "odd" if self.odd else "even"
        return f"MooreStructure[{kind}]({self}; order={self.order})"


def make_moore(ctx: GradingContext, u=None, v=None, w=None, check=False) -> MooreStructure:
    """Build a Moore structure; with ``check`` also confirm ``m^2 = 0``."""
    m = MooreStructure(ctx, u=u, v=v, w=w)
    if check:
        res = is_square_zero(m.derivation)
        if not res:
            raise StructureError(res.describe())
    return m


# ---------------------------------------------------------------- gauge pairs


class GaugePair:
    """Isomorphism datum ``tau -> tau + G(t)``, ``t -> F(t)``.

    In the odd case ``G`` and ``F`` must be odd series.  ``F`` must have a
    unit linear coefficient.
    """

    __slots__ = ("ctx", "G", "F")

    def __init__(self, G: CommSeries, F: CommSeries):
        ctx = G.ctx
        if F.ctx is not ctx:
            ctx.check_same(F.ctx)
        ring = ctx.ring
        for label, s in (("G", G), ("F", F)):
            if not ring.is_zero(s.coeffs[0]):
                raise StructureError(f"{label} must have zero constant term")
            if ctx.odd and not s.is_odd_series():
                raise StructureError(f"{label} must contain only odd powers of t")
        if F.order < 1 or ring.inverse(F.coeffs[1]) is None:
            raise NotInvertible("linear coefficient of F must be a unit")
        if ctx.strict:
            _check_strict(ctx, G, -1, "G")
            _check_strict(ctx, F, ctx.t_degree, "F")
        self.ctx = ctx
        self.G = G
        self.F = F

    @classmethod
    def identity(cls, ctx):
        return cls(CommSeries.zero(ctx), CommSeries.t(ctx))

    @property
    def order(self) -> int:
        return min(self.G.order, self.F.order)

    def endomorphism(self) -> Endomorphism:
        return Endomorphism.from_pair(self.G, self.F)

    def is_identity(self) -> bool:
        return self == GaugePair.identity(self.ctx)

    def is_pointed(self) -> bool:
        """``G`` in the augmentation ideal and ``F = t`` modulo it."""
        return self.endomorphism().is_pointed()

    def __eq__(self, other):
        if not isinstance(other, GaugePair):
            return NotImplemented
        return self.G == other.G and self.F == other.F

    __hash__ = None

    def __str__(self):
        return f"({self.G}, {self.F})"

    def __repr__(self):
        return f"GaugePair{self}"


def pair_compose(p: GaugePair, q: GaugePair) -> GaugePair:
    """``p o q = (G + G'(F), F'(F))`` for ``p = (G, F)``, ``q = (G', F')``."""
    return GaugePair(p.G + comm_compose(q.G, p.F), comm_compose(q.F, p.F))


def pair_invert(p: GaugePair) -> GaugePair:
    """``(-G(F^-1), F^-1)``."""
    finv = comm_inverse(p.F)
    return GaugePair(-comm_compose(p.G, finv), finv)


def act_by_conjugation(p: GaugePair, m: MooreStructure) -> MooreStructure:
    """Generic route: conjugate the structure derivation by the realised pair."""
    phi = p.endomorphism()
    return MooreStructure.from_derivation(conjugate(phi, m.derivation, invert_endo(phi)))


def act(p: GaugePair, m: MooreStructure) -> MooreStructure:
    """``p m p^-1``: closed formula in the odd case, conjugation in the even case."""
    if not m.odd:
        return act_by_conjugation(p, m)
    G, F = p.G, p.F
    try:
        vF_over_F = comm_compose(m.v, F).divide(F)
    except SeriesError as exc:
        raise SeriesError(f"cannot divide by F: {exc}") from exc
    new_v = G.shift_up().scale(m.ctx.ring.from_int(2)) + vF_over_F.shift_up()
    new_w = -(G * vF_over_F) + comm_compose(m.w, F) - G * G
    order = min(m.order, p.order)
    return MooreStructure(m.ctx, v=new_v.truncate(order), w=new_w.truncate(order))


# closed conjugation formulas for single terms (odd case)


def conjugate_dtau_power(p: GaugePair, i: int) -> Derivation:
    """``(G,F) o t^(2i) dtau o (G,F)^-1 = F^(2i) dtau``."""
    return Derivation.from_parts(p.ctx, A=p.F ** (2 * i))


def conjugate_dt_power(p: GaugePair, i: int) -> Derivation:
    """``(G,F) o t^(2i) dt o (G,F)^-1 = F^(2i-1) (t dt - G dtau)``."""
    f = p.F ** (2 * i - 1)
    return Derivation.from_parts(p.ctx, A=-(f * p.G), B=f.shift_up())


def conjugate_trivial(p: GaugePair) -> Derivation:
    """``(G,F) o m0 o (G,F)^-1 = m0 + 2tG dt - G^2 dtau``."""
    ctx = p.ctx
    m0 = trivial_derivation(ctx)
    extra = Derivation.from_parts(
        ctx, A=-(p.G * p.G), B=p.G.shift_up().scale(ctx.ring.from_int(2))
    )
    return m0 + extra


@dataclass(frozen=True)
class NormalForm:
    """Gauge pair reaching ``m0 + u dtau`` together with ``u``."""

    pair: GaugePair
    u: CommSeries
    image: MooreStructure


def normal_form(m: MooreStructure) -> NormalForm:
    """Use ``G = -v/2t``, ``F = t`` to clear the ``dt``-part of an odd structure.

    Needs 2 to be a unit.  The result is checked: the transformed structure
    must have zero ``dt``-part and ``dtau``-part ``(v/2t)^2 + w``.
    """
    if not m.odd:
        raise StructureError("normal forms are defined for odd Moore structures")
    try:
        half_v = divide_by_2t(m.v)
    except NotInvertible as exc:
        raise HypothesisError(f"normal form requires 1/2 in the ring: {exc}") from exc
    ctx = m.ctx
    pair = GaugePair(-half_v, CommSeries.t(ctx))
    u = half_v * half_v + m.w
    image = act(pair, m)
    if image.v != CommSeries.zero(ctx) or image.w != u:
        raise StructureError("normal-form transformation failed its own check")
    return NormalForm(pair, u.truncate(image.order), image)


def verify_equivalence(p: GaugePair, m1: MooreStructure, m2: MooreStructure, order=None) -> bool:
    """True iff ``act(p, m1) = m2`` up to the trusted order (or ``order``)."""
    img = act(p, m1)
    if order is not None:
        img = img.with_order(min(order, img.order)) if order < img.order else img
        m2 = m2.with_order(min(order, m2.order)) if order < m2.order else m2
    return img == m2


# ----------------------------------------------------- universal structures


def universal_odd(d: int, generators: int, truncation: int = 4, order=None, base: Ring = QQ,
                  strict=False):
    """``m0 + sum w_i t^(2i) dtau`` over ``base[w_1..w_K]`` with ``|w_i| = 2i(d+2)-2``."""
    if d % 2 != 1:
        raise StructureError("the universal odd structure needs odd d")
    names = [f"w{i}" for i in range(1, generators + 1)]
    degrees = [2 * i * (d + 2) - 2 for i in range(1, generators + 1)]
    ring = polynomial(base, names, degrees, truncation)
    order = 2 * generators if order is None else order
    ctx = GradingContext(ring, d, order, strict)
    w = CommSeries.from_dict(ctx, {2 * i: ring.element(ring.gen(n)) for i, n in enumerate(names, 1)})
    return MooreStructure(ctx, w=w)


def universal_even(d: int, generators: int, truncation: int = 4, order=None, base: Ring = QQ,
                   strict=False):
    """``m0 + sum u_i t^i dtau`` over ``base[u_1..u_K]`` with ``|u_i| = i(d+2)-2``."""
    if d % 2 != 0:
        raise StructureError("the universal even structure needs even d")
    names = [f"u{i}" for i in range(1, generators + 1)]
    degrees = [i * (d + 2) - 2 for i in range(1, generators + 1)]
    ring = polynomial(base, names, degrees, truncation)
    order = generators if order is None else order
    ctx = GradingContext(ring, d, order, strict)
    u = CommSeries.from_dict(ctx, {i: ring.element(ring.gen(n)) for i, n in enumerate(names, 1)})
    return MooreStructure(ctx, u=u)
