"""Derivations and endomorphisms of the free series algebra.

Both kinds of map are continuous, so they are stored as the images of the two
generators and extended to words on demand:

* a derivation via the graded Leibniz rule
  ``xi(xy) = xi(x) y + (-1)^{|xi||x|} x xi(y)``;
* an endomorphism multiplicatively, ``phi(xy) = phi(x) phi(y)``.

Composition convention: ``compose_endos(phi, psi)`` is ``x -> phi(psi(x))``.
With pairs realised as ``tau -> tau + G(t)``, ``t -> F(t)`` this reproduces
the pair law ``(G, F) o (G', F') = (G + G'(F), F'(F))``.

Conjugation is ``phi o xi o phi^-1``, the generic oracle against which the
closed formulas in :mod:`moorecalc.moore` are tested.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NotInvertible, StructureError
from .series import TAU, T, CommSeries, GradingContext, NcSeries, format_word
from .rings import _needs_parens

__all__ = [
    "Derivation",
    "Endomorphism",
    "SquareZeroResult",
    "apply_derivation",
    "apply_endomorphism",
    "bracket",
    "compose_endos",
    "invert_endo",
    "conjugate",
    "is_square_zero",
]


def _min_len(terms, default):
    return min((len(w) for w in terms), default=default)


def _paren(text: str) -> str:
    return f"({text})" if _needs_parens(text) else text


# ---------------------------------------------------------------- Derivation


class Derivation:
    """Continuous derivation given by ``tau -> tau_image``, ``t -> t_image``.

    Parity is read off the images: a term ``c*u`` in the image of the letter
    ``x`` has parity ``|u| - |x|``.  Mixed derivations are allowed; they are
    applied term by term with the correct sign, and :meth:`homogeneous_parts`
    splits them when a bracket needs homogeneous input.
    """

    __slots__ = ("ctx", "tau_image", "t_image")

    def __init__(self, ctx: GradingContext, tau_image: NcSeries, t_image: NcSeries):
        for img in (tau_image, t_image):
            if img.ctx is not ctx:
                ctx.check_same(img.ctx)
        self.ctx = ctx
        self.tau_image = tau_image
        self.t_image = t_image

    @classmethod
    def zero(cls, ctx, order=None):
        z = NcSeries.zero(ctx, order)
        return cls(ctx, z, z)

    @classmethod
    def from_parts(cls, ctx, A=None, B=None):
        """Normalised derivation ``A(t) dtau + B(t) dt`` from series in ``t``."""
        tau_img = A.to_nc() if A is not None else NcSeries.zero(ctx)
        t_img = B.to_nc() if B is not None else NcSeries.zero(ctx)
        return cls(ctx, tau_img, t_img)

    def image(self, letter: str) -> NcSeries:
        return self.tau_image if letter == TAU else self.t_image

    @property
    def order(self) -> int:
        return min(self.tau_image.order, self.t_image.order)

    def _term_parities(self):
        wp = self.ctx.word_parity
        out = set()
        for letter in (TAU, T):
            lp = self.ctx.letter_parity(letter)
            out.update((wp(w) - lp) % 2 for w in self.image(letter).terms)
        return out

    @property
    def parity(self):
        """0 or 1 for homogeneous derivations, ``None`` for mixed; zero counts as even."""
        ps = self._term_parities()
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def homogeneous_parts(self) -> dict:
        """``{parity: Derivation}`` for the nonzero homogeneous components."""
        ctx = self.ctx
        wp = ctx.word_parity
        parts = {}
        for p in (0, 1):
            imgs = []
            for letter in (TAU, T):
                img = self.image(letter)
                lp = ctx.letter_parity(letter)
                keep = {w: c for w, c in img.terms.items() if (wp(w) - lp) % 2 == p}
                imgs.append(NcSeries(ctx, keep, img.order, clean=True))
            d = Derivation(ctx, *imgs)
            if not d.is_zero():
                parts[p] = d
        return parts

    def degrees(self) -> set:
        """Integer degrees of the terms (strict-mode bookkeeping)."""
        out = set()
        for letter in (TAU, T):
            shift = self.ctx.word_degree(letter)
            out.update(d - shift for d in self.image(letter).degrees())
        return out

    def is_zero(self) -> bool:
        return not self.tau_image and not self.t_image

    def __bool__(self):
        return not self.is_zero()

    def is_normalised(self) -> bool:
        return all(
            img.is_t_only() and not img.has_constant() for img in (self.tau_image, self.t_image)
        )

    def parts(self):
        """``(A, B)`` with ``self = A dtau + B dt``; requires a normalised derivation."""
        if not self.is_normalised():
            raise StructureError("derivation is not normalised (tau or constants in images)")
        return self.tau_image.to_comm(), self.t_image.to_comm()

    @property
    def A(self) -> CommSeries:
        return self.parts()[0]

    @property
    def B(self) -> CommSeries:
        return self.parts()[1]

    def truncate(self, order: int) -> "Derivation":
        return Derivation(self.ctx, self.tau_image.truncate(order), self.t_image.truncate(order))

    def map_coefficients(self, fn, ctx) -> "Derivation":
        return Derivation(
            ctx, self.tau_image.map_coefficients(fn, ctx), self.t_image.map_coefficients(fn, ctx)
        )

    def __call__(self, a: NcSeries) -> NcSeries:
        return apply_derivation(self, a)

    def __add__(self, other: "Derivation") -> "Derivation":
        return Derivation(self.ctx, self.tau_image + other.tau_image, self.t_image + other.t_image)

    def __neg__(self):
        return Derivation(self.ctx, -self.tau_image, -self.t_image)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, raw) -> "Derivation":
        return Derivation(self.ctx, self.tau_image.scale(raw), self.t_image.scale(raw))

    def __rmul__(self, scalar):
        return self.scale(self.ctx.ring.coerce(scalar))

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.tau_image == other.tau_image and self.t_image == other.t_image

    __hash__ = None

    def __str__(self):
        pieces = []
        for img, marker in ((self.tau_image, "dtau"), (self.t_image, "dt")):
            if img:
                text = str(img)
                pieces.append(f"{_paren(text)}*{marker}" if text != "1" else marker)
        if not pieces:
            return "0"
        out = pieces[0]
        for p in pieces[1:]:
            out += f" + {p}"
        return out

    def __repr__(self):
        return f"Derivation({self}; order={self.order})"


def apply_derivation(xi: Derivation, a: NcSeries) -> NcSeries:
    """Extend ``xi`` from generators to ``a`` by the graded Leibniz rule."""
    ctx = a.ctx
    if xi.ctx is not ctx:
        ctx.check_same(xi.ctx)
    ring = ctx.ring
    add, mul, neg = ring.add, ring.mul, ring.neg
    wp = ctx.word_parity
    lp = ctx.letter_parity

    # per letter: (image word, coefficient, parity of the term as a map)
    table = {}
    for letter in (TAU, T):
        img = xi.image(letter)
        table[letter] = [(u, c, (wp(u) - lp(letter)) % 2) for u, c in img.terms.items()]
    vmin = min(_min_len(xi.tau_image.terms, 10**9), _min_len(xi.t_image.terms, 10**9))
    if vmin == 10**9:
        return NcSeries.zero(ctx, a.order)
    la = _min_len([w for w in a.terms if w], a.order + 1)
    order = min(a.order + vmin - 1, xi.order + la - 1, ctx.order)

    acc = {}
    for word, coeff in a.terms.items():
        n = len(word)
        if n == 0 or n - 1 + vmin > order:
            continue
        prefix_parity = 0
        for i, letter in enumerate(word):
            prefix, suffix = word[:i], word[i + 1 :]
            room = order - (n - 1)
            for u, c, q in table[letter]:
                if len(u) > room:
                    continue
                val = mul(coeff, c)
                if q and prefix_parity:
                    val = neg(val)
                w = prefix + u + suffix
                acc[w] = add(acc[w], val) if w in acc else val
            prefix_parity ^= lp(letter)
    return NcSeries(ctx, acc, order)


def bracket(xi: Derivation, eta: Derivation) -> Derivation:
    """Graded commutator ``xi eta - (-1)^{|xi||eta|} eta xi`` of derivations.

    Mixed inputs are split into homogeneous components and the bracket is
    extended bilinearly.
    """
    ctx = xi.ctx
    total = None
    for p, x in xi.homogeneous_parts().items():
        for q, y in eta.homogeneous_parts().items():
            imgs = []
            for letter in (TAU, T):
                xy = apply_derivation(x, y.image(letter))
                yx = apply_derivation(y, x.image(letter))
                imgs.append(xy + yx if p and q else xy - yx)
            term = Derivation(ctx, *imgs)
            total = term if total is None else total + term
    if total is None:
        return Derivation.zero(ctx, min(xi.order, eta.order))
    return total


@dataclass(frozen=True)
class SquareZeroResult:
    """Outcome of :func:`is_square_zero`; truthy when ``m^2 = 0``."""

    holds: bool
    generator: str | None = None
    word: str | None = None
    coefficient: object = None
    order: int = 0

    def __bool__(self):
        return self.holds

    def describe(self) -> str:
        if self.holds:
            return f"m^2 = 0 through order {self.order}"
        return (
            f"m^2({'tau' if self.generator == TAU else 't'}) has coefficient "
            f"{self.coefficient} at {format_word(self.word)}"
        )


def is_square_zero(m: Derivation, order=None) -> SquareZeroResult:
    """Check ``m(m(tau)) = m(m(t)) = 0`` up to the trusted order.

    Returns the first offending word in canonical order as a witness.
    """
    if m.parity != 1 and not m.is_zero():
        raise StructureError("square-zero check needs an odd derivation")
    trusted = m.ctx.order
    for letter in (TAU, T):
        sq = apply_derivation(m, m.image(letter))
        bound = sq.order if order is None else min(order, sq.order)
        trusted = min(trusted, bound)
        for w in sq.words():
            if len(w) <= bound:
                c = sq.ctx.ring.format(sq.terms[w])
                return SquareZeroResult(False, letter, w, c, bound)
    return SquareZeroResult(True, order=trusted)


# -------------------------------------------------------------- Endomorphism


class Endomorphism:
    """Continuous unital algebra map given by generator images.

    Images must have zero constant term, so the extension to series
    converges letter by letter.
    """

    __slots__ = ("ctx", "tau_image", "t_image")

    def __init__(self, ctx: GradingContext, tau_image: NcSeries, t_image: NcSeries):
        for img in (tau_image, t_image):
            if img.ctx is not ctx:
                ctx.check_same(img.ctx)
            if img.has_constant():
                raise StructureError("endomorphism images must have zero constant term")
        self.ctx = ctx
        self.tau_image = tau_image
        self.t_image = t_image

    @classmethod
    def identity(cls, ctx):
        return cls(ctx, NcSeries.tau(ctx), NcSeries.t(ctx))

    @classmethod
    def from_pair(cls, G: CommSeries, F: CommSeries):
        """Realise ``(G, F)`` as ``tau -> tau + G(t)``, ``t -> F(t)``."""
        ctx = G.ctx
        return cls(ctx, NcSeries.tau(ctx) + G.to_nc(), F.to_nc())

    def image(self, letter: str) -> NcSeries:
        return self.tau_image if letter == TAU else self.t_image

    @property
    def order(self) -> int:
        return min(self.tau_image.order, self.t_image.order)

    def is_pair_type(self) -> bool:
        rest = self.tau_image - NcSeries.tau(self.ctx)
        return rest.is_t_only() and self.t_image.is_t_only()

    def to_pair(self):
        if not self.is_pair_type():
            raise StructureError("endomorphism is not of the form tau -> tau + G(t), t -> F(t)")
        return (self.tau_image - NcSeries.tau(self.ctx)).to_comm(), self.t_image.to_comm()

    def linear_part(self):
        """2x2 matrix of the length-one part: rows are images of tau, t."""
        ring = self.ctx.ring
        return [
            [self.image(x).terms.get(y, ring.zero) for y in (TAU, T)] for x in (TAU, T)
        ]

    def is_invertible(self) -> bool:
        return _inverse_linear(self) is not None

    def is_pointed(self) -> bool:
        """Augmentation of every image coefficient matches the identity."""
        ring = self.ctx.ring
        ident = Endomorphism.identity(self.ctx)
        for letter in (TAU, T):
            diff = self.image(letter) - ident.image(letter)
            for c in diff.terms.values():
                base, _ = ring.augment(c)
                if not ring.base.is_zero(base):
                    return False
        return True

    def __call__(self, a: NcSeries) -> NcSeries:
        return apply_endomorphism(self, a)

    def __eq__(self, other):
        if not isinstance(other, Endomorphism):
            return NotImplemented
        return self.tau_image == other.tau_image and self.t_image == other.t_image

    __hash__ = None

    def __str__(self):
        return f"{{tau -> {self.tau_image}, t -> {self.t_image}}}"

    def __repr__(self):
        return f"Endomorphism({self}; order={self.order})"


def apply_endomorphism(phi: Endomorphism, a: NcSeries) -> NcSeries:
    """``phi(a)``, extending generator images multiplicatively (prefix-memoised)."""
    ctx = a.ctx
    if phi.ctx is not ctx:
        ctx.check_same(phi.ctx)
    ring = ctx.ring
    add, mul, is_zero = ring.add, ring.mul, ring.is_zero
    order = min(a.order, phi.order, ctx.order)
    imgs = {x: [(u, c) for u, c in phi.image(x).terms.items() if len(u) <= order] for x in (TAU, T)}

    cache = {"": {"": ring.one}}

    def image_of(word):
        got = cache.get(word)
        if got is not None:
            return got
        head = image_of(word[:-1])
        acc = {}
        for u1, c1 in head.items():
            room = order - len(u1)
            for u2, c2 in imgs[word[-1]]:
                if len(u2) <= room:
                    w = u1 + u2
                    c = mul(c1, c2)
                    acc[w] = add(acc[w], c) if w in acc else c
        acc = {w: c for w, c in acc.items() if not is_zero(c)}
        cache[word] = acc
        return acc

    result = {}
    for word in sorted(a.terms, key=len):
        coeff = a.terms[word]
        for w, c in image_of(word).items():
            val = mul(coeff, c)
            result[w] = add(result[w], val) if w in result else val
    return NcSeries(ctx, result, order)


def compose_endos(phi: Endomorphism, psi: Endomorphism) -> Endomorphism:
    """``x -> phi(psi(x))`` on generators."""
    return Endomorphism(phi.ctx, phi(psi.tau_image), phi(psi.t_image))


def _inverse_linear(phi: Endomorphism):
    ring = phi.ctx.ring
    (a, b), (c, d) = phi.linear_part()
    det = ring.sub(ring.mul(a, d), ring.mul(b, c))
    inv = ring.inverse(det)
    if inv is None:
        return None
    return [
        [ring.mul(inv, d), ring.neg(ring.mul(inv, b))],
        [ring.neg(ring.mul(inv, c)), ring.mul(inv, a)],
    ]


def invert_endo(phi: Endomorphism) -> Endomorphism:
    """Two-sided inverse, by order-by-order correction through the linear part.

    Each pass fixes one more word length: with ``psi`` correct below length
    ``k``, the error ``x - phi(psi(x))`` starts at length ``k`` and is removed
    by substituting the inverse of the linear part.
    """
    ctx = phi.ctx
    lin = _inverse_linear(phi)
    if lin is None:
        raise NotInvertible("linear part of the endomorphism is not invertible")
    letters = (TAU, T)
    tau, t = NcSeries.tau(ctx), NcSeries.t(ctx)
    lin_endo = Endomorphism(
        ctx,
        tau.scale(lin[0][0]) + t.scale(lin[0][1]),
        tau.scale(lin[1][0]) + t.scale(lin[1][1]),
    )
    order = min(phi.order, ctx.order)
    psi = lin_endo
    for _ in range(order):
        errs = [NcSeries.word(ctx, x) - phi(psi.image(x)) for x in letters]
        if all(not e for e in errs):
            break
        # linear correction: psi + L^-1(err) with L^-1 acting letterwise
        psi = Endomorphism(
            ctx, *(psi.image(x) + apply_endomorphism(lin_endo, e) for x, e in zip(letters, errs))
        )
    return Endomorphism(ctx, psi.tau_image.truncate(order), psi.t_image.truncate(order))


def conjugate(phi: Endomorphism, xi: Derivation, phi_inv: Endomorphism | None = None) -> Derivation:
    """``phi o xi o phi^-1`` computed on generators."""
    if phi_inv is None:
        phi_inv = invert_endo(phi)
    imgs = [phi(apply_derivation(xi, phi_inv.image(x))) for x in (TAU, T)]
    return Derivation(xi.ctx, *imgs)
