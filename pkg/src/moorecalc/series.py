"""Truncated graded power series on the letters tau and t.

Two containers live here:

* :class:`NcSeries` -- noncommutative series, a sparse map from words over
  ``{tau, t}`` to ring coefficients, truncated at word length ``order``.
* :class:`CommSeries` -- dense series in ``t`` alone, the home of the
  characteristic series (``u``, ``v``, ``w``) and of gauge pairs.

Words are plain strings over ``TAU = "T"`` and ``T = "t"``; since ``"T" <
"t"`` the canonical (length, lexicographic) order puts tau first.

Every series records the order through which its coefficients are trusted.
Operations that consume an order (derivative, division by ``t``) lower it,
and equality only compares coefficients up to the smaller trusted order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ContextMismatch, NotInvertible, SeriesError
from .rings import Ring, RingElement

TAU = "T"
T = "t"

__all__ = [
    "TAU",
    "T",
    "GradingContext",
    "NcSeries",
    "CommSeries",
    "nc_mul",
    "graded_commutator",
    "comm_compose",
    "comm_derivative",
    "comm_inverse",
    "tilde",
    "divide_by_t",
    "divide_by_2t",
    "format_word",
]


@dataclass(frozen=True)
class GradingContext:
    """Ring, Moore degree ``d`` and truncation order shared by a computation.

    ``|tau| = -1`` and ``|t| = -(d + 2)``, so ``t`` is odd exactly when ``d``
    is.  In strict mode constructors also verify integer degrees; signs are
    always computed from parities alone.
    """

    ring: Ring
    d: int
    order: int = 10
    strict: bool = False

    def __post_init__(self):
        if self.order < 1:
            raise SeriesError(f"truncation order must be >= 1, got {self.order}")

    @property
    def t_parity(self) -> int:
        return self.d % 2

    @property
    def odd(self) -> bool:
        """True for odd Moore algebras (odd ``t``)."""
        return self.d % 2 == 1

    @property
    def t_degree(self) -> int:
        return -(self.d + 2)

    tau_degree = -1

    def letter_parity(self, letter: str) -> int:
        return 1 if letter == TAU else self.t_parity

    def word_parity(self, word: str) -> int:
        n_tau = word.count(TAU)
        return (n_tau + self.t_parity * (len(word) - n_tau)) % 2

    def word_degree(self, word: str) -> int:
        n_tau = word.count(TAU)
        return -n_tau + self.t_degree * (len(word) - n_tau)

    def over(self, ring: Ring) -> "GradingContext":
        return replace(self, ring=ring)

    def with_order(self, order: int) -> "GradingContext":
        return replace(self, order=order)

    def check_same(self, other: "GradingContext"):
        if self.ring != other.ring or self.d % 2 != other.d % 2:
            raise ContextMismatch(f"context mismatch: {self} vs {other}")


def format_word(word: str) -> str:
    """``"TTtT"`` -> ``"tau^2*t*tau"``; the empty word renders as ``"1"``."""
    if not word:
        return "1"
    parts = []
    i = 0
    while i < len(word):
        j = i
        while j < len(word) and word[j] == word[i]:
            j += 1
        name = "tau" if word[i] == TAU else "t"
        parts.append(name if j - i == 1 else f"{name}^{j - i}")
        i = j
    return "*".join(parts)


def _word_key(word: str):
    return len(word), word


def _format_terms(ring: Ring, items) -> str:
    from .rings import _join_terms, _scaled_term

    pieces = [_scaled_term(ring, c, mono) for mono, c in items]
    return _join_terms(pieces) if pieces else "0"


# ------------------------------------------------------------------ NcSeries


class NcSeries:
    """Element of the free series algebra ``R<<tau, t>>`` truncated at ``order``."""

    __slots__ = ("ctx", "terms", "order")

    def __init__(self, ctx: GradingContext, terms=None, order=None, *, clean=False):
        self.ctx = ctx
        self.order = ctx.order if order is None else min(order, ctx.order)
        if terms is None:
            terms = {}
        elif not clean:
            is_zero = ctx.ring.is_zero
            terms = {
                w: c for w, c in terms.items() if len(w) <= self.order and not is_zero(c)
            }
        self.terms = terms

    # constructors
    @classmethod
    def zero(cls, ctx, order=None):
        return cls(ctx, {}, order, clean=True)

    @classmethod
    def word(cls, ctx, word: str, coeff=1):
        return cls(ctx, {word: ctx.ring.coerce(coeff)})

    @classmethod
    def one(cls, ctx):
        return cls.word(ctx, "")

    @classmethod
    def tau(cls, ctx):
        return cls.word(ctx, TAU)

    @classmethod
    def t(cls, ctx):
        return cls.word(ctx, T)

    # inspection
    def coefficient(self, word: str) -> RingElement:
        return self.ctx.ring.element(self.terms.get(word, self.ctx.ring.zero))

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def words(self):
        return sorted(self.terms, key=_word_key)

    def items(self):
        return [(w, self.terms[w]) for w in self.words()]

    def is_t_only(self) -> bool:
        return all(TAU not in w for w in self.terms)

    def has_constant(self) -> bool:
        return "" in self.terms

    def parities(self) -> set:
        wp = self.ctx.word_parity
        return {wp(w) for w in self.terms}

    def parity(self):
        """Parity of a homogeneous nonzero series, else ``None``."""
        ps = self.parities()
        return ps.pop() if len(ps) == 1 else None

    def degrees(self) -> set:
        ring, wd = self.ctx.ring, self.ctx.word_degree
        out = set()
        for w, c in self.terms.items():
            out.update(wd(w) + d for d in ring.degrees(c))
        return out

    def truncate(self, order: int) -> "NcSeries":
        return NcSeries(self.ctx, self.terms, min(order, self.order))

    def parity_part(self, p: int) -> "NcSeries":
        wp = self.ctx.word_parity
        return NcSeries(
            self.ctx, {w: c for w, c in self.terms.items() if wp(w) == p}, self.order, clean=True
        )

    def to_comm(self) -> "CommSeries":
        if not self.is_t_only():
            raise SeriesError("series contains tau; not a series in t alone")
        ring = self.ctx.ring
        coeffs = [ring.zero] * (self.order + 1)
        for w, c in self.terms.items():
            coeffs[len(w)] = c
        return CommSeries(self.ctx, coeffs)

    def map_coefficients(self, fn, ctx: GradingContext) -> "NcSeries":
        return NcSeries(ctx, {w: fn(c) for w, c in self.terms.items()}, self.order)

    # arithmetic
    def _check(self, other):
        if not isinstance(other, NcSeries):
            raise TypeError(f"expected NcSeries, got {type(other).__name__}")
        if other.ctx is not self.ctx:
            self.ctx.check_same(other.ctx)

    def __add__(self, other):
        self._check(other)
        ring = self.ctx.ring
        acc = dict(self.terms)
        for w, c in other.terms.items():
            acc[w] = ring.add(acc[w], c) if w in acc else c
        return NcSeries(self.ctx, acc, min(self.order, other.order))

    def __neg__(self):
        neg = self.ctx.ring.neg
        return NcSeries(self.ctx, {w: neg(c) for w, c in self.terms.items()}, self.order, clean=True)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, raw) -> "NcSeries":
        mul = self.ctx.ring.mul
        return NcSeries(self.ctx, {w: mul(raw, c) for w, c in self.terms.items()}, self.order)

    def __mul__(self, other):
        if isinstance(other, NcSeries):
            return nc_mul(self, other)
        return self.scale(self.ctx.ring.coerce(other))

    def __rmul__(self, other):
        return self.scale(self.ctx.ring.coerce(other))

    def __eq__(self, other):
        if not isinstance(other, NcSeries):
            return NotImplemented
        self._check(other)
        n = min(self.order, other.order)
        diff = self - other
        return all(len(w) > n for w in diff.terms)

    __hash__ = None

    def __str__(self):
        return _format_terms(self.ctx.ring, [(format_word(w) if w else "", c) for w, c in self.items()])

    def __repr__(self):
        return f"NcSeries({self}; order={self.order})"


def nc_mul(a: NcSeries, b: NcSeries) -> NcSeries:
    """Concatenation product truncated at word length; no Koszul sign."""
    a._check(b)
    ctx = a.ctx
    ring = ctx.ring
    add, mul = ring.add, ring.mul
    # trusted through min(a.order + val(b), b.order + val(a))
    va = min((len(w) for w in a.terms), default=a.order + 1)
    vb = min((len(w) for w in b.terms), default=b.order + 1)
    order = min(a.order + vb, b.order + va, ctx.order)
    acc = {}
    for w1, c1 in a.terms.items():
        room = order - len(w1)
        if room < 0:
            continue
        for w2, c2 in b.terms.items():
            if len(w2) > room:
                continue
            w = w1 + w2
            c = mul(c1, c2)
            acc[w] = add(acc[w], c) if w in acc else c
    return NcSeries(ctx, acc, order)


def graded_commutator(a: NcSeries, b: NcSeries) -> NcSeries:
    """``ab - (-1)^{|a||b|} ba`` for parity-homogeneous ``a`` and ``b``."""
    pa, pb = a.parity(), b.parity()
    if (pa is None and a) or (pb is None and b):
        raise SeriesError("graded commutator needs parity-homogeneous operands")
    if not a or not b:
        return NcSeries.zero(a.ctx, min(a.order, b.order))
    ab, ba = nc_mul(a, b), nc_mul(b, a)
    return ab + ba if pa and pb else ab - ba


# ---------------------------------------------------------------- CommSeries


class CommSeries:
    """Dense series ``c0 + c1 t + ... + cN t^N`` in the single letter ``t``."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: GradingContext, coeffs):
        coeffs = tuple(coeffs)
        if len(coeffs) > ctx.order + 1:
            coeffs = coeffs[: ctx.order + 1]
        if not coeffs:
            raise SeriesError("a series needs at least its constant coefficient")
        self.ctx = ctx
        self.coeffs = coeffs

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    # constructors
    @classmethod
    def zero(cls, ctx, order=None):
        order = ctx.order if order is None else order
        return cls(ctx, [ctx.ring.zero] * (order + 1))

    @classmethod
    def from_dict(cls, ctx, mapping, order=None):
        """Build from ``{power: coefficient}``; coefficients are coerced."""
        order = ctx.order if order is None else min(order, ctx.order)
        ring = ctx.ring
        coeffs = [ring.zero] * (order + 1)
        for power, c in mapping.items():
            if power < 0:
                raise SeriesError("negative power")
            if power <= order:
                coeffs[power] = ring.add(coeffs[power], ring.coerce(c))
        return cls(ctx, coeffs)

    @classmethod
    def monomial(cls, ctx, power: int, coeff=1, order=None):
        return cls.from_dict(ctx, {power: coeff}, order)

    @classmethod
    def t(cls, ctx):
        return cls.monomial(ctx, 1)

    # inspection
    def __getitem__(self, i: int) -> RingElement:
        ring = self.ctx.ring
        return ring.element(self.coeffs[i] if i <= self.order else ring.zero)

    def raw(self, i: int):
        return self.coeffs[i] if i <= self.order else self.ctx.ring.zero

    def is_zero(self) -> bool:
        is_zero = self.ctx.ring.is_zero
        return all(is_zero(c) for c in self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def valuation(self) -> int:
        """Index of the first nonzero coefficient (``order + 1`` when zero)."""
        is_zero = self.ctx.ring.is_zero
        for i, c in enumerate(self.coeffs):
            if not is_zero(c):
                return i
        return self.order + 1

    def support(self):
        is_zero = self.ctx.ring.is_zero
        return [i for i, c in enumerate(self.coeffs) if not is_zero(c)]

    def is_even_series(self) -> bool:
        return all(i % 2 == 0 for i in self.support())

    def is_odd_series(self) -> bool:
        return all(i % 2 == 1 for i in self.support())

    def even_part(self) -> "CommSeries":
        z = self.ctx.ring.zero
        return CommSeries(self.ctx, [c if i % 2 == 0 else z for i, c in enumerate(self.coeffs)])

    def odd_part(self) -> "CommSeries":
        z = self.ctx.ring.zero
        return CommSeries(self.ctx, [c if i % 2 == 1 else z for i, c in enumerate(self.coeffs)])

    def degrees(self) -> set:
        ring, td = self.ctx.ring, self.ctx.t_degree
        out = set()
        for i, c in enumerate(self.coeffs):
            out.update(i * td + d for d in ring.degrees(c))
        return out

    def truncate(self, order: int) -> "CommSeries":
        return CommSeries(self.ctx, self.coeffs[: max(order, 0) + 1])

    def extend(self, order: int) -> "CommSeries":
        """Pad with zeros, declaring the series exact (a polynomial) up to ``order``."""
        ctx = self.ctx if order <= self.ctx.order else self.ctx.with_order(order)
        pad = [ctx.ring.zero] * (order - self.order)
        return CommSeries(ctx, list(self.coeffs) + pad)

    def with_context(self, ctx: GradingContext) -> "CommSeries":
        return CommSeries(ctx, self.coeffs)

    def to_nc(self) -> NcSeries:
        return NcSeries(self.ctx, {T * i: c for i, c in enumerate(self.coeffs)}, self.order)

    def map_coefficients(self, fn, ctx: GradingContext) -> "CommSeries":
        return CommSeries(ctx, [fn(c) for c in self.coeffs])

    # arithmetic
    def _check(self, other):
        if not isinstance(other, CommSeries):
            raise TypeError(f"expected CommSeries, got {type(other).__name__}")
        if other.ctx is not self.ctx:
            self.ctx.check_same(other.ctx)

    def __add__(self, other):
        if not isinstance(other, CommSeries):
            other = CommSeries.from_dict(self.ctx, {0: other}, self.order)
        self._check(other)
        add = self.ctx.ring.add
        n = min(self.order, other.order)
        return CommSeries(self.ctx, [add(self.coeffs[i], other.coeffs[i]) for i in range(n + 1)])

    __radd__ = __add__

    def __neg__(self):
        neg = self.ctx.ring.neg
        return CommSeries(self.ctx, [neg(c) for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, raw) -> "CommSeries":
        mul = self.ctx.ring.mul
        return CommSeries(self.ctx, [mul(raw, c) for c in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, CommSeries):
            return self.scale(self.ctx.ring.coerce(other))
        self._check(other)
        order = min(
            self.order + other.valuation(), other.order + self.valuation(), self.ctx.order
        )
        return CommSeries(self.ctx, _mul_raw(self.ctx.ring, self.coeffs, other.coeffs, order))

    def __rmul__(self, other):
        return self.scale(self.ctx.ring.coerce(other))

    def __pow__(self, n: int):
        result = CommSeries.monomial(self.ctx, 0, 1, self.order)
        for _ in range(n):
            result = result * self
        return result

    def __call__(self, g: "CommSeries") -> "CommSeries":
        return comm_compose(self, g)

    def __eq__(self, other):
        if not isinstance(other, CommSeries):
            return NotImplemented
        self._check(other)
        eq = self.ctx.ring.eq
        n = min(self.order, other.order)
        return all(eq(self.coeffs[i], other.coeffs[i]) for i in range(n + 1))

    __hash__ = None

    def shift_up(self, k: int = 1) -> "CommSeries":
        """Multiply by ``t^k`` exactly (trusted order grows by ``k``)."""
        z = self.ctx.ring.zero
        return CommSeries(self.ctx, [z] * k + list(self.coeffs))

    def reciprocal(self) -> "CommSeries":
        """Multiplicative inverse of a series with unit constant term."""
        ring = self.ctx.ring
        c0 = ring.inverse(self.coeffs[0])
        if c0 is None:
            raise NotInvertible("constant term is not a unit")
        out = [c0]
        for n in range(1, self.order + 1):
            acc = ring.zero
            for k in range(1, n + 1):
                acc = ring.add(acc, ring.mul(self.coeffs[k], out[n - k]))
            out.append(ring.neg(ring.mul(c0, acc)))
        return CommSeries(self.ctx, out)

    def divide(self, other: "CommSeries") -> "CommSeries":
        """``self / other`` for ``other = f1 t + ...`` with ``f1`` a unit."""
        if other.valuation() != 1 or self.ctx.ring.inverse(other.coeffs[1]) is None:
            raise NotInvertible("divisor must be f1*t + ... with f1 a unit")
        return divide_by_t(self) * divide_by_t(other).reciprocal()

    def __str__(self):
        items = [
            ("" if i == 0 else ("t" if i == 1 else f"t^{i}"), c)
            for i, c in enumerate(self.coeffs)
            if not self.ctx.ring.is_zero(c)
        ]
        return _format_terms(self.ctx.ring, items)

    def __repr__(self):
        return f"CommSeries({self}; order={self.order})"


def _mul_raw(ring: Ring, a, b, order: int):
    add, mul, zero, is_zero = ring.add, ring.mul, ring.zero, ring.is_zero
    out = [zero] * (order + 1)
    la, lb = len(a), len(b)
    for i in range(min(la, order + 1)):
        ai = a[i]
        if is_zero(ai):
            continue
        for j in range(min(lb, order + 1 - i)):
            bj = b[j]
            if not is_zero(bj):
                out[i + j] = add(out[i + j], mul(ai, bj))
    return out


def comm_compose(f: CommSeries, g: CommSeries) -> CommSeries:
    """``f(g(t))``; ``g`` must have vanishing constant term."""
    f._check(g)
    ring = f.ctx.ring
    if not ring.is_zero(g.coeffs[0]):
        raise SeriesError("inner series of a composition must have zero constant term")
    order = min(f.order, g.order)
    # Horner evaluation, truncated
    acc = [f.coeffs[order] if order <= f.order else ring.zero] + [ring.zero] * order
    for i in range(order - 1, -1, -1):
        acc = _mul_raw(ring, acc, g.coeffs, order)
        acc[0] = ring.add(acc[0], f.coeffs[i])
    return CommSeries(f.ctx, acc)


def comm_derivative(f: CommSeries) -> CommSeries:
    """Formal derivative ``sum i f_i t^(i-1)``; trusted one order less."""
    ring = f.ctx.ring
    if f.order == 0:
        return CommSeries(f.ctx, [ring.zero])
    return CommSeries(f.ctx, [ring.scale(i, f.coeffs[i]) for i in range(1, f.order + 1)])


def comm_inverse(f: CommSeries) -> CommSeries:
    """Compositional inverse, solved triangularly one coefficient at a time."""
    ring = f.ctx.ring
    if not ring.is_zero(f.coeffs[0]):
        raise SeriesError("series to invert must have zero constant term")
    if f.order < 1:
        raise SeriesError("series too short to invert")
    inv1 = ring.inverse(f.coeffs[1])
    if inv1 is None:
        raise NotInvertible(f"linear coefficient {ring.format(f.coeffs[1])} is not a unit")
    order = f.order
    g = [ring.zero, inv1] + [ring.zero] * (order - 1)
    for n in range(2, order + 1):
        # coefficient of t^n in f(g) with g_n = 0; g_n enters only through f1*g_n
        partial = comm_compose(f.truncate(n), CommSeries(f.ctx, g[: n + 1]))
        g[n] = ring.neg(ring.mul(inv1, partial.coeffs[n]))
    return CommSeries(f.ctx, g)


def tilde(w: CommSeries) -> CommSeries:
    """Reindex an even series: coefficient of ``t^(2i)`` moves to ``t^i``."""
    if not w.is_even_series():
        raise SeriesError("tilde needs an even series (even powers of t only)")
    return CommSeries(w.ctx, w.coeffs[::2])


def divide_by_t(f: CommSeries) -> CommSeries:
    ring = f.ctx.ring
    if not ring.is_zero(f.coeffs[0]):
        raise SeriesError("cannot divide by t: nonzero constant term")
    if f.order == 0:
        return CommSeries(f.ctx, [ring.zero])
    return CommSeries(f.ctx, f.coeffs[1:])


def divide_by_2t(f: CommSeries) -> CommSeries:
    """Divide by ``2t``; requires 2 to be a unit (no exact-division fallback)."""
    ring = f.ctx.ring
    half = ring.inverse(ring.from_int(2))
    if half is None:
        raise NotInvertible(f"2 is not invertible in {ring}")
    return divide_by_t(f).scale(half)
