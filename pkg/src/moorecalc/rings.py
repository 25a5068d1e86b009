"""Exact, evenly graded commutative coefficient rings.

Every ring works on *raw* values (``gmpy2.mpq`` for the rationals, ``int``
for the integers and residues, sorted term tuples for polynomial rings) so
that the series kernel can call ``ring.add``/``ring.mul`` without wrapper
overhead.  :class:`RingElement` is the public, operator-friendly view.

Polynomial rings are truncated by total generator count: a monomial using
more than ``truncation`` generators (with multiplicity) is dropped.  A
square-zero extension is the special case ``truncation == 1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from gmpy2 import mpq

from .errors import RingError

__all__ = [
    "Ring",
    "Rationals",
    "Integers",
    "IntegersMod",
    "PolynomialRing",
    "RingElement",
    "QQ",
    "ZZ",
    "make_ring",
    "ring_arith",
    "augment",
    "is_invertible",
    "polynomial",
    "square_zero",
]


class Ring:
    """Shared interface; subclasses implement the raw arithmetic."""

    kind = "abstract"

    # -- raw arithmetic (overridden) -------------------------------------
    zero = None
    one = None

    def from_int(self, n):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def is_zero(self, a):
        raise NotImplementedError

    def inverse(self, a):
        """Return the inverse raw value, or ``None`` for a non-unit."""
        raise NotImplementedError

    def format(self, a) -> str:
        raise NotImplementedError

    def degrees(self, a) -> frozenset:
        raise NotImplementedError

    # -- derived helpers -------------------------------------------------
    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def eq(self, a, b):
        return self.is_zero(self.sub(a, b))

    def scale(self, n: int, a):
        return self.mul(self.from_int(n), a)

    def power(self, a, n: int):
        result = self.one
        for _ in range(n):
            result = self.mul(result, a)
        return result

    @property
    def ground(self) -> "Ring":
        """Innermost ring of rationals, integers or residues."""
        return self

    @property
    def base(self) -> "Ring":
        """Ring the augmentation maps onto (identity for ground rings)."""
        return self

    @property
    def has_rationals(self) -> bool:
        return isinstance(self.ground, Rationals)

    @property
    def generator_names(self) -> tuple:
        return ()

    def gen(self, name: str):
        raise RingError(f"unknown generator {name!r} in {self}")

    def embed(self, raw, source: "Ring"):
        """Image of ``raw`` (an element of ``source``) under the structure map."""
        if source == self:
            return raw
        raise RingError(f"cannot embed {source} into {self}")

    def augment(self, a):
        """Split ``a`` into (part in ``self.base``, part in the augmentation ideal)."""
        return a, self.zero

    def coerce(self, x):
        if isinstance(x, RingElement):
            return self.embed(x.raw, x.ring)
        if isinstance(x, bool):
            raise RingError("booleans are not ring elements")
        if isinstance(x, int):
            return self.from_int(x)
        if isinstance(x, (Fraction, type(mpq(0)))):
            num, den = int(x.numerator), int(x.denominator)
            inv = self.inverse(self.from_int(den))
            if inv is None:
                raise RingError(f"{den} is not invertible in {self}")
            return self.mul(self.from_int(num), inv)
        raise RingError(f"cannot interpret {x!r} in {self}")

    def __call__(self, x) -> "RingElement":
        return RingElement(self, self.coerce(x))

    def element(self, raw) -> "RingElement":
        return RingElement(self, raw)

    def random(self, rng, size: int = 3):
        raise NotImplementedError


@dataclass(frozen=True)
class Rationals(Ring):
    kind = "rationals"

    zero = mpq(0)
    one = mpq(1)

    def from_int(self, n):
        return mpq(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return not a

    def inverse(self, a):
        return None if not a else 1 / a

    def format(self, a):
        return str(a)

    def degrees(self, a):
        return frozenset() if not a else frozenset((0,))

    def random(self, rng, size=3):
        return mpq(rng.randint(-size, size), rng.randint(1, size))

    def __str__(self):
        return "Q"


@dataclass(frozen=True)
class Integers(Ring):
    kind = "integers"

    zero = 0
    one = 1

    def from_int(self, n):
        return int(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return a == 0

    def inverse(self, a):
        return a if a in (1, -1) else None

    def format(self, a):
        return str(a)

    def degrees(self, a):
        return frozenset() if a == 0 else frozenset((0,))

    def random(self, rng, size=3):
        return rng.randint(-size, size)

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class IntegersMod(Ring):
    modulus: int

    kind = "integers-mod-n"
    zero = 0
    one = 1

    def __post_init__(self):
        if self.modulus < 2:
            raise RingError(f"modulus must be >= 2, got {self.modulus}")

    def from_int(self, n):
        return int(n) % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def sub(self, a, b):
        return (a - b) % self.modulus

    def neg(self, a):
        return -a % self.modulus

    def mul(self, a, b):
        return a * b % self.modulus

    def is_zero(self, a):
        return a == 0

    def inverse(self, a):
        if math.gcd(a, self.modulus) != 1:
            return None
        return pow(a, -1, self.modulus)

    def format(self, a):
        return str(a)

    def degrees(self, a):
        return frozenset() if a == 0 else frozenset((0,))

    def random(self, rng, size=3):
        return rng.randrange(self.modulus)

    def __str__(self):
        return f"Z/{self.modulus}"


@dataclass(frozen=True)
class PolynomialRing(Ring):
    """``base[names]`` modulo all monomials of total degree above ``truncation``.

    Raw values are tuples of ``(exponents, coefficient)`` pairs sorted by
    exponent tuple, with no zero coefficients.
    """

    base_ring: Ring
    names: tuple
    gen_degrees: tuple
    truncation: int
    square_zero: bool = field(default=False)

    def __post_init__(self):
        if len(self.names) != len(self.gen_degrees):
            raise RingError("one degree per generator is required")
        if len(set(self.names)) != len(self.names):
            raise RingError("generator names must be distinct")
        for name, deg in zip(self.names, self.gen_degrees):
            if deg % 2:
                raise RingError(f"generator {name} has odd degree {deg}")
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", name) or name in _RESERVED:
                raise RingError(f"bad generator name {name!r}")
        if self.truncation < 0:
            raise RingError("truncation bound must be >= 0")
        if set(self.names) & set(self.base_ring.generator_names):
            raise RingError("generator names clash with the base ring")

    @property
    def kind(self):
        return "square-zero" if self.square_zero else "polynomial"

    @property
    def zero(self):
        return ()

    @property
    def one(self):
        return self._const(self.base_ring.one)

    @property
    def base(self):
        return self.base_ring

    @property
    def ground(self):
        return self.base_ring.ground

    @property
    def generator_names(self):
        return self.names + self.base_ring.generator_names

    def _const(self, c):
        if self.base_ring.is_zero(c):
            return ()
        return (((0,) * len(self.names), c),)

    def from_int(self, n):
        return self._const(self.base_ring.from_int(n))

    def gen(self, name):
        if name in self.names:
            mono = tuple(int(n == name) for n in self.names)
            if sum(mono) > self.truncation:
                return ()
            return ((mono, self.base_ring.one),)
        return self._const(self.base_ring.gen(name))

    def embed(self, raw, source):
        if source == self:
            return raw
        return self._const(self.base_ring.embed(raw, source))

    def _pack(self, acc):
        bz = self.base_ring.is_zero
        return tuple(sorted((m, c) for m, c in acc.items() if not bz(c)))

    def add(self, a, b):
        if not a:
            return b
        if not b:
            return a
        acc = dict(a)
        badd = self.base_ring.add
        for m, c in b:
            acc[m] = badd(acc[m], c) if m in acc else c
        return self._pack(acc)

    def neg(self, a):
        bneg = self.base_ring.neg
        return tuple((m, bneg(c)) for m, c in a)

    def mul(self, a, b):
        if not a or not b:
            return ()
        acc = {}
        base = self.base_ring
        cap = self.truncation
        for m1, c1 in a:
            d1 = sum(m1)
            for m2, c2 in b:
                if d1 + sum(m2) > cap:
                    continue
                m = tuple(x + y for x, y in zip(m1, m2))
                c = base.mul(c1, c2)
                acc[m] = base.add(acc[m], c) if m in acc else c
        return self._pack(acc)

    def is_zero(self, a):
        return not a

    def augment(self, a):
        const = (0,) * len(self.names)
        r_part = self.base_ring.zero
        rest = []
        for m, c in a:
            if m == const:
                r_part = c
            else:
                rest.append((m, c))
        return r_part, tuple(rest)

    def inverse(self, a):
        r_part, nil = self.augment(a)
        r_inv = self.base_ring.inverse(r_part)
        if r_inv is None:
            return None
        # a = r (1 + x) with x nilpotent of index <= truncation + 1
        x = self.mul(self._const(r_inv), nil)
        neg_x = self.neg(x)
        total, term = self.one, self.one
        for _ in range(self.truncation):
            term = self.mul(term, neg_x)
            if not term:
                break
            total = self.add(total, term)
        return self.mul(total, self._const(r_inv))

    def degrees(self, a):
        out = set()
        for m, c in a:
            mdeg = sum(e * d for e, d in zip(m, self.gen_degrees))
            out.update(mdeg + d for d in self.base_ring.degrees(c))
        return frozenset(out)

    def coefficient(self, a, mono):
        for m, c in a:
            if m == mono:
                return c
        return self.base_ring.zero

    def monomials(self, max_degree=None):
        """All exponent tuples allowed by the truncation, lowest degree first."""
        cap = self.truncation if max_degree is None else min(max_degree, self.truncation)
        k = len(self.names)
        out = [m for m in product(range(cap + 1), repeat=k) if sum(m) <= cap]
        return sorted(out, key=_mono_key)

    def format(self, a):
        if not a:
            return "0"
        pieces = []
        for m, c in sorted(a, key=lambda mc: _mono_key(mc[0])):
            mono = "*".join(
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.names, m)
                if e
            )
            pieces.append(_scaled_term(self.base_ring, c, mono))
        return _join_terms(pieces)

    def random(self, rng, size=3, density=0.5):
        acc = {}
        for m in self.monomials():
            if rng.random() < density:
                acc[m] = self.base_ring.random(rng, size)
        return self._pack(acc)

    def random_nilpotent(self, rng, size=3, density=0.5):
        """Random element of the augmentation ideal."""
        return self.augment(self.random(rng, size, density))[1]

    def __str__(self):
        gens = ",".join(
            n if d == 0 else f"{n}:{d}" for n, d in zip(self.names, self.gen_degrees)
        )
        if self.square_zero:
            return f"{self.base_ring}<{gens}>"
        return f"{self.base_ring}[{gens};M={self.truncation}]"


def _mono_key(m):
    return sum(m), tuple(-e for e in m)


_RESERVED = {"t", "tau", "dt", "dtau"}


def _wrapped(text: str) -> bool:
    if not (text.startswith("(") and text.endswith(")")):
        return False
    depth = 0
    for i, ch in enumerate(text):
        depth += ch == "("
        depth -= ch == ")"
        if depth == 0 and i < len(text) - 1:
            return False
    return True


def _needs_parens(text: str) -> bool:
    if _wrapped(text):
        return False
    body = text[1:] if text.startswith("-") else text
    return any(ch in body for ch in "+-/*")


def _scaled_term(ring: Ring, coeff, mono: str) -> str:
    """Render ``coeff * mono`` in the parser's grammar."""
    if not mono:
        text = ring.format(coeff)
        return f"({text})" if _needs_parens(text) else text
    if ring.eq(coeff, ring.one):
        return mono
    if ring.eq(coeff, ring.neg(ring.one)) and not isinstance(ring, IntegersMod):
        return f"-{mono}"
    text = ring.format(coeff)
    if _needs_parens(text):
        text = f"({text})"
    return f"{text}*{mono}"


def _join_terms(pieces) -> str:
    out = pieces[0]
    for p in pieces[1:]:
        out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
    return out


QQ = Rationals()
ZZ = Integers()


def polynomial(base: Ring, names, degrees=None, truncation: int = 4) -> PolynomialRing:
    names = tuple(names)
    degrees = tuple(degrees) if degrees is not None else (0,) * len(names)
    return PolynomialRing(base, names, degrees, truncation)


def square_zero(base: Ring, names, degrees=None) -> PolynomialRing:
    names = tuple(names)
    degrees = tuple(degrees) if degrees is not None else (0,) * len(names)
    return PolynomialRing(base, names, degrees, 1, square_zero=True)


class RingElement:
    """Immutable element of a :class:`Ring`, with the usual operators."""

    __slots__ = ("ring", "raw")

    def __init__(self, ring: Ring, raw):
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "raw", raw)

    def __setattr__(self, key, value):
        raise AttributeError("RingElement is immutable")

    def _other(self, other):
        if isinstance(other, RingElement) and other.ring != self.ring:
            try:
                return self.ring.coerce(other)
            except RingError:
                raise RingError(f"mixed rings {self.ring} and {other.ring}") from None
        return self.ring.coerce(other)

    def __add__(self, other):
        return RingElement(self.ring, self.ring.add(self.raw, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.ring.sub(self.raw, self._other(other)))

    def __rsub__(self, other):
        return RingElement(self.ring, self.ring.sub(self._other(other), self.raw))

    def __mul__(self, other):
        return RingElement(self.ring, self.ring.mul(self.raw, self._other(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, self.ring.neg(self.raw))

    def __truediv__(self, other):
        return self * RingElement(self.ring, self._other(other)).inverse()

    def __rtruediv__(self, other):
        return RingElement(self.ring, self._other(other)) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return RingElement(self.ring, self.ring.power(self.raw, n))

    def inverse(self) -> "RingElement":
        inv = self.ring.inverse(self.raw)
        if inv is None:
            raise RingError(f"{self} is not a unit in {self.ring}")
        return RingElement(self.ring, inv)

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.raw)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            return self.ring.eq(self.raw, self._other(other))
        except RingError:
            return NotImplemented

    def __hash__(self):
        return hash((self.ring, self.raw))

    def __str__(self):
        return self.ring.format(self.raw)

    def __repr__(self):
        return f"RingElement({self.ring}, {self})"


# ---------------------------------------------------------------- spec text

_BASE_RE = re.compile(
    r"\s*(?:(?:Z/|Zmod|integers-mod-|F)(?P<n>\d+)"
    r"|(?P<q>QQ|Q|rationals)|(?P<z>ZZ|Z|integers))\s*"
)
_GEN_RE = re.compile(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*(?::\s*(-?\d+))?\s*")


def _parse_gens(text: str):
    names, degrees = [], []
    for chunk in text.split(","):
        m = _GEN_RE.fullmatch(chunk)
        if not m:
            raise RingError(f"bad generator spec {chunk!r}")
        names.append(m.group(1))
        degrees.append(int(m.group(2) or 0))
    return names, degrees


def make_ring(spec) -> Ring:
    """Build a ring from its text form.

    Grammar: a base (``Q``, ``Z``, ``Z/6``, ``F2``) followed by any number of
    suffixes ``[x:2,y;M=3]`` (truncated polynomial extension, degrees default
    to 0, ``M`` defaults to 4) or ``<e1,e2:4>`` (square-zero extension).
    """
    if isinstance(spec, Ring):
        return spec
    text = str(spec).strip()
    m = _BASE_RE.match(text)
    if not m:
        raise RingError(f"unknown ring {text!r}")
    if m.group("q"):
        ring: Ring = QQ
    elif m.group("z"):
        ring = ZZ
    else:
        ring = IntegersMod(int(m.group("n")))
    rest = text[m.end():]
    while rest.strip():
        rest = rest.strip()
        if rest[0] == "[":
            close = rest.find("]")
            if close < 0:
                raise RingError(f"unclosed '[' in {text!r}")
            body, rest = rest[1:close], rest[close + 1:]
            trunc = 4
            if ";" in body:
                body, opt = body.split(";", 1)
                om = re.fullmatch(r"\s*M\s*=\s*(-?\d+)\s*", opt)
                if not om:
                    raise RingError(f"bad truncation option {opt!r}")
                trunc = int(om.group(1))
            names, degrees = _parse_gens(body)
            ring = polynomial(ring, names, degrees, trunc)
        elif rest[0] == "<":
            close = rest.find(">")
            if close < 0:
                raise RingError(f"unclosed '<' in {text!r}")
            names, degrees = _parse_gens(rest[1:close])
            rest = rest[close + 1:]
            ring = square_zero(ring, names, degrees)
        else:
            raise RingError(f"unexpected {rest!r} in ring spec")
    return ring


# --------------------------------------------------- element-level helpers

def ring_arith(a: RingElement, b: RingElement, op: str) -> RingElement:
    if op == "neg":
        return -a
    if a.ring != b.ring:
        raise RingError(f"mixed rings {a.ring} and {b.ring}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise RingError(f"unknown operation {op!r}")


def augment(a: RingElement):
    """Return ``(R-part, kernel part)`` of ``a``; the R-part lives in ``a.ring.base``."""
    r_part, kernel = a.ring.augment(a.raw)
    return RingElement(a.ring.base, r_part), RingElement(a.ring, kernel)


def is_invertible(a: RingElement):
    """``(True, inverse)`` for a unit, ``(False, None)`` otherwise."""
    inv = a.ring.inverse(a.raw)
    if inv is None:
        return False, None
    return True, RingElement(a.ring, inv)
