"""Text input for series, derivations and jets.

Grammar (whitespace-insensitive)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/")? unary)*      juxtaposition multiplies
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" INT)?
    atom   := INT | NAME | "(" expr ")"

Names are ``tau``, ``t``, the derivation markers ``dtau`` and ``dt``, and the
generators of the coefficient ring.  A marker may only close a product, so
``t^2 dtau`` and ``(t + t^3)*dt`` are derivation terms.  Division is only by
invertible constants, which covers rational literals such as ``1/2``.
"""

from __future__ import annotations

import re

from .calculus import Derivation
from .errors import ParseError
from .series import TAU, T, CommSeries, GradingContext, NcSeries

__all__ = [
    "tokenize",
    "parse_expression",
    "parse_series",
    "parse_comm_series",
    "parse_derivation",
    "parse_jet",
    "expression_length",
]

_TOKEN_RE = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^():;]))")
_MARKERS = {"dtau": TAU, "dt": T}


def tokenize(text: str):
    """List of ``(kind, value, position)``; kinds are num, name, op, end."""
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[bad]!r}", text, bad,
                             "number, name, operator or parenthesis")
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Value:
    """Sum of marked parts: ``{None: plain, 'T': coeff of dtau, 't': coeff of dt}``."""

    __slots__ = ("parts",)

    def __init__(self, parts):
        self.parts = {k: v for k, v in parts.items() if v.terms}

    @property
    def marked(self):
        return any(k is not None for k in self.parts)


class _Parser:
    def __init__(self, text: str, ctx: GradingContext):
        self.text = text
        self.ctx = ctx
        self.tokens = tokenize(text)
        self.i = 0
        ring = ctx.ring
        self.gens = set(ring.generator_names)

    # token helpers
    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, expected=None, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2], expected)

    def expect_op(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"unexpected {tok[1] or 'end of input'!r}", repr(op))
        return self.take()

    # values
    def const(self, raw):
        return _Value({None: NcSeries(self.ctx, {"": raw})})

    def zero(self):
        return _Value({})

    def add(self, a, b, sign=1):
        out = dict(a.parts)
        for k, v in b.parts.items():
            v = v if sign > 0 else -v
            out[k] = out[k] + v if k in out else v
        return _Value(out)

    def mul(self, a, b, tok):
        if a.marked:
            self.error("a derivation marker must end its product", "end of term", tok)
        plain = a.parts.get(None)
        if plain is None:
            return self.zero()
        return _Value({k: plain * v for k, v in b.parts.items()})

    def divide(self, a, b, tok):
        if b.marked or set(b.parts) - {None}:
            self.error("can only divide by a constant", "constant divisor", tok)
        d = b.parts.get(None)
        if d is None or set(d.terms) - {""}:
            self.error("can only divide by a constant", "constant divisor", tok)
        ring = self.ctx.ring
        inv = ring.inverse(d.terms[""])
        if inv is None:
            self.error(f"{ring.format(d.terms[''])} is not invertible in {ring}", "unit", tok)
        return _Value({k: v.scale(inv) for k, v in a.parts.items()})

    # grammar
    def parse(self) -> _Value:
        val = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.error(f"unexpected {tok[1]!r}", "operator or end of input")
        return val

    def expr(self):
        val = self.term()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                val = self.add(val, self.term(), 1 if tok[1] == "+" else -1)
            else:
                return val

    def _starts_atom(self, tok):
        return tok[0] in ("num", "name") or (tok[0] == "op" and tok[1] == "(")

    def term(self):
        val = self.unary()
        while True:
            tok = self.peek()
            if tok[0] == "op" and tok[1] == "*":
                self.take()
                val = self.mul(val, self.unary(), tok)
            elif tok[0] == "op" and tok[1] == "/":
                self.take()
                val = self.divide(val, self.unary(), tok)
            elif self._starts_atom(tok):
                val = self.mul(val, self.power(), tok)
            else:
                return val

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] in "+-":
            self.take()
            val = self.unary()
            return val if tok[1] == "+" else self.add(self.zero(), val, -1)
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            exp_tok = self.peek()
            if exp_tok[0] != "num":
                self.error("exponent must be a non-negative integer", "integer")
            self.take()
            if base.marked:
                self.error("derivation markers cannot be raised to a power", None, tok)
            n = int(exp_tok[1])
            out = self.const(self.ctx.ring.one)
            for _ in range(n):
                out = self.mul(out, base, tok)
            return out
        return base

    def atom(self):
        tok = self.peek()
        kind, value, _ = tok
        ring = self.ctx.ring
        if kind == "num":
            self.take()
            return self.const(ring.from_int(int(value)))
        if kind == "name":
            self.take()
            if value == "tau":
                return _Value({None: NcSeries.tau(self.ctx)})
            if value == "t":
                return _Value({None: NcSeries.t(self.ctx)})
            if value in _MARKERS:
                return _Value({_MARKERS[value]: NcSeries.one(self.ctx)})
            if value in self.gens:
                return self.const(ring.gen(value))
            self.error(f"unknown name {value!r}", "tau, t, dtau, dt or a ring generator", tok)
        if kind == "op" and value == "(":
            self.take()
            val = self.expr()
            self.expect_op(")")
            return val
        self.error(f"unexpected {value or 'end of input'!r}", "number, name or '('")


def parse_expression(text: str, ctx: GradingContext) -> dict:
    """``{None | 'T' | 't': NcSeries}``: plain part and the dtau/dt coefficients."""
    return dict(_Parser(text, ctx).parse().parts)


def _plain(text, ctx):
    parts = parse_expression(text, ctx)
    if set(parts) - {None}:
        raise ParseError("derivation marker in a series", text, 0, "series without dtau/dt")
    return parts.get(None, NcSeries.zero(ctx))


def parse_series(text: str, ctx: GradingContext, allow_constant: bool = True):
    """A :class:`CommSeries` when only ``t`` occurs, otherwise an :class:`NcSeries`."""
    s = _plain(text, ctx)
    if not allow_constant and s.has_constant():
        raise ParseError("constant term is not allowed here", text, 0, "series without constant")
    if s.is_t_only():
        return s.to_comm()
    return s


def parse_comm_series(text: str, ctx: GradingContext, allow_constant: bool = False) -> CommSeries:
    s = parse_series(text, ctx, allow_constant)
    if isinstance(s, NcSeries):
        raise ParseError("expected a series in t alone", text, text.find("tau"), "no tau")
    return s


def parse_derivation(text: str, ctx: GradingContext) -> Derivation:
    """``A dtau + B dt``; images may contain ``tau`` (general derivations)."""
    parts = parse_expression(text, ctx)
    if None in parts:
        raise ParseError("every term of a derivation needs dtau or dt", text, 0, "dtau or dt")
    zero = NcSeries.zero(ctx)
    return Derivation(ctx, parts.get(TAU, zero), parts.get(T, zero))


_JET_KEY = re.compile(r"\s*m(\d+)\s*:\s*")


def parse_jet(text: str, ctx: GradingContext) -> dict:
    """``"m2: t^2 dtau; m3: ..."`` -> ``{2: Derivation, 3: ...}``."""
    out = {}
    pos = 0
    for chunk in text.split(";"):
        if not chunk.strip():
            pos += len(chunk) + 1
            continue
        m = _JET_KEY.match(chunk)
        if not m:
            raise ParseError("jet entries look like 'mK: derivation'", text, pos, "mK:")
        k = int(m.group(1))
        if k < 1:
            raise ParseError("jet coefficients start at m1", text, pos + m.start(1), "k >= 1")
        if k in out:
            raise ParseError(f"m{k} given twice", text, pos, "distinct indices")
        body = chunk[m.end():]
        try:
            out[k] = parse_derivation(body, ctx)
        except ParseError as exc:
            raise ParseError(str(exc).split(" at position")[0], text, pos + m.end() + exc.pos,
                             exc.expected) from None
        pos += len(chunk) + 1
    return out


def expression_length(text: str, ctx: GradingContext, cap: int = 200) -> int:
    """Longest word occurring in ``text`` (used to size the truncation order)."""
    big = ctx.with_order(cap)
    parts = parse_expression(text, big)
    lengths = [len(w) for s in parts.values() for w in s.terms]
    return max(lengths, default=0)
