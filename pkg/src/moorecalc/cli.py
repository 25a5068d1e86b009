"""Command line front end.

Every subcommand prints a report, as text or as JSON with a fixed layout::

    {"schema": ..., "command": ..., "inputs": {...}, "trusted_order": N, "result": {...}}

Exit codes: 0 success, 1 the computation ran and the answer is negative (a
witness, a stuck trivialisation, a failed hypothesis), 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import json

from .calculus import is_square_zero
from .deform import (
    DeformationJet,
    DeformationOverBase,
    classify_miniversal,
    extend_jet,
    integrate_infinitesimal,
    jet_order_check,
    obstruction,
    trivialize,
)
from .errors import ContextMismatch, MooreError, ParseError, RingError
from .hochschild import hh_module, hh_trivial, quotient_presentation
from .moore import GaugePair, MooreStructure, act, act_by_conjugation, normal_form
from .parsing import expression_length, parse_comm_series, parse_derivation, parse_jet
from .rings import make_ring
from .series import GradingContext

SCHEMA = "moorecalc.report/1"

USAGE_ERRORS = (ParseError, RingError, ContextMismatch)


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ arguments


def _common(p):
    p.add_argument("--ring", default="Q", help="coefficient ring, e.g. Q, Z, Z/6, F2, Q[x,y;M=3], Q<e>")
    par = p.add_mutually_exclusive_group()
    par.add_argument("--d", type=int, help="Moore degree d")
    par.add_argument("--d-parity", choices=("odd", "even"))
    par.add_argument("--odd", action="store_true", help="same as --d-parity odd")
    par.add_argument("--even", action="store_true", help="same as --d-parity even")
    p.add_argument("--order", type=int, default=8, help="truncation order (default 8)")
    p.add_argument("--strict", action="store_true", help="check integer degrees, not just parities")
    p.add_argument("--format", choices=("text", "json"), default="text")


def _structure_args(p, suffix=""):
    p.add_argument(f"--u{suffix}", help="even case: dtau-part u(t)")
    p.add_argument(f"--v{suffix}", help="odd case: dt-part v(t)")
    p.add_argument(f"--w{suffix}", help="odd case: dtau-part w(t)")


def _jet_args(p, required=True):
    p.add_argument("--jet", required=required, help='e.g. "m1: t^2 dtau; m2: t^3 dt"')
    p.add_argument("--jet-order", type=int, help="jet order n (default: highest index given)")
    p.add_argument("--s-degree", type=int, help="degree of the jet parameter (even)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="moorecalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-structure", help="check m^2 = 0")
    _common(p)
    _structure_args(p)
    p.add_argument("--derivation", help="check an arbitrary derivation instead, e.g. 'tau^2 dtau + ...'")

    p = sub.add_parser("conjugate", help="act on a structure by a gauge pair (G, F)")
    _common(p)
    _structure_args(p)
    p.add_argument("--G", default="0")
    p.add_argument("--F", default="t")

    p = sub.add_parser("normal-form", help="bring an odd structure to m0 + u dtau")
    _common(p)
    _structure_args(p)

    p = sub.add_parser("hh", help="Hochschild cohomology of a normal-form odd structure")
    _common(p)
    _structure_args(p)
    p.add_argument("--trivial", action="store_true", help="cohomology and bracket of the trivial algebra")
    p.add_argument("--no-hypotheses", action="store_true", help="skip the hypothesis check (2 a unit, ...)")
    p.add_argument("--quotient", action="store_true", help="also compute R[t~]/(w~') for comparison")

    p = sub.add_parser("deform-check", help="structure equations of a deformation jet")
    _common(p)
    _structure_args(p)
    _jet_args(p)

    p = sub.add_parser("obstruction", help="obstruction to extending a jet by one order")
    _common(p)
    _structure_args(p)
    _jet_args(p)

    p = sub.add_parser("trivialize", help="gauge a jet away order by order")
    _common(p)
    _structure_args(p)
    _jet_args(p)
    p.add_argument("--max-order", type=int)

    p = sub.add_parser("integrate", help="exponentiate an infinitesimal automorphism")
    _common(p)
    _structure_args(p)
    p.add_argument("--phi", required=True, help="even cocycle, e.g. 't dt'")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--jet-order", type=int, default=4)
    p.add_argument("--s-degree", type=int)

    p = sub.add_parser("classify", help="miniversal classification of a deformation of m0")
    _common(p)
    _structure_args(p)

    p = sub.add_parser("verify-equivalence", help="check that (G, F) carries one structure to another")
    _common(p)
    _structure_args(p)
    _structure_args(p, "2")
    p.add_argument("--G", default="0")
    p.add_argument("--F", default="t")
    return parser


# -------------------------------------------------------------------- helpers


def _inputs(args) -> dict:
    skip = {"format", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v not in (None, False)}


def _d_value(args) -> int:
    if args.d is not None:
        return args.d
    if args.d_parity:
        return 1 if args.d_parity == "odd" else 0
    if args.odd:
        return 1
    if args.even:
        return 0
    if getattr(args, "u", None) is not None or getattr(args, "u2", None) is not None:
        return 0
    return 1


def _texts(args):
    out = []
    for key in ("u", "v", "w", "u2", "v2", "w2", "G", "F", "derivation", "phi"):
        val = getattr(args, key, None)
        if val:
            out.append(val)
    jet = getattr(args, "jet", None)
    if jet:
        out += [chunk.split(":", 1)[-1] for chunk in jet.split(";") if chunk.strip()]
    return out


def _context(args, extra: int = 0) -> GradingContext:
    ring = make_ring(args.ring)
    d = _d_value(args)
    if args.order < 1:
        raise UsageError("--order must be positive")
    probe = GradingContext(ring, d, 8, args.strict)
    longest = max((expression_length(t, probe) for t in _texts(args)), default=0)
    order = max(args.order, longest + 2) + extra
    return GradingContext(ring, d, order, args.strict)


def _series(text, ctx, default="0"):
    return parse_comm_series(text if text is not None else default, ctx)


def _structure(args, ctx, suffix="") -> MooreStructure:
    u = getattr(args, f"u{suffix}")
    v = getattr(args, f"v{suffix}")
    w = getattr(args, f"w{suffix}")
    if ctx.odd:
        if u is not None:
            raise UsageError(f"--u{suffix} is for even structures; use --v{suffix}/--w{suffix}")
        return MooreStructure(ctx, v=_series(v, ctx), w=_series(w, ctx))
    if v is not None or w is not None:
        raise UsageError(f"--v{suffix}/--w{suffix} are for odd structures; use --u{suffix}")
    return MooreStructure(ctx, u=_series(u, ctx))


def _structure_dict(m: MooreStructure) -> dict:
    if m.odd:
        return {"v": str(m.v), "w": str(m.w), "text": str(m)}
    return {"u": str(m.u), "text": str(m)}


def _jet(args, ctx, m) -> DeformationJet:
    coeffs = parse_jet(args.jet, ctx)
    n = args.jet_order if args.jet_order is not None else max(coeffs, default=0)
    if any(k > n for k in coeffs):
        raise UsageError("jet has coefficients beyond --jet-order")
    return DeformationJet(m, [coeffs.get(i) for i in range(1, n + 1)], args.s_degree)


# ------------------------------------------------------------------- commands


def cmd_check_structure(args):
    ctx = _context(args)
    if args.derivation:
        xi = parse_derivation(args.derivation, ctx)
        subject = str(xi)
    else:
        xi = _structure(args, ctx).derivation
        subject = str(xi)
    res = is_square_zero(xi)
    result = {"derivation": subject, "square_zero": res.holds, "message": res.describe()}
    return (0 if res else 1), res.order if res else ctx.order, result


def cmd_conjugate(args):
    ctx = _context(args)
    m = _structure(args, ctx)
    p = GaugePair(_series(args.G, ctx), _series(args.F, ctx))
    img = act(p, m)
    oracle = act_by_conjugation(p, m)
    result = {
        "pair": {"G": str(p.G), "F": str(p.F)},
        "image": _structure_dict(img),
        "agrees_with_conjugation": img == oracle,
    }
    return (0 if img == oracle else 1), img.order, result


def cmd_normal_form(args):
    ctx = _context(args)
    if not ctx.odd:
        raise UsageError("normal-form is for odd structures")
    nf = normal_form(_structure(args, ctx))
    result = {
        "gauge": {"G": str(nf.pair.G), "F": str(nf.pair.F)},
        "u": str(nf.u),
        "image": _structure_dict(nf.image),
    }
    return 0, nf.u.order, result


def cmd_hh(args):
    if args.trivial:
        ctx = _context(args, extra=2)
        pres = hh_trivial(ctx, args.order)
        result = pres.to_dict()
        entries = pres.bracket or []
        result["bracket"] = {
            "entries": len(entries),
            "agreeing": sum(1 for e in entries if e.agrees),
            "nonzero": [
                {"left": e.left, "right": e.right, "value": str(e.value)}
                for e in entries if not e.value.is_zero()
            ],
        }
        ok = all(e.agrees for e in entries)
        return (0 if ok else 1), pres.window, result
    args_w = args.w or "0"
    ring_ctx = _context(args)
    w_val = _series(args_w, ring_ctx)
    margin = (w_val.valuation() if w_val else 0) + 4
    ctx = ring_ctx.with_order(max(ring_ctx.order, 2 * args.order + margin))
    m = _structure(args, ctx)
    pres = hh_module(m, args.order, check_hypotheses=not args.no_hypotheses)
    result = pres.to_dict()
    if args.quotient:
        q = quotient_presentation(m.w, args.order)
        result["quotient"] = {"free_rank": q.free_rank, "module": q.summary()}
        result["agrees_with_quotient"] = q.invariants() == pres.invariants()
    return 0, pres.window, result


def _jet_setup(args):
    ctx = _context(args)
    m = _structure(args, ctx)
    return ctx, m, _jet(args, ctx, m)


def cmd_deform_check(args):
    ctx, m, J = _jet_setup(args)
    chk = jet_order_check(J)
    result = {"jet": J.to_dict(), "holds": chk.holds, "failing_k": chk.failing_k}
    if not chk:
        result["residue"] = str(chk.residue)
    return (0 if chk else 1), ctx.order, result


def cmd_obstruction(args):
    ctx, m, J = _jet_setup(args)
    obs = obstruction(J)
    result = {"jet": J.to_dict(), "obstruction": str(obs), "cocycle": True}
    code = 0
    if m.is_normal():
        ext = extend_jet(J)
        result["extendible"] = ext.extendible
        if ext:
            result["next_coefficient"] = str(ext.jet.coefficient(J.order + 1))
        else:
            result["class"] = str(ext.residue)
            code = 1
    return code, ctx.order, result


def cmd_trivialize(args):
    ctx, m, J = _jet_setup(args)
    max_order = args.max_order if args.max_order is not None else J.order
    res = trivialize(J, max_order)
    result = res.to_dict()
    result["jet"] = J.to_dict()
    return (0 if res else 1), ctx.order, result


def cmd_integrate(args):
    ctx = _context(args)
    m = _structure(args, ctx)
    phi = parse_derivation(args.phi, ctx)
    jet = integrate_infinitesimal(phi, args.k, args.jet_order, m, args.s_degree)
    result = jet.to_dict()
    result.update({"multiplicative": True, "commutes_with_m": True})
    return 0, jet.endo.order, result


def cmd_classify(args):
    ctx = _context(args)
    D = DeformationOverBase(_structure(args, ctx))
    c = classify_miniversal(D)
    return (0 if c.agrees else 1), D.order, c.to_dict()


def cmd_verify_equivalence(args):
    ctx = _context(args)
    m1 = _structure(args, ctx)
    m2 = _structure(args, ctx, "2")
    p = GaugePair(_series(args.G, ctx), _series(args.F, ctx))
    img = act(p, m1)
    ok = img == m2
    result = {"equivalent": ok, "image": _structure_dict(img), "target": _structure_dict(m2)}
    return (0 if ok else 1), min(img.order, m2.order), result


COMMANDS = {
    "check-structure": cmd_check_structure,
    "conjugate": cmd_conjugate,
    "normal-form": cmd_normal_form,
    "hh": cmd_hh,
    "deform-check": cmd_deform_check,
    "obstruction": cmd_obstruction,
    "trivialize": cmd_trivialize,
    "integrate": cmd_integrate,
    "classify": cmd_classify,
    "verify-equivalence": cmd_verify_equivalence,
}


# --------------------------------------------------------------------- output


def _text_lines(obj, indent=0):
    pad = "  " * indent
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v:
                yield f"{pad}{k}:"
                yield from _text_lines(v, indent + 1)
            else:
                yield f"{pad}{k}: {v}"
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)):
                yield f"{pad}-"
                yield from _text_lines(item, indent + 1)
            else:
                yield f"{pad}- {item}"
    else:
        yield f"{pad}{obj}"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2)
    return "\n".join(_text_lines(report))


def run(argv=None):
    """Parse ``argv`` and execute; returns ``(exit code, report, format)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    report = {"schema": SCHEMA, "command": args.command, "inputs": _inputs(args)}
    try:
        code, trusted, result = COMMANDS[args.command](args)
        report["trusted_order"] = trusted
        report["result"] = result
    except (UsageError, *USAGE_ERRORS) as exc:
        code = 2
        report["trusted_order"] = None
        report["result"] = {"error": type(exc).__name__, "message": str(exc)}
    except MooreError as exc:
        code = 1
        report["trusted_order"] = None
        report["result"] = {"error": type(exc).__name__, "message": str(exc)}
    return code, report, args.format


def main(argv=None) -> int:
    try:
        code, report, fmt = run(argv)
    except SystemExit as exc:  # argparse has already printed the usage message
        return int(exc.code or 0)
    print(render(report, fmt))
    return code
