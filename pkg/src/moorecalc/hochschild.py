"""Hochschild complex of normalised derivations for Moore structures.

Cochains are normalised derivations ``A(t) dtau + B(t) dt`` with vanishing
constant terms; the differential is ``d(xi) = [xi, m]``.  For odd structures
it has the closed form

    d(A dtau + B dt) = (B1 w' - A1 v/t) dtau + B1 (v' - v/t) dt + 2t A1 dt

where ``A1``, ``B1`` are the odd parts of ``A``, ``B``.

Cohomology is computed by finite linear algebra on the monomial basis.  A
cochain window ``t^1..t^K`` is used for classes; cocycles are solved on a
wider window and projected, so that a truncation boundary cannot manufacture
spurious cocycles.  Supported coefficient rings: Q, Z and Z/n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from gmpy2 import mpq

from .calculus import Derivation, bracket
from .errors import HypothesisError, MooreError, StructureError
from .linalg import (
    QEchelon,
    column_echelon,
    integer_kernel,
    lattice_basis,
    lattice_coordinates,
    rational_kernel,
    rational_solve,
    smith_form,
)
from .moore import MooreStructure
from .rings import Integers, IntegersMod, Rationals
from .series import CommSeries, comm_derivative, divide_by_t, tilde

__all__ = [
    "differential",
    "differential_oracle",
    "differential_matrix",
    "cochain_vector",
    "cochain_from_vector",
    "ClassRep",
    "CohomologyPresentation",
    "CoboundarySolution",
    "cohomology",
    "solve_coboundary",
    "check_hh_hypotheses",
    "hh_module",
    "quotient_presentation",
    "hh_trivial",
    "BracketEntry",
    "bracket_table",
]


# ---------------------------------------------------------------- differential


def differential(xi: Derivation, m: MooreStructure) -> Derivation:
    """Closed-form ``[xi, m]`` for a normalised ``xi`` and an odd structure ``m``."""
    if not m.odd:
        raise StructureError("the closed differential is for odd Moore structures")
    if not xi.is_normalised():
        raise StructureError("cochains must be normalised derivations")
    A, B = xi.parts()
    A1, B1 = A.odd_part(), B.odd_part()
    v_t = divide_by_t(m.v)
    two = m.ctx.ring.from_int(2)
    tau_part = B1 * comm_derivative(m.w) - A1 * v_t
    t_part = B1 * (comm_derivative(m.v) - v_t) + A1.shift_up().scale(two)
    return Derivation.from_parts(xi.ctx, A=tau_part, B=t_part)


def differential_oracle(xi: Derivation, m) -> Derivation:
    """``[xi, m]`` by the generic bracket (``m`` a structure or a derivation)."""
    md = m.derivation if isinstance(m, MooreStructure) else m
    return bracket(xi, md)


def cochain_vector(xi: Derivation, K: int):
    """Raw coefficients ``[A_1..A_K, B_1..B_K]`` of a normalised derivation."""
    A, B = xi.parts()
    return [A.raw(i) for i in range(1, K + 1)] + [B.raw(i) for i in range(1, K + 1)]


def cochain_from_vector(ctx, vec, K: int) -> Derivation:
    ring = ctx.ring
    z = ring.zero
    A = CommSeries(ctx, [z] + [ring.coerce(x) for x in vec[:K]])
    B = CommSeries(ctx, [z] + [ring.coerce(x) for x in vec[K : 2 * K]])
    return Derivation.from_parts(ctx, A=A, B=B)


def _basis_cochain(ctx, part: str, i: int) -> Derivation:
    mono = CommSeries.monomial(ctx, i)
    return Derivation.from_parts(ctx, A=mono) if part == "A" else Derivation.from_parts(ctx, B=mono)


def differential_matrix(m: MooreStructure, k_in: int, k_out: int, method: str = "closed"):
    """Columns ``d(t^i dtau)``, ``d(t^i dt)`` for ``i <= k_in``, rows up to ``k_out``.

    ``method="closed"`` reads the closed formula off the coefficients of
    ``v`` and ``w`` directly; ``method="bracket"`` brackets each basis cochain
    with the structure derivation.
    """
    ring = m.ctx.ring
    z = ring.zero
    cols = []
    if method == "bracket":
        for part in ("A", "B"):
            for i in range(1, k_in + 1):
                img = differential_oracle(_basis_cochain(m.ctx, part, i), m)
                if img.order < k_out:
                    raise MooreError(
                        f"structure trusted to order {img.order}; window needs {k_out}"
                    )
                if not img.is_normalised():
                    raise StructureError("bracket of a cochain left the normalised subcomplex")
                cols.append(cochain_vector(img, k_out))
        return cols
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    if not m.odd:
        raise StructureError("closed-form matrices exist for odd structures only")
    if m.order < k_out:
        raise MooreError(f"structure trusted to order {m.order}; window needs {k_out}")
    w, v = m.w, m.v
    # coefficient lists: w'(t) = sum (j+1) w_{j+1} t^j ; v/t = sum v_{j+1} t^j
    wprime = [ring.scale(j + 1, w.raw(j + 1)) for j in range(k_out + 1)]
    v_t = [v.raw(j + 1) for j in range(k_out + 1)]
    vprime_minus = [ring.sub(ring.scale(j + 1, v.raw(j + 1)), v.raw(j + 1)) for j in range(k_out + 1)]
    two = ring.from_int(2)
    for part in ("A", "B"):
        for i in range(1, k_in + 1):
            col = [z] * (2 * k_out)
            if i % 2 == 1:
                if part == "A":
                    for j in range(k_out + 1):  # -t^i v/t in dtau
                        if 1 <= i + j <= k_out:
                            col[i + j - 1] = ring.sub(col[i + j - 1], v_t[j])
                    if i + 1 <= k_out:  # 2 t^(i+1) in dt
                        col[k_out + i] = ring.add(col[k_out + i], two)
                else:
                    for j in range(k_out + 1):
                        if 1 <= i + j <= k_out:
                            col[i + j - 1] = ring.add(col[i + j - 1], wprime[j])
                            col[k_out + i + j - 1] = ring.add(
                                col[k_out + i + j - 1], vprime_minus[j]
                            )
            cols.append(col)
    return cols


# ------------------------------------------------------------ linear algebra


def _kind(ring):
    if isinstance(ring, Rationals):
        return "Q"
    if isinstance(ring, Integers):
        return "Z"
    if isinstance(ring, IntegersMod):
        return "Zn"
    raise MooreError(f"cohomology computations need Q, Z or Z/n coefficients, not {ring}")


def _kernel_gens(ring, cols, nrows):
    kind = _kind(ring)
    if kind == "Q":
        return rational_kernel(cols, nrows)
    if kind == "Z":
        return integer_kernel(cols, nrows)
    n = ring.modulus
    ncols = len(cols)
    lifted = [list(c) for c in cols] + [[n * int(i == r) for i in range(nrows)] for r in range(nrows)]
    gens = [v[:ncols] for v in integer_kernel(lifted, nrows)]
    return gens


def _subquotient(ring, dim, z_gens, b_gens, prefer=None):
    """Decompose ``span(z_gens) / span(b_gens)`` (with ``b`` inside ``z``).

    Returns ``[(vector, annihilator)]`` where annihilator ``0`` marks a free
    summand.  Over Q, representatives are chosen greedily among the standard
    basis vectors in ``prefer`` order when possible.
    """
    kind = _kind(ring)
    if kind == "Q":
        Z = QEchelon(dim)
        for v in z_gens:
            Z.add(v)
        Bq = QEchelon(dim)
        for v in b_gens:
            Bq.add(v)
        need = Z.rank - Bq.rank
        reps = []
        order = prefer if prefer is not None else range(dim)
        for idx in order:
            if len(reps) == need:
                break
            e = [int(i == idx) for i in range(dim)]
            if Z.contains(e) and Bq.add(e):
                reps.append(e)
        for v in Z.basis():
            if len(reps) == need:
                break
            if Bq.add(v):
                reps.append(v)
        return [(v, 0) for v in reps]

    n = ring.modulus if kind == "Zn" else 0
    z_gens = [[int(x) for x in v] for v in z_gens]
    b_gens = [[int(x) for x in v] for v in b_gens]
    if n:
        units = [[n * int(i == j) for i in range(dim)] for j in range(dim)]
        z_gens = z_gens + units
        b_gens = b_gens + units
    Zb, piv = lattice_basis(z_gens, dim)
    r = len(Zb)
    if r == 0:
        return []
    coords = []
    for g in b_gens:
        c, _ = lattice_coordinates(Zb, piv, g)
        if c is None:
            raise MooreError("coboundary outside the cocycle lattice (window too small)")
        coords.append(c)
    X = [[c[i] for c in coords] for i in range(r)]
    diag, Ui = smith_form(X, r, len(coords)) if coords else ([], [[int(i == j) for i in range(r)] for j in range(r)])
    out = []
    for j in range(r):
        vec = [sum(Zb[i][k] * Ui[j][i] for i in range(r)) for k in range(dim)]
        d = diag[j] if j < len(diag) else 0
        if d == 1:
            continue
        if n:
            if d == n:
                d = 0
            vec = [x % n for x in vec]
        out.append((vec, d))
    # free summands first, then torsion by annihilator
    out.sort(key=lambda p: (p[1] != 0, p[1]))
    return out


# --------------------------------------------------------------- presentation


@dataclass
class ClassRep:
    """One summand of a cohomology presentation."""

    cocycle: Derivation
    annihilator: object  # RingElement, or None for a free summand
    degree: int  # t-degree of the leading monomial
    part: str  # "dtau" or "dt"
    standard_degree: int | None
    classical_degree: int | None  # 1 - standard

    @property
    def free(self) -> bool:
        return self.annihilator is None


@dataclass
class CohomologyPresentation:
    """Truncated module presentation of a cohomology computation.

    ``order`` is the truncation the caller asked for and ``window`` the
    t-degree bound of the cochains realising it.
    """

    ring: object
    order: int
    window: int
    classes: list = field(default_factory=list)
    bracket: list | None = None

    @property
    def free_rank(self) -> int:
        return sum(1 for c in self.classes if c.free)

    @property
    def annihilators(self):
        return [c.annihilator for c in self.classes if not c.free]

    @property
    def representatives(self):
        return [c.cocycle for c in self.classes]

    def invariants(self):
        """``(free rank, sorted annihilators as text)`` for comparisons."""
        anns = sorted(str(a) for a in self.annihilators)
        return self.free_rank, tuple(sorted(anns, key=lambda s: (len(s), s)))

    def is_zero(self) -> bool:
        return not self.classes

    def summary(self) -> str:
        ring = str(self.ring)
        parts = []
        if self.free_rank:
            parts.append(ring if self.free_rank == 1 else f"{ring}^{self.free_rank}")
        counts = {}
        for a in self.annihilators:
            counts[str(a)] = counts.get(str(a), 0) + 1
        for a in sorted(counts, key=lambda s: (len(s), s)):
            base = f"({ring}/{a})"
            parts.append(base if counts[a] == 1 else f"{base}^{counts[a]}")
        return " + ".join(parts) if parts else "0"

    def to_dict(self):
        return {
            "order": self.order,
            "window": self.window,
            "free_rank": self.free_rank,
            "annihilators": [str(a) for a in self.annihilators],
            "module": self.summary(),
            "representatives": [
                {
                    "cocycle": str(c.cocycle),
                    "annihilator": None if c.free else str(c.annihilator),
                    "part": c.part,
                    "t_degree": c.degree,
                    "standard_degree": c.standard_degree,
                    "classical_degree": c.classical_degree,
                }
                for c in self.classes
            ],
        }


def _class_rep(ctx, vec, K, ann):
    ring = ctx.ring
    xi = cochain_from_vector(ctx, vec, K)
    nz = [i for i, x in enumerate(vec) if not ring.is_zero(ring.coerce(x))]
    lead = nz[0] if nz else 0
    part = "dtau" if lead < K else "dt"
    degree = (lead % K) + 1
    # ground coefficients have degree 0: |t^i dtau| = i|t| + 1, |t^i dt| = (i - 1)|t|
    std = degree * ctx.t_degree + 1 if part == "dtau" else (degree - 1) * ctx.t_degree
    return ClassRep(
        cocycle=xi,
        annihilator=None if ann == 0 else ring(ann),
        degree=degree,
        part=part,
        standard_degree=std,
        classical_degree=1 - std,
    )


def _preferred_order(K):
    # monomials by t-degree, dtau before dt
    out = []
    for i in range(K):
        out += [i, K + i]
    return out


def cohomology(m: MooreStructure, K: int, method: str | None = None, margin: int | None = None,
               order: int | None = None) -> CohomologyPresentation:
    """Cohomology of the normalised complex in the t-degree window ``1..K``.

    Cocycles are solved on the window ``1..K+margin`` and projected; the
    coboundaries are the images of cochains of degree at most ``K``.
    """
    ctx = m.ctx
    ring = ctx.ring
    _kind(ring)
    if method is None:
        method = "closed" if m.odd else "bracket"
    if margin is None:
        margin = 2
        if m.odd and m.w:
            margin = m.w.valuation() + 2
    L = min(K + margin, m.order)
    if L < K:
        raise MooreError(f"structure trusted to order {m.order}; need at least {K}")
    cols_L = differential_matrix(m, L, L, method)
    z_full = _kernel_gens(ring, cols_L, 2 * L)
    keep = list(range(K)) + list(range(L, L + K))
    z_gens = [[v[i] for i in keep] for v in z_full]
    b_gens = []
    for part in (0, 1):
        for i in range(K):
            col = cols_L[part * L + i]
            b_gens.append([col[j] for j in keep])
    pieces = _subquotient(ring, 2 * K, z_gens, b_gens, prefer=_preferred_order(K))
    classes = [_class_rep(ctx, vec, K, ann) for vec, ann in pieces]
    return CohomologyPresentation(ring, K if order is None else order, K, classes)


# ----------------------------------------------------------------- hypotheses


def check_hh_hypotheses(m: MooreStructure):
    """Failed hypotheses for the quotient description, as readable strings."""
    ring = m.ctx.ring
    kind = _kind(ring)
    problems = []
    if ring.inverse(ring.from_int(2)) is None:
        problems.append(f"2 is not invertible in {ring}")
    if not m.w:
        problems.append("w = 0")
        return problems
    k2 = m.w.valuation()
    k = k2 // 2
    wk = m.w.raw(k2)
    if kind == "Zn":
        n = ring.modulus
        if gcd(int(wk), n) != 1:
            problems.append(f"leading coefficient w_{k} = {ring.format(wk)} is a zero divisor")
        if gcd(k, n) != 1:
            problems.append(f"{ring} has {k}-torsion")
    return problems


def hh_module(m: MooreStructure, order: int, check_hypotheses: bool = True,
              method: str = "closed") -> CohomologyPresentation:
    """Cohomology of a normal-form odd structure, truncated at ``t~^order``.

    ``order`` counts powers of ``t~ = t^2``: the cochain window is ``t^1..t^(2 order)``
    and the answer is comparable with ``R[t~]/(w~', t~^order)``.  The module is
    computed from the complex, not from that quotient.
    """
    if not m.odd:
        raise StructureError("hh_module expects an odd Moore structure")
    if m.v:
        raise StructureError("structure is not in normal form (v != 0); apply normal_form first")
    if check_hypotheses:
        problems = check_hh_hypotheses(m)
        if problems:
            raise HypothesisError("; ".join(problems))
    return cohomology(m, 2 * order, method=method, order=order)


def quotient_presentation(w: CommSeries, order: int) -> CohomologyPresentation:
    """Independent route: ``R[t~]/(w~'(t~), t~^order)`` via relation matrices."""
    ring = w.ctx.ring
    wt = tilde(w)
    wtp = comm_derivative(wt)
    if wtp.order < order - 1:
        raise MooreError("w is not known to a high enough order")
    dim = order
    z_gens = [[int(i == j) for i in range(dim)] for j in range(dim)]
    rels = []
    for j in range(order):
        rel = [ring.zero] * dim
        for i in range(dim - j):
            rel[i + j] = wtp.raw(i)
        rels.append(rel)
    pieces = _subquotient(ring, dim, z_gens, rels)
    ctx = w.ctx
    classes = []
    for vec, ann in pieces:
        cs = CommSeries(ctx, [ring.coerce(x) for x in vec])
        nz = cs.support()
        classes.append(
            ClassRep(
                cocycle=Derivation.from_parts(ctx, A=CommSeries(ctx, [ring.zero] + list(cs.coeffs))),
                annihilator=None if ann == 0 else ring(ann),
                degree=nz[0] if nz else 0,
                part="quotient",
                standard_degree=None,
                classical_degree=None,
            )
        )
    return CohomologyPresentation(ring, order, order, classes)


# ----------------------------------------------------------------- coboundaries


@dataclass
class CoboundarySolution:
    """Outcome of :func:`solve_coboundary`."""

    is_coboundary: bool
    preimage: Derivation | None
    residue: Derivation
    order: int

    def __bool__(self):
        return self.is_coboundary


def _solve(ring, cols, nrows, y):
    kind = _kind(ring)
    ncols = len(cols)
    if kind == "Q":
        x, res = rational_solve(cols, nrows, y)
        return x, res
    y = [int(v) for v in y]
    n = ring.modulus if kind == "Zn" else 0
    work = [[int(v) for v in c] for c in cols]
    if n:
        work += [[n * int(i == r) for i in range(nrows)] for r in range(nrows)]
    if not work:
        return ([0] * ncols if not any(y) else None), y
    E, V, piv = column_echelon(work, nrows)
    coords, res = lattice_coordinates(E[: len(piv)], piv, y)
    if n:
        res = [v % n for v in res]
    if coords is None:
        return None, res
    x = [sum(c * V[k][i] for k, c in enumerate(coords)) for i in range(len(work))]
    x = x[:ncols]
    if n:
        x = [v % n for v in x]
    return x, res


def solve_coboundary(target: Derivation, m: MooreStructure, order: int | None = None,
                     check_cocycle: bool = True) -> CoboundarySolution:
    """Find ``eta`` with ``[eta, m] = target`` up to ``order``, or certify a class.

    Odd structures must be in normal form.  Even structures are handled with
    the bracket matrix.  A returned preimage is homogeneous of parity one less
    than the target and is verified before it is returned.
    """
    ctx = m.ctx
    ring = ctx.ring
    if m.odd and m.v:
        raise StructureError("solve_coboundary needs v = 0; apply normal_form first")
    if not target.is_normalised():
        raise StructureError("target must be a normalised derivation")
    K = min(target.order, m.order) if order is None else order
    method = "closed" if m.odd else "bracket"
    cols = differential_matrix(m, K, K, method)
    y = cochain_vector(target, K)
    if check_cocycle:
        dy = _apply_cols(ring, cols, y, 2 * K)
        if any(not ring.is_zero(v) for v in dy):
            raise StructureError("target is not a cocycle")
    x, res = _solve(ring, cols, 2 * K, y)
    residue = cochain_from_vector(ctx, res, K)
    if x is None:
        return CoboundarySolution(False, None, residue, K)
    eta = cochain_from_vector(ctx, x, K)
    p = target.parity if target else None
    if p is not None:
        parts = eta.homogeneous_parts()
        eta = parts.get((p + 1) % 2, Derivation.zero(ctx))
    check = _apply_cols(ring, cols, cochain_vector(eta, K), 2 * K)
    if any(not ring.eq(a, b) for a, b in zip(check, (ring.coerce(v) for v in y))):
        raise MooreError("coboundary preimage failed verification")
    return CoboundarySolution(True, eta.truncate(K), residue, K)


def _apply_cols(ring, cols, x, nrows):
    out = [ring.zero] * nrows
    for col, c in zip(cols, x):
        c = ring.coerce(c)
        if ring.is_zero(c):
            continue
        for i, a in enumerate(col):
            out[i] = ring.add(out[i], ring.mul(c, a))
    return out


# ------------------------------------------------------------------ brackets


@dataclass
class BracketEntry:
    left: int
    right: int
    value: Derivation
    expected: Derivation | None
    agrees: bool | None


def _expected_bracket(x: Derivation, y: Derivation) -> Derivation:
    """``[B dt, A dtau] = B A' dtau`` and its companions on the trivial algebra."""
    ctx = x.ctx
    Ax, Bx = x.parts()
    Ay, By = y.parts()
    # x, y are single-part classes: A dtau with A even, or B dt with B odd
    if Bx and Ay:
        return Derivation.from_parts(ctx, A=Bx * comm_derivative(Ay))
    if Ax and By:
        return Derivation.from_parts(ctx, A=-(By * comm_derivative(Ax)))
    if Bx and By:
        return Derivation.from_parts(ctx, B=Bx * comm_derivative(By) - By * comm_derivative(Bx))
    return Derivation.zero(ctx)


def bracket_table(pres: CohomologyPresentation, expected=None):
    """Brackets of all ordered pairs of representatives, via the generic bracket.

    ``expected`` is an optional function giving the predicted value; each
    entry records whether the two agree through the presentation window.
    """
    K = pres.window
    reps = pres.representatives
    table = []
    for i, x in enumerate(reps):
        for j, y in enumerate(reps):
            val = bracket(x, y).truncate(K)
            exp = expected(x, y).truncate(K) if expected else None
            table.append(BracketEntry(i, j, val, exp, None if exp is None else val == exp))
    return table


def hh_trivial(ctx, order: int, with_bracket: bool = True) -> CohomologyPresentation:
    """Cohomology of the trivial odd algebra through t-degree ``order``.

    Classes are ``A dtau`` (A even) and ``B dt`` (B odd); the bracket table is
    computed with the generic bracket and compared with ``[B dt, A dtau] = B A' dtau``.
    """
    if not ctx.odd:
        raise StructureError("hh_trivial is stated for the odd trivial algebra")
    ring = ctx.ring
    if ring.inverse(ring.from_int(2)) is None:
        raise HypothesisError(f"2 is not invertible in {ring}")
    if ctx.order < order + 2:
        ctx = ctx.with_order(order + 2)
    m0 = MooreStructure(ctx)
    pres = cohomology(m0, order, order=order)
    if with_bracket:
        pres.bracket = bracket_table(pres, _expected_bracket)
    return pres
