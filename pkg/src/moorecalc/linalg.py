"""Exact linear algebra over Z, Z/n and Q for cohomology computations.

Vectors are plain lists.  Integer matrices are stored column by column
because every elimination here works with unimodular column operations.

Z/n is handled by lifting to Z: a Z/n-submodule of ``(Z/n)^k`` becomes the
lattice of its lifts, which always contains ``n Z^k``.
"""

from __future__ import annotations

from gmpy2 import mpq

__all__ = [
    "xgcd",
    "column_echelon",
    "integer_kernel",
    "lattice_basis",
    "lattice_coordinates",
    "smith_form",
    "QEchelon",
    "rational_solve",
    "rational_kernel",
]


def xgcd(a: int, b: int):
    """``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``x a + y b = g``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _combine(cols, i, j, x, y, u, v):
    """cols[i], cols[j] <- x ci + y cj, u ci + v cj."""
    ci, cj = cols[i], cols[j]
    cols[i] = [x * a + y * b for a, b in zip(ci, cj)]
    cols[j] = [u * a + v * b for a, b in zip(ci, cj)]


def column_echelon(cols, nrows: int, track=True):
    """Unimodular column reduction.

    Returns ``(E, V, pivots)`` with ``E = M V`` in column echelon form: column
    ``k < len(pivots)`` has its first nonzero entry in row ``pivots[k]``,
    strictly increasing in ``k``; the remaining columns of ``E`` are zero, so
    the matching columns of ``V`` form a basis of the integer kernel.
    """
    E = [list(c) for c in cols]
    ncols = len(E)
    V = [[int(i == j) for i in range(ncols)] for j in range(ncols)] if track else None
    pivots = []
    p = 0
    for r in range(nrows):
        if p >= ncols:
            break
        for j in range(p + 1, ncols):
            b = E[j][r]
            if b == 0:
                continue
            a = E[p][r]
            if a == 0:
                E[p], E[j] = E[j], E[p]
                if track:
                    V[p], V[j] = V[j], V[p]
                continue
            if b % a == 0:
                q = b // a
                E[j] = [y - q * x for x, y in zip(E[p], E[j])]
                if track:
                    V[j] = [y - q * x for x, y in zip(V[p], V[j])]
                continue
            g, x, y = xgcd(a, b)
            _combine(E, p, j, x, y, -b // g, a // g)
            if track:
                _combine(V, p, j, x, y, -b // g, a // g)
        if E[p][r] != 0:
            if E[p][r] < 0:
                E[p] = [-x for x in E[p]]
                if track:
                    V[p] = [-x for x in V[p]]
            # keep earlier pivot columns small (Hermite-style reduction)
            piv = E[p][r]
            for k in range(p):
                q = E[k][r] // piv
                if q:
                    E[k] = [y - q * x for x, y in zip(E[p], E[k])]
                    if track:
                        V[k] = [y - q * x for x, y in zip(V[p], V[k])]
            pivots.append(r)
            p += 1
    return E, V, pivots


def integer_kernel(cols, nrows: int):
    """Lattice basis (list of vectors) of ``{x in Z^k : M x = 0}``."""
    if not cols:
        return []
    _, V, pivots = column_echelon(cols, nrows)
    return V[len(pivots):]


def lattice_basis(gens, dim: int):
    """Echelon basis and pivot rows of the lattice spanned by ``gens``."""
    if not gens:
        return [], []
    E, _, pivots = column_echelon(gens, dim, track=False)
    return E[: len(pivots)], pivots


def lattice_coordinates(basis, pivots, vec):
    """Integer coordinates of ``vec`` in an echelon basis.

    Returns ``(coords, residue)``; ``coords`` is ``None`` when ``vec`` is
    not in the lattice, and ``residue`` is ``vec`` reduced against the basis.
    """
    rest = list(vec)
    coords = []
    ok = True
    for col, r in zip(basis, pivots):
        q, rem = divmod(rest[r], col[r])
        if rem:
            ok = False
        coords.append(q)
        if q:
            rest = [x - q * c for x, c in zip(rest, col)]
    if any(rest):
        ok = False
    return (coords if ok else None), rest


def smith_form(rows, nrows: int, ncols: int):
    """Smith normal form with the inverse left transform.

    For the ``nrows x ncols`` integer matrix ``X`` returns ``(diag, Uinv)`` with
    ``U X V = S`` diagonal, ``diag`` its nonzero diagonal entries (positive,
    each dividing the next) and ``Uinv = U^-1`` as a list of columns.
    Replacing a basis ``b`` by ``b Uinv`` diagonalises the relations.
    """
    A = [list(r) for r in rows]
    Ui = [[int(i == j) for i in range(nrows)] for j in range(nrows)]  # columns

    def row_op(i, j, x, y, u, v):
        # rows i, j <- x ri + y rj, u ri + v rj ; inverse acts on columns of Ui
        ri, rj = A[i], A[j]
        A[i] = [x * a + y * b for a, b in zip(ri, rj)]
        A[j] = [u * a + v * b for a, b in zip(ri, rj)]
        # R = [[x, y], [u, v]], det 1 -> R^-1 = [[v, -y], [-u, x]]
        ci, cj = Ui[i], Ui[j]
        Ui[i] = [v * a - u * b for a, b in zip(ci, cj)]
        Ui[j] = [-y * a + x * b for a, b in zip(ci, cj)]

    def col_op(i, j, x, y, u, v):
        for r in A:
            a, b = r[i], r[j]
            r[i], r[j] = x * a + y * b, u * a + v * b

    diag = []
    t = 0
    while t < min(nrows, ncols):
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if A[i][j] and (best is None or abs(A[i][j]) < best[0]):
                    best = (abs(A[i][j]), i, j)
        if best is None:
            break
        _, i, j = best
        if i != t:
            row_op(t, i, 0, 1, -1, 0)
        if j != t:
            col_op(t, j, 0, 1, -1, 0)
        while True:
            done = True
            for i in range(t + 1, nrows):
                b = A[i][t]
                if b:
                    a = A[t][t]
                    if b % a == 0:
                        row_op(t, i, 1, 0, -(b // a), 1)
                    else:
                        g, x, y = xgcd(a, b)
                        row_op(t, i, x, y, -b // g, a // g)
                        done = False
            for j in range(t + 1, ncols):
                b = A[t][j]
                if b:
                    a = A[t][t]
                    if b % a == 0:
                        col_op(t, j, 1, 0, -(b // a), 1)
                    else:
                        g, x, y = xgcd(a, b)
                        col_op(t, j, x, y, -b // g, a // g)
                        done = False
            if not done:
                continue
            a = A[t][t]
            bad = next(
                (i for i in range(t + 1, nrows) for j in range(t + 1, ncols) if A[i][j] % a),
                None,
            )
            if bad is None:
                break
            row_op(t, bad, 1, 1, 0, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            Ui[t] = [-x for x in Ui[t]]
        diag.append(A[t][t])
        t += 1
    return diag, Ui


# ------------------------------------------------------------------ rationals


class QEchelon:
    """Reduced row echelon basis of a subspace of ``Q^k``, built incrementally.

    Each stored row may carry a tag vector that undergoes the same linear
    combinations; with unit-vector tags this records how every row was made
    from the inserted vectors, which is what :func:`rational_solve` needs.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.rows = {}  # pivot index -> (vector with 1 at pivot, tag or None)

    def _reduce(self, v, tag):
        for p, (row, rtag) in self.rows.items():
            c = v[p]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
                if tag is not None:
                    tag = [a - c * b for a, b in zip(tag, rtag)]
        return v, tag

    def reduce(self, vec):
        return self._reduce([mpq(x) for x in vec], None)[0]

    def add(self, vec, tag=None) -> bool:
        """Insert ``vec``; False when it already lies in the span."""
        v, tag = self._reduce([mpq(x) for x in vec], None if tag is None else [mpq(x) for x in tag])
        p = next((i for i, x in enumerate(v) if x), None)
        if p is None:
            return False
        inv = 1 / v[p]
        v = [x * inv for x in v]
        if tag is not None:
            tag = [x * inv for x in tag]
        for q, (row, rtag) in list(self.rows.items()):
            f = row[p]
            if f:
                row = [a - f * b for a, b in zip(row, v)]
                if rtag is not None:
                    rtag = [a - f * b for a, b in zip(rtag, tag)]
                self.rows[q] = (row, rtag)
        self.rows[p] = (v, tag)
        return True

    def contains(self, vec) -> bool:
        return not any(self.reduce(vec))

    def express(self, vec):
        """``(residue, combination)``: ``vec = residue + sum c_p tag_p``-style data."""
        v = [mpq(x) for x in vec]
        combo = [mpq(0)] * len(next(iter(self.rows.values()))[1]) if self.rows else []
        for p, (row, rtag) in self.rows.items():
            c = v[p]
            if c:
                v = [a - c * b for a, b in zip(v, row)]
                combo = [a + c * b for a, b in zip(combo, rtag)]
        return v, combo

    @property
    def rank(self) -> int:
        return len(self.rows)

    def basis(self):
        return [self.rows[p][0] for p in sorted(self.rows)]


def rational_solve(cols, nrows: int, y):
    """Solve ``M x = y`` over Q for ``M`` given by columns.

    Returns ``(x, residue)``; ``x`` is ``None`` when there is no solution and
    ``residue`` is ``y`` reduced modulo the column space.
    """
    ncols = len(cols)
    ech = QEchelon(nrows)
    for j, col in enumerate(cols):
        ech.add(col, [int(i == j) for i in range(ncols)])
    if not ech.rows:
        y = [mpq(v) for v in y]
        return ([mpq(0)] * ncols if not any(y) else None), y
    residue, combo = ech.express(y)
    if any(residue):
        return None, residue
    return combo, residue


def rational_kernel(cols, nrows: int):
    """Basis of the kernel of a rational matrix given by columns."""
    ncols = len(cols)
    if ncols == 0:
        return []
    # row-reduce the matrix with rows = original rows
    M = [[mpq(cols[j][i]) for j in range(ncols)] for i in range(nrows)]
    pivcols = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = 1 / M[r][c]
        M[r] = [x * inv for x in M[r]]
        for i in range(nrows):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivcols.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivcols]
    out = []
    for f in free:
        v = [mpq(0)] * ncols
        v[f] = mpq(1)
        for row, pc in enumerate(pivcols):
            v[pc] = -M[row][f]
        out.append(v)
    return out
