"""Exact dense linear algebra over the supported fields.

Provides immutable matrices, reduced row/column echelon forms, canonical
subspaces with deterministic complements, regular matrix-pencil
decomposition into point/Jordan-size blocks, and stabilization detection
for sequences of linear maps.  Everything is exact; no floats anywhere.
"""

from __future__ import annotations

from .errors import (
    FieldExhaustedError,
    NoStabilizationError,
    NotContainedError,
    SingularPencilError,
    SplitFailureError,
)
from .fields import PrimeField, QQ


class Matrix:
    """Immutable dense matrix; ``rows`` is a tuple of row tuples."""

    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field, nrows, ncols, rows):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows

    @classmethod
    def from_rows(cls, field, rows, ncols=None):
        rows = tuple(tuple(r) for r in rows)
        if rows:
            ncols = len(rows[0])
            if any(len(r) != ncols for r in rows):
                raise ValueError("ragged rows")
        elif ncols is None:
            ncols = 0
        return cls(field, len(rows), ncols, rows)

    @classmethod
    def from_int_rows(cls, field, rows, ncols=None):
        conv = field.from_int
        return cls.from_rows(field, [[conv(x) for x in r] for r in rows], ncols)

    @classmethod
    def zeros(cls, field, nrows, ncols):
        z = field.zero
        return cls(field, nrows, ncols, tuple((z,) * ncols for _ in range(nrows)))

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero, field.one
        return cls(field, n, n, tuple(
            tuple(o if i == j else z for j in range(n)) for i in range(n)))

    def row(self, i):
        return self.rows[i]

    def column(self, j):
        return tuple(r[j] for r in self.rows)

    def entry(self, i, j):
        return self.rows[i][j]

    def transpose(self):
        return Matrix(self.field, self.ncols, self.nrows, tuple(zip(*self.rows))
                      if self.nrows else ((self.field.zero,) * 0,) * self.ncols)

    def __mul__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} x {other.shape}")
        z = self.field.zero
        one = self.field.one
        orows = other.rows
        zero_row = (z,) * other.ncols
        out = []
        for arow in self.rows:
            acc = None
            for a, brow in zip(arow, orows):
                if a:
                    if acc is None:
                        if a == one:
                            acc = list(brow)
                        else:
                            acc = [a * b if b else z for b in brow]
                    elif a == one:
                        acc = [x + b if b else x for x, b in zip(acc, brow)]
                    else:
                        acc = [x + a * b if b else x
                               for x, b in zip(acc, brow)]
            out.append(zero_row if acc is None else tuple(acc))
        return Matrix(self.field, self.nrows, other.ncols, tuple(out))

    def __add__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.field, self.nrows, self.ncols, tuple(
            tuple(a + b for a, b in zip(ra, rb))
            for ra, rb in zip(self.rows, other.rows)))

    def __sub__(self, other):
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return Matrix(self.field, self.nrows, self.ncols, tuple(
            tuple(a - b for a, b in zip(ra, rb))
            for ra, rb in zip(self.rows, other.rows)))

    def __neg__(self):
        return Matrix(self.field, self.nrows, self.ncols, tuple(
            tuple(-a for a in r) for r in self.rows))

    def scale(self, c):
        return Matrix(self.field, self.nrows, self.ncols, tuple(
            tuple(c * a for a in r) for r in self.rows))

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.shape == other.shape and self.rows == other.rows)

    def __hash__(self):
        return hash((self.shape, self.rows))

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def is_zero(self):
        return all(not a for r in self.rows for a in r)

    def is_square(self):
        return self.nrows == self.ncols

    def __repr__(self):
        body = "; ".join(" ".join(str(a) for a in r) for r in self.rows)
        return f"Matrix({self.nrows}x{self.ncols}: {body})"


def hstack(mats):
    mats = list(mats)
    if not mats:
        raise ValueError("hstack of nothing")
    field = mats[0].field
    n = mats[0].nrows
    if any(m.nrows != n for m in mats):
        raise ValueError("row count mismatch")
    rows = tuple(tuple(x for m in mats for x in m.rows[i]) for i in range(n))
    return Matrix(field, n, sum(m.ncols for m in mats), rows)


def vstack(mats):
    mats = list(mats)
    if not mats:
        raise ValueError("vstack of nothing")
    field = mats[0].field
    c = mats[0].ncols
    if any(m.ncols != c for m in mats):
        raise ValueError("column count mismatch")
    rows = tuple(r for m in mats for r in m.rows)
    return Matrix(field, len(rows), c, rows)


def block_diag(field, mats):
    mats = list(mats)
    nr = sum(m.nrows for m in mats)
    nc = sum(m.ncols for m in mats)
    z = field.zero
    rows = []
    coff = 0
    for m in mats:
        for r in m.rows:
            rows.append((z,) * coff + tuple(r) + (z,) * (nc - coff - m.ncols))
        coff += m.ncols
    return Matrix(field, nr, nc, tuple(rows))


def rref(m: Matrix):
    """Reduced row-echelon form and its pivot columns (unique)."""
    rows = [list(r) for r in m.rows]
    nrows, ncols = m.nrows, m.ncols
    one = m.field.one
    pivots = []
    pr = 0
    for pc in range(ncols):
        pivot_row = None
        for i in range(pr, nrows):
            if rows[i][pc]:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != pr:
            rows[pr], rows[pivot_row] = rows[pivot_row], rows[pr]
        piv = rows[pr][pc]
        if piv != one:
            inv = one / piv
            rows[pr] = row = [x * inv if x else x for x in rows[pr]]
        else:
            row = rows[pr]
        for i in range(nrows):
            if i != pr:
                fct = rows[i][pc]
                if fct:
                    if fct == one:
                        rows[i] = [x - y if y else x
                                   for x, y in zip(rows[i], row)]
                    else:
                        rows[i] = [x - fct * y if y else x
                                   for x, y in zip(rows[i], row)]
        pivots.append(pc)
        pr += 1
        if pr == nrows:
            break
    return Matrix(m.field, nrows, ncols, tuple(tuple(r) for r in rows)), tuple(pivots)


def rank(m: Matrix) -> int:
    return len(rref(m)[1])


def solve_right(a: Matrix, b: Matrix):
    """One exact solution X of a·X = b, or None when inconsistent.

    Free variables are set to zero, so the solution is deterministic.
    """
    if a.nrows != b.nrows:
        raise ValueError("row mismatch")
    r, pivots = rref(hstack([a, b]))
    if any(p >= a.ncols for p in pivots):
        return None
    z = a.field.zero
    xrows = [[z] * b.ncols for _ in range(a.ncols)]
    for i, p in enumerate(pivots):
        xrows[p] = list(r.rows[i][a.ncols:])
    return Matrix(a.field, a.ncols, b.ncols, tuple(tuple(r_) for r_ in xrows))


def inverse(m: Matrix) -> Matrix:
    if not m.is_square():
        raise ValueError("inverse of non-square matrix")
    x = solve_right(m, Matrix.identity(m.field, m.nrows))
    if x is None or rank(m) != m.nrows:
        raise ValueError("matrix is singular")
    return x


class _Reducer:
    """Incremental row-echelon accumulator for greedy span building."""

    __slots__ = ("field", "rows", "pivots")

    def __init__(self, field):
        self.field = field
        self.rows = []
        self.pivots = []

    def residue(self, vec):
        v = list(vec)
        for row, p in zip(self.rows, self.pivots):
            c = v[p]
            if c:
                for j in range(p, len(v)):
                    if row[j]:
                        v[j] = v[j] - c * row[j]
        return v

    def add(self, vec) -> bool:
        """Reduce vec against the span; absorb it if independent."""
        v = self.residue(vec)
        for j, c in enumerate(v):
            if c:
                inv = self.field.one / c
                if inv != self.field.one:
                    v = [x * inv for x in v]
                self.rows.append(v)
                self.pivots.append(j)
                return True
        return False

    @property
    def dim(self):
        return len(self.rows)


class Subspace:
    """Subspace of k^n in reduced column-echelon canonical form.

    Two subspaces are equal iff their canonical basis matrices coincide.
    """

    __slots__ = ("field", "ambient_dim", "basis")

    def __init__(self, field, ambient_dim, basis: Matrix):
        self.field = field
        self.ambient_dim = ambient_dim
        self.basis = basis

    @classmethod
    def from_columns(cls, columns: Matrix):
        """Canonicalize the span of the given columns."""
        r, pivots = rref(columns.transpose())
        rows = r.rows[: len(pivots)]
        field = columns.field
        basis = Matrix(field, columns.nrows, len(pivots),
                       tuple(zip(*rows)) if rows else tuple(
                           () for _ in range(columns.nrows)))
        return cls(field, columns.nrows, basis)

    @classmethod
    def zero(cls, field, ambient_dim):
        return cls(field, ambient_dim, Matrix.zeros(field, ambient_dim, 0))

    @classmethod
    def full(cls, field, ambient_dim):
        return cls(field, ambient_dim, Matrix.identity(field, ambient_dim))

    @property
    def dim(self):
        return self.basis.ncols

    def is_zero(self):
        return self.dim == 0

    def columns(self):
        return [self.basis.column(j) for j in range(self.dim)]

    def contains_vector(self, vec) -> bool:
        red = _Reducer(self.field)
        for col in self.columns():
            red.add(col)
        return not any(red.residue(vec))

    def contains(self, other: "Subspace") -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient mismatch")
        red = _Reducer(self.field)
        for col in self.columns():
            red.add(col)
        d = red.dim
        for col in other.columns():
            if red.add(col):
                return False
        return red.dim == d

    def add_subspace(self, other: "Subspace") -> "Subspace":
        return Subspace.from_columns(hstack([self.basis, other.basis]))

    def __eq__(self, other):
        return (isinstance(other, Subspace)
                and self.ambient_dim == other.ambient_dim
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of k^{self.ambient_dim})"


def kernel_basis(m: Matrix) -> Subspace:
    """Canonical basis of the null space; dim = cols - rank."""
    r, pivots = rref(m)
    field = m.field
    free = [j for j in range(m.ncols) if j not in pivots]
    cols = []
    for f in free:
        v = [field.zero] * m.ncols
        v[f] = field.one
        for i, p in enumerate(pivots):
            v[p] = -r.rows[i][f]
        cols.append(v)
    raw = Matrix(field, m.ncols, len(cols),
                 tuple(zip(*cols)) if cols else tuple(() for _ in range(m.ncols)))
    return Subspace.from_columns(raw)


def image_subspace(m: Matrix) -> Subspace:
    return Subspace.from_columns(m)


def complement(inside: Subspace, sub: Subspace) -> Subspace:
    """Deterministic complement of ``sub`` inside ``inside``.

    Greedily keeps canonical-basis vectors of ``inside``, in index order,
    that are independent of ``sub`` plus the vectors already chosen.
    """
    if not inside.contains(sub):
        raise NotContainedError("second subspace is not contained in the first")
    red = _Reducer(inside.field)
    for col in sub.columns():
        red.add(col)
    chosen = []
    for col in inside.columns():
        if red.add(col):
            chosen.append(col)
    raw = Matrix(inside.field, inside.ambient_dim, len(chosen),
                 tuple(zip(*chosen)) if chosen else tuple(
                     () for _ in range(inside.ambient_dim)))
    return Subspace.from_columns(raw)


def projection_along(space_basis: Matrix, comp_basis: Matrix):
    """Coordinates-on-first-factor map for k^n = col(space) ⊕ col(comp).

    Returns P with P·[space|comp] = [I|0]; raises if the two column sets
    do not jointly form a basis.
    """
    field = space_basis.field
    n = space_basis.nrows
    full = hstack([space_basis, comp_basis])
    if full.ncols != n:
        raise ValueError("not a direct-sum decomposition")
    inv = inverse(full)
    return Matrix(field, space_basis.ncols, n, inv.rows[: space_basis.ncols])


# ---------------------------------------------------------------------------
# Univariate polynomials (for symbolic pencil determinants)


class Poly:
    """Dense univariate polynomial over the field; coeffs ascending."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field, coeffs):
        while coeffs and not coeffs[-1]:
            coeffs = coeffs[:-1]
        self.field = field
        self.coeffs = tuple(coeffs)

    @classmethod
    def const(cls, field, c):
        return cls(field, (c,))

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        z = self.field.zero
        a = list(self.coeffs) + [z] * (n - len(self.coeffs))
        b = list(other.coeffs) + [z] * (n - len(other.coeffs))
        return Poly(self.field, [x + y for x, y in zip(a, b)])

    def __sub__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        z = self.field.zero
        a = list(self.coeffs) + [z] * (n - len(self.coeffs))
        b = list(other.coeffs) + [z] * (n - len(other.coeffs))
        return Poly(self.field, [x - y for x, y in zip(a, b)])

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return Poly(self.field, ())
        z = self.field.zero
        out = [z] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = out[i + j] + a * b
        return Poly(self.field, out)

    def exact_div(self, other):
        """Exact quotient; raises if the division leaves a remainder."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if self.is_zero():
            return self
        rem = list(self.coeffs)
        qd = len(rem) - len(other.coeffs)
        if qd < 0:
            raise ValueError("inexact polynomial division")
        z = self.field.zero
        q = [z] * (qd + 1)
        lead = other.coeffs[-1]
        for k in range(qd, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        if any(rem):
            raise ValueError("inexact polynomial division")
        return Poly(self.field, q)

    def __eq__(self, other):
        return isinstance(other, Poly) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"


def _poly_det_bareiss(field, grid):
    """Fraction-free determinant of a square matrix of Poly entries."""
    n = len(grid)
    if n == 0:
        return Poly.const(field, field.one)
    m = [row[:] for row in grid]
    sign = 1
    prev = Poly.const(field, field.one)
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Poly(field, ())
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = num.exact_div(prev)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    if sign < 0:
        det = Poly(field, ()) - det
    return det


def pencil_det_poly(a: Matrix, b: Matrix) -> Poly:
    """det(t·a + b) as an exact polynomial in t."""
    field = a.field
    grid = [[Poly(field, (b.rows[i][j], a.rows[i][j]))
             for j in range(a.ncols)] for i in range(a.nrows)]
    return _poly_det_bareiss(field, grid)


def _poly_roots(field, poly: Poly):
    """All roots in the field with multiplicity, plus a splitting flag.

    Uses sympy's exact factorization over QQ / GF(p).
    """
    from sympy import GF, Poly as SymPoly, QQ as SymQQ, Rational, symbols

    t = symbols("t")
    if isinstance(field, PrimeField):
        sp = SymPoly([c.v for c in reversed(poly.coeffs)], t,
                     domain=GF(field.prime))
    else:
        sym_coeffs = [Rational(int(c.numerator), int(c.denominator))
                      for c in reversed(poly.coeffs)]
        sp = SymPoly(sym_coeffs, t, domain=SymQQ)
    _, factors = sp.factor_list()
    roots = []
    split = True
    for fac, mult in factors:
        fc = fac.all_coeffs()
        if len(fc) == 1:
            continue
        if len(fc) > 2:
            split = False
            continue
        lead, const = fc
        if isinstance(field, PrimeField):
            root = field.from_int(-int(const)) / field.from_int(int(lead))
        else:
            r = Rational(-const, lead)
            root = field.ratio(int(r.p), int(r.q))
        roots.append((root, mult))
    return roots, split


# ---------------------------------------------------------------------------
# Projective points as normalized coordinate pairs (library-level form)


def normalize_point(field, a, b):
    """Canonical coordinates: (a/b, 1) when b != 0, else (1, 0)."""
    if b:
        return (a / b, field.one)
    if not a:
        raise ValueError("(0, 0) is not a projective point")
    return (field.one, field.zero)


def point_sort_key(field, pair):
    p0, p1 = pair
    if p1:
        return (0, field.sort_key(p0))
    return (1, 0)


def jordan_block(field, eigenvalue, size) -> Matrix:
    """Upper Jordan block J_size(eigenvalue)."""
    z, o = field.zero, field.one
    rows = []
    for i in range(size):
        row = [z] * size
        row[i] = eigenvalue
        if i + 1 < size:
            row[i + 1] = o
        rows.append(tuple(row))
    return Matrix(field, size, size, tuple(rows))


def pencil_block_matrices(field, blocks):
    """Model pencil for a block list [(point_pair, size), ...].

    Finite point (c, 1): contributes (J_size(c), I); infinite point (1, 0):
    contributes (I, J_size(0)).  Blocks assemble block-diagonally in the
    given order.
    """
    amats, bmats = [], []
    for (p0, p1), size in blocks:
        if p1:
            amats.append(jordan_block(field, p0, size))
            bmats.append(Matrix.identity(field, size))
        else:
            amats.append(Matrix.identity(field, size))
            bmats.append(jordan_block(field, field.zero, size))
    return block_diag(field, amats), block_diag(field, bmats)


class PencilDecomposition:
    """Eigenpoints of a regular pencil with Jordan size multisets.

    ``blocks`` is a tuple of (normalized point pair, ascending size tuple),
    sorted by the canonical point order.
    """

    __slots__ = ("field", "blocks")

    def __init__(self, field, blocks):
        self.field = field
        self.blocks = tuple(sorted(
            ((pt, tuple(sorted(sizes))) for pt, sizes in blocks),
            key=lambda b: point_sort_key(field, b[0])))

    def total_size(self):
        return sum(sum(sizes) for _, sizes in self.blocks)

    def flat_blocks(self):
        """[(point, size)] with sizes ascending inside each point."""
        return [(pt, s) for pt, sizes in self.blocks for s in sizes]

    def __eq__(self, other):
        return (isinstance(other, PencilDecomposition)
                and self.blocks == other.blocks)

    def __repr__(self):
        return f"PencilDecomposition({self.blocks})"


_PROBE_LIMIT_EXTRA = 2


def _find_regular_combination(a: Matrix, b: Matrix):
    """First invertible c0·a + c1·b on the deterministic probe set.

    Probes (1,0), (0,1), (1,1), ..., (1,n); returns (c0, c1, M) or None.
    """
    field = a.field
    n = a.nrows
    one, zero = field.one, field.zero
    combos = [(one, zero), (zero, one)]
    limit = n
    if isinstance(field, PrimeField):
        limit = min(limit, field.prime - 1)
    combos.extend((one, field.from_int(k)) for k in range(1, limit + 1))
    for c0, c1 in combos:
        m = a.scale(c0) + b.scale(c1)
        if rank(m) == n:
            return c0, c1, m
    return None


def _exhaustive_regular_combination(a: Matrix, b: Matrix):
    """Over F_p, scan every projective combination before giving up."""
    field = a.field
    if not isinstance(field, PrimeField):
        return None
    n = a.nrows
    one = field.one
    combos = [(one, field.from_int(k)) for k in range(field.prime)]
    combos.append((field.zero, one))
    for c0, c1 in combos:
        m = a.scale(c0) + b.scale(c1)
        if rank(m) == n:
            return c0, c1, m
    return None


def _nilpotent_jordan_chains(n: Matrix):
    """Jordan chain basis of a nilpotent matrix.

    Returns chains [b_1, ..., b_s] with N·b_k = b_{k-1} and N·b_1 = 0,
    sizes descending; vector selection is deterministic (greedy over
    canonical kernel bases).
    """
    field = n.field
    d = n.nrows
    if d == 0:
        return []
    power = n
    kers = [Subspace.zero(field, d), kernel_basis(n)]
    while kers[-1].dim < d:
        if len(kers) > d + 1:
            raise ValueError("matrix is not nilpotent")
        power = n * power
        kers.append(kernel_basis(power))
    top = len(kers) - 1
    chains = []
    for j in range(top, 0, -1):
        # heads at height j: vectors of ker N^j independent of ker N^{j-1}
        # plus the height-j vectors of the longer chains already built
        barrier = _Reducer(field)
        for col in kers[j - 1].columns():
            barrier.add(col)
        for ch in chains:
            barrier.add(ch[j - 1])
        for cand in kers[j].columns():
            if barrier.add(cand):
                chain = [cand]
                for _ in range(j - 1):
                    chain.append(_apply(n, chain[-1]))
                chain.reverse()
                chains.append(chain)
    chains.sort(key=lambda ch: -len(ch))
    return chains


def _apply(m: Matrix, vec):
    z = m.field.zero
    out = []
    for row in m.rows:
        s = z
        for a, x in zip(row, vec):
            if a and x:
                s = s + a * x
        out.append(s)
    return out


def _restrict(m: Matrix, basis: Matrix) -> Matrix:
    """Matrix of m restricted to an invariant subspace, in basis coords."""
    x = solve_right(basis, m * basis)
    if x is None:
        raise ValueError("subspace is not invariant")
    return x


def pencil_weierstrass_with_transform(a: Matrix, b: Matrix):
    """Decompose a regular pencil and return the strict-equivalence data.

    Returns (decomposition, s_out, s_in) with a = s_out·A_model·s_in^{-1}
    and b = s_out·B_model·s_in^{-1}, where (A_model, B_model) are the
    block matrices of the decomposition in canonical order.
    """
    if a.shape != b.shape or not a.is_square():
        raise ValueError("pencil matrices must be square of equal size")
    field = a.field
    n = a.nrows
    if n == 0:
        return (PencilDecomposition(field, []),
                Matrix.identity(field, 0), Matrix.identity(field, 0))

    combo = _find_regular_combination(a, b)
    det = pencil_det_poly(a, b)  # det(t·a + b)
    if det.is_zero():
        raise SingularPencilError("det(x0·A + x1·B) is identically zero")
    if combo is None:
        combo = _exhaustive_regular_combination(a, b)
        if combo is None:
            raise FieldExhaustedError(
                "pencil is regular but no invertible combination exists "
                "over this field")
    c0, c1, m = combo

    # Roots of det(x0·A + x1·B): finite roots of det(t·A + B) plus the
    # root at [1:0] with multiplicity n - deg.
    roots, split = _poly_roots(field, det)
    covered = sum(mult for _, mult in roots) + (n - det.degree)
    if not split or covered != n:
        raise SplitFailureError(
            "pencil determinant does not factor into linear forms over "
            "the field")

    # Eigenpoints: det root [r:1] -> point [-1:r]; root [1:0] -> [0:1].
    eigen = []
    for r, mult in roots:
        eigen.append((normalize_point(field, -field.one, r), mult))
    if det.degree < n:
        eigen.append((normalize_point(field, field.zero, field.one),
                      n - det.degree))
    eigen.sort(key=lambda e: point_sort_key(field, e[0]))

    minv = inverse(m)
    primary_is_a = bool(c1)
    e_mat = minv * a if primary_is_a else minv * b
    d_mat = minv * b if primary_is_a else minv * a

    blocks = []
    s_in_cols = []
    s_out_cols = []
    ident = Matrix.identity(field, n)
    for (p0, p1), mult in eigen:
        # eigenvalue of e_mat corresponding to this point
        if primary_is_a:
            lam = p0 / (c0 * p0 + c1 * p1)
        else:
            lam = p1 / (c0 * p0 + c1 * p1)
        shifted = e_mat - ident.scale(lam)
        power = shifted
        ker = kernel_basis(power)
        steps = 1
        while ker.dim < mult:
            if steps > mult:
                raise SplitFailureError("generalized eigenspace is deficient")
            power = power * shifted
            ker = kernel_basis(power)
            steps += 1
        vbasis = ker.basis
        e_v = _restrict(e_mat, vbasis)
        d_v = _restrict(d_mat, vbasis)
        idm = Matrix.identity(field, mult)
        finite = bool(p1)
        if primary_is_a:
            if finite:
                z_v = inverse(d_v) * e_v - idm.scale(p0)
            else:
                z_v = inverse(e_v) * d_v
        else:
            if finite:
                z_v = inverse(e_v).scale(field.one / c0) - idm.scale(p0)
            else:
                z_v = e_v.scale(c0)
        chains = _nilpotent_jordan_chains(z_v)
        sizes = sorted(len(ch) for ch in chains)
        blocks.append(((p0, p1), tuple(sizes)))
        # ascending block sizes; within a chain, vectors satisfy
        # Z·b_k = b_{k-1}, realizing the upper Jordan model
        chains.sort(key=len)
        for ch in chains:
            cols = [_apply(vbasis, v) for v in ch]
            carrier = b if finite else a
            for col in cols:
                s_in_cols.append(col)
                s_out_cols.append(_apply(carrier, col))

    decomp = PencilDecomposition(field, blocks)
    s_in = Matrix(field, n, n, tuple(zip(*s_in_cols)))
    s_out = Matrix(field, n, n, tuple(zip(*s_out_cols)))
    a_model, b_model = pencil_block_matrices(field, decomp.flat_blocks())
    if (rank(s_in) != n or a * s_in != s_out * a_model
            or b * s_in != s_out * b_model):
        raise SplitFailureError("pencil transform verification failed")
    return decomp, s_out, s_in


def pencil_weierstrass(a: Matrix, b: Matrix) -> PencilDecomposition:
    """Eigenpoints and Jordan size multisets of a regular pencil."""
    return pencil_weierstrass_with_transform(a, b)[0]


# ---------------------------------------------------------------------------
# Stabilizing sequences of maps


class MapSequence:
    """Chain V_0 -> V_1 -> ... with maps[j]: V_j -> V_{j+1}."""

    __slots__ = ("field", "dims", "maps")

    def __init__(self, field, dims, maps):
        dims = tuple(dims)
        maps = tuple(maps)
        if len(maps) != max(len(dims) - 1, 0):
            raise ValueError("need one map per adjacent pair")
        for j, m in enumerate(maps):
            if m.shape != (dims[j + 1], dims[j]):
                raise ValueError(f"map {j} has shape {m.shape}, "
                                 f"expected {(dims[j + 1], dims[j])}")
        self.field = field
        self.dims = dims
        self.maps = maps

    def __len__(self):
        return len(self.dims)


class ColimitResult:
    """Stable dimension, stabilization index, and lazily-built projections."""

    __slots__ = ("sequence", "limit_dim", "stab_index", "_pi", "_ek", "_proj")

    def __init__(self, sequence, limit_dim, stab_index, pi, eks):
        self.sequence = sequence
        self.limit_dim = limit_dim
        self.stab_index = stab_index
        self._pi = pi
        self._ek = eks
        self._proj = None

    @property
    def projections(self):
        """For each j, the composite map from V_j into the stable term."""
        if self._proj is not None:
            return self._proj
        seq = self.sequence
        field = seq.field
        s = self.stab_index
        proj = [None] * len(seq.dims)
        proj[s] = self._pi
        cur = self._pi
        for j in range(s - 1, -1, -1):
            cur = cur * seq.maps[j]
            proj[j] = cur
        fwd = Matrix.identity(field, seq.dims[s])
        for j in range(s + 1, len(seq.dims)):
            fwd = seq.maps[j - 1] * fwd  # M_{s -> j}
            lhs = hstack([fwd, self._ek[j].basis])
            rhs = hstack([self._pi,
                          Matrix.zeros(field, self.limit_dim, self._ek[j].dim)])
            xt = solve_right(lhs.transpose(), rhs.transpose())
            if xt is None:
                raise NoStabilizationError(
                    "projection system inconsistent beyond the stable index")
            proj[j] = xt.transpose()
        self._proj = proj
        return proj


def colimit_sequence(seq: MapSequence) -> ColimitResult:
    """Colimit data of a stabilizing sequence.

    Quotients each term by its eventual kernel (union of kernels of the
    forward composites); detects the least index from which these
    quotients have settled to a constant dimension, with a one-step
    confirmation margin inside the window.  Raises NO_STABILIZATION when
    the window cannot confirm stabilization (supply a longer sequence).
    """
    L = len(seq.dims) - 1
    field = seq.field
    if L < 2:
        raise NoStabilizationError("sequence too short to confirm a limit")
    into_last = [None] * (L + 1)
    into_prev = [None] * L
    into_last[L] = Matrix.identity(field, seq.dims[L])
    into_prev[L - 1] = Matrix.identity(field, seq.dims[L - 1])
    for j in range(L - 1, -1, -1):
        into_last[j] = into_last[j + 1] * seq.maps[j]
        if j <= L - 2:
            into_prev[j] = into_prev[j + 1] * seq.maps[j]

    eks = [kernel_basis(into_last[j]) for j in range(L + 1)]

    def confirmed(i):
        return kernel_basis(into_prev[i]) == eks[i]

    conf = [confirmed(i) for i in range(L - 1)]
    cdims = [seq.dims[i] - eks[i].dim for i in range(L + 1)]

    s = None
    for i in range(L - 2 + 1):
        if i + 1 <= L - 2 and conf[i] and conf[i + 1] and cdims[i] == cdims[i + 1]:
            s = i
            break
    if s is None:
        raise NoStabilizationError(
            "no confirmed stabilization index inside the sequence")
    for j in range(s, L - 1):
        if conf[j] and cdims[j] != cdims[s]:
            raise NoStabilizationError(
                "quotient dimensions not constant past the stable index")

    comp = complement(Subspace.full(field, seq.dims[s]), eks[s])
    if cdims[s] == 0:
        pi = Matrix.zeros(field, 0, seq.dims[s])
    else:
        pi = projection_along(comp.basis, eks[s].basis)
    return ColimitResult(seq, cdims[s], s, pi, eks)
