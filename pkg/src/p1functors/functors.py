"""Finite graded-window functor data and its canonical generators.

A functor is stored only through its values on line-bundle twists in a
window [lo, hi]: the dimension at each degree plus the two actions
A[n], B[n] : F(O(n-1)) -> F(O(n)) of the coordinates.  The single law is
the commutation A[n+1]·B[n] = B[n+1]·A[n]; everything else (values on
torsion sheaves, on arbitrary coherent sheaves, on chain maps) is derived
by right-exact evaluation of presentations inside the window.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import (
    EqualPointsError,
    NotAdmissibleError,
    WindowMismatchError,
    WindowTooSmallError,
)
from .linalg import (
    Matrix,
    Subspace,
    block_diag,
    complement,
    hstack,
    image_subspace,
    inverse,
    jordan_block,
    projection_along,
    rank,
    vstack,
)
from .sheaves import (
    BundleMap,
    CoherentSheaf,
    P1Point,
    SesOfBundles,
    TorsionChainMap,
    TorsionSheaf,
    form_power,
    form_product,
    vanishing_form,
)


class FunctorData:
    """Window values dims[n] and coordinate actions A[n], B[n].

    ``a_maps[k]`` and ``b_maps[k]`` are the maps into degree lo + 1 + k.
    """

    __slots__ = ("field", "lo", "hi", "dims", "a_maps", "b_maps")

    def __init__(self, field, lo, hi, dims, a_maps, b_maps):
        if lo > hi:
            raise ValueError("window must satisfy lo <= hi")
        self.field = field
        self.lo = lo
        self.hi = hi
        self.dims = tuple(int(d) for d in dims)
        self.a_maps = tuple(a_maps)
        self.b_maps = tuple(b_maps)
        if len(self.dims) != hi - lo + 1:
            raise ValueError("dims length does not match the window")
        if len(self.a_maps) != hi - lo or len(self.b_maps) != hi - lo:
            raise ValueError("need one action pair per window step")

    def dim(self, n):
        if not self.lo <= n <= self.hi:
            raise WindowTooSmallError(f"degree {n} outside [{self.lo}, {self.hi}]")
        return self.dims[n - self.lo]

    def a(self, n):
        if not self.lo < n <= self.hi:
            raise WindowTooSmallError(f"no action into degree {n}")
        return self.a_maps[n - self.lo - 1]

    def b(self, n):
        if not self.lo < n <= self.hi:
            raise WindowTooSmallError(f"no action into degree {n}")
        return self.b_maps[n - self.lo - 1]

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def __eq__(self, other):
        return (isinstance(other, FunctorData) and self.field == other.field
                and (self.lo, self.hi) == (other.lo, other.hi)
                and self.dims == other.dims
                and self.a_maps == other.a_maps
                and self.b_maps == other.b_maps)

    def __repr__(self):
        return (f"FunctorData(window [{self.lo}, {self.hi}], "
                f"dims {list(self.dims)})")

    def restrict(self, lo, hi) -> "FunctorData":
        """The same functor on a subwindow."""
        if lo < self.lo or hi > self.hi or lo > hi:
            raise WindowTooSmallError("not a subwindow")
        s = lo - self.lo
        e = hi - self.lo
        return FunctorData(self.field, lo, hi, self.dims[s:e + 1],
                           self.a_maps[s:e], self.b_maps[s:e])


def validate(f: FunctorData):
    """All functor-law violations, each tagged with its degree."""
    out = []
    for n in range(f.lo + 1, f.hi + 1):
        want = (f.dim(n), f.dim(n - 1))
        if f.a(n).shape != want:
            out.append(f"shape of x0 action into degree {n}: "
                       f"{f.a(n).shape} != {want}")
        if f.b(n).shape != want:
            out.append(f"shape of x1 action into degree {n}: "
                       f"{f.b(n).shape} != {want}")
    for n in range(f.lo + 1, f.hi):
        if f.a(n + 1) * f.b(n) != f.b(n + 1) * f.a(n):
            out.append(f"commutation fails between degrees {n - 1} and {n + 1}")
    return out


def zero_functor(field, lo, hi) -> FunctorData:
    steps = hi - lo
    return FunctorData(field, lo, hi, [0] * (steps + 1),
                       [Matrix.zeros(field, 0, 0)] * steps,
                       [Matrix.zeros(field, 0, 0)] * steps)


def generator_h0_torsion(t: TorsionSheaf, lo, hi) -> FunctorData:
    """Window data of s |-> H0(s (x) t): constant spaces with pencil action.

    A finite-point block (c, 1) acts through (J_m(c), I); the infinite
    point through (I, J_m(0)); blocks assemble block-diagonally in the
    canonical block order of t.
    """
    field = t.field
    amats, bmats = [], []
    for p, m in t.blocks:
        p0, p1 = p.coords
        if p1:
            amats.append(jordan_block(field, p0, m))
            bmats.append(Matrix.identity(field, m))
        else:
            amats.append(Matrix.identity(field, m))
            bmats.append(jordan_block(field, field.zero, m))
    a = block_diag(field, amats) if amats else Matrix.zeros(field, 0, 0)
    b = block_diag(field, bmats) if bmats else Matrix.zeros(field, 0, 0)
    size = t.length()
    steps = hi - lo
    return FunctorData(field, lo, hi, [size] * (steps + 1),
                       [a] * steps, [b] * steps)


def _h1_dim(i, n):
    return max(0, -n - i - 1)


def generator_h1(field, i: int, lo, hi) -> FunctorData:
    """Window data of the first-cohomology functor of twist i.

    Degree n carries the classes x0^(-a) x1^(-b) with a, b >= 1 and
    a + b = -(n + i), ordered by descending a; x0 shifts a down (zero at
    a = 1) and x1 shifts b down.
    """
    dims = [_h1_dim(i, n) for n in range(lo, hi + 1)]
    amaps, bmaps = [], []
    z, o = field.zero, field.one
    for n in range(lo + 1, hi + 1):
        tgt, src = _h1_dim(i, n), _h1_dim(i, n - 1)
        arows = [[o if k == kp else z for kp in range(src)] for k in range(tgt)]
        brows = [[o if k == kp - 1 else z for kp in range(src)] for k in range(tgt)]
        amaps.append(Matrix.from_rows(field, arows, src))
        bmaps.append(Matrix.from_rows(field, brows, src))
    return FunctorData(field, lo, hi, dims, amaps, bmaps)


def generator_rq(q: P1Point, p: P1Point, lo, hi) -> FunctorData:
    """Point-evaluation window data at q: every form h acts as h(q).

    The second point p is the reference point away from q used by the
    isomorphism assertions; the two must differ.
    """
    if p == q:
        raise EqualPointsError("reference point must differ from q")
    field = q.field
    q0, q1 = q.coords
    a = Matrix.from_rows(field, [[q0]])
    b = Matrix.from_rows(field, [[q1]])
    steps = hi - lo
    return FunctorData(field, lo, hi, [1] * (steps + 1),
                       [a] * steps, [b] * steps)


def direct_sum(f: FunctorData, g: FunctorData) -> FunctorData:
    if (f.lo, f.hi) != (g.lo, g.hi) or f.field != g.field:
        raise WindowMismatchError("direct sum needs identical windows and field")
    dims = [df + dg for df, dg in zip(f.dims, g.dims)]
    amaps = [block_diag(f.field, [ma, mb])
             for ma, mb in zip(f.a_maps, g.a_maps)]
    bmaps = [block_diag(f.field, [ma, mb])
             for ma, mb in zip(f.b_maps, g.b_maps)]
    return FunctorData(f.field, f.lo, f.hi, dims, amaps, bmaps)


def direct_sum_many(field, lo, hi, parts) -> FunctorData:
    total = zero_functor(field, lo, hi)
    for part in parts:
        total = direct_sum(total, part)
    return total


def _random_invertible(field, n, rng) -> Matrix:
    """Unit-triangular L·D·U with small integer entries; always invertible."""
    z, o = field.zero, field.one
    lo_rows = [[field.from_int(rng.randint(-2, 2)) if i > j
                else (o if i == j else z) for j in range(n)] for i in range(n)]
    up_rows = [[field.from_int(rng.randint(-2, 2)) if i < j
                else (o if i == j else z) for j in range(n)] for i in range(n)]
    d_rows = [[field.from_int(rng.choice((1, -1, 2, -2))) if i == j else z
               for j in range(n)] for i in range(n)]
    return (Matrix.from_rows(field, lo_rows, n)
            * Matrix.from_rows(field, d_rows, n)
            * Matrix.from_rows(field, up_rows, n))


def gauge_scramble(f: FunctorData, seed: int) -> FunctorData:
    """Conjugate by seeded invertible degreewise changes of basis.

    The output is naturally isomorphic to the input (the basis changes
    witness this) and satisfies the functor laws whenever the input does.
    """
    rng = random.Random(int(seed))
    gauges = [_random_invertible(f.field, d, rng) for d in f.dims]
    inverses = [inverse(u) for u in gauges]
    amaps, bmaps = [], []
    for n in range(f.lo + 1, f.hi + 1):
        k = n - f.lo
        amaps.append(gauges[k] * f.a(n) * inverses[k - 1])
        bmaps.append(gauges[k] * f.b(n) * inverses[k - 1])
    return FunctorData(f.field, f.lo, f.hi, f.dims, amaps, bmaps)


def act_linear(f: FunctorData, coeffs, n) -> Matrix:
    """Action of a linear form c0*x0 + c1*x1 into degree n."""
    c0, c1 = coeffs
    if c0 and c1:
        return f.a(n).scale(c0) + f.b(n).scale(c1)
    if c0:
        return f.a(n).scale(c0) if c0 != f.field.one else f.a(n)
    return f.b(n).scale(c1) if c1 != f.field.one else f.b(n)


def act_poly(f: FunctorData, coeffs, n) -> Matrix:
    """Action of a degree-d form into degree n; source degree is n - d.

    Expands the form in monomials; the commutation law makes the result
    independent of the factorization order.
    """
    coeffs = tuple(coeffs)
    d = len(coeffs) - 1
    if d < 0:
        raise ValueError("empty form")
    if n - d < f.lo or n > f.hi:
        raise WindowTooSmallError(
            f"form of degree {d} into degree {n} does not fit the window")
    if d == 0:
        m = Matrix.identity(f.field, f.dim(n))
        return m if coeffs[0] == f.field.one else m.scale(coeffs[0])
    if d == 1:
        return act_linear(f, coeffs, n)
    result = Matrix.zeros(f.field, f.dim(n), f.dim(n - d))
    for k, c in enumerate(coeffs):
        if not c:
            continue
        mat = Matrix.identity(f.field, f.dim(n - d))
        deg = n - d
        for _ in range(k):
            deg += 1
            mat = f.b(deg) * mat
        for _ in range(d - k):
            deg += 1
            mat = f.a(deg) * mat
        result = result + (mat if c == f.field.one else mat.scale(c))
    return result


def act_form_power(f: FunctorData, lin_coeffs, m, n) -> Matrix:
    """Action of (linear form)^m into degree n via m single steps."""
    if n - m < f.lo or n > f.hi:
        raise WindowTooSmallError("power does not fit the window")
    mat = Matrix.identity(f.field, f.dim(n - m))
    for deg in range(n - m + 1, n + 1):
        mat = act_linear(f, lin_coeffs, deg) * mat
    return mat


@dataclass
class CokernelData:
    """Canonical cokernel chart of a map into k^n.

    The projection rows are the canonical annihilator basis of the image
    (the kernel of the transpose); the injection is its deterministic
    right inverse, so projection . injection is the identity.
    """

    dim: int
    injection: Matrix
    projection: Matrix


def cokernel_data(m: Matrix) -> CokernelData:
    field = m.field
    n = m.nrows
    ann = kernel_basis(m.transpose())
    c = ann.dim
    proj = ann.basis.transpose()
    if c == 0:
        return CokernelData(0, Matrix.zeros(field, n, 0), proj)
    inj = solve_right(proj, Matrix.identity(field, c))
    return CokernelData(c, inj, proj)


@dataclass
class EvalPart:
    kind: str  # "bundle" | "torsion"
    label: object
    dim: int
    cokernel: CokernelData | None = None


@dataclass
class EvalResult:
    dim: int
    parts: list


def evaluate_on_sheaf(f: FunctorData, s: CoherentSheaf, d: int) -> EvalResult:
    """Right-exact value of the functor on a coherent sheaf.

    Bundle summands are read straight off the window; each torsion block
    (p, m) is the cokernel of the l_p^m action presented as
    O(d - m) -> O(d).  The total dimension does not depend on the
    admissible presentation twist d.
    """
    total = 0
    parts = []
    for a in s.bundle:
        if not f.lo <= a <= f.hi:
            raise WindowTooSmallError(f"twist {a} outside the window")
        dim = f.dim(a)
        parts.append(EvalPart("bundle", a, dim))
        total += dim
    for p, m in s.torsion.blocks:
        if d > f.hi or d - m < f.lo:
            raise WindowTooSmallError(
                f"presentation of a length-{m} block at twist {d} "
                "does not fit the window")
        lp = vanishing_form(p).coeffs()
        mat = act_form_power(f, lp, m, d)
        cok = cokernel_data(mat)
        parts.append(EvalPart("torsion", (p, m), cok.dim, cok))
        total += cok.dim
    return EvalResult(total, parts)


def apply_to_torsion_map(f: FunctorData, chain: TorsionChainMap) -> Matrix:
    """The induced map on cokernels of a chain map between presentations."""
    field = f.field
    lp = vanishing_form(chain.point).coeffs()
    top_deg = chain.tgt_degree - chain.src_degree
    bot_deg = ((chain.tgt_degree - chain.tgt_mult)
               - (chain.src_degree - chain.src_mult))
    if len(chain.top) != top_deg + 1 or len(chain.bot) != bot_deg + 1:
        raise ValueError("chain form degrees are inconsistent")
    lhs = form_product(field, chain.top, form_power(field, lp, chain.src_mult))
    rhs = form_product(field, form_power(field, lp, chain.tgt_mult), chain.bot)
    if lhs != rhs:
        raise ValueError("chain square does not commute")
    for deg, m in ((chain.src_degree, chain.src_mult),
                   (chain.tgt_degree, chain.tgt_mult)):
        if deg > f.hi or deg - m < f.lo:
            raise WindowTooSmallError("presentation outside the window")
    src = cokernel_data(act_form_power(f, lp, chain.src_mult, chain.src_degree))
    tgt = cokernel_data(act_form_power(f, lp, chain.tgt_mult, chain.tgt_degree))
    top = act_poly(f, chain.top, chain.tgt_degree)
    return tgt.projection * (top * src.injection)


def apply_bundle_map(f: FunctorData, bm: BundleMap) -> Matrix:
    """Blockwise action of a map between sums of line bundles."""
    field = f.field
    for a in bm.source + bm.target:
        if not f.lo <= a <= f.hi:
            raise WindowTooSmallError(f"twist {a} outside the window")
    total_src = sum(f.dim(s) for s in bm.source)
    total_tgt = sum(f.dim(t) for t in bm.target)
    if not bm.source or not bm.target:
        return Matrix.zeros(field, total_tgt, total_src)
    rows = []
    for j, tj in enumerate(bm.target):
        row = []
        for i, si in enumerate(bm.source):
            e = bm.entries[j][i]
            if e is None:
                row.append(Matrix.zeros(field, f.dim(tj), f.dim(si)))
            else:
                row.append(act_poly(f, e, tj))
        rows.append(row)
    return vstack([hstack(r) for r in rows])


def check_exactness_on_ses(f: FunctorData, ses: SesOfBundles) -> bool:
    """Whether the functor keeps the sequence exact on the left.

    The induced right-exactness (surjectivity onto the last term and
    exactness in the middle) must hold for admissible window data; its
    failure raises NOT_ADMISSIBLE.  Returns True iff the first induced
    map is also injective.
    """
    bad = ses.violations()
    if bad:
        raise ValueError("; ".join(bad))
    m1 = apply_bundle_map(f, ses.first)
    m2 = apply_bundle_map(f, ses.second)
    target_dim = sum(f.dim(t) for t in ses.second.target)
    r2 = rank(m2)
    r1 = rank(m1)
    if r2 != target_dim or r1 != m2.ncols - r2:
        raise NotAdmissibleError(
            "window data is not right exact on the given sequence")
    return r1 == m1.ncols


# ---------------------------------------------------------------------------
# Functor file format


def functor_to_json(f: FunctorData) -> dict:
    fmt = f.field.fmt

    def dump(m: Matrix):
        return [[fmt(x) for x in row] for row in m.rows]

    return {
        "field": f.field.tag,
        "lo": f.lo,
        "hi": f.hi,
        "dims": list(f.dims),
        "x0": [dump(m) for m in f.a_maps],
        "x1": [dump(m) for m in f.b_maps],
    }


def functor_from_json(data: dict, field=None) -> FunctorData:
    from .fields import field_from_tag

    if field is None:
        field = field_from_tag(data["field"])
    lo, hi = int(data["lo"]), int(data["hi"])
    dims = [int(d) for d in data["dims"]]
    if len(dims) != hi - lo + 1:
        raise ValueError("dims length does not match the window")

    def load(rows, nrows, ncols):
        if len(rows) != nrows or any(len(r) != ncols for r in rows):
            raise ValueError("matrix shape does not match dims")
        return Matrix.from_rows(
            field, [[field.parse(x) for x in r] for r in rows], ncols)

    x0, x1 = data["x0"], data["x1"]
    if len(x0) != hi - lo or len(x1) != hi - lo:
        raise ValueError("need one action pair per window step")
    amaps = [load(m, dims[k + 1], dims[k]) for k, m in enumerate(x0)]
    bmaps = [load(m, dims[k + 1], dims[k]) for k, m in enumerate(x1)]
    return FunctorData(field, lo, hi, dims, amaps, bmaps)
