"""Window-level structure data: stabilized pencil, torsion sheaf, kernel.

For admissible window data the dimensions settle to a constant top value
with regular pencils; the pencil at the top degree decomposes into
point/Jordan blocks and yields a torsion sheaf.  Dividing the stabilized
actions back down the window produces a natural surjection onto the
torsion model whose degreewise kernels assemble into the kernel functor.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    FieldExhaustedError,
    NotAdmissibleError,
    SingularPencilError,
    WindowTooSmallError,
)
from .functors import (
    FunctorData,
    act_linear,
    cokernel_data,
    generator_h0_torsion,
)
from .linalg import (
    MapSequence,
    Matrix,
    Subspace,
    _find_regular_combination,
    inverse,
    kernel_basis,
    pencil_det_poly,
    pencil_weierstrass_with_transform,
    rank,
)
from .sheaves import (
    LocalCohomologySystem,
    P1Point,
    TorsionSheaf,
    enumerate_points,
    vanishing_form,
)


@dataclass(frozen=True)
class StabilizationInfo:
    n_stab: int
    top_dim: int


class NatTransWindow:
    """Degreewise components of a natural map between window functors."""

    __slots__ = ("source", "target", "components")

    def __init__(self, source: FunctorData, target: FunctorData, components):
        self.source = source
        self.target = target
        self.components = dict(components)

    def component(self, n) -> Matrix:
        return self.components[n]

    def naturality_violations(self):
        out = []
        for n in range(self.source.lo + 1, self.source.hi + 1):
            if (self.component(n) * self.source.a(n)
                    != self.target.a(n) * self.component(n - 1)):
                out.append(f"x0 naturality fails into degree {n}")
            if (self.component(n) * self.source.b(n)
                    != self.target.b(n) * self.component(n - 1)):
                out.append(f"x1 naturality fails into degree {n}")
        return out


class GammaWindow(NatTransWindow):
    """The canonical surjection onto the torsion model, with context."""

    __slots__ = ("torsion", "avoid", "stab")

    def __init__(self, source, target, components, torsion, avoid, stab):
        super().__init__(source, target, components)
        self.torsion = torsion
        self.avoid = avoid
        self.stab = stab


def _pencil_is_regular(a: Matrix, b: Matrix) -> bool:
    if a.nrows == 0:
        return True
    if _find_regular_combination(a, b) is not None:
        return True
    return not pencil_det_poly(a, b).is_zero()


def stabilized_top(f: FunctorData) -> StabilizationInfo:
    """Least window degree from which dims are constant and pencils regular.

    Requires at least two confirmation steps below the top of the window.
    """
    top = f.dims[-1]
    n_dims = f.hi
    while n_dims - 1 >= f.lo and f.dim(n_dims - 1) == top:
        n_dims -= 1
    n_stab = n_dims
    last_singular = None
    for n in range(n_stab + 1, f.hi + 1):
        if not _pencil_is_regular(f.a(n), f.b(n)):
            last_singular = n
    if last_singular is not None:
        if f.hi - last_singular < 2:
            raise SingularPencilError(
                "no stabilized tail with regular pencils in the window")
        n_stab = last_singular
    if f.hi - n_stab < 2:
        raise WindowTooSmallError(
            "cannot confirm stabilization with a two-step margin")
    return StabilizationInfo(n_stab, top)


def _torsion_from_pencil(field, decomp) -> TorsionSheaf:
    blocks = [(P1Point(field, pair), size)
              for pair, size in decomp.flat_blocks()]
    return TorsionSheaf(field, blocks)


def compute_w_with_transform(f: FunctorData):
    """Torsion sheaf of the stabilized top pencil plus its transform.

    Returns (info, torsion, s_out) with A[hi] = s_out·A_model·s_in^{-1}
    for the block model in canonical torsion order.
    """
    info = stabilized_top(f)
    decomp, s_out, _s_in = pencil_weierstrass_with_transform(
        f.a(f.hi), f.b(f.hi))
    return info, _torsion_from_pencil(f.field, decomp), s_out


def compute_W(f: FunctorData) -> TorsionSheaf:
    """The coherent torsion sheaf attached to admissible window data."""
    return compute_w_with_transform(f)[1]


def avoiding_points(t: TorsionSheaf, count: int):
    """First ``count`` canonical points outside the support of t."""
    support = t.support()
    out = []
    for p in enumerate_points(t.field):
        if p not in support:
            out.append(p)
            if len(out) == count:
                return out
    raise FieldExhaustedError(
        "the field has too few points outside the support")


def choose_avoiding_point(t: TorsionSheaf) -> P1Point:
    return avoiding_points(t, 1)[0]


def eventual_kernel(f: FunctorData, n: int, p: P1Point) -> Subspace:
    """Union of the kernels of the rising powers of the l_p action at n.

    Computed as the kernel of the composite into the top degree, with the
    one-step-shorter composite as the stabilization confirmation.
    """
    if n > f.hi - 1:
        raise WindowTooSmallError("need at least one power inside the window")
    if n < f.lo:
        raise WindowTooSmallError("degree below the window")
    lp = vanishing_form(p).coeffs()
    into_hi = act_linear(f, lp, n + 1)
    for deg in range(n + 2, f.hi + 1):
        into_hi = act_linear(f, lp, deg) * into_hi
    if n == f.hi - 1:
        shorter = Matrix.identity(f.field, f.dim(n))
    else:
        shorter = act_linear(f, lp, n + 1)
        for deg in range(n + 2, f.hi):
            shorter = act_linear(f, lp, deg) * shorter
    full = kernel_basis(into_hi)
    confirm = kernel_basis(shorter)
    if full != confirm:
        raise WindowTooSmallError(
            f"eventual kernel at degree {n} not confirmed before the top")
    return full


def gamma_window(f: FunctorData) -> GammaWindow:
    """The natural window surjection onto the torsion model.

    The top component is the pencil-transform identification of F(O(hi))
    with the model space; lower components divide the model by the
    invertible action of the avoiding-point form.  Exact naturality is
    asserted and its failure reported as inadmissible data.
    """
    info, torsion, s_out = compute_w_with_transform(f)
    model = generator_h0_torsion(torsion, f.lo, f.hi)
    p = choose_avoiding_point(torsion)
    lp = vanishing_form(p).coeffs()
    length = torsion.length()
    if length:
        ml = act_linear(model, lp, f.hi)
        ml_inv = inverse(ml)
        psi = inverse(s_out)
    else:
        ml_inv = Matrix.zeros(f.field, 0, 0)
        psi = Matrix.zeros(f.field, 0, f.dim(f.hi))
    comps = {f.hi: psi}
    cur = psi
    for n in range(f.hi - 1, f.lo - 1, -1):
        cur = ml_inv * (cur * act_linear(f, lp, n + 1))
        comps[n] = cur
    gamma = GammaWindow(f, model, comps, torsion, p, info)
    bad = gamma.naturality_violations()
    if bad:
        raise NotAdmissibleError(
            "window data does not admit a natural surjection onto its "
            "torsion model: " + "; ".join(bad))
    return gamma


def cok_vanishes(f: FunctorData) -> bool:
    """True iff every component of the natural surjection is onto."""
    gamma = gamma_window(f)
    length = gamma.torsion.length()
    return all(rank(gamma.component(n)) == length for n in f.degrees())


def _pivot_rows(basis: Matrix):
    out = []
    for j in range(basis.ncols):
        for i in range(basis.nrows):
            if basis.rows[i][j]:
                out.append(i)
                break
    return out


def kernel_functor_with_inclusion(gamma: GammaWindow):
    """Degreewise kernels of gamma with their induced actions.

    Returns (kernel FunctorData, inclusion NatTransWindow).  The induced
    actions are read off through the canonical kernel bases; the forced
    dimension law dims[n] - length must hold exactly.
    """
    f = gamma.source
    length = gamma.torsion.length()
    bases = {}
    kdims = []
    for n in f.degrees():
        comp = gamma.component(n)
        if rank(comp) != length:
            raise NotAdmissibleError(
                f"surjection fails at degree {n}; data inadmissible")
        k = kernel_basis(comp)
        bases[n] = k.basis
        kdims.append(k.dim)
    amaps, bmaps = [], []
    for n in range(f.lo + 1, f.hi + 1):
        piv = _pivot_rows(bases[n])
        ya = f.a(n) * bases[n - 1]
        yb = f.b(n) * bases[n - 1]
        amaps.append(Matrix.from_rows(f.field, [ya.rows[i] for i in piv],
                                      ya.ncols))
        bmaps.append(Matrix.from_rows(f.field, [yb.rows[i] for i in piv],
                                      yb.ncols))
    kernel = FunctorData(f.field, f.lo, f.hi, kdims, amaps, bmaps)
    theta = NatTransWindow(kernel, f, bases)
    return kernel, theta


def kernel_functor(f: FunctorData) -> FunctorData:
    return kernel_functor_with_inclusion(gamma_window(f))[0]


# ---------------------------------------------------------------------------
# Direct systems derived from a functor


def torsion_system_sequence(f: FunctorData, system: LocalCohomologySystem
                            ) -> MapSequence:
    """F applied to the chain of torsion blocks at one point."""
    lp = vanishing_form(system.point).coeffs()
    coks = []
    for i in range(1, system.size + 1):
        mult, deg = system.presentation(i)
        if deg > f.hi or deg - mult < f.lo:
            raise WindowTooSmallError(
                "torsion presentations do not fit the window")
        mat = act_linear(f, lp, deg - mult + 1)
        for d in range(deg - mult + 2, deg + 1):
            mat = act_linear(f, lp, d) * mat
        coks.append(cokernel_data(mat))
    maps = []
    for i in range(1, system.size):
        _, deg = system.presentation(i + 1)
        top = act_linear(f, lp, deg)
        maps.append(coks[i].projection * (top * coks[i - 1].injection))
    dims = [c.dim for c in coks]
    return MapSequence(f.field, dims, maps)


def stalk_sequence(f: FunctorData, p: P1Point) -> MapSequence:
    """The window chain of l_p actions F(O(lo)) -> ... -> F(O(hi))."""
    lp = vanishing_form(p).coeffs()
    maps = [act_linear(f, lp, n) for n in range(f.lo + 1, f.hi + 1)]
    return MapSequence(f.field, f.dims, maps)


def raw_pencil_det(f: FunctorData):
    """det(t·A + B) of the top-degree pencil."""
    return pencil_det_poly(f.a(f.hi), f.b(f.hi))
