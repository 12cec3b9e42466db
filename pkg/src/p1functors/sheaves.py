"""Closed points, forms, torsion and coherent sheaves on the projective line.

Sheaf data is finite: a coherent sheaf is a splitting type (multiset of
line-bundle twists) plus a finite list of torsion blocks (point,
multiplicity).  Homogeneous forms of degree d are coefficient tuples in
the fixed monomial order x0^d, x0^{d-1} x1, ..., x1^d.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EqualPointsError
from .fields import PrimeField
from .linalg import normalize_point, point_sort_key


class P1Point:
    """Closed point with normalized coordinates (c, 1) or (1, 0)."""

    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords

    @classmethod
    def from_coords(cls, field, a, b):
        return cls(field, normalize_point(field, a, b))

    @classmethod
    def zero(cls, field):
        return cls(field, (field.zero, field.one))

    @classmethod
    def infinity(cls, field):
        return cls(field, (field.one, field.zero))

    def is_infinite(self):
        return not self.coords[1]

    def sort_key(self):
        return point_sort_key(self.field, self.coords)

    def __eq__(self, other):
        return (isinstance(other, P1Point) and self.field == other.field
                and self.coords == other.coords)

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"[{self.coords[0]}:{self.coords[1]}]"

    def to_json(self):
        f = self.field
        return [str(f.fmt(self.coords[0])), str(f.fmt(self.coords[1]))]

    @classmethod
    def from_json(cls, field, data):
        if not (isinstance(data, (list, tuple)) and len(data) == 2):
            raise ValueError(f"bad point {data!r}")
        return cls.from_coords(field, field.parse(data[0]), field.parse(data[1]))


def enumerate_points(field):
    """Canonical point enumeration: [0:1], [1:0], [1:1], [1:2], ...

    Over F_p the enumeration is exhaustive (p + 1 points) and finite.
    """
    yield P1Point.zero(field)
    yield P1Point.infinity(field)
    n = 1
    while True:
        if isinstance(field, PrimeField) and n >= field.prime:
            return
        yield P1Point.from_coords(field, field.one, field.from_int(n))
        n += 1


@dataclass(frozen=True)
class LinearForm:
    """c0*x0 + c1*x1 with leading (first nonzero) coefficient 1."""

    c0: object
    c1: object

    @classmethod
    def normalized(cls, field, c0, c1):
        if not c0 and not c1:
            raise ValueError("zero linear form")
        lead = c0 if c0 else c1
        return cls(c0 / lead, c1 / lead)

    def coeffs(self):
        return (self.c0, self.c1)

    def evaluate(self, p: P1Point):
        return self.c0 * p.coords[0] + self.c1 * p.coords[1]

    def __repr__(self):
        return f"LinearForm({self.c0}*x0 + {self.c1}*x1)"


def vanishing_form(p: P1Point) -> LinearForm:
    """The linear form cutting out p: p1*x0 - p0*x1, normalized."""
    p0, p1 = p.coords
    return LinearForm.normalized(p.field, p1, -p0)


def form_product(field, f, g):
    """Convolution of homogeneous coefficient tuples."""
    if not f or not g:
        return ()
    z = field.zero
    out = [z] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = out[i + j] + a * b
    return tuple(out)


def form_power(field, f, n):
    out = (field.one,)
    for _ in range(n):
        out = form_product(field, out, f)
    return out


class TorsionSheaf:
    """Finite direct sum of blocks O_{p,m}; canonically sorted."""

    __slots__ = ("field", "blocks")

    def __init__(self, field, blocks):
        self.field = field
        self.blocks = tuple(sorted(
            ((p, int(m)) for p, m in blocks),
            key=lambda b: (b[0].sort_key(), b[1])))
        if any(m < 1 for _, m in self.blocks):
            raise ValueError("multiplicities must be positive")

    @classmethod
    def empty(cls, field):
        return cls(field, [])

    def length(self):
        return sum(m for _, m in self.blocks)

    def support(self):
        seen = []
        for p, _ in self.blocks:
            if p not in seen:
                seen.append(p)
        return seen

    def is_zero(self):
        return not self.blocks

    def __eq__(self, other):
        return (isinstance(other, TorsionSheaf) and self.field == other.field
                and self.blocks == other.blocks)

    def __hash__(self):
        return hash(self.blocks)

    def __repr__(self):
        return f"TorsionSheaf({list(self.blocks)})"

    def to_json(self):
        return [{"point": p.to_json(), "mult": m} for p, m in self.blocks]

    @classmethod
    def from_json(cls, field, data):
        blocks = []
        for entry in data:
            p = P1Point.from_json(field, entry["point"])
            blocks.append((p, int(entry["mult"])))
        return cls(field, blocks)


class CoherentSheaf:
    """Splitting type (sorted twist multiset) plus a torsion part."""

    __slots__ = ("field", "bundle", "torsion")

    def __init__(self, field, bundle, torsion: TorsionSheaf | None = None):
        self.field = field
        self.bundle = tuple(sorted(int(a) for a in bundle))
        self.torsion = torsion if torsion is not None else TorsionSheaf.empty(field)

    @classmethod
    def zero(cls, field):
        return cls(field, [])

    @classmethod
    def line_bundle(cls, field, n):
        return cls(field, [n])

    @classmethod
    def skyscraper(cls, p: P1Point, mult: int = 1):
        return cls(p.field, [], TorsionSheaf(p.field, [(p, mult)]))

    def twist(self, i: int) -> "CoherentSheaf":
        return CoherentSheaf(self.field, [a + i for a in self.bundle], self.torsion)

    def is_zero(self):
        return not self.bundle and self.torsion.is_zero()

    def __eq__(self, other):
        return (isinstance(other, CoherentSheaf) and self.field == other.field
                and self.bundle == other.bundle and self.torsion == other.torsion)

    def __repr__(self):
        return f"CoherentSheaf(bundle={list(self.bundle)}, torsion={self.torsion!r})"

    def to_json(self):
        return {"bundle": list(self.bundle), "torsion": self.torsion.to_json()}

    @classmethod
    def from_json(cls, field, data):
        bundle = data.get("bundle", [])
        torsion = TorsionSheaf.from_json(field, data.get("torsion", []))
        return cls(field, bundle, torsion)


def h0_dim(s: CoherentSheaf) -> int:
    """dim of global sections: sum of max(0, a+1) plus torsion length."""
    return sum(max(0, a + 1) for a in s.bundle) + s.torsion.length()


def h1_dim(s: CoherentSheaf) -> int:
    """dim of first cohomology: sum of max(0, -a-1)."""
    return sum(max(0, -a - 1) for a in s.bundle)


def tensor_torsion(s: CoherentSheaf, t: TorsionSheaf) -> TorsionSheaf:
    """The torsion sheaf s (x) t.

    Line-bundle summands each contribute a copy of t; same-point torsion
    blocks (m, n) give multiplicity min(m, n); disjoint points vanish.
    """
    blocks = []
    for _ in s.bundle:
        blocks.extend(t.blocks)
    for p, mp in s.torsion.blocks:
        for q, mq in t.blocks:
            if p == q:
                blocks.append((p, min(mp, mq)))
    return TorsionSheaf(t.field, blocks)


class BundleMap:
    """Map between sums of line bundles given by a grid of forms.

    ``entries[j][i]`` is the coefficient tuple of a homogeneous form of
    degree target[j] - source[i], or None for the zero map (mandatory
    when the degree is negative).
    """

    __slots__ = ("field", "source", "target", "entries")

    def __init__(self, field, source, target, entries):
        self.field = field
        self.source = tuple(int(a) for a in source)
        self.target = tuple(int(a) for a in target)
        ents = []
        for j, row in enumerate(entries):
            out = []
            for i, e in enumerate(row):
                d = self.target[j] - self.source[i]
                if e is None:
                    out.append(None)
                    continue
                e = tuple(e)
                if d < 0:
                    if any(e):
                        raise ValueError("nonzero form of negative degree")
                    out.append(None)
                    continue
                if len(e) != d + 1:
                    raise ValueError(
                        f"entry ({j},{i}) needs {d + 1} coefficients")
                out.append(e)
            ents.append(tuple(out))
        self.entries = tuple(ents)

    def twist_sum(self):
        return sum(self.source), sum(self.target)

    def compose(self, inner: "BundleMap") -> "BundleMap":
        """self o inner as a BundleMap."""
        if inner.target != self.source:
            raise ValueError("composition degree mismatch")
        field = self.field
        rows = []
        for j in range(len(self.target)):
            row = []
            for i in range(len(inner.source)):
                acc = None
                for k in range(len(self.source)):
                    a = self.entries[j][k]
                    b = inner.entries[k][i]
                    if a is None or b is None:
                        continue
                    prod = form_product(field, a, b)
                    if acc is None:
                        acc = prod
                    else:
                        acc = tuple(x + y for x, y in zip(acc, prod))
                row.append(acc)
            rows.append(row)
        return BundleMap(field, inner.source, self.target, rows)

    def is_zero(self):
        return all(e is None or not any(e)
                   for row in self.entries for e in row)


@dataclass(frozen=True)
class SesOfBundles:
    """0 -> E' -> E -> E'' -> 0 presented by its two bundle maps."""

    first: BundleMap
    second: BundleMap

    def violations(self):
        out = []
        if self.second.source != self.first.target:
            out.append("maps do not chain")
            return out
        if not self.second.compose(self.first).is_zero():
            out.append("composite is nonzero")
        if len(self.first.source) + len(self.second.target) != len(self.first.target):
            out.append("rank counts inconsistent with exactness")
        s_first, _ = self.first.twist_sum()
        _, t_second = self.second.twist_sum()
        mid = sum(self.first.target)
        if s_first + t_second != mid:
            out.append("degree sums inconsistent with exactness")
        return out


def koszul_sequence(j: int, p: P1Point, q: P1Point) -> SesOfBundles:
    """The twisted Koszul sequence for two distinct points.

    0 -> O(j-2) --(a, -b)--> O(j-1)^2 --(b, a)--> O(j) -> 0, where a and
    b are the shifts of the vanishing forms of p and q; the composite is
    zero since the two forms commute.
    """
    if p == q:
        raise EqualPointsError("Koszul sequence needs distinct points")
    field = p.field
    a = vanishing_form(p).coeffs()
    b = vanishing_form(q).coeffs()
    neg_b = tuple(-c for c in b)
    first = BundleMap(field, (j - 2,), (j - 1, j - 1), [[a], [neg_b]])
    second = BundleMap(field, (j - 1, j - 1), (j,), [[b, a]])
    return SesOfBundles(first, second)


@dataclass(frozen=True)
class TorsionChainMap:
    """Chain-level map between presented torsion blocks at one point.

    Source block (p, src_mult) presented as l_p^src_mult:
    O(src_degree - src_mult) -> O(src_degree); same for the target.  The
    map is the commuting square with top form ``top`` (degree
    tgt_degree - src_degree) and bottom form ``bot``.
    """

    point: P1Point
    src_mult: int
    src_degree: int
    tgt_mult: int
    tgt_degree: int
    top: tuple
    bot: tuple

    def compose(self, inner: "TorsionChainMap") -> "TorsionChainMap":
        if (inner.point != self.point or inner.tgt_mult != self.src_mult
                or inner.tgt_degree != self.src_degree):
            raise ValueError("chain maps do not compose")
        field = self.point.field
        return TorsionChainMap(
            self.point, inner.src_mult, inner.src_degree,
            self.tgt_mult, self.tgt_degree,
            form_product(field, self.top, inner.top),
            form_product(field, self.bot, inner.bot),
        )


class LocalCohomologySystem:
    """The chain of blocks O_1 -> O_2 -> ... at a point.

    Block i is (p, i) presented at degree base + i - 1, so every lower
    presentation degree equals base - 1; the step maps have top form l_p
    and bottom form 1.
    """

    __slots__ = ("point", "size", "base")

    def __init__(self, point: P1Point, size: int, base: int = 0):
        if size < 2:
            raise ValueError("need at least two blocks")
        self.point = point
        self.size = size
        self.base = base

    def block(self, i: int) -> TorsionSheaf:
        return TorsionSheaf(self.point.field, [(self.point, i)])

    def presentation(self, i: int):
        """(mult, degree) of the i-th block, 1-based."""
        return i, self.base + i - 1

    def mu(self, i: int, j: int) -> TorsionChainMap:
        """Chain data of the inclusion of O_i into O_j, i <= j."""
        if not 1 <= i <= j <= self.size:
            raise ValueError("indices out of range")
        field = self.point.field
        lp = vanishing_form(self.point).coeffs()
        top = form_power(field, lp, j - i)
        return TorsionChainMap(
            self.point, i, self.base + i - 1, j, self.base + j - 1,
            top, (field.one,))

    def steps(self):
        return [self.mu(i, i + 1) for i in range(1, self.size)]


def local_cohomology_system(p: P1Point, n: int, base: int = 0):
    """The direct system (O_i, mu_{i,i+1}) for i = 1..n at p."""
    if n < 2:
        raise ValueError("need n >= 2")
    return LocalCohomologySystem(p, n, base)


def ext1_skyscraper(n: int, p: P1Point) -> TorsionSheaf:
    """Dualizing a length-n block at p returns a length-n block at p."""
    if n < 1:
        raise ValueError("need n >= 1")
    return TorsionSheaf(p.field, [(p, n)])
