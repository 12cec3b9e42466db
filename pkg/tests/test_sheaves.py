import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from p1functors.errors import EqualPointsError
from p1functors.fields import QQ, PrimeField
from p1functors.sheaves import (
    CoherentSheaf,
    P1Point,
    TorsionSheaf,
    enumerate_points,
    ext1_skyscraper,
    form_power,
    form_product,
    h0_dim,
    h1_dim,
    koszul_sequence,
    local_cohomology_system,
    tensor_torsion,
    vanishing_form,
)


def pt(a, b, field=QQ):
    return P1Point.from_coords(field, field.from_int(a), field.from_int(b))


class TestPoints:
    def test_normalization(self):
        assert pt(2, 4).coords == (QQ.ratio(1, 2), QQ.one)
        assert pt(3, 0).coords == (QQ.one, QQ.zero)

    def test_enumeration_prefix(self):
        pts = list(itertools.islice(enumerate_points(QQ), 4))
        assert pts == [pt(0, 1), pt(1, 0), pt(1, 1), pt(1, 2)]

    def test_enumeration_exhausts_prime_field(self):
        field = PrimeField(3)
        pts = list(enumerate_points(field))
        assert len(pts) == 4
        assert len(set(pts)) == 4

    def test_json_round_trip(self):
        p = P1Point.from_coords(QQ, QQ.ratio(1, 3), QQ.one)
        assert P1Point.from_json(QQ, p.to_json()) == p


class TestVanishingForm:
    def test_zero_point(self):
        assert vanishing_form(pt(0, 1)).coeffs() == (QQ.one, QQ.zero)

    def test_infinity(self):
        assert vanishing_form(pt(1, 0)).coeffs() == (QQ.zero, QQ.one)

    def test_one_one(self):
        assert vanishing_form(pt(1, 1)).coeffs() == (QQ.one, -QQ.one)

    def test_vanishes_exactly_at_its_point(self):
        pts = list(itertools.islice(enumerate_points(QQ), 6))
        for p in pts:
            form = vanishing_form(p)
            for q in pts:
                val = form.evaluate(q)
                assert (not val) == (p == q)


class TestCohomologyDims:
    def test_positive_twist(self):
        s = CoherentSheaf.line_bundle(QQ, 3)
        assert h0_dim(s) == 4 and h1_dim(s) == 0

    def test_negative_twist(self):
        s = CoherentSheaf.line_bundle(QQ, -2)
        assert h0_dim(s) == 0 and h1_dim(s) == 1

    def test_additivity_with_torsion(self):
        t = TorsionSheaf(QQ, [(pt(0, 1), 2)])
        s = CoherentSheaf(QQ, [-5], t)
        assert h0_dim(s) == 2 and h1_dim(s) == 4

    def test_zero_sheaf(self):
        s = CoherentSheaf.zero(QQ)
        assert h0_dim(s) == 0 and h1_dim(s) == 0

    def test_euler_characteristic_under_twists(self):
        rng = random.Random(5)
        pts = list(itertools.islice(enumerate_points(QQ), 6))
        for _ in range(10):
            bundle = [rng.randint(-5, 5) for _ in range(rng.randint(0, 3))]
            tors = TorsionSheaf(QQ, [(rng.choice(pts), rng.randint(1, 3))
                                     for _ in range(rng.randint(0, 2))])
            s = CoherentSheaf(QQ, bundle, tors)
            for i in range(-10, 11):
                si = s.twist(i)
                expected = sum(a + i + 1 for a in bundle) + tors.length()
                assert h0_dim(si) - h1_dim(si) == expected


class TestTensorTorsion:
    def test_twist_invariance(self):
        t = TorsionSheaf(QQ, [(pt(1, 1), 1)])
        s = CoherentSheaf.line_bundle(QQ, 7)
        assert tensor_torsion(s, t) == t

    def test_same_point_takes_min(self):
        # k[u]/(u^2) (x) k[u]/(u^3) = k[u]/(u^2), worked out by hand
        a = CoherentSheaf.skyscraper(pt(0, 1), 2)
        t = TorsionSheaf(QQ, [(pt(0, 1), 3)])
        assert tensor_torsion(a, t) == TorsionSheaf(QQ, [(pt(0, 1), 2)])

    def test_disjoint_supports_vanish(self):
        a = CoherentSheaf.skyscraper(pt(0, 1), 2)
        t = TorsionSheaf(QQ, [(pt(1, 0), 1)])
        assert tensor_torsion(a, t).is_zero()

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 3)),
                    max_size=3),
           st.lists(st.tuples(st.integers(0, 3), st.integers(1, 3)),
                    max_size=3))
    def test_commutative_on_torsion(self, ablocks, bblocks):
        pts = list(itertools.islice(enumerate_points(QQ), 4))
        ta = TorsionSheaf(QQ, [(pts[i], m) for i, m in ablocks])
        tb = TorsionSheaf(QQ, [(pts[i], m) for i, m in bblocks])
        sa = CoherentSheaf(QQ, [], ta)
        sb = CoherentSheaf(QQ, [], tb)
        assert tensor_torsion(sa, tb) == tensor_torsion(sb, ta)

    def test_associative_on_torsion(self):
        pts = list(itertools.islice(enumerate_points(QQ), 3))
        ta = TorsionSheaf(QQ, [(pts[0], 2), (pts[1], 1)])
        tb = TorsionSheaf(QQ, [(pts[0], 1), (pts[2], 2)])
        tc = TorsionSheaf(QQ, [(pts[0], 3)])
        left = tensor_torsion(CoherentSheaf(QQ, [], tensor_torsion(
            CoherentSheaf(QQ, [], ta), tb)), tc)
        right = tensor_torsion(CoherentSheaf(QQ, [], ta),
                               tensor_torsion(CoherentSheaf(QQ, [], tb), tc))
        assert left == right


class TestKoszul:
    def test_coordinate_points(self):
        ses = koszul_sequence(0, pt(0, 1), pt(1, 0))
        assert ses.first.entries == (((QQ.one, QQ.zero),),
                                     ((QQ.zero, -QQ.one),))
        assert ses.second.entries == (((QQ.zero, QQ.one), (QQ.one, QQ.zero)),)
        assert ses.violations() == []

    def test_composite_always_zero(self):
        for j in (-1, 0, 2):
            ses = koszul_sequence(j, pt(0, 1), pt(1, 1))
            assert ses.second.compose(ses.first).is_zero()

    def test_j2_mixed_points(self):
        ses = koszul_sequence(2, pt(0, 1), pt(1, 1))
        # alpha = x0, beta = x0 - x1, expanded by hand
        assert ses.first.entries == (((QQ.one, QQ.zero),),
                                     ((-QQ.one, QQ.one),))
        assert ses.second.entries == (((QQ.one, -QQ.one), (QQ.one, QQ.zero)),)

    def test_equal_points_rejected(self):
        with pytest.raises(EqualPointsError):
            koszul_sequence(0, pt(1, 1), pt(1, 1))

    def test_h0_counts_consistent(self):
        for j in range(1, 6):
            a = max(0, j - 1)
            b = max(0, j)
            c = max(0, j + 1)
            assert a - 2 * b + c == 0


class TestLocalCohomologySystem:
    def test_blocks_and_first_step(self):
        sys = local_cohomology_system(pt(0, 1), 2)
        assert sys.block(1) == TorsionSheaf(QQ, [(pt(0, 1), 1)])
        assert sys.block(2) == TorsionSheaf(QQ, [(pt(0, 1), 2)])
        step = sys.mu(1, 2)
        assert step.top == (QQ.one, QQ.zero)  # multiplication by x0
        assert step.bot == (QQ.one,)

    def test_presentation_degrees_chain(self):
        sys = local_cohomology_system(pt(1, 1), 5)
        for i in range(1, 6):
            mult, deg = sys.presentation(i)
            assert mult == i
            assert deg - mult == sys.base - 1  # lower twist is constant

    def test_step_composition_matches_direct_map(self):
        sys = local_cohomology_system(pt(0, 1), 3)
        composed = sys.mu(2, 3).compose(sys.mu(1, 2))
        direct = sys.mu(1, 3)
        assert composed.top == direct.top == (QQ.one, QQ.zero, QQ.zero)
        assert composed.bot == direct.bot
        assert composed == direct


class TestExt1:
    def test_small(self):
        assert ext1_skyscraper(1, pt(0, 1)) == TorsionSheaf(QQ, [(pt(0, 1), 1)])

    def test_length_three(self):
        # dualizing the presentation of a length-3 block keeps length 3
        assert ext1_skyscraper(3, pt(1, 1)).length() == 3

    def test_length_additive_under_sum(self):
        t1 = ext1_skyscraper(2, pt(0, 1))
        t2 = ext1_skyscraper(3, pt(1, 0))
        both = TorsionSheaf(QQ, list(t1.blocks) + list(t2.blocks))
        assert both.length() == t1.length() + t2.length()


class TestForms:
    def test_product_is_convolution(self):
        x0 = (QQ.one, QQ.zero)
        x1 = (QQ.zero, QQ.one)
        assert form_product(QQ, x0, x1) == (QQ.zero, QQ.one, QQ.zero)

    def test_power_binomial(self):
        f = (QQ.one, QQ.one)  # x0 + x1
        assert form_power(QQ, f, 2) == (QQ.one, QQ.from_int(2), QQ.one)


class TestSheafJson:
    def test_round_trip(self):
        t = TorsionSheaf(QQ, [(pt(1, 2), 2), (pt(1, 0), 1)])
        s = CoherentSheaf(QQ, [3, -1], t)
        assert CoherentSheaf.from_json(QQ, s.to_json()) == s
