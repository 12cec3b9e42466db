import pytest

from p1functors.errors import (
    NotAdmissibleError,
    WindowTooSmallError,
)
from p1functors.fields import QQ
from p1functors.functors import (
    direct_sum,
    direct_sum_many,
    gauge_scramble,
    generator_h0_torsion,
    generator_h1,
    zero_functor,
)
from p1functors.linalg import Matrix, rank
from p1functors.sheaves import P1Point, TorsionSheaf
from p1functors.structure import (
    Decomposition,
    analyze,
    build_h1_isomorphism,
    build_splitting,
    compose_h1_model,
    decompose,
    h1_multiplicities_from_dims,
    is_integral_transform,
    is_pullback,
    run_property_suite,
)
from p1functors.watts import gamma_window, kernel_functor_with_inclusion


def pt(a, b, field=QQ):
    return P1Point.from_coords(field, field.from_int(a), field.from_int(b))


def compose_instance(torsion_blocks, h1_mults, lo, hi, seed=None):
    field = QQ
    t = TorsionSheaf(field, torsion_blocks)
    parts = []
    for i in sorted(h1_mults):
        parts.extend(generator_h1(field, i, lo, hi)
                     for _ in range(h1_mults[i]))
    parts.append(generator_h0_torsion(t, lo, hi))
    f = direct_sum_many(field, lo, hi, parts)
    if seed is not None:
        f = gauge_scramble(f, seed)
    return f, Decomposition(t, dict(h1_mults))


class TestMultiplicities:
    def test_single_summand(self):
        # second-difference table worked by hand: dims 2,1,0,0
        assert h1_multiplicities_from_dims(
            {-3: 2, -2: 1, -1: 0, 0: 0}) == {0: 1}

    def test_doubled_summand(self):
        assert h1_multiplicities_from_dims(
            {-3: 4, -2: 2, -1: 0, 0: 0}) == {0: 2}

    def test_zero_profile(self):
        assert h1_multiplicities_from_dims(
            {n: 0 for n in range(-4, 1)}) == {}

    def test_mixed_profile(self):
        # dims of h1(0) + h1(-2) on [-6, 2]: by the counting formula
        prof = {n: max(0, -n - 1) + max(0, -n + 1) for n in range(-6, 3)}
        assert h1_multiplicities_from_dims(prof) == {0: 1, -2: 1}

    def test_unstabilized_slope(self):
        with pytest.raises(WindowTooSmallError):
            h1_multiplicities_from_dims({-3: 5, -2: 2, -1: 0, 0: 0})

    def test_top_not_zero(self):
        with pytest.raises(WindowTooSmallError):
            h1_multiplicities_from_dims({-3: 3, -2: 2, -1: 1, 0: 1})


class TestH1Isomorphism:
    def test_identity_case(self):
        ker = compose_h1_model(QQ, {0: 1}, -5, 2)
        nat = build_h1_isomorphism(ker, {0: 1})
        assert nat.naturality_violations() == []
        for n in range(-5, 3):
            assert rank(nat.component(n)) == ker.dim(n)

    def test_gauged_model(self):
        model = compose_h1_model(QQ, {0: 2, -1: 1}, -6, 2)
        ker = gauge_scramble(model, 31)
        nat = build_h1_isomorphism(ker, {0: 2, -1: 1})
        assert nat.naturality_violations() == []
        for n in range(-6, 3):
            assert rank(nat.component(n)) == ker.dim(n)

    def test_wrong_multiplicities_rejected(self):
        ker = compose_h1_model(QQ, {0: 1}, -5, 2)
        with pytest.raises(NotAdmissibleError):
            build_h1_isomorphism(ker, {0: 2})


class TestDecompose:
    def test_spec_round_trip(self):
        f, expected = compose_instance(
            [(pt(1, 1), 1), (pt(0, 1), 2)], {-1: 1}, -6, 4, seed=5)
        decomp, cert = decompose(f)
        assert decomp == expected
        assert cert.verify() == []

    def test_pure_torsion(self):
        f, expected = compose_instance([(pt(1, 2), 2)], {}, -4, 4, seed=9)
        decomp, cert = decompose(f)
        assert decomp == expected
        for n in f.degrees():
            assert cert.lam.component(n).shape == (0, f.dim(n))

    def test_pure_h1(self):
        f, expected = compose_instance([], {0: 1}, -5, 2, seed=3)
        decomp, cert = decompose(f)
        assert decomp == expected
        assert decomp.torsion.is_zero()

    def test_zero_functor(self):
        decomp, cert = decompose(zero_functor(QQ, -4, 2))
        assert decomp.torsion.is_zero() and decomp.h1_mults == {}
        assert cert.verify() == []

    def test_ungauged_equals_gauged_result(self):
        blocks = [(pt(1, 0), 2), (pt(0, 1), 1)]
        mults = {0: 1, 1: 2}
        f1, expected = compose_instance(blocks, mults, -6, 4)
        f2, _ = compose_instance(blocks, mults, -6, 4, seed=77)
        assert decompose(f1)[0] == expected
        assert decompose(f2)[0] == expected

    def test_dimension_law(self):
        f, expected = compose_instance(
            [(pt(1, 1), 2)], {0: 1, -2: 2}, -8, 4, seed=13)
        decomp, _ = decompose(f)
        for n in f.degrees():
            assert f.dim(n) == decomp.model_dim(n)

    def test_model_iso_invertible_and_natural(self):
        f, _ = compose_instance([(pt(1, 2), 1)], {-1: 1}, -6, 4, seed=21)
        a = analyze(f)
        for n in f.degrees():
            assert rank(a.model_iso[n]) == f.dim(n)


class TestBuildSplitting:
    def test_projection_on_ungauged_mixed(self):
        f, _ = compose_instance([(pt(1, 1), 1)], {0: 1}, -5, 3)
        gamma = gamma_window(f)
        ker, theta = kernel_functor_with_inclusion(gamma)
        cert = build_splitting(f, ker, gamma, theta)
        assert cert.verify() == []
        # ungauged: the retraction kills exactly the torsion coordinate
        for n in range(-5, -1):
            lam = cert.lam.component(n)
            h1_dim = max(0, -n - 1)
            assert lam.shape == (h1_dim, h1_dim + 1)

    def test_certified_after_gauge(self):
        f, _ = compose_instance([(pt(1, 1), 1)], {0: 1}, -5, 3, seed=8)
        gamma = gamma_window(f)
        ker, theta = kernel_functor_with_inclusion(gamma)
        cert = build_splitting(f, ker, gamma, theta)
        assert cert.verify() == []

    def test_lam_theta_identity(self):
        f, _ = compose_instance([(pt(0, 1), 2)], {-1: 1, 0: 1}, -6, 4,
                                seed=55)
        _, cert = decompose(f)
        ker = cert.theta.source
        for n in f.degrees():
            lt = cert.lam.component(n) * cert.theta.component(n)
            assert lt == Matrix.identity(QQ, ker.dim(n))


class TestClassification:
    def test_pure_torsion_is_integral_transform(self):
        f, _ = compose_instance([(pt(1, 1), 1), (pt(0, 1), 1)], {}, -4, 4,
                                seed=2)
        verdict, report = is_integral_transform(f, mode="verify")
        assert verdict is True
        assert report["gamma_isomorphism"] is True

    def test_h1_summand_blocks_it(self):
        f, _ = compose_instance([(pt(1, 1), 1)], {0: 1}, -5, 3, seed=4)
        verdict, _ = is_integral_transform(f, mode="verify")
        assert verdict is False

    def test_zero_functor_is_integral_transform(self):
        verdict, _ = is_integral_transform(zero_functor(QQ, -4, 2),
                                           mode="verify")
        assert verdict is True

    def test_pullback_detection(self):
        f, _ = compose_instance([(pt(1, 1), 1)], {}, -4, 4, seed=6)
        assert is_pullback(f) == pt(1, 1)

    def test_longer_torsion_is_not_pullback(self):
        f, _ = compose_instance([(pt(1, 1), 2)], {}, -4, 4, seed=7)
        assert is_pullback(f) is None

    def test_h1_is_not_pullback(self):
        f, _ = compose_instance([], {0: 1}, -5, 2)
        assert is_pullback(f) is None


class TestPropertySuite:
    def test_all_pass_on_composed_instance(self):
        f, _ = compose_instance([(pt(0, 1), 2), (pt(1, 1), 1)], {0: 1},
                                -6, 4, seed=12)
        report = run_property_suite(f)
        assert all(e["pass"] for e in report)
        claims = {e["claim"] for e in report}
        assert "gamma_surjective" in claims
        assert "torsion_system_colimit_zero" in claims

    def test_truncated_window_reports_without_false_failures(self):
        # [-3, 0] leaves no room for the block chain: that entry is
        # reported as untestable, never as a failure
        f, _ = compose_instance([(pt(1, 1), 1)], {}, -3, 0)
        report = run_property_suite(f)
        assert all(e["pass"] for e in report)
        assert any("window_too_small" in e.get("note", "") for e in report)

    def test_far_truncated_window_stops_at_analysis(self):
        f, _ = compose_instance([(pt(1, 1), 1)], {0: 1}, -3, 0)
        report = run_property_suite(f)
        assert all(e["pass"] for e in report)
        assert report[-1]["claim"] == "structure_analysis"
        assert "window_too_small" in report[-1]["note"]

    def test_det_degree_on_length_three_torsion(self):
        from p1functors.watts import raw_pencil_det, stabilized_top
        f, _ = compose_instance([(pt(0, 1), 2), (pt(1, 1), 1)], {}, -4, 4,
                                seed=14)
        det = raw_pencil_det(f)
        assert not det.is_zero()
        assert stabilized_top(f).top_dim == 3

    def test_broken_data_reported(self):
        f = generator_h0_torsion(TorsionSheaf(QQ, [(pt(2, 1), 1)]), -3, 3)
        amaps = list(f.a_maps)
        bmaps = list(f.b_maps)
        amaps[2], bmaps[2] = bmaps[2], amaps[2]
        from p1functors.functors import FunctorData
        broken = FunctorData(QQ, f.lo, f.hi, f.dims, amaps, bmaps)
        report = run_property_suite(broken)
        assert report[0]["claim"] == "functor_laws"
        assert report[0]["pass"] is False
