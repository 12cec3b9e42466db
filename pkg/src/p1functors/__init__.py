"""Exact structure decomposition of graded functor windows on the projective line."""

from .errors import (
    DisagreementError,
    EngineError,
    EqualPointsError,
    FieldExhaustedError,
    NoStabilizationError,
    NotAdmissibleError,
    NotContainedError,
    SingularPencilError,
    SplitFailureError,
    WindowMismatchError,
    WindowTooSmallError,
)
from .fields import QQ, PrimeField, RationalField, field_from_tag
from .linalg import (
    MapSequence,
    Matrix,
    PencilDecomposition,
    Subspace,
    colimit_sequence,
    complement,
    kernel_basis,
    pencil_weierstrass,
    rref,
)
from .sheaves import (
    CoherentSheaf,
    LinearForm,
    P1Point,
    SesOfBundles,
    TorsionSheaf,
    enumerate_points,
    ext1_skyscraper,
    h0_dim,
    h1_dim,
    koszul_sequence,
    local_cohomology_system,
    tensor_torsion,
    vanishing_form,
)
from .functors import (
    FunctorData,
    act_poly,
    apply_to_torsion_map,
    check_exactness_on_ses,
    direct_sum,
    evaluate_on_sheaf,
    functor_from_json,
    functor_to_json,
    gauge_scramble,
    generator_h0_torsion,
    generator_h1,
    generator_rq,
    validate,
    zero_functor,
)
from .watts import (
    GammaWindow,
    NatTransWindow,
    StabilizationInfo,
    choose_avoiding_point,
    cok_vanishes,
    compute_W,
    eventual_kernel,
    gamma_window,
    kernel_functor,
    stabilized_top,
)
from .structure import (
    Analysis,
    Decomposition,
    SplittingCertificate,
    analyze,
    build_h1_isomorphism,
    build_splitting,
    decompose,
    h1_multiplicities_from_dims,
    is_integral_transform,
    is_pullback,
    run_property_suite,
)
from .corpus import ComposeSpec, compose_functor, corpus_spec

__all__ = [name for name in dir() if not name.startswith("_")]
