"""Unital channels, measurement contexts and mutually unbiased contexts.

All computation is on finite-dimensional Hilbert spaces with dense
``complex128`` matrices; equalities are Frobenius comparisons against a
tolerance (default ``1e-9``).
"""
from .channel import (
    Channel,
    apply_map,
    completely_random_channel,
    compose,
    fixed_point_check,
    identity_channel,
    is_measurable,
    make_channel,
    map_distance,
    maps_equal,
    random_map_apply,
    random_unital_channel,
)
from .errors import *  # noqa: F401,F403
from .measure import (
    JointPovm,
    OntologicalModel,
    Povm,
    build_ontological_model,
    make_joint,
    make_povm,
    prob,
    prob_in_context,
    prob_in_context_transformed,
    prob_transformed,
    transform_povm,
    verify_joint,
)
from .mub import (
    Eq31Report,
    MubVerdict,
    cor33_equivalences,
    eq31_check,
    fourier_context,
    is_strongly_unbiased,
    is_unbiased_operator,
    is_unbiased_vector,
    mutually_unbiased,
    qubit_mub_triple,
    thm35_block_check,
)
from .opcore import (
    DEFAULT_TOL,
    OperatorClass,
    classify,
    frobenius_distance,
    hermitian_eigensystem,
    random_unitary,
)
from .sharp_order import (
    Context,
    SharpChannel,
    as_context,
    as_sharp,
    context_from_basis,
    context_maps_equal_on,
    context_minimal_check,
    context_via_commutation,
    find_distinguishing_context,
    make_sharp,
    products_commute,
    sharp_le,
    standard_context,
)

__version__ = "0.1.0"
