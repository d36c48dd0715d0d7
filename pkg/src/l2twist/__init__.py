"""Twisted L2-invariants over group rings.

Exact group-ring arithmetic, Mahler-measure Fuglede-Kadison determinants
over Z^d, finite-quotient approximation, nu/theta bound certificates, and
the twisted torsion function rho(t) of based chain complexes.
"""

from .grouprings import (
    Character,
    GroupDescriptor,
    GroupRingElement,
    GroupRingMatrix,
    abelianization_map,
    check_character,
    involution,
    mod_map,
    one_norm,
    push_forward,
    reduce_word,
    support,
)
from .twisting import (
    BasedRepresentation,
    action_norm_bound,
    log_abs_det_action,
    nu,
    theta,
    twist_rep,
    twist_scalar,
)
from .mahler import (
    LaurentPoly,
    LogDetResult,
    det_matrix_over_Zd,
    lawton_substitute,
    lead,
    mahler,
    mahler_exact_univariate,
    mahler_lawton,
    mahler_quadrature,
    minimal_lawton_schedule,
    rank_fraction_field,
)
from .quotients import (
    ApproxResult,
    BoundCertificate,
    FiniteQuotient,
    QuotientTower,
    approx_sequence,
    bound_certificate,
    reg_logdet,
    regular_det_finite,
    regular_rep_matrix,
    semicontinuity_check,
    vn_dim_ker,
)
from .torsion import (
    NON_DET_CLASS,
    BasedChainComplex,
    BasisChange,
    BoundEnvelope,
    DegreeResult,
    MappingTorus,
    TorsionCurve,
    betti,
    bound_envelope,
    circle_complex,
    degree,
    extension_complex,
    laplacian,
    mapping_torus_complex,
    product_complex,
    rebase_complex,
    restrict_complex,
    restricted_character,
    s1_predicted_curve,
    torsion_at,
    torsion_curve,
    torus_complex,
    trans_class,
    validate_complex,
    verify_base_change,
    verify_duality,
    verify_product,
    verify_restriction,
    verify_scaling,
    verify_sum,
)
from .polyparse import parse_poly

__version__ = "0.1.0"
