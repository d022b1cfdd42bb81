"""Exact Hecke eigenclasses on lattice functions for real quadratic fields."""

from .coefficients import CoeffError, CoeffField, FieldElement, coeff_field, make_root_of_unity
from .quadratic import (
    PrimeIdeal,
    QuadError,
    QuadraticField,
    KElement,
    factor_principal,
    prime_ideals_above,
    splitting_type,
    theta,
    theta_rational,
)
from .lattices import (
    ContextS,
    Lattice,
    LatticeError,
    augment_N,
    default_M,
    homothety_witness,
    k_homothety,
    m_of,
    m_prime,
)
from .classgroup import (
    CharacterError,
    ClassGroup,
    ClassGroupError,
    IdealCharacter,
    chi_eval,
    class_count_exhaustive,
    class_group,
    emit_chi_table,
    load_chi_table,
    make_character,
    verify_conditions,
)
from .localtrees import (
    LocalTreeError,
    TreePatch,
    ball_size,
    build_patch,
    laplacian_check,
    laplacian_sweep_inert,
    laplacian_sweep_split,
    patch_to_dot,
    psi_closed_vs_recursion,
    psi_inert,
    psi_split,
    validate_parent_edges,
)
from .globalphi import (
    GlobalPhiError,
    HeckeReport,
    OrbitClassSummand,
    PhiEvaluator,
    hecke_Tll,
    hecke_decompose,
    invariance_suite,
    phi,
)
from .frobenius import (
    AttachmentRow,
    FrobeniusError,
    attachment_row,
    attachment_table,
    evenness_check,
    frobenius_charpoly,
    usable_primes,
)
from .acceptance import CRITERIA, Bundle, CriterionResult, run_all

__version__ = "0.1.0"

__all__ = [
    "AttachmentRow",
    "Bundle",
    "CRITERIA",
    "CharacterError",
    "ClassGroup",
    "ClassGroupError",
    "CoeffError",
    "CoeffField",
    "ContextS",
    "CriterionResult",
    "FieldElement",
    "FrobeniusError",
    "GlobalPhiError",
    "HeckeReport",
    "IdealCharacter",
    "KElement",
    "Lattice",
    "LatticeError",
    "LocalTreeError",
    "OrbitClassSummand",
    "PhiEvaluator",
    "PrimeIdeal",
    "QuadError",
    "QuadraticField",
    "TreePatch",
    "attachment_row",
    "attachment_table",
    "augment_N",
    "ball_size",
    "build_patch",
    "chi_eval",
    "class_count_exhaustive",
    "class_group",
    "coeff_field",
    "default_M",
    "emit_chi_table",
    "evenness_check",
    "factor_principal",
    "frobenius_charpoly",
    "hecke_Tll",
    "hecke_decompose",
    "homothety_witness",
    "invariance_suite",
    "k_homothety",
    "laplacian_check",
    "laplacian_sweep_inert",
    "laplacian_sweep_split",
    "load_chi_table",
    "m_of",
    "m_prime",
    "make_character",
    "make_root_of_unity",
    "patch_to_dot",
    "phi",
    "prime_ideals_above",
    "psi_closed_vs_recursion",
    "psi_inert",
    "psi_split",
    "run_all",
    "splitting_type",
    "theta",
    "theta_rational",
    "usable_primes",
    "validate_parent_edges",
    "verify_conditions",
]
