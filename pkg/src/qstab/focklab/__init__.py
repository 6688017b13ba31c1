"""Truncated Fock-space laboratory: operators, condition checks, identities, dynamics."""
from .conditions import MembershipReport, check_membership, sector_gain_bound
from .lemmas import (
    ResidualReport,
    audit_lyapunov_inequality,
    verify_expansion_identities,
    verify_lemma_constants,
)
from .lindblad import EnvelopeFit, Trajectory, fit_envelope, lindblad_simulate
from .operators import (
    CoeffTable,
    FockOperator,
    build_poly_op,
    build_z,
    coherent_state,
    derivative_tables,
    fock_annihilation,
    fock_state,
    number_operator,
    pure_kerr,
    saturated_kerr,
    thermal_state,
)

__all__ = [
    "CoeffTable", "FockOperator", "MembershipReport", "ResidualReport", "Trajectory", "EnvelopeFit",
    "audit_lyapunov_inequality", "build_poly_op", "build_z", "check_membership", "coherent_state",
    "derivative_tables", "fit_envelope", "fock_annihilation", "fock_state", "lindblad_simulate",
    "number_operator", "pure_kerr", "saturated_kerr", "sector_gain_bound", "thermal_state",
    "verify_expansion_identities", "verify_lemma_constants",
]
