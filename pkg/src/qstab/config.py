"""Central numerical tolerances.

Every module reads its defaults from :data:`DEFAULT_TOLERANCES`; callers that
need different thresholds pass a modified copy (``dataclasses.replace``).
"""
from dataclasses import dataclass

__all__ = ["Tolerances", "DEFAULT_TOLERANCES"]


@dataclass(frozen=True)
class Tolerances:
    # numerics
    hermitian_rtol: float = 1e-12
    max_condition: float = 1e12
    # model validation (M1 Hermitian, M2 symmetric)
    validation_rtol: float = 1e-12
    # spectral abscissa must be below -hurwitz to count as Hurwitz
    hurwitz: float = 1e-12
    # |Re l| < imag_axis * (1 + |l|) counts as on the imaginary axis
    imag_axis: float = 1e-8
    # strict inequalities: margin > strict
    strict: float = 1e-12
    # LMI assembly asymmetry above this triggers a warning
    lmi_asymmetry: float = 1e-10
    # operator inequalities A <= B hold when min eig(B - A) >= -operator
    operator: float = 1e-9
    # lemma/identity residuals
    lemma_residual: float = 1e-8
    # Lindblad integrator guards
    trace_drift: float = 1e-6
    negativity: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()
