"""Dense complex linear algebra used throughout the package.

Thin, validated wrappers around LAPACK (through numpy). Every routine accepts
anything ``numpy.asarray`` understands and works in complex128.
"""
import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, NumericalError, ShapeError, SingularityError

__all__ = [
    "as_cmatrix",
    "hermitian_defect",
    "hermitian_part",
    "eig_general",
    "eig_hermitian",
    "solve_linear",
    "is_negative_definite",
]


def as_cmatrix(A, name="A"):
    """Return ``A`` as a 2-D complex128 array, rejecting non-finite entries."""
    A = np.asarray(A, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got ndim={A.ndim}")
    if not np.all(np.isfinite(A)):
        raise NumericalError(f"{name} has non-finite entries")
    return A


def _require_square(A, name):
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")


def hermitian_defect(A):
    """max |A_ij - conj(A_ji)|."""
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def hermitian_part(A):
    A = np.asarray(A, dtype=complex)
    return 0.5 * (A + A.conj().T)


def _check_hermitian(A, name, rtol):
    scale = 1.0 + (float(np.max(np.abs(A))) if A.size else 0.0)
    defect = hermitian_defect(A)
    if defect > rtol * scale:
        raise ShapeError(
            f"{name} is not Hermitian: defect {defect:.3e} exceeds {rtol * scale:.3e}"
        )


def eig_general(A, name="A"):
    """Eigenvalues of a general square complex matrix (with multiplicity)."""
    A = as_cmatrix(A, name)
    _require_square(A, name)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge for {name}") from exc


def eig_hermitian(A, name="A", rtol=None):
    """Real eigenvalues of a Hermitian matrix, ascending.

    The Hermitian check is absolute-plus-relative:
    ``max|A - A^H| <= rtol * (1 + max|A|)``.
    """
    A = as_cmatrix(A, name)
    _require_square(A, name)
    rtol = DEFAULT_TOLERANCES.hermitian_rtol if rtol is None else rtol
    _check_hermitian(A, name, rtol)
    try:
        return np.linalg.eigvalsh(hermitian_part(A))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue iteration did not converge for {name}") from exc


def solve_linear(A, B, name="A", max_condition=None):
    """Solve ``A X = B``; raises :class:`SingularityError` for ill-conditioned A."""
    A = as_cmatrix(A, name)
    _require_square(A, name)
    B_arr = np.asarray(B, dtype=complex)
    vector = B_arr.ndim == 1
    B2 = B_arr.reshape(-1, 1) if vector else as_cmatrix(B_arr, "B")
    if B2.shape[0] != A.shape[0]:
        raise DimensionError(f"{name} is {A.shape} but right-hand side has {B2.shape[0]} rows")
    max_condition = DEFAULT_TOLERANCES.max_condition if max_condition is None else max_condition
    cond = float(np.linalg.cond(A)) if A.size else 1.0
    if not np.isfinite(cond) or cond > max_condition:
        raise SingularityError(
            f"{name} is singular or ill-conditioned (condition estimate {cond:.3e})", cond
        )
    X = np.linalg.solve(A, B2)
    return X.ravel() if vector else X


def is_negative_definite(A, tol=0.0, name="A"):
    """Return ``(max_eig < -tol, max_eig)`` for a Hermitian matrix."""
    eigs = eig_hermitian(A, name)
    lam = float(eigs[-1])
    return lam < -tol, lam
