"""Nominal linear quantum plant, perturbation bounds and the SISO transfer G(s).

The plant is described in doubled-up coordinates ``x = [a; a^#]``:

* Hamiltonian quadratic part ``1/2 x^H M x`` with ``M = [[M1, M2], [M2^#, M1^#]]``,
* coupling ``L = N1 a + N2 a^#`` (``m`` channels),
* scalar perturbation variable ``z = E1 a + E2 a^#``.
"""
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import DimensionError, ParameterError, SingularityError, ValidationError
from .numerics import as_cmatrix, solve_linear

__all__ = [
    "DoubledMatrix",
    "PlantModel",
    "PerturbationBounds",
    "SisoRealization",
    "constants_J_Sigma",
    "build_plant",
    "kerr_plant",
    "build_F",
    "build_realization",
    "eval_G",
    "frequency_response",
]


def constants_J_Sigma(n):
    """Return ``(J, Sigma)`` for ``n`` modes: ``J = diag(I, -I)``, ``Sigma = [[0, I], [I, 0]]``."""
    if int(n) != n or n < 1:
        raise DimensionError(f"mode count must be a positive integer, got {n!r}")
    n = int(n)
    eye = np.eye(n, dtype=complex)
    zero = np.zeros((n, n), dtype=complex)
    J = np.block([[eye, zero], [zero, -eye]])
    Sigma = np.block([[zero, eye], [eye, zero]])
    return J, Sigma


def _rel_defect(A, B):
    scale = 1.0 + max(float(np.max(np.abs(A))), float(np.max(np.abs(B))))
    return float(np.max(np.abs(A - B))) / scale


@dataclass(frozen=True)
class DoubledMatrix:
    """Block matrix ``[[B1, B2], [B2^#, B1^#]]`` acting on ``[a; a^#]``."""

    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        b1 = as_cmatrix(self.b1, "B1")
        b2 = as_cmatrix(self.b2, "B2")
        if b1.shape[0] != b1.shape[1] or b1.shape != b2.shape:
            raise DimensionError(f"blocks must be equal square matrices, got {b1.shape} and {b2.shape}")
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "b2", b2)

    @property
    def n(self):
        return self.b1.shape[0]

    def full(self):
        return np.block([[self.b1, self.b2], [self.b2.conj(), self.b1.conj()]])

    def hermitian_defects(self):
        """Relative defects of ``B1 = B1^H`` and ``B2 = B2^T``."""
        return _rel_defect(self.b1, self.b1.conj().T), _rel_defect(self.b2, self.b2.T)

    def is_hermitian_form(self, rtol=None):
        rtol = DEFAULT_TOLERANCES.validation_rtol if rtol is None else rtol
        d1, d2 = self.hermitian_defects()
        return d1 <= rtol and d2 <= rtol

    @classmethod
    def from_full(cls, A, rtol=None):
        """Split a ``2n x 2n`` matrix, checking it has the doubled-up block pattern."""
        A = as_cmatrix(A, "A")
        if A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise DimensionError(f"doubled-up matrix must be 2n x 2n, got {A.shape}")
        n = A.shape[0] // 2
        out = cls(A[:n, :n], A[:n, n:])
        rtol = DEFAULT_TOLERANCES.validation_rtol if rtol is None else rtol
        if _rel_defect(out.full(), A) > rtol:
            raise ValidationError("matrix does not have the [[B1, B2], [B2#, B1#]] block pattern")
        return out

    @classmethod
    def scalar(cls, p1, p2=0.0, n=1):
        """``p1 I`` and ``p2 I`` blocks, the common single-mode case."""
        eye = np.eye(n)
        return cls(p1 * eye, p2 * eye)


@dataclass(frozen=True)
class PlantModel:
    M: DoubledMatrix
    N1: np.ndarray
    N2: np.ndarray
    E1: np.ndarray
    E2: np.ndarray

    @property
    def n(self):
        return self.M.n

    @property
    def m(self):
        return self.N1.shape[0]

    @property
    def N(self):
        """``[[N1, N2], [N2^#, N1^#]]`` (2m x 2n)."""
        return np.block([[self.N1, self.N2], [self.N2.conj(), self.N1.conj()]])

    @property
    def N_tilde(self):
        """``[N1 N2]`` (m x 2n), so that ``L = N_tilde x``."""
        return np.hstack([self.N1, self.N2])

    @property
    def E_tilde(self):
        """``[E1 E2]`` as a length-2n vector, so that ``z = E_tilde x``."""
        return np.concatenate([self.E1.ravel(), self.E2.ravel()])


@dataclass(frozen=True)
class PerturbationBounds:
    """Constants of the sector, smoothness and upper/lower bound conditions."""

    gamma: float
    beta: float = 1.0
    delta1: float = 0.0
    delta2: float = 0.0
    delta3: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be > 0, got {self.beta}")
        for name in ("delta1", "delta2", "delta3"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class SisoRealization:
    """``G(s) = C (sI - F)^{-1} B`` with ``B`` a column and ``C`` a row (D = 0)."""

    F: np.ndarray
    B: np.ndarray
    C: np.ndarray

    @property
    def order(self):
        return self.F.shape[0]


def build_plant(M1, M2, N1, N2, E1, E2, rtol=None):
    """Validate raw arrays and assemble a :class:`PlantModel`.

    Scalars are promoted to 1x1 blocks, so a single-mode plant can be given
    with plain numbers. ``E1``/``E2`` may be 1-D of length ``n`` or ``1 x n``.
    """
    rtol = DEFAULT_TOLERANCES.validation_rtol if rtol is None else rtol
    M1 = as_cmatrix(M1, "M1")
    M2 = as_cmatrix(M2, "M2")
    if M1.shape[0] != M1.shape[1]:
        raise DimensionError(f"M1 must be square, got {M1.shape}")
    n = M1.shape[0]
    if M2.shape != (n, n):
        raise DimensionError(f"M2 must be {n}x{n}, got {M2.shape}")
    if _rel_defect(M1, M1.conj().T) > rtol:
        raise ValidationError("M1 is not Hermitian")
    if _rel_defect(M2, M2.T) > rtol:
        raise ValidationError("M2 is not symmetric")
    N1 = as_cmatrix(N1, "N1")
    N2 = as_cmatrix(N2, "N2")
    if N1.shape[1] != n or N1.shape != N2.shape:
        raise DimensionError(f"N1 and N2 must both be m x {n}, got {N1.shape} and {N2.shape}")
    rows = []
    for name, E in (("E1", E1), ("E2", E2)):
        E = np.atleast_1d(np.asarray(E, dtype=complex))
        if E.ndim == 2 and E.shape[0] == 1:
            E = E[0]
        if E.ndim != 1 or E.shape[0] != n:
            raise DimensionError(f"{name} must be a row of length {n}, got shape {np.shape(E)}")
        rows.append(as_cmatrix(E.reshape(1, n), name))
    return PlantModel(DoubledMatrix(M1, M2), N1, N2, rows[0], rows[1])


def kerr_plant(kappa):
    """Single-mode cavity of decay rate ``kappa`` with ``z = a^*``."""
    if not kappa > 0:
        raise ParameterError(f"kappa must be > 0, got {kappa}")
    return build_plant(0.0, 0.0, np.sqrt(kappa), 0.0, 0.0, 1.0)


def build_F(plant):
    """``F = -i J M - 1/2 J N^H J N``."""
    J, _ = constants_J_Sigma(plant.n)
    Jm, _ = constants_J_Sigma(plant.m)
    N = plant.N
    return -1j * J @ plant.M.full() - 0.5 * J @ N.conj().T @ Jm @ N


def build_realization(plant):
    """Factor ``G(s) = 2i E^# Sigma (sI - F)^{-1} Sigma J E^T`` as ``(F, B, C)``."""
    J, Sigma = constants_J_Sigma(plant.n)
    E = plant.E_tilde
    B = (Sigma @ J @ E).reshape(-1, 1)
    C = (2j * E.conj() @ Sigma).reshape(1, -1)
    return SisoRealization(build_F(plant), B, C)


def eval_G(ss, s):
    """Evaluate the scalar transfer function at complex frequency ``s``."""
    A = s * np.eye(ss.order) - ss.F
    # condition numbers are scale free; distance to the spectrum needs the scale of s and F
    scale = abs(s) + float(np.linalg.norm(ss.F, 2))
    smin = float(np.linalg.svd(A, compute_uv=False)[-1]) if ss.order else 1.0
    if scale > 0 and smin <= DEFAULT_TOLERANCES.max_condition ** -1 * scale:
        rel = scale / smin if smin > 0 else float("inf")
        raise SingularityError(f"s={s} is at an eigenvalue of F (relative condition {rel:.3e})", rel)
    x = solve_linear(A, ss.B, name=f"(sI - F) at s={s}")
    return complex((ss.C @ x)[0, 0])


def frequency_response(ss, omega):
    """Vectorised ``G(i omega)`` for a 1-D array of real frequencies.

    Uses one batched solve; callers that need the singularity guard for a
    single point should use :func:`eval_G`.
    """
    omega = np.asarray(omega, dtype=float)
    k = ss.order
    A = 1j * omega[:, None, None] * np.eye(k) - ss.F[None, :, :]
    rhs = np.broadcast_to(ss.B, (omega.size, k, 1))
    x = np.linalg.solve(A, rhs)
    return (ss.C[None, :, :] @ x)[:, 0, 0]
