"""Small-gain robust stability test: F Hurwitz and ||G||_inf < gamma."""
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import NumericalError, PreconditionError
from .frequency import COARSE
from .model import build_realization, frequency_response
from .numerics import as_cmatrix, eig_general

__all__ = [
    "Verdict",
    "SmallGainReport",
    "spectral_abscissa",
    "is_hurwitz",
    "hinf_norm",
    "hinf_grid_estimate",
    "check_small_gain",
]


class Verdict(str, Enum):
    STABLE = "RobustlyMeanSquareStable"
    NOT_CONCLUDED = "NotConcluded"


@dataclass(frozen=True)
class SmallGainReport:
    hurwitz: bool
    spectral_abscissa: float
    hinf: float
    gamma: float
    verdict: Verdict

    def to_dict(self):
        d = asdict(self)
        d["verdict"] = self.verdict.value
        if not np.isfinite(d["hinf"]):
            d["hinf"] = None
        return d


def spectral_abscissa(F):
    return float(np.max(eig_general(F, "F").real))


def is_hurwitz(F, tol=None):
    """Return ``(hurwitz, abscissa)``; Hurwitz means ``abscissa < -tol``."""
    tol = DEFAULT_TOLERANCES.hurwitz if tol is None else tol
    F = as_cmatrix(F, "F")
    alpha = spectral_abscissa(F)
    return alpha < -tol, alpha


def hinf_grid_estimate(ss, grid=COARSE):
    """Max of ``|G(i omega)|`` over a symmetric log grid (a lower bound on the norm)."""
    _, alpha = is_hurwitz(ss.F)
    return float(np.max(np.abs(frequency_response(ss, grid.points(abs(alpha))))))


def _has_imaginary_eig(ss, level, rel):
    F, B, C = ss.F, ss.B, ss.C
    H = np.block(
        [[F, (B @ B.conj().T) / level**2], [-(C.conj().T @ C), -F.conj().T]]
    )
    lam = np.linalg.eigvals(H)
    return bool(np.any(np.abs(lam.real) < rel * (1.0 + np.abs(lam))))


def hinf_norm(ss, tol=1e-12, max_doublings=60):
    """H-infinity norm of a stable strictly proper SISO realization.

    Bisection on the level ``g``: ``g`` lies below the norm iff the Hamiltonian
    ``[[F, B B^H / g^2], [-C^H C, -F^H]]`` has an eigenvalue on the imaginary
    axis. The bracket starts at ``[0, 2 * grid_max + 1]`` and is halved until
    its width is below ``tol * max(1, lo)``.
    """
    hurwitz, alpha = is_hurwitz(ss.F)
    if not hurwitz:
        raise PreconditionError(f"F is not Hurwitz (spectral abscissa {alpha:.3e})")
    if not np.any(ss.B) or not np.any(ss.C):
        return 0.0
    rel = DEFAULT_TOLERANCES.imag_axis
    peak = hinf_grid_estimate(ss)
    if peak == 0.0:
        return 0.0
    lo, hi = 0.0, 2.0 * peak + 1.0
    for _ in range(max_doublings):
        if not _has_imaginary_eig(ss, hi, rel):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError("H-infinity bisection could not bracket the norm")
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if _has_imaginary_eig(ss, mid, rel):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def check_small_gain(plant, bounds, tol=1e-12):
    ss = build_realization(plant)
    hurwitz, alpha = is_hurwitz(ss.F)
    hinf = hinf_norm(ss, tol) if hurwitz else float("inf")
    stable = hurwitz and hinf < bounds.gamma
    return SmallGainReport(
        hurwitz=hurwitz,
        spectral_abscissa=alpha,
        hinf=hinf,
        gamma=bounds.gamma,
        verdict=Verdict.STABLE if stable else Verdict.NOT_CONCLUDED,
    )
