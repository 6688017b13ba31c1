"""Lyapunov certificates behind the Popov test.

A certificate is a Hermitian ``P > 0`` of doubled-up form making the strict
positive-real LMI negative definite, plus the constants of the resulting
mean-square bound ``<x^H x>(t) <= c1 exp(-c2 t) <x^H x>(0) + c3``.

Two conventions are supported for the LMI (both certify the same frequency
condition ``gamma/2 + Re[(1 + i theta w) G(i w)] > 0``):

``"realization"``
    Built from ``(F, B, C)`` of :func:`qstab.model.build_realization`.
``"lyapunov"``
    Built from the input ``2i J Sigma E^T`` and output ``E^# Sigma``; its
    solution is directly the matrix of the quadratic Lyapunov operator. It
    relates to the first by ``P_lyapunov = P_realization / 4``.
"""
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import (
    DimensionError,
    NumericalError,
    ParameterError,
    PreconditionError,
    UnsupportedDimensionError,
)
from .model import DoubledMatrix, build_realization, constants_J_Sigma
from .numerics import eig_hermitian, hermitian_defect, hermitian_part

__all__ = [
    "CONVENTIONS",
    "LyapunovCertificate",
    "PGrid",
    "lmi_realization",
    "build_spr_lmi",
    "schur_complement",
    "check_certificate",
    "find_P",
    "compute_lambda",
    "lambda_terms",
    "decay_rate",
    "compute_msq_constants",
    "certify",
]

CONVENTIONS = ("realization", "lyapunov")


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ParameterError(f"convention must be one of {CONVENTIONS}, got {convention!r}")


def lmi_realization(plant, convention="realization"):
    """``(F, B, C)`` such that ``C (sI - F)^{-1} B = G(s)`` in the LMI's scaling."""
    _check_convention(convention)
    ss = build_realization(plant)
    if convention == "realization":
        return ss.F, ss.B, ss.C
    J, Sigma = constants_J_Sigma(plant.n)
    E = plant.E_tilde
    B = (2j * J @ Sigma @ E).reshape(-1, 1)
    C = -(E.conj() @ Sigma).reshape(1, -1)
    return ss.F, B, C


def _as_P(P, n):
    if isinstance(P, DoubledMatrix):
        full = P.full()
    else:
        full = np.asarray(P, dtype=complex)
    if full.shape != (2 * n, 2 * n):
        raise DimensionError(f"P must be {2 * n}x{2 * n}, got {full.shape}")
    return full


def _lmi_blocks(F, B, C, P, theta):
    top = P @ F + F.conj().T @ P
    off = P @ B - (np.eye(F.shape[0]) + theta * F.conj().T) @ C.conj().T
    cross = (C @ B)[0, 0]
    return top, off, cross


def build_spr_lmi(plant, P, theta, gamma, convention="realization"):
    """Assemble the ``(2n+1) x (2n+1)`` positive-real LMI matrix.

    ``[[PF + F^H P, PB - (I + theta F^H) C^H], [*, -gamma - theta (CB + B^H C^H)]]``.
    The cross term ``CB + B^H C^H`` vanishes for every plant of this class;
    a warning is issued if it does not numerically. The result is
    symmetrised, with a warning when the raw asymmetry exceeds the tolerance.
    """
    if theta < 0:
        raise ParameterError(f"theta must be >= 0, got {theta}")
    F, B, C = lmi_realization(plant, convention)
    P = _as_P(P, plant.n)
    top, off, cross = _lmi_blocks(F, B, C, P, theta)
    sym = 2.0 * cross.real
    scale = 1.0 + abs(cross)
    if abs(sym) > 1e-10 * scale:
        warnings.warn(f"CB + B^H C^H = {sym:.3e} is not zero", RuntimeWarning, stacklevel=2)
    corner = -gamma - theta * sym
    raw = np.block([[top, off], [off.conj().T, np.array([[corner]])]])
    defect = hermitian_defect(raw)
    if defect > DEFAULT_TOLERANCES.lmi_asymmetry * (1.0 + np.max(np.abs(raw))):
        warnings.warn(f"LMI asymmetry {defect:.3e} before symmetrisation", RuntimeWarning, stacklevel=2)
    return hermitian_part(raw)


def schur_complement(plant, P, theta, gamma, convention="realization"):
    """Return ``(M_tilde, gamma_eff)``: ``PF + F^H P + off off^H / gamma_eff``.

    The LMI is negative definite iff ``gamma_eff > 0`` and ``M_tilde < 0``.
    """
    F, B, C = lmi_realization(plant, convention)
    P = _as_P(P, plant.n)
    top, off, cross = _lmi_blocks(F, B, C, P, theta)
    gamma_eff = gamma + theta * 2.0 * cross.real
    if not gamma_eff > 0:
        return None, gamma_eff
    return hermitian_part(top + (off @ off.conj().T) / gamma_eff), gamma_eff


@dataclass(frozen=True)
class CertificateCheck:
    feasible: bool
    lmi_max_eig: float
    p_min_eig: float
    schur_max_eig: float

    def __bool__(self):
        return self.feasible


def check_certificate(plant, P, theta, gamma, convention="realization"):
    """Test ``P > 0`` and LMI ``< 0``; the Schur-complement path is cross-checked.

    Raises :class:`NumericalError` if the direct and Schur paths disagree at a
    point that is not borderline.
    """
    Pf = _as_P(P, plant.n)
    p_min = float(eig_hermitian(Pf, "P")[0])
    lmi = build_spr_lmi(plant, Pf, theta, gamma, convention)
    lmi_max = float(eig_hermitian(lmi, "LMI")[-1])
    Mt, gamma_eff = schur_complement(plant, Pf, theta, gamma, convention)
    schur_max = float("inf") if Mt is None else float(eig_hermitian(Mt, "Schur complement")[-1])
    direct = lmi_max < 0
    via_schur = schur_max < 0
    if direct != via_schur and abs(lmi_max) > 1e-9 * (1.0 + np.max(np.abs(lmi))):
        raise NumericalError(
            f"LMI ({lmi_max:.3e}) and Schur complement ({schur_max:.3e}) disagree"
        )
    return CertificateCheck(bool(p_min > 0 and direct), lmi_max, p_min, schur_max)


@dataclass(frozen=True)
class PGrid:
    """Search grid for the single-mode ``P = [[p1, p2], [p2*, p1]]``.

    ``p2 = p1 (u + i v)`` with ``(u, v)`` on a square grid inside the unit
    disc, which keeps every candidate positive definite.
    """

    p1_lo: float = 1e-4
    p1_hi: float = 1e2
    p1_steps: int = 61
    ratio_max: float = 0.9
    ratio_steps: int = 7
    descent_iters: int = 200

    def p1_values(self):
        return np.logspace(np.log10(self.p1_lo), np.log10(self.p1_hi), self.p1_steps)

    def ratio_values(self):
        r = np.linspace(-self.ratio_max, self.ratio_max, self.ratio_steps)
        u, v = np.meshgrid(r, r, indexing="ij")
        w = (u + 1j * v).ravel()
        w = w[np.abs(w) < 1.0]
        # ratio 0 first, so ties resolve to the diagonal P
        return np.concatenate([[0.0], w[w != 0]])


def _lmi_max_eigs(plant, theta, gamma, p1, ratio, convention):
    """Vectorised largest LMI eigenvalue over candidate arrays ``p1, ratio``."""
    F, B, C = lmi_realization(plant, convention)
    p1 = np.asarray(p1, dtype=float)
    p2 = p1 * np.asarray(ratio, dtype=complex)
    P = np.zeros(p1.shape + (2, 2), dtype=complex)
    P[..., 0, 0] = p1
    P[..., 1, 1] = p1
    P[..., 0, 1] = p2
    P[..., 1, 0] = p2.conj()
    FH = F.conj().T
    top = P @ F + FH @ P
    off = P @ B - ((np.eye(2) + theta * FH) @ C.conj().T)
    corner = -gamma - theta * 2.0 * (C @ B)[0, 0].real
    lmi = np.zeros(p1.shape + (3, 3), dtype=complex)
    lmi[..., :2, :2] = top
    lmi[..., :2, 2:] = off
    lmi[..., 2:, :2] = np.conj(np.swapaxes(off, -1, -2))
    lmi[..., 2, 2] = corner
    lmi = 0.5 * (lmi + np.conj(np.swapaxes(lmi, -1, -2)))
    return np.linalg.eigvalsh(lmi)[..., -1]


@dataclass(frozen=True)
class LyapunovCertificate:
    P: DoubledMatrix
    theta: float
    gamma: float
    lmi_max_eig: float
    convention: str = "realization"
    lambda_: float = float("nan")
    lambda_printed: float = float("nan")
    lambda_operator: float = float("nan")
    c: float = float("nan")
    c1: float = float("nan")
    c2: float = float("nan")
    c3: float = float("nan")
    notes: tuple = field(default_factory=tuple)

    @property
    def complete(self):
        return np.isfinite(self.c1)

    def to_dict(self):
        P = self.P.full()

        def num(v):
            return float(v) if np.isfinite(v) else None

        return {
            "P": {
                "re": P.real.tolist(),
                "im": P.imag.tolist(),
            },
            "convention": self.convention,
            "theta": self.theta,
            "gamma": self.gamma,
            "lmi_max_eig": self.lmi_max_eig,
            "lambda": num(self.lambda_),
            "lambda_printed": num(self.lambda_printed),
            "lambda_operator": num(self.lambda_operator),
            "c": num(self.c),
            "c1": num(self.c1),
            "c2": num(self.c2),
            "c3": num(self.c3),
            "notes": list(self.notes),
        }


def find_P(plant, theta, gamma, grid=None, convention="realization"):
    """Grid search plus coordinate descent for a single-mode certificate.

    Maximises ``-lmi_max_eig``; ties resolve to the smaller ``p1`` and then to
    ``p2 = 0``. Returns a partial :class:`LyapunovCertificate` (no bound
    constants) or ``None`` when the descended optimum is still infeasible.
    """
    if plant.n != 1:
        raise UnsupportedDimensionError("find_P supports single-mode plants only")
    _check_convention(convention)
    grid = PGrid() if grid is None else grid
    p1s = grid.p1_values()
    ratios = grid.ratio_values()
    P1, R = np.meshgrid(p1s, ratios, indexing="ij")
    eigs = _lmi_max_eigs(plant, theta, gamma, P1, R, convention)
    best = eigs.min()
    if not np.isfinite(best):
        return None
    # descent also runs when no grid point is feasible: thin feasible sets fall between nodes
    # strict-best with a tiny tie band; meshgrid order gives smallest p1 first
    tie = 1e-12 * (1.0 + abs(best))
    flat = np.flatnonzero(eigs.ravel() <= best + tie)[0]
    i, j = np.unravel_index(flat, eigs.shape)
    x = np.array([np.log(p1s[i]), ratios[j].real, ratios[j].imag])
    fx = float(eigs[i, j])

    def objective(x):
        r = complex(x[1], x[2])
        if abs(r) >= 1.0:
            return np.inf
        return float(_lmi_max_eigs(plant, theta, gamma, np.exp(x[0]), r, convention))

    log_step = np.log(p1s[1] / p1s[0]) if p1s.size > 1 else 0.5
    ratio_step = 2 * grid.ratio_max / max(grid.ratio_steps - 1, 1)
    steps = np.array([log_step, ratio_step, ratio_step])
    for _ in range(grid.descent_iters):
        improved = False
        for k in range(3):
            for sgn in (-1.0, 1.0):
                trial = x.copy()
                trial[k] += sgn * steps[k]
                ft = objective(trial)
                if ft < fx - 1e-15 * (1.0 + abs(fx)):
                    x, fx, improved = trial, ft, True
                    break
        if not improved:
            steps *= 0.5
            if steps.max() < 1e-10:
                break
    p1 = float(np.exp(x[0]))
    p2 = p1 * complex(x[1], x[2])
    P = DoubledMatrix.scalar(p1, p2)
    check = check_certificate(plant, P, theta, gamma, convention)
    if not check.feasible:
        return None
    return LyapunovCertificate(P=P, theta=float(theta), gamma=float(gamma),
                               lmi_max_eig=check.lmi_max_eig, convention=convention)


def _lambda_matrices(plant):
    n, m = plant.n, plant.m
    J, Sigma = constants_J_Sigma(n)
    N = plant.N
    Nt = plant.N_tilde
    E = plant.E_tilde
    upper = np.diag(np.concatenate([np.ones(m), np.zeros(m)]))
    return J, Sigma, N, Nt, E, upper


def lambda_terms(plant, P, theta, bounds, form="printed"):
    """Individual terms of the constant ``lambda``.

    ``form="printed"`` evaluates the closed form term by term as it is
    usually stated; ``form="operator"`` uses the commutator constants that the
    truncated-Fock checks confirm (see :mod:`qstab.focklab.lemmas`). The two
    agree on the trace and perturbation terms and may differ in the two
    commutator terms.
    """
    J, Sigma, N, Nt, E, upper = _lambda_matrices(plant)
    Pf = _as_P(P, plant.n)
    M = plant.M.full()
    Pt = Pf - 0.5 * theta * M
    NhN = Nt.conj().T @ Nt
    trace = np.trace(Pf @ J @ N.conj().T @ upper @ N @ J)
    if form == "printed":
        left = E.conj() @ J @ Sigma @ Nt.conj().T @ Nt.conj() @ Sigma @ J @ E.conj()
        right = E @ J @ Sigma @ Nt.T @ Nt @ Sigma @ J @ E
        middle = 0.5 * theta**2 * left * right
        inner = -theta * (E @ J @ NhN @ Sigma @ J @ E) + 1j * (E @ Sigma @ J @ Pt @ J @ E)
    elif form == "operator":
        comm_star = E @ J @ NhN @ J @ E.conj()  # [z*, [L^H, z] L]
        comm_z = E @ J @ NhN @ Sigma @ J @ E  # [[L^H, z] L, z]
        mu = 2.0 * (E @ J @ Pt @ Sigma @ J @ E)  # [z, [z, x^H Pt x]]
        middle = 0.5 * theta**2 * abs(comm_star) ** 2
        inner = theta * comm_z - 1j * mu
    else:
        raise ParameterError(f"form must be 'printed' or 'operator', got {form!r}")
    third = 0.5 * abs(inner) ** 2
    perturb = bounds.delta1 * bounds.gamma + 0.5 * bounds.delta2 + 0.5 * bounds.delta3
    terms = {"trace": trace, "middle": middle, "third": third, "perturbation": perturb}
    for key, val in terms.items():
        val = complex(val)
        if abs(val.imag) > 1e-9 * (1.0 + abs(val.real)):
            raise NumericalError(f"lambda term {key} has imaginary part {val.imag:.3e}")
        terms[key] = val.real
    return terms


def compute_lambda(plant, P, theta, bounds, form="printed"):
    """Sum of :func:`lambda_terms`; must be non-negative."""
    lam = float(sum(lambda_terms(plant, P, theta, bounds, form).values()))
    if lam < -1e-10:
        raise NumericalError(f"lambda = {lam:.3e} is negative")
    return max(lam, 0.0)


def _z_quadratic(plant):
    """Hermitian ``Q_z`` with ``x^H Q_z x`` the symmetrised ``(z z* + z* z)/2``."""
    _, Sigma = constants_J_Sigma(plant.n)
    E = plant.E_tilde
    return 0.5 * (np.outer(E.conj(), E) + Sigma @ np.outer(E, E.conj()) @ Sigma)


def ordering_constant(plant, c, theta, beta):
    """Constant produced when ``z z*`` is symmetrised; only a positive part is kept."""
    E1 = plant.E1.ravel()
    E2 = plant.E2.ravel()
    val = 0.5 * c * theta * beta * (np.sum(np.abs(E1) ** 2) - np.sum(np.abs(E2) ** 2))
    return max(float(val), 0.0)


def decay_rate(plant, P, theta, gamma, beta, convention="realization"):
    """``c = -lambda_max(M_tilde) / lambda_max(P + theta beta Q_z)``.

    ``M_tilde`` is the Schur complement of the LMI. Raises
    :class:`PreconditionError` if it is not negative definite.
    """
    Pf = _as_P(P, plant.n)
    Mt, _ = schur_complement(plant, Pf, theta, gamma, convention)
    if Mt is None:
        raise PreconditionError("LMI corner is not negative; certificate infeasible")
    top = float(eig_hermitian(Mt, "Schur complement")[-1])
    if not top < 0:
        raise PreconditionError(f"Schur complement not negative definite (max eig {top:.3e})")
    denom = float(eig_hermitian(Pf + theta * beta * _z_quadratic(plant), "P + theta beta Q_z")[-1])
    return -top / denom, Mt


def compute_msq_constants(plant, cert, bounds):
    """Return ``(c1, c2, c3, details)`` for a feasible certificate.

    ``c1 = lambda_max[P + beta E^H E] / lambda_min[P]``, ``c2 = c`` and
    ``c3 = (lambda + ordering constant) / (c lambda_min[P])`` with ``lambda``
    the larger of the printed and operator forms.
    """
    if not cert.lmi_max_eig < 0:
        raise PreconditionError("certificate is not feasible")
    Pf = cert.P.full()
    eigs_P = eig_hermitian(Pf, "P")
    if not eigs_P[0] > 0:
        raise PreconditionError("P is not positive definite")
    E = plant.E_tilde
    c, _ = decay_rate(plant, Pf, cert.theta, cert.gamma, bounds.beta, cert.convention)
    lam_p = compute_lambda(plant, Pf, cert.theta, bounds, "printed")
    lam_o = compute_lambda(plant, Pf, cert.theta, bounds, "operator")
    lam = max(lam_p, lam_o)
    order = ordering_constant(plant, c, cert.theta, bounds.beta)
    pmin = float(eigs_P[0])
    c1 = float(eig_hermitian(Pf + bounds.beta * np.outer(E.conj(), E), "P + beta E^H E")[-1]) / pmin
    c3 = (lam + order) / (c * pmin)
    details = {"lambda": lam, "lambda_printed": lam_p, "lambda_operator": lam_o,
               "ordering": order, "c": c}
    return c1, c, c3, details


def certify(plant, theta, bounds, grid=None, convention="realization"):
    """``find_P`` followed by the bound constants. ``None`` when infeasible."""
    cert = find_P(plant, theta, bounds.gamma, grid, convention)
    if cert is None:
        return None
    c1, c2, c3, d = compute_msq_constants(plant, cert, bounds)
    notes = ("decay rate c is one admissible choice from the Schur complement",)
    return replace(cert, lambda_=d["lambda"], lambda_printed=d["lambda_printed"],
                   lambda_operator=d["lambda_operator"], c=d["c"], c1=c1, c2=c2, c3=c3,
                   notes=notes)
