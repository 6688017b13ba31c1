"""Commutator identities of the single-mode quadratic model, checked on Fock space.

Every check builds both sides of an identity as explicit truncated matrices
and reports the interior-projected residual
``max|lhs - rhs| / (1 + max|rhs|)``.
"""
from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import TruncationError, UnsupportedDimensionError
from ..model import DoubledMatrix, build_F, build_plant, constants_J_Sigma
from .operators import (
    CoeffTable,
    build_poly_op,
    build_z,
    derivative_tables,
    fock_annihilation,
)

__all__ = [
    "ResidualReport",
    "doubled_quadratic",
    "doubled_linear",
    "verify_lemma_constants",
    "verify_expansion_identities",
    "audit_lyapunov_inequality",
    "mu_constant",
    "mu_constant_printed",
    "random_instance",
]


@dataclass(frozen=True)
class ResidualReport:
    dim: int
    interior: int
    residuals: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    tol: float = DEFAULT_TOLERANCES.lemma_residual

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    @property
    def passed(self):
        return self.max_residual <= self.tol

    def to_dict(self):
        return {"dim": self.dim, "interior": self.interior, "residuals": dict(self.residuals),
                "max_residual": self.max_residual, "passed": self.passed, "tolerance": self.tol,
                "diagnostics": dict(self.diagnostics)}


def _full(P):
    return P.full() if hasattr(P, "full") else np.asarray(P, dtype=complex)


def _ladder(dim):
    a = fock_annihilation(dim).matrix
    return a, a.conj().T


def doubled_quadratic(Pm, dim):
    """``[a^* a] Pm [a; a^*]`` as a Fock matrix (single mode)."""
    a, ad = _ladder(dim)
    x = (a, ad)
    xd = (ad, a)
    Pm = _full(Pm)
    return sum(Pm[j, k] * (xd[j] @ x[k]) for j in range(2) for k in range(2))


def doubled_linear(row, dim):
    """``row[0] a + row[1] a^*``."""
    a, ad = _ladder(dim)
    row = np.ravel(row)
    return row[0] * a + row[1] * ad


def _channels(plant, dim):
    return [doubled_linear(np.array([plant.N1[j, 0], plant.N2[j, 0]]), dim) for j in range(plant.m)]


def _resid(lhs, rhs, k):
    lhs = np.asarray(lhs)[:k, :k]
    rhs = np.asarray(rhs)[:k, :k]
    return float(np.max(np.abs(lhs - rhs)) / (1.0 + np.max(np.abs(rhs))))


def _c(A, B):
    return A @ B - B @ A


def _require_single_mode(plant):
    if plant.n != 1:
        raise UnsupportedDimensionError("Fock checks support single-mode plants only")


def mu_constant(plant, P):
    """``[z, [z, x^H P x]]``: ``2 E J P Sigma J E^T``."""
    J, Sigma = constants_J_Sigma(plant.n)
    E = plant.E_tilde
    return complex(2.0 * (E @ J @ _full(P) @ Sigma @ J @ E))


def mu_constant_printed(plant, P):
    """The commonly quoted closed form ``-E Sigma J P J E^T``."""
    J, Sigma = constants_J_Sigma(plant.n)
    E = plant.E_tilde
    return complex(-(E @ Sigma @ J @ _full(P) @ J @ E))


def verify_lemma_constants(plant, P, dim=24):
    """Commutator constants and the linear identities used to build ``F``.

    Residual keys:

    ``mu``, ``mu_conj``
        ``[z,[z,V]]`` and ``[z*,[z*,V]]^*`` against :func:`mu_constant`.
    ``z_L``, ``zstar_L``
        ``[z, L] = N Sigma J E^T`` and ``[z*, L] = -N J E^H``.
    ``rho_z``, ``zstar_rho``
        ``[[L^H, z] L, z] = -E Sigma J N^T N^# J E^T`` and
        ``[z*, [L^H, z] L] = E J N^H N J E^H``.
    ``drift_row``, ``quad_row``
        ``-i[z, x^H M x / 2] + (L^H[z, L] + [L^H, z] L)/2 = E F x`` and
        ``[z, x^H P x] = 2 E J P x``.
    ``row_transpose``
        ``T x = x^H Sigma T^T`` for the rows ``E`` and ``N_j``.

    The printed closed form of ``mu`` is reported under
    ``diagnostics["mu_printed_residual"]``.
    """
    _require_single_mode(plant)
    if dim < 8:
        raise TruncationError("lemma checks need dim >= 8")
    k = dim - 5
    J, Sigma = constants_J_Sigma(1)
    eye = np.eye(dim)
    E = plant.E_tilde
    Nt = plant.N_tilde
    a, ad = _ladder(dim)
    x = (a, ad)
    z = doubled_linear(E, dim)
    zs = z.conj().T
    Vb = doubled_quadratic(P, dim)
    Ls = _channels(plant, dim)
    res = {}

    mu = mu_constant(plant, P)
    res["mu"] = _resid(_c(z, _c(z, Vb)), mu * eye, k)
    res["mu_conj"] = _resid(_c(zs, _c(zs, Vb)).conj().T, mu * eye, k)

    zl = Nt @ Sigma @ J @ E
    zsl = -(Nt @ J @ E.conj())
    res["z_L"] = max(_resid(_c(z, L), zl[j] * eye, k) for j, L in enumerate(Ls))
    res["zstar_L"] = max(_resid(_c(zs, L), zsl[j] * eye, k) for j, L in enumerate(Ls))

    rho = sum(_c(L.conj().T, z) @ L for L in Ls)
    rz = -(E @ Sigma @ J @ Nt.T @ Nt.conj() @ J @ E)
    zr = E @ J @ Nt.conj().T @ Nt @ J @ E.conj()
    res["rho_z"] = _resid(_c(rho, z), rz * eye, k)
    res["zstar_rho"] = _resid(_c(zs, rho), zr * eye, k)

    Mq = doubled_quadratic(plant.M.full(), dim)
    lhs = -1j * _c(z, 0.5 * Mq) + 0.5 * sum(L.conj().T @ _c(z, L) + _c(L.conj().T, z) @ L for L in Ls)
    row = E @ build_F(plant)
    res["drift_row"] = _resid(lhs, row[0] * x[0] + row[1] * x[1], k)
    prow = 2.0 * (E @ J @ _full(P))
    res["quad_row"] = _resid(_c(z, Vb), prow[0] * x[0] + prow[1] * x[1], k)

    xd = (ad, a)
    worst = 0.0
    for T in [E] + [Nt[j] for j in range(plant.m)]:
        col = Sigma @ T
        worst = max(worst, _resid(T[0] * x[0] + T[1] * x[1], col[0] * xd[0] + col[1] * xd[1], k))
    res["row_transpose"] = worst

    diag = {
        "mu": [mu.real, mu.imag],
        "mu_printed": [mu_constant_printed(plant, P).real, mu_constant_printed(plant, P).imag],
        "mu_printed_residual": _resid(_c(z, _c(z, Vb)), mu_constant_printed(plant, P) * eye, k),
    }
    return ResidualReport(dim=dim, interior=k, residuals=res, diagnostics=diag)


def verify_expansion_identities(coeffs, plant, P, theta, dim=24):
    """Expansions of commutators with ``f`` and the quadratic-form identities.

    Residual keys:

    ``commutator_expansion``
        ``[V, f] = [V, z] w1 - w1^*[z*, V] + [z,[V,z]] w2 / 2 - w2^* [z,[V,z]]^* / 2``
        with ``V = x^H (P - theta M/2) x``.
    ``dissipator_expansion``
        ``(L^H[f, L] + [L^H, f] L)/2`` against its expansion in ``w1, w2, w3``.
    ``quadratic_commutator``
        ``[x^H P x, x^H M x / 2] = x^H (PJM - MJP) x``.
    ``quadratic_dissipator``
        ``(L^H[V, L] + [L^H, V] L)/2 = tr(P J N^H diag(I,0) N J) - x^H (N^H J N J P + P J N^H J N) x / 2``.
    """
    _require_single_mode(plant)
    D = coeffs.degree
    if dim - 2 * D < 4:
        raise TruncationError(f"dimension {dim} too small for a degree-{D} table")
    k = dim - max(D + 2, 4) - 1
    J, Sigma = constants_J_Sigma(1)
    Jm, _ = constants_J_Sigma(plant.m)
    E = plant.E_tilde
    z = build_z(E[0], E[1], dim)
    zm = z.matrix
    zs = zm.conj().T
    f = build_poly_op(coeffs, z).matrix
    t1, t2, t3 = derivative_tables(coeffs)
    w1 = build_poly_op(t1, z).matrix
    w2 = build_poly_op(t2, z).matrix
    w3 = build_poly_op(t3, z).matrix
    Pf = _full(P)
    M = plant.M.full()
    Pt = Pf - 0.5 * theta * M
    Vt = doubled_quadratic(Pt, dim)
    Ls = _channels(plant, dim)
    res = {}

    Vz = _c(Vt, zm)
    zVz = _c(zm, Vz)
    rhs = Vz @ w1 - w1.conj().T @ _c(zs, Vt) + 0.5 * zVz @ w2 - 0.5 * w2.conj().T @ zVz.conj().T
    res["commutator_expansion"] = _resid(_c(Vt, f), rhs, k)

    lhs = 0.5 * sum(L.conj().T @ _c(f, L) + _c(L.conj().T, f) @ L for L in Ls)
    A = sum(L.conj().T @ _c(zm, L) + _c(L.conj().T, zm) @ L for L in Ls)
    B = sum(L.conj().T @ _c(zs, L) + _c(L.conj().T, zs) @ L for L in Ls)
    rho = sum(_c(L.conj().T, zm) @ L for L in Ls)
    rz = _c(rho, zm)
    zr = _c(zs, rho)
    rhs = (0.5 * A @ w1 + 0.5 * w1.conj().T @ B
           - 0.5 * rz @ w2 - 0.5 * w2.conj().T @ rz.conj().T
           + 0.5 * zr @ w3 + 0.5 * w3.conj().T @ zr.conj().T)
    res["dissipator_expansion"] = _resid(lhs, rhs, k)

    Vp = doubled_quadratic(Pf, dim)
    Mq = doubled_quadratic(M, dim)
    res["quadratic_commutator"] = _resid(_c(Vp, 0.5 * Mq), doubled_quadratic(Pf @ J @ M - M @ J @ Pf, dim), k)

    N = plant.N
    upper = np.diag(np.concatenate([np.ones(plant.m), np.zeros(plant.m)]))
    const = np.trace(Pf @ J @ N.conj().T @ upper @ N @ J)
    quad = N.conj().T @ Jm @ N @ J @ Pf + Pf @ J @ N.conj().T @ Jm @ N
    lhs = 0.5 * sum(L.conj().T @ _c(Vp, L) + _c(L.conj().T, Vp) @ L for L in Ls)
    rhs = const * np.eye(dim) - 0.5 * doubled_quadratic(quad, dim)
    res["quadratic_dissipator"] = _resid(lhs, rhs, k)
    return ResidualReport(dim=dim, interior=k, residuals=res)


@dataclass(frozen=True)
class LyapunovAudit:
    """Outcome of checking ``generator(V) + c V <= lambda`` on the interior."""

    max_eig: float
    lam: float
    c: float
    dim: int
    interior: int

    @property
    def holds(self):
        return self.max_eig <= self.lam + DEFAULT_TOLERANCES.operator * (1.0 + abs(self.lam))

    def to_dict(self):
        return {"max_eig": self.max_eig, "lambda": self.lam, "c": self.c, "dim": self.dim,
                "interior": self.interior, "holds": self.holds}


def audit_lyapunov_inequality(plant, P_lyap, theta, coeffs, c, lam, dim=40):
    """Largest interior eigenvalue of ``-i[V,H] + (L^H[V,L] + [L^H,V]L)/2 + cV``.

    ``V = x^H P x + theta f`` and ``H = x^H M x / 2 + f``. ``P_lyap`` must be
    the Lyapunov-scaled matrix (``convention="lyapunov"`` certificates).
    """
    _require_single_mode(plant)
    D = max(coeffs.degree, 2)
    k = dim - 2 * D - 2
    if k < 2:
        raise TruncationError(f"dimension {dim} too small for a degree-{coeffs.degree} table")
    E = plant.E_tilde
    z = build_z(E[0], E[1], dim)
    f = build_poly_op(coeffs, z).matrix
    V = doubled_quadratic(P_lyap, dim) + theta * f
    H = 0.5 * doubled_quadratic(plant.M.full(), dim) + f
    Ls = _channels(plant, dim)
    gen = -1j * _c(V, H) + 0.5 * sum(L.conj().T @ _c(V, L) + _c(L.conj().T, V) @ L for L in Ls)
    A = (gen + c * V)[:k, :k]
    top = float(np.linalg.eigvalsh(0.5 * (A + A.conj().T))[-1])
    return LyapunovAudit(max_eig=top, lam=float(lam), c=float(c), dim=dim, interior=k)


def random_instance(rng, max_degree=4, channels=None):
    """Random single-mode ``(plant, P, table)`` for identity checks.

    ``P`` is positive definite of doubled-up form; the table has Hermitian
    coefficient symmetry and total degree at most ``max_degree``.
    """
    def cplx(scale=1.0):
        return scale * complex(rng.normal(), rng.normal())

    m = int(rng.integers(1, 3)) if channels is None else channels
    plant = build_plant(
        rng.normal(), cplx(0.5),
        [[cplx()] for _ in range(m)], [[cplx(0.5)] for _ in range(m)],
        cplx(), cplx(),
    )
    p1 = float(rng.uniform(0.5, 2.0))
    P = DoubledMatrix.scalar(p1, p1 * 0.8 * rng.uniform() * np.exp(2j * np.pi * rng.uniform()))
    entries = {}
    for k in range(max_degree + 1):
        for l in range(k, max_degree + 1 - k):
            if rng.uniform() < 0.5:
                continue
            if k == l:
                entries[(k, k)] = rng.normal()
            else:
                v = cplx()
                entries[(k, l)] = v
                entries[(l, k)] = np.conj(v)
    if not entries:
        entries[(1, 1)] = 1.0
    return plant, P, CoeffTable(entries)
