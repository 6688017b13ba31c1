"""Membership tests for the perturbation classes on a truncated Fock space.

Each operator inequality ``A <= B`` is decided by the smallest eigenvalue of
``B - A`` restricted to the truncation-free interior.
"""
from dataclasses import dataclass, field

import numpy as np

from ..config import DEFAULT_TOLERANCES
from ..errors import TruncationError
from ..model import PerturbationBounds
from ..numerics import eig_hermitian
from .operators import build_poly_op, derivative_tables, interior_size

__all__ = ["ConditionResult", "MembershipReport", "check_membership", "membership_interior",
           "sector_gain_bound"]

CONDITIONS = ("sector1", "sector2", "smooth1", "smooth2", "upper_lower")


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    min_eig: float


@dataclass(frozen=True)
class MembershipReport:
    dim: int
    interior: int
    tol: float
    results: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.results[name]

    @property
    def W1(self):
        return self.results["sector1"].holds and self.results["smooth1"].holds

    @property
    def W2(self):
        return all(self.results[c].holds for c in ("sector2", "smooth1", "smooth2", "upper_lower"))

    def to_dict(self):
        out = {name: {"holds": r.holds, "min_eig": r.min_eig} for name, r in self.results.items()}
        out.update({"W1": self.W1, "W2": self.W2, "dim": self.dim, "interior": self.interior,
                    "tolerance": self.tol})
        return out


def membership_interior(coeffs, dim):
    """Interior size used by :func:`check_membership`; raises when it is too small."""
    D = max(coeffs.degree, 1)
    if dim - 2 * D < 2:
        raise TruncationError(f"dimension {dim} too small for a degree-{coeffs.degree} table")
    return interior_size(dim, max(2 * D - 2, D, 2))


def _min_eig(A, k):
    B = A[:k, :k]
    return float(eig_hermitian(0.5 * (B + B.conj().T), "condition operator")[0])


def _operators(coeffs, z):
    w1t, w2t, w3t = derivative_tables(coeffs)
    ops = {
        "f": build_poly_op(coeffs, z).matrix,
        "w1": build_poly_op(w1t, z).matrix,
        "w2": build_poly_op(w2t, z).matrix,
        "w3": build_poly_op(w3t, z).matrix,
    }
    zm = z.matrix
    ops["zzs"] = zm @ zm.conj().T
    ops["zs"] = zm.conj().T
    return ops


def check_membership(coeffs, z, bounds, dim=None, tol=None):
    """Decide the sector, smoothness and upper/lower conditions.

    ``sector1``: ``w1^* w1 <= zz^*/gamma^2 + delta1``;
    ``sector2``: the same with ``w1 - z^*/gamma`` in place of ``w1``;
    ``smooth1``: ``w2^* w2 <= delta2``; ``smooth2``: ``w3^* w3 <= delta3``;
    ``upper_lower``: ``0 <= f <= beta z z^*``. Here ``w1, w2, w3`` are the
    first, second and mixed derivatives of ``f``.
    """
    tol = DEFAULT_TOLERANCES.operator if tol is None else tol
    dim = z.dim if dim is None else dim
    if dim != z.dim:
        raise TruncationError(f"z has dimension {z.dim}, expected {dim}")
    k = membership_interior(coeffs, dim)
    ops = _operators(coeffs, z)
    eye = np.eye(dim)
    g2 = 1.0 / bounds.gamma**2
    rhs = g2 * ops["zzs"] + bounds.delta1 * eye
    w1 = ops["w1"]
    shifted = w1 - ops["zs"] / bounds.gamma
    eigs = {
        "sector1": _min_eig(rhs - w1.conj().T @ w1, k),
        "sector2": _min_eig(rhs - shifted.conj().T @ shifted, k),
        "smooth1": _min_eig(bounds.delta2 * eye - ops["w2"].conj().T @ ops["w2"], k),
        "smooth2": _min_eig(bounds.delta3 * eye - ops["w3"].conj().T @ ops["w3"], k),
        "upper_lower": min(_min_eig(ops["f"], k), _min_eig(bounds.beta * ops["zzs"] - ops["f"], k)),
    }
    results = {name: ConditionResult(bool(v >= -tol), v) for name, v in eigs.items()}
    return MembershipReport(dim=dim, interior=k, tol=tol, results=results)


def sector_gain_bound(coeffs, z, delta1=0.0, dim=None, gamma_lo=1e-6, gamma_hi=1e6, tol=None,
                      iters=200):
    """Largest ``gamma`` for which ``sector1`` holds on the interior, or ``None``.

    ``sector1`` gets harder as ``gamma`` grows, so the feasible set is an
    interval ``(0, gamma_max]``; it is located by bisection in log scale.
    """
    tol = DEFAULT_TOLERANCES.operator if tol is None else tol

    def holds(g):
        b = PerturbationBounds(gamma=g, delta1=delta1)
        return check_membership(coeffs, z, b, dim, tol)["sector1"].holds

    if not holds(gamma_lo):
        return None
    if holds(gamma_hi):
        return gamma_hi
    lo, hi = np.log(gamma_lo), np.log(gamma_hi)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if holds(np.exp(mid)):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10:
            break
    return float(np.exp(lo))
