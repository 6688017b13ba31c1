"""Single-mode operators on a truncated Fock space.

Level ``k`` of a ``dim``-level space is the number state ``|k>``. A product of
ladder operators of total degree ``d`` built from truncated matrices agrees
with the infinite-dimensional operator on the leading ``dim - d`` levels; all
identities and inequalities in this package are asserted only on such an
interior block (see :func:`interior`).
"""
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, ParameterError, TruncationError, ValidationError

__all__ = [
    "FockOperator",
    "CoeffTable",
    "fock_annihilation",
    "number_operator",
    "build_z",
    "build_poly_op",
    "derivative_tables",
    "saturated_kerr",
    "pure_kerr",
    "interior",
    "interior_size",
    "commutator",
    "fock_state",
    "coherent_state",
    "thermal_state",
]


@dataclass(frozen=True)
class FockOperator:
    """A ``dim x dim`` complex matrix on the truncated number basis."""

    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"operator matrix must be square, got shape {A.shape}")
        object.__setattr__(self, "matrix", A)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def dag(self):
        return FockOperator(self.matrix.conj().T)

    def __matmul__(self, other):
        return FockOperator(self.matrix @ _mat(other))

    def __add__(self, other):
        return FockOperator(self.matrix + _mat(other))

    def __sub__(self, other):
        return FockOperator(self.matrix - _mat(other))

    def __mul__(self, scalar):
        return FockOperator(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return FockOperator(-self.matrix)


def _mat(op):
    return op.matrix if isinstance(op, FockOperator) else np.asarray(op, dtype=complex)


def commutator(A, B):
    A, B = _mat(A), _mat(B)
    return FockOperator(A @ B - B @ A)


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"Fock dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def fock_annihilation(dim):
    """``<m|a|n> = sqrt(n) delta_{m, n-1}``."""
    dim = _check_dim(dim)
    return FockOperator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1))


def number_operator(dim):
    dim = _check_dim(dim)
    return FockOperator(np.diag(np.arange(dim, dtype=float)))


def build_z(E1, E2, dim):
    """``z = E1 a + E2 a^*``."""
    a = fock_annihilation(dim)
    return complex(E1) * a + complex(E2) * a.dag()


def interior_size(dim, degree):
    """Number of leading levels on which a degree-``degree`` product is exact, minus one."""
    return dim - degree - 1


def interior(op, degree):
    """Leading block of ``op`` free of truncation effects for products up to ``degree``."""
    A = _mat(op)
    k = interior_size(A.shape[0], degree)
    if k < 1:
        raise TruncationError(f"dimension {A.shape[0]} too small for degree {degree}")
    return A[:k, :k]


class CoeffTable:
    """Finite table ``S[(k, l)]`` for ``f = sum S_kl z^k (z^*)^l``.

    With ``hermitian=True`` (the default) ``S_kl = conj(S_lk)`` is enforced,
    which makes ``f`` self-adjoint. Derivative tables are not symmetric and
    are built with ``hermitian=False``.
    """

    def __init__(self, entries, hermitian=True, rtol=1e-12):
        clean = {}
        for key, val in dict(entries).items():
            k, l = (int(key[0]), int(key[1]))
            if k < 0 or l < 0 or (k, l) != tuple(key):
                raise ParameterError(f"coefficient index must be a pair of integers >= 0, got {key!r}")
            val = complex(val)
            if not np.isfinite(val):
                raise ParameterError(f"coefficient {key} is not finite")
            if val != 0:
                clean[(k, l)] = clean.get((k, l), 0) + val
        if hermitian:
            for (k, l), val in clean.items():
                mirror = clean.get((l, k), 0.0)
                if abs(val - np.conj(mirror)) > rtol * (1.0 + abs(val)):
                    raise ValidationError(f"S_{k}{l} = {val} is not the conjugate of S_{l}{k} = {mirror}")
        self.entries = dict(sorted(clean.items()))
        self.hermitian = hermitian

    @property
    def degree(self):
        """Largest total degree ``k + l`` (0 for the empty table)."""
        return max((k + l for k, l in self.entries), default=0)

    def __eq__(self, other):
        return isinstance(other, CoeffTable) and self.entries == other.entries

    def __repr__(self):
        return f"CoeffTable({self.entries!r})"

    def to_list(self):
        return [[k, l, v.real, v.imag] for (k, l), v in self.entries.items()]


def build_poly_op(coeffs, z):
    """``sum S_kl z^k (z^*)^l`` with the ordering exactly as written."""
    z = z if isinstance(z, FockOperator) else FockOperator(z)
    dim = z.dim
    if coeffs.degree > dim - 2:
        raise TruncationError(f"degree {coeffs.degree} leaves no interior at dimension {dim}")
    zm = z.matrix
    zs = zm.conj().T
    max_k = max((k for k, _ in coeffs.entries), default=0)
    max_l = max((l for _, l in coeffs.entries), default=0)
    zpow = [np.eye(dim, dtype=complex)]
    for _ in range(max_k):
        zpow.append(zpow[-1] @ zm)
    zspow = [np.eye(dim, dtype=complex)]
    for _ in range(max_l):
        zspow.append(zspow[-1] @ zs)
    out = np.zeros((dim, dim), dtype=complex)
    for (k, l), val in coeffs.entries.items():
        out += val * (zpow[k] @ zspow[l])
    return FockOperator(out)


def derivative_tables(coeffs):
    """Term-wise ``df/dz``, ``d2f/dz2`` and ``d2f/dz dz*`` tables."""
    d1, d2, d3 = {}, {}, {}
    for (k, l), val in coeffs.entries.items():
        if k >= 1:
            d1[(k - 1, l)] = d1.get((k - 1, l), 0) + k * val
        if k >= 2:
            d2[(k - 2, l)] = d2.get((k - 2, l), 0) + k * (k - 1) * val
        if k >= 1 and l >= 1:
            d3[(k - 1, l - 1)] = d3.get((k - 1, l - 1), 0) + k * l * val
    return (CoeffTable(d1, hermitian=False), CoeffTable(d2, hermitian=False),
            CoeffTable(d3, hermitian=False))


def pure_kerr():
    """``f = z^2 (z^*)^2``."""
    return CoeffTable({(2, 2): 1.0})


def saturated_kerr(s, order):
    """Diagonal table ``S_kk = (-1/s)^(k-2)`` for ``2 <= k <= order``."""
    if not s > 0:
        raise ParameterError(f"saturation scale must be > 0, got {s}")
    if int(order) != order or order < 4 or order % 2:
        raise ParameterError(f"order must be an even integer >= 4, got {order!r}")
    return CoeffTable({(k, k): (-1.0 / s) ** (k - 2) for k in range(2, int(order) + 1)})


def fock_state(k, dim):
    """Density matrix ``|k><k|``."""
    dim = _check_dim(dim)
    if not 0 <= k < dim:
        raise ParameterError(f"level {k} outside 0..{dim - 1}")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[k, k] = 1.0
    return rho


def coherent_state(alpha, dim):
    """Renormalised truncation of the coherent state ``|alpha>``."""
    dim = _check_dim(dim)
    n = np.arange(dim)
    log_fact = np.cumsum(np.log(np.maximum(n, 1)))
    amp = np.exp(-0.5 * log_fact) * complex(alpha) ** n
    amp = amp / np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def thermal_state(nbar, dim):
    """Renormalised truncated thermal state with mean occupation ``nbar``."""
    dim = _check_dim(dim)
    if not nbar >= 0:
        raise ParameterError(f"mean occupation must be >= 0, got {nbar}")
    if nbar == 0:
        return fock_state(0, dim)
    q = nbar / (1.0 + nbar)
    p = q ** np.arange(dim)
    return np.diag(p / p.sum()).astype(complex)
