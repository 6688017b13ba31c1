"""Lindblad master-equation integration and mean-square envelope fitting."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit

from ..config import DEFAULT_TOLERANCES
from ..errors import DimensionError, IntegratorError, ParameterError, StepSizeError
from .operators import FockOperator, number_operator

__all__ = ["Trajectory", "EnvelopeFit", "lindblad_simulate", "fit_envelope", "lindblad_rhs"]

CSV_COLUMNS = ("t", "n_expect", "vquad_expect", "trace", "purity")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    n_expect: np.ndarray
    vquad_expect: np.ndarray
    trace: np.ndarray
    purity: np.ndarray
    dim: int
    dt: float

    def rows(self):
        return np.column_stack([self.times, self.n_expect, self.vquad_expect, self.trace, self.purity])

    def __len__(self):
        return self.times.size


def _mat(op):
    return op.matrix if isinstance(op, FockOperator) else np.asarray(op, dtype=complex)


def lindblad_rhs(H, Ls):
    """Return ``rho -> -i[H, rho] + sum L rho L^H - {L^H L, rho}/2``."""
    H = _mat(H)
    Ls = [_mat(L) for L in Ls]
    K = -1j * H - 0.5 * sum((L.conj().T @ L for L in Ls), np.zeros_like(H))
    Kh = K.conj().T

    def rhs(rho):
        out = K @ rho + rho @ Kh
        for L in Ls:
            out += L @ rho @ L.conj().T
        return out

    return rhs


def _liouvillian(H, Ls):
    """Column-stacking superoperator: ``vec(A rho B) = (B^T kron A) vec(rho)``."""
    H = _mat(H)
    d = H.shape[0]
    eye = np.eye(d)
    K = -1j * H - 0.5 * sum((_mat(L).conj().T @ _mat(L) for L in Ls), np.zeros_like(H))
    out = np.kron(eye, K) + np.kron(K.conj(), eye)
    for L in Ls:
        L = _mat(L)
        out += np.kron(L.conj(), L)
    return out


def _record(rho, n_op):
    n = np.trace(n_op @ rho)
    tr = np.trace(rho)
    pur = np.trace(rho @ rho)
    for name, val in (("<n>", n), ("trace", tr), ("purity", pur)):
        if abs(val.imag) > 1e-10 * (1.0 + abs(val.real)):
            raise IntegratorError(f"{name} has imaginary part {val.imag:.3e}")
    return n.real, tr.real, pur.real


def _guard(rho, t, drift_tol, neg_tol):
    drift = abs(np.trace(rho).real - 1.0)
    if not drift <= drift_tol:
        raise StepSizeError(f"trace drift {drift:.3e} at t={t:.6g} exceeds {drift_tol:.1e}; reduce dt")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    if lo < -neg_tol:
        raise IntegratorError(f"density matrix eigenvalue {lo:.3e} at t={t:.6g}")


def lindblad_simulate(H, L, rho0, t_end, dt, method="rk4", record_every=1, drift_tol=None,
                      neg_tol=None):
    """Integrate the master equation from ``rho0`` up to ``t_end``.

    ``L`` is a single operator or a list of them. ``method="rk4"`` uses
    classical fixed-step RK4; ``method="expm"`` applies the exact propagator
    of the Liouvillian over each step (useful as a cross-check). Trace and
    positivity are checked at each recorded sample.

    Raises
    ------
    StepSizeError
        Trace drifts by more than ``drift_tol`` (or becomes non-finite).
    IntegratorError
        An eigenvalue of ``rho`` drops below ``-neg_tol``.
    """
    drift_tol = DEFAULT_TOLERANCES.trace_drift if drift_tol is None else drift_tol
    neg_tol = DEFAULT_TOLERANCES.negativity if neg_tol is None else neg_tol
    H = _mat(H)
    Ls = [L] if isinstance(L, FockOperator) or np.ndim(L) == 2 else list(L)
    rho = np.array(rho0, dtype=complex)
    d = H.shape[0]
    if rho.shape != (d, d):
        raise DimensionError(f"rho0 must be {d}x{d}, got {rho.shape}")
    if not dt > 0 or not t_end > 0:
        raise ParameterError("dt and t_end must be > 0")
    if record_every < 1:
        raise ParameterError("record_every must be >= 1")
    if abs(np.trace(rho) - 1.0) > 1e-10 or np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < -1e-12:
        raise ParameterError("rho0 must be a positive semidefinite matrix of unit trace")
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * (1.0 + np.max(np.abs(H))):
        raise ParameterError("H must be Hermitian")
    steps = int(round(t_end / dt))
    if abs(steps * dt - t_end) > 1e-9 * t_end:
        raise ParameterError(f"t_end={t_end} is not a multiple of dt={dt}")
    n_op = number_operator(d).matrix

    if method == "rk4":
        f = lindblad_rhs(H, Ls)

        def step(r):
            k1 = f(r)
            k2 = f(r + 0.5 * dt * k1)
            k3 = f(r + 0.5 * dt * k2)
            k4 = f(r + dt * k3)
            return r + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    elif method == "expm":
        prop = expm(_liouvillian(H, Ls) * dt)

        def step(r):
            return (prop @ r.reshape(-1, order="F")).reshape(d, d, order="F")
    else:
        raise ParameterError(f"unknown method {method!r}")

    times, rec = [0.0], [_record(rho, n_op)]
    for i in range(1, steps + 1):
        rho = step(rho)
        if i % record_every == 0 or i == steps:
            t = i * dt
            _guard(rho, t, drift_tol, neg_tol)
            times.append(t)
            rec.append(_record(rho, n_op))
    rec = np.array(rec)
    n = rec[:, 0]
    return Trajectory(times=np.array(times), n_expect=n, vquad_expect=2.0 * n + 1.0,
                      trace=rec[:, 1], purity=rec[:, 2], dim=d, dt=dt)


@dataclass(frozen=True)
class EnvelopeFit:
    c1: float
    c2: float
    c3: float
    c1_fit: float
    residual: float
    witnessed: bool
    reason: str
    quad_initial: float

    def bound(self, t):
        return self.c1 * np.exp(-self.c2 * np.asarray(t)) * self.quad_initial + self.c3

    def to_dict(self):
        return {"c1": self.c1, "c2": self.c2, "c3": self.c3, "c1_fit": self.c1_fit,
                "residual": self.residual, "witnessed": self.witnessed, "reason": self.reason,
                "quad_initial": self.quad_initial}


def _model(t, c1, c2, c3, v0):
    return c1 * np.exp(-c2 * t) * v0 + c3


def fit_envelope(traj, quad_initial=None, cover_tol=1e-6, min_points=50):
    """Fit ``<V>(t) ~ c1 exp(-c2 t) <V>(0) + c3`` and test that it bounds the data.

    ``c1`` is then inflated until the curve lies above the trajectory minus
    ``cover_tol`` at every sample. A trajectory without a decaying component
    yields ``witnessed=False`` rather than an exception.
    """
    t = np.asarray(traj.times, dtype=float)
    v = np.asarray(traj.vquad_expect, dtype=float)
    if t.size < min_points:
        raise ParameterError(f"need at least {min_points} samples, got {t.size}")
    v0 = float(v[0]) if quad_initial is None else float(quad_initial)
    nan = float("nan")
    if not v0 > 0:
        return EnvelopeFit(nan, nan, nan, nan, nan, False, "initial quadratic form is not positive", v0)
    span = float(v.max() - v.min())
    if span <= 1e-9 * (1.0 + abs(v0)):
        return EnvelopeFit(nan, nan, nan, nan, 0.0, False, "trajectory does not decay", v0)
    tail = float(v[-1])
    amp = max((v[0] - tail) / v0, 1e-6)
    half = np.flatnonzero(v - tail <= 0.5 * (v[0] - tail))
    t_half = t[half[0]] if half.size and t[half[0]] > 0 else t[-1] / 2
    p0 = [amp, np.log(2.0) / t_half, max(tail, 0.0)]
    try:
        (c1, c2, c3), _ = curve_fit(lambda tt, a, b, c: _model(tt, a, b, c, v0), t, v, p0=p0,
                                    bounds=([1e-12, 1e-12, 0.0], [np.inf, np.inf, np.inf]),
                                    maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        return EnvelopeFit(nan, nan, nan, nan, nan, False, f"fit failed: {exc}", v0)
    resid = float(np.sqrt(np.mean((_model(t, c1, c2, c3, v0) - v) ** 2)))
    if c2 * (t[-1] - t[0]) < 1e-6 or c1 * v0 < 1e-9 * (1.0 + v0):
        return EnvelopeFit(c1, c2, c3, c1, resid, False, "no decaying component", v0)
    need = (v - cover_tol - c3) / (np.exp(-c2 * t) * v0)
    c1_cov = float(max(c1, need.max()))
    covered = bool(np.all(_model(t, c1_cov, c2, c3, v0) >= v - cover_tol))
    reason = "bound witnessed" if covered else "envelope does not cover trajectory"
    return EnvelopeFit(c1_cov, float(c2), float(c3), float(c1), resid, covered, reason, v0)
