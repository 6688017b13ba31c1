import numpy as np
import pytest

from qstab.errors import DimensionError, IntegratorError, ParameterError, StepSizeError
from qstab.focklab.lindblad import EnvelopeFit, Trajectory, fit_envelope, lindblad_rhs, lindblad_simulate
from qstab.focklab.operators import (
    build_poly_op,
    build_z,
    coherent_state,
    fock_annihilation,
    fock_state,
    pure_kerr,
)

DIM = 12


def _cavity(H=None, dt=0.005, t_end=2.0, method="rk4", rho0=None):
    a = fock_annihilation(DIM)
    H = np.zeros((DIM, DIM)) if H is None else H
    rho0 = fock_state(1, DIM) if rho0 is None else rho0
    return lindblad_simulate(H, np.sqrt(2) * a, rho0, t_end, dt, method=method)


def test_linear_cavity_decay():
    tr = _cavity()
    assert np.max(np.abs(tr.n_expect - np.exp(-2 * tr.times))) < 1e-6
    assert np.allclose(tr.trace, 1, atol=1e-10)
    assert np.allclose(tr.vquad_expect, 2 * tr.n_expect + 1)


def test_kerr_hamiltonian_commutes_with_number():
    H = build_poly_op(pure_kerr(), build_z(1, 0, DIM)).matrix
    a, b = _cavity(), _cavity(H=H)
    assert np.max(np.abs(a.n_expect - b.n_expect)) < 1e-6


def test_rk4_matches_exact_propagator():
    rho0 = coherent_state(0.8, DIM)
    H = 0.3 * build_poly_op(pure_kerr(), build_z(1, 0, DIM)).matrix
    a = _cavity(H=H, rho0=rho0, dt=0.002, t_end=1.0)
    b = _cavity(H=H, rho0=rho0, dt=0.1, t_end=1.0, method="expm")
    assert np.allclose(a.n_expect[::50], b.n_expect, atol=1e-8)


def test_rhs_preserves_trace_and_hermiticity():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(DIM, DIM)) + 1j * rng.normal(size=(DIM, DIM))
    H = X + X.conj().T
    f = lindblad_rhs(H, [fock_annihilation(DIM)])
    out = f(coherent_state(0.5, DIM))
    assert abs(np.trace(out)) < 1e-12 and np.allclose(out, out.conj().T)


def test_validation():
    a = fock_annihilation(4)
    with pytest.raises(DimensionError):
        lindblad_simulate(np.zeros((4, 4)), a, np.eye(3) / 3, 1, 0.1)
    with pytest.raises(ParameterError):
        lindblad_simulate(np.zeros((4, 4)), a, fock_state(0, 4), 1, 0)
    with pytest.raises(ParameterError):
        lindblad_simulate(np.zeros((4, 4)), a, np.eye(4), 1, 0.1)
    with pytest.raises(ParameterError):
        lindblad_simulate(np.triu(np.ones((4, 4))), a, fock_state(0, 4), 1, 0.1)
    with pytest.raises(ParameterError):
        lindblad_simulate(np.zeros((4, 4)), a, fock_state(0, 4), 1, 0.3)
    with pytest.raises(ParameterError):
        lindblad_simulate(np.zeros((4, 4)), a, fock_state(0, 4), 1, 0.1, method="euler")


def test_oversized_step_is_reported():
    with pytest.raises((IntegratorError, StepSizeError)):
        _cavity(dt=1.0, t_end=5.0, rho0=coherent_state(2.0, DIM))


def test_record_every_keeps_last_sample():
    tr = lindblad_simulate(np.zeros((DIM, DIM)), np.sqrt(2) * fock_annihilation(DIM), fock_state(1, DIM),
                           1.0, 0.01, record_every=30)
    assert tr.times[-1] == pytest.approx(1.0) and len(tr) == 5
    assert tr.rows().shape == (5, 5)


def _synthetic(v):
    t = np.linspace(0, 5, v.size)
    return Trajectory(t, (v - 1) / 2, v, np.ones_like(t), np.ones_like(t), 4, t[1] - t[0])


def test_fit_envelope_exact_recovery():
    t = np.linspace(0, 5, 200)
    fit = fit_envelope(_synthetic(2 / 3 * np.exp(-2 * t) * 3 + 1))
    assert fit.witnessed
    assert fit.c1 == pytest.approx(2 / 3, rel=1e-5) and fit.c2 == pytest.approx(2, rel=1e-5)
    assert fit.c3 == pytest.approx(1, rel=1e-5)
    assert np.all(fit.bound(t) >= 2 * np.exp(-2 * t) + 1 - 1e-6)


def test_fit_envelope_constant_trajectory_not_witnessed():
    fit = fit_envelope(_synthetic(np.full(100, 3.0)))
    assert not fit.witnessed and "decay" in fit.reason


def test_fit_envelope_needs_samples():
    with pytest.raises(ParameterError):
        fit_envelope(_synthetic(np.ones(10)))


def test_fit_envelope_to_dict():
    fit = fit_envelope(_cavity())
    d = fit.to_dict()
    assert isinstance(fit, EnvelopeFit) and d["witnessed"] and d["c2"] > 0
