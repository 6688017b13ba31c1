import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstab.certificates import (
    PGrid,
    build_spr_lmi,
    certify,
    check_certificate,
    compute_lambda,
    compute_msq_constants,
    decay_rate,
    find_P,
    lambda_terms,
    ordering_constant,
    schur_complement,
)
from qstab.errors import ParameterError, PreconditionError, UnsupportedDimensionError
from qstab.frequency import COARSE
from qstab.model import DoubledMatrix, PerturbationBounds, build_plant, build_realization, kerr_plant
from qstab.popov import popov_margin

KERR = kerr_plant(2.0)
P01 = DoubledMatrix.scalar(0.1)


def test_kerr_lmi_hand_evaluation():
    # F = -I, B = [-1, 0]^T, C = [2i, 0]: PF + F^H P = -0.2 I,
    # off = P B - (1 - theta) C^H = [-0.1, 0]; corner = -gamma.
    L = build_spr_lmi(KERR, P01, 1.0, 0.1)
    expected = np.array([[-0.2, 0, -0.1], [0, -0.2, 0], [-0.1, 0, -0.1]])
    assert np.allclose(L, expected, atol=1e-14)
    # eig of [[-0.2, 0.1], [0.1, -0.1]] = (-0.3 + sqrt(0.05)) / 2
    chk = check_certificate(KERR, P01, 1.0, 0.1)
    assert chk.lmi_max_eig == pytest.approx((-0.3 + np.sqrt(0.05)) / 2, abs=1e-12)
    assert chk.feasible and chk.p_min_eig == pytest.approx(0.1)


def test_theta_zero_offdiagonal_hand_evaluation():
    L = build_spr_lmi(KERR, P01, 0.0, 0.1)
    # off = P B - C^H = [-0.1 + 2i, 0]
    assert np.allclose(L[:2, 2], [-0.1 + 2j, 0], atol=1e-14)


def test_large_P_infeasible():
    assert not check_certificate(KERR, DoubledMatrix.scalar(0.3), 1.0, 0.1).feasible


def test_schur_complement_matches_lmi():
    Mt, geff = schur_complement(KERR, P01, 1.0, 0.1)
    assert geff == pytest.approx(0.1)
    assert np.allclose(Mt, np.diag([-0.1, -0.2]))


def test_negative_theta_rejected():
    with pytest.raises(ParameterError):
        build_spr_lmi(KERR, P01, -1.0, 0.1)


def test_convention_validation():
    with pytest.raises(ParameterError):
        check_certificate(KERR, P01, 1.0, 0.1, convention="bogus")


@pytest.mark.parametrize("p1", [0.01, 0.05, 0.1, 0.15, 0.25, 0.3, 1.0])
@pytest.mark.parametrize("theta", [0.0, 0.5, 1.0])
def test_conventions_agree_after_scaling(p1, theta):
    # the lyapunov-convention solution is the realization one divided by four
    a = check_certificate(KERR, DoubledMatrix.scalar(p1), theta, 0.1, "realization")
    b = check_certificate(KERR, DoubledMatrix.scalar(p1 / 4), theta, 0.1, "lyapunov")
    assert a.feasible == b.feasible


def test_find_P_kerr():
    cert = find_P(KERR, 1.0, 0.1)
    assert cert is not None and cert.lmi_max_eig < 0
    assert check_certificate(KERR, cert.P, 1.0, 0.1).feasible


def test_find_P_infeasible_without_multiplier():
    # small gain is violated for gamma = 0.1 < 2 and theta = 0 gives no help
    assert find_P(KERR, 0.0, 0.1) is None


def test_find_P_multimode_unsupported():
    plant = build_plant(np.eye(2), np.zeros((2, 2)), [[1, 0]], [[0, 0]], [1, 0], [0, 0])
    with pytest.raises(UnsupportedDimensionError):
        find_P(plant, 1.0, 1.0)


def test_pgrid_ratio_zero_first_and_inside_disc():
    r = PGrid().ratio_values()
    assert r[0] == 0 and np.all(np.abs(r) < 1)


def test_lambda_kerr_hand_values():
    bounds = PerturbationBounds(0.1, delta1=0, delta2=0, delta3=0)
    t = lambda_terms(KERR, P01, 1.0, bounds, "printed")
    assert t["trace"] == pytest.approx(0.2) and t["middle"] == pytest.approx(2.0)
    assert t["third"] == pytest.approx(0.0, abs=1e-14)
    assert compute_lambda(KERR, P01, 1.0, bounds) == pytest.approx(2.2, abs=1e-9)
    assert compute_lambda(KERR, P01, 1.0, bounds, "operator") == pytest.approx(0.2, abs=1e-9)


def test_lambda_perturbation_term():
    b0 = PerturbationBounds(0.1)
    b1 = PerturbationBounds(0.1, delta1=2, delta2=3, delta3=5)
    diff = compute_lambda(KERR, P01, 1.0, b1) - compute_lambda(KERR, P01, 1.0, b0)
    assert diff == pytest.approx(2 * 0.1 + 1.5 + 2.5)


def test_lambda_unknown_form():
    with pytest.raises(ParameterError):
        lambda_terms(KERR, P01, 1.0, PerturbationBounds(1), "other")


def test_msq_constants_kerr_hand_values():
    from qstab.certificates import LyapunovCertificate

    cert = LyapunovCertificate(P=P01, theta=1.0, gamma=0.1, lmi_max_eig=-0.038)
    c1, c, c3, d = compute_msq_constants(KERR, cert, PerturbationBounds(0.1, beta=1.0))
    # P + E^H E = diag(1.1, 0.1); Q_z = I/2 so P + Q_z = 0.6 I; M_tilde = diag(-0.2, -0.1)
    assert c1 == pytest.approx(11.0)
    assert c == pytest.approx(0.1 / 0.6)
    # E1 = 0 for this plant, so the ordering constant vanishes
    assert d["ordering"] == 0.0
    assert c3 == pytest.approx(132.0)


def test_msq_constants_require_feasible():
    from qstab.certificates import LyapunovCertificate

    cert = LyapunovCertificate(P=P01, theta=1.0, gamma=0.1, lmi_max_eig=0.1)
    with pytest.raises(PreconditionError):
        compute_msq_constants(KERR, cert, PerturbationBounds(0.1))


def test_decay_rate_rejects_infeasible():
    with pytest.raises(PreconditionError):
        decay_rate(KERR, DoubledMatrix.scalar(0.3), 1.0, 0.1, 1.0)


def test_ordering_constant_nonnegative():
    assert ordering_constant(KERR, 0.5, 1.0, 1.0) == 0.0
    swapped = build_plant(0, 0, 1, 0, 1, 0)
    assert ordering_constant(swapped, 0.5, 1.0, 1.0) == pytest.approx(0.25)


def test_certify_end_to_end():
    cert = certify(KERR, 1.0, PerturbationBounds(0.1))
    assert cert.complete and cert.c2 > 0 and cert.c3 > 0
    d = cert.to_dict()
    assert set(d) >= {"P", "c1", "c2", "c3", "lambda", "theta"}


def _random_detuned(seed):
    rng = np.random.default_rng(seed)
    while True:
        plant = build_plant(rng.normal(), 0.2 * complex(*rng.normal(size=2)),
                            complex(*rng.normal(size=2)), 0.2 * complex(*rng.normal(size=2)),
                            complex(*rng.normal(size=2)), 0.3 * complex(*rng.normal(size=2)))
        from qstab.smallgain import is_hurwitz

        if is_hurwitz(build_realization(plant).F)[1] < -0.1:
            return plant


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_decay_inequality_holds(seed):
    # M_tilde + c (P + theta beta Q_z) <= 0 at the computed c
    from qstab.certificates import _z_quadratic

    plant = _random_detuned(seed)
    ss = build_realization(plant)
    gamma = 3.0 * max(1e-3, -popov_margin(ss, 0.0, 0.0, COARSE)[0] * 2) + 0.5
    cert = find_P(plant, 0.0, gamma, PGrid(p1_steps=21, ratio_steps=5, descent_iters=50))
    if cert is None:
        return
    Pf = cert.P.full()
    c, Mt = decay_rate(plant, Pf, 0.0, gamma, 1.0)
    S = Mt + c * (Pf + 0.0 * _z_quadratic(plant))
    assert np.linalg.eigvalsh(S)[-1] <= 1e-10
    assert compute_lambda(plant, Pf, 0.0, PerturbationBounds(gamma)) >= 0


@pytest.mark.parametrize("convention", ["realization", "lyapunov"])
def test_detuned_sign_oracle(convention):
    # Frequency-domain margin at theta = 1 is negative for gamma = 1 and positive for gamma = 3.
    plant = build_plant(0.5, 0, np.sqrt(2), 0, 0, 1)
    ss = build_realization(plant)
    assert popov_margin(ss, 1.0, 1.0)[0] < 0 < popov_margin(ss, 1.0, 3.0)[0]
    assert find_P(plant, 1.0, 1.0, convention=convention) is None
    assert find_P(plant, 1.0, 3.0, convention=convention) is not None
