import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstab.errors import DimensionError, ParameterError, ValidationError
from qstab.model import (
    DoubledMatrix,
    PerturbationBounds,
    build_F,
    build_plant,
    build_realization,
    constants_J_Sigma,
    eval_G,
    frequency_response,
    kerr_plant,
)


def test_constants_J_Sigma_two_modes():
    J, S = constants_J_Sigma(2)
    assert np.allclose(np.diag(J), [1, 1, -1, -1])
    assert np.allclose(S @ S, np.eye(4))
    assert np.allclose(J @ S, -S @ J)


def test_constants_reject_zero_modes():
    with pytest.raises(DimensionError):
        constants_J_Sigma(0)


def test_doubled_matrix_roundtrip():
    D = DoubledMatrix([[1.0]], [[0.5 + 0.2j]])
    full = D.full()
    assert np.allclose(full, [[1, 0.5 + 0.2j], [0.5 - 0.2j, 1]])
    assert DoubledMatrix.from_full(full) == D or np.allclose(DoubledMatrix.from_full(full).full(), full)
    assert D.is_hermitian_form()


def test_doubled_matrix_rejects_pattern():
    with pytest.raises(ValidationError):
        DoubledMatrix.from_full([[1, 2], [3, 4]])


def test_build_plant_rejects_nonhermitian_M1():
    with pytest.raises(ValidationError, match="M1"):
        build_plant([[0, 1], [2, 0]], np.zeros((2, 2)), [[1, 0]], [[0, 0]], [1, 0], [0, 0])


def test_build_plant_rejects_asymmetric_M2():
    with pytest.raises(ValidationError, match="M2"):
        build_plant(np.eye(2), [[0, 1], [2, 0]], [[1, 0]], [[0, 0]], [1, 0], [0, 0])


def test_build_plant_shape_errors():
    with pytest.raises(DimensionError):
        build_plant(0, 0, [[1, 2]], [[0, 0]], 0, 1)
    with pytest.raises(DimensionError, match="E1"):
        build_plant(0, 0, 1, 0, [1, 2], 1)


def test_bounds_validation():
    with pytest.raises(ParameterError):
        PerturbationBounds(gamma=0)
    with pytest.raises(ParameterError):
        PerturbationBounds(gamma=1, delta2=-1)


def test_kerr_F_and_G():
    plant = kerr_plant(2.0)
    assert np.allclose(build_F(plant), -np.eye(2))
    ss = build_realization(plant)
    # G(s) = -2i / (s + kappa/2)
    assert eval_G(ss, 1j) == pytest.approx(-1 - 1j, abs=1e-14)
    assert eval_G(ss, 0) == pytest.approx(-2j, abs=1e-14)


def test_kerr_rejects_nonpositive_kappa():
    with pytest.raises(ParameterError):
        kerr_plant(0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 20), st.floats(-50, 50))
def test_kerr_transfer_closed_form(kappa, w):
    ss = build_realization(kerr_plant(kappa))
    assert eval_G(ss, 1j * w) == pytest.approx(-2j / (1j * w + kappa / 2), rel=1e-12, abs=1e-14)


def test_frequency_response_matches_pointwise(rng):
    from conftest import random_stable_plant

    ss = build_realization(random_stable_plant(rng, m=2))
    w = np.linspace(-5, 5, 11)
    assert np.allclose(frequency_response(ss, w), [eval_G(ss, 1j * x) for x in w])


def test_F_is_doubled_up_real_structure(rng):
    # F commutes with the conjugation Sigma (.)^# Sigma
    from conftest import random_stable_plant

    plant = random_stable_plant(rng, m=2)
    F = build_F(plant)
    _, S = constants_J_Sigma(1)
    assert np.allclose(S @ F.conj() @ S, F)
