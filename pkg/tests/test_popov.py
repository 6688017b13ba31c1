import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstab.errors import ParameterError, PreconditionError
from qstab.frequency import COARSE, FrequencyGrid
from qstab.model import PerturbationBounds, build_plant, build_realization, eval_G, kerr_plant
from qstab.popov import check_popov, popov_margin, popov_plot, search_theta
from qstab.smallgain import Verdict


def _kerr_margin_closed_form(kappa, theta, gamma):
    # G(iw) = -2i / (iw + kappa/2) evaluated on a dense symmetric grid
    w = np.concatenate([[-1e6], np.linspace(-200, 200, 400001), [1e6]])
    G = -2j / (1j * w + kappa / 2)
    return float(np.min(gamma / 2 + G.real - theta * w * G.imag))


@pytest.mark.parametrize("kappa", [0.5, 2.0, 7.0])
@pytest.mark.parametrize("theta", [0.0, 0.3, 1.0])
def test_margin_matches_dense_oracle(kappa, theta):
    ss = build_realization(kerr_plant(kappa))
    m, _ = popov_margin(ss, theta, 1.0)
    assert m == pytest.approx(_kerr_margin_closed_form(kappa, theta, 1.0), abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.01, 10))
def test_kerr_optimal_theta_recovers_half_gamma(kappa, gamma):
    ss = build_realization(kerr_plant(kappa))
    m, _ = popov_margin(ss, 2 / kappa, gamma, COARSE)
    assert m == pytest.approx(gamma / 2, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 5), st.floats(0.01, 5), st.floats(0.01, 5))
def test_margin_affine_in_gamma(theta, g1, g2):
    ss = build_realization(kerr_plant(1.3))
    m1, _ = popov_margin(ss, theta, g1, COARSE)
    m2, _ = popov_margin(ss, theta, g2, COARSE)
    assert m2 - m1 == pytest.approx((g2 - g1) / 2, abs=1e-9)


def test_margin_is_frequency_minimum(rng):
    from conftest import random_stable_plant

    ss = build_realization(random_stable_plant(rng))
    m, w = popov_margin(ss, 0.5, 2.0)
    probe = np.linspace(-50, 50, 2001)
    vals = [1.0 + eval_G(ss, 1j * x).real - 0.5 * x * eval_G(ss, 1j * x).imag for x in probe]
    assert m <= min(vals) + 1e-12
    if np.isfinite(w):
        g = eval_G(ss, 1j * w)
        assert m == pytest.approx(1.0 + g.real - 0.5 * w * g.imag, abs=1e-12)


def test_negative_theta_rejected():
    with pytest.raises(ParameterError):
        popov_margin(build_realization(kerr_plant(1)), -0.1, 1)


def test_non_hurwitz_rejected_and_reported():
    plant = build_plant(0, 0, 0, 0, 0, 1)
    with pytest.raises(PreconditionError):
        popov_margin(build_realization(plant), 0, 1)
    rep = check_popov(plant, PerturbationBounds(1))
    assert rep.verdict is Verdict.NOT_CONCLUDED and rep.to_dict()["margin"] is None


def test_search_theta_kerr():
    theta, m = search_theta(build_realization(kerr_plant(2)), 0.1)
    assert theta == pytest.approx(1.0, rel=1e-6)
    assert m == pytest.approx(0.05, abs=1e-9)


def test_search_theta_validates():
    ss = build_realization(kerr_plant(2))
    with pytest.raises(ParameterError):
        search_theta(ss, 1, theta_max=0)
    with pytest.raises(ParameterError):
        search_theta(ss, 1, steps=1)


def test_search_theta_not_worse_than_zero(rng):
    from conftest import random_stable_plant

    ss = build_realization(random_stable_plant(rng))
    theta, m = search_theta(ss, 1.0, grid=COARSE)
    assert m >= popov_margin(ss, 0.0, 1.0, COARSE)[0] - 1e-12


def test_popov_report_to_dict_infinite_frequency():
    rep = check_popov(kerr_plant(2), PerturbationBounds(0.1))
    d = rep.to_dict()
    assert d["verdict"] == "RobustlyMeanSquareStable"
    assert d["omega_at_min"] in ("inf", None) or np.isfinite(d["omega_at_min"])


def test_popov_plot_geometry():
    data = popov_plot(build_realization(kerr_plant(2)), 1.0, 0.1)
    assert np.max(np.abs(data.x - data.y)) < 1e-12
    assert data.slope == 1.0 and data.x_intercept == -0.05 and not data.vertical
    assert np.all(data.allowed())
    assert np.allclose(data.margins(), 0.05 + data.x - data.y)


def test_popov_plot_vertical_line_for_zero_theta():
    data = popov_plot(build_realization(kerr_plant(2)), 0.0, 0.1)
    assert data.vertical
    # Re G reaches -2 at w = 0, left of -gamma/2
    assert not np.all(data.allowed())


def test_grid_contains_snapped_unit_frequency():
    grid = FrequencyGrid()
    w = grid.points(1.0)
    assert 1.0 in w and -1.0 in w and 0.0 in w
    assert np.all(np.diff(w) > 0)
