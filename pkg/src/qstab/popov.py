"""Popov frequency-domain test and Popov-plot data.

The condition checked is

    gamma/2 + Re G(i w) - theta * w * Im G(i w) > 0   for all w in [-inf, inf],

for some multiplier slope ``theta >= 0``. Its left-hand side minimised over
``w`` is the *margin*. Graphically: the parametric curve
``(Re G(i w), w Im G(i w))`` has to stay below the line of slope ``1/theta``
through ``(-gamma/2, 0)``.
"""
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .errors import ParameterError, PreconditionError
from .frequency import FrequencyGrid
from .model import build_realization, eval_G, frequency_response
from .smallgain import Verdict, is_hurwitz

__all__ = [
    "PopovReport",
    "PopovPlotData",
    "popov_margin",
    "search_theta",
    "check_popov",
    "popov_plot",
    "DEFAULT_GRID",
]

DEFAULT_GRID = FrequencyGrid()

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PopovReport:
    theta: float
    gamma: float
    margin: float
    verdict: Verdict
    omega_at_min: float
    hurwitz: bool = True

    def to_dict(self):
        def clean(v):
            return v if np.isfinite(v) else (None if np.isnan(v) else ("inf" if v > 0 else "-inf"))

        return {
            "theta": clean(self.theta),
            "gamma": self.gamma,
            "margin": clean(self.margin),
            "verdict": self.verdict.value,
            "omega_at_min": clean(self.omega_at_min),
            "hurwitz": self.hurwitz,
        }


@dataclass(frozen=True)
class PopovPlotData:
    omega: np.ndarray
    x: np.ndarray  # Re G(i w)
    y: np.ndarray  # w Im G(i w)
    theta: float
    gamma: float

    @property
    def vertical(self):
        """With ``theta = 0`` the boundary is the vertical line ``x = -gamma/2``."""
        return self.theta == 0

    @property
    def slope(self):
        return np.inf if self.vertical else 1.0 / self.theta

    @property
    def x_intercept(self):
        return -self.gamma / 2.0

    def allowed(self):
        """Pointwise test of the strict inequality, one flag per point."""
        if self.vertical:
            return self.x > self.x_intercept
        return self.y < (self.x + self.gamma / 2.0) / self.theta

    def margins(self):
        return self.gamma / 2.0 + self.x - self.theta * self.y


def _require_hurwitz(ss):
    hurwitz, alpha = is_hurwitz(ss.F)
    if not hurwitz:
        raise PreconditionError(f"F is not Hurwitz (spectral abscissa {alpha:.3e})")
    return alpha


def _markov_limit(ss):
    # w Im G(i w) -> -Re(C B) as |w| -> inf for strictly proper G
    return float(np.real((ss.C @ ss.B)[0, 0]))


def _golden_max(fun, a, b, tol, maxiter=200):
    """Maximise a unimodal function on [a, b]; returns (argmax, max)."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (1.0 + abs(c) + abs(d)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fun(d)
    return (c, fc) if fc >= fd else (d, fd)


def _point_margin(ss, theta, gamma, w):
    g = eval_G(ss, 1j * w)
    return gamma / 2.0 + g.real - theta * w * g.imag


def _grid_terms(ss, grid, alpha):
    omega = grid.points(abs(alpha))
    g = frequency_response(ss, omega)
    return omega, g.real, omega * g.imag


def popov_margin(ss, theta, gamma, grid=None):
    """Minimum over ``w`` of ``gamma/2 + Re G(iw) - theta w Im G(iw)``.

    Evaluated on ``grid`` (scaled by the spectral abscissa), refined by golden
    section between the neighbours of the grid minimiser, and compared with the
    ``|w| -> inf`` limit ``gamma/2 + theta Re(CB)``. Returns
    ``(margin, omega_at_min)``; ``omega_at_min`` is ``inf`` when the limit wins.
    """
    if theta < 0:
        raise ParameterError(f"theta must be >= 0, got {theta}")
    grid = DEFAULT_GRID if grid is None else grid
    alpha = _require_hurwitz(ss)
    omega, re, wim = _grid_terms(ss, grid, alpha)
    vals = gamma / 2.0 + re - theta * wim
    i = int(np.argmin(vals))
    best_w, best = float(omega[i]), float(vals[i])
    lo = omega[max(i - 1, 0)]
    hi = omega[min(i + 1, omega.size - 1)]
    if hi > lo:
        w, v = _golden_max(lambda w: -_point_margin(ss, theta, gamma, w), lo, hi, 1e-12)
        if -v < best:
            best_w, best = float(w), float(-v)
    limit = gamma / 2.0 + theta * _markov_limit(ss)
    if limit < best:
        best_w, best = float("inf"), limit
    return best, best_w


def search_theta(ss, gamma, theta_max=None, steps=200, grid=None):
    """Maximise the margin over ``theta`` in ``[0, theta_max]``.

    A log-spaced grid (``theta = 0`` included) locates the best cell, then
    golden section refines inside it. The grid-restricted margin is a minimum of
    affine functions of ``theta``, hence concave, so golden section is exact up
    to its tolerance. Ties go to the smaller ``theta``. ``theta_max`` defaults
    to ``100 / |spectral abscissa|``.

    Returns ``(theta, margin)`` with margin recomputed by :func:`popov_margin`.
    """
    grid = DEFAULT_GRID if grid is None else grid
    alpha = _require_hurwitz(ss)
    if theta_max is None:
        theta_max = 100.0 / abs(alpha)
    if not theta_max > 0:
        raise ParameterError(f"theta_max must be > 0, got {theta_max}")
    if steps < 2:
        raise ParameterError("need at least 2 theta grid steps")
    _, re, wim = _grid_terms(ss, grid, alpha)
    base = gamma / 2.0 + re
    limit_slope = _markov_limit(ss)

    def grid_margin(theta):
        return min(float(np.min(base - theta * wim)), gamma / 2.0 + theta * limit_slope)

    thetas = np.concatenate([[0.0], np.logspace(np.log10(theta_max) - 6, np.log10(theta_max), steps - 1)])
    vals = np.minimum((base[None, :] - thetas[:, None] * wim[None, :]).min(axis=1),
                      gamma / 2.0 + thetas * limit_slope)
    tie = DEFAULT_TOLERANCES.strict * (1.0 + abs(vals.max()))
    i = int(np.flatnonzero(vals >= vals.max() - tie)[0])
    best_theta, best_val = float(thetas[i]), float(vals[i])
    lo = thetas[max(i - 1, 0)]
    hi = thetas[min(i + 1, thetas.size - 1)]
    t, v = _golden_max(grid_margin, lo, hi, 1e-13)
    if v > best_val + tie:
        best_theta = float(t)
    margin, _ = popov_margin(ss, best_theta, gamma, grid)
    return best_theta, margin


def check_popov(plant, bounds, theta_max=None, steps=200, grid=None):
    ss = build_realization(plant)
    hurwitz, _ = is_hurwitz(ss.F)
    if not hurwitz:
        nan = float("nan")
        return PopovReport(nan, bounds.gamma, nan, Verdict.NOT_CONCLUDED, nan, hurwitz=False)
    theta, _ = search_theta(ss, bounds.gamma, theta_max, steps, grid)
    margin, w = popov_margin(ss, theta, bounds.gamma, grid)
    stable = margin > DEFAULT_TOLERANCES.strict
    return PopovReport(
        theta=theta,
        gamma=bounds.gamma,
        margin=margin,
        verdict=Verdict.STABLE if stable else Verdict.NOT_CONCLUDED,
        omega_at_min=w,
    )


def popov_plot(ss, theta, gamma, grid=None):
    """Popov-plot coordinates over the (two-sided) frequency grid."""
    if theta < 0:
        raise ParameterError(f"theta must be >= 0, got {theta}")
    grid = DEFAULT_GRID if grid is None else grid
    alpha = _require_hurwitz(ss)
    omega = grid.points(abs(alpha), sentinel=False)
    g = frequency_response(ss, omega)
    return PopovPlotData(omega=omega, x=g.real, y=omega * g.imag, theta=float(theta), gamma=float(gamma))
