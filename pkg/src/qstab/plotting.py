"""Static report figures written as PNG files (non-interactive backend)."""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_popov", "plot_gain", "plot_trajectory"]

_META = {"Software": None}


def _save(fig, path):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    tmp = os.path.join(directory, f".tmp-{os.path.basename(path)}")
    fig.savefig(tmp, format="png", dpi=120, metadata=_META)
    plt.close(fig)
    os.replace(tmp, path)
    return path


def plot_popov(data, path):
    """Popov curve with the boundary line; points violating the test in red."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.plot(data.x, data.y, lw=1.2, label="(Re G, w Im G)")
    bad = ~data.allowed()
    if np.any(bad):
        ax.plot(data.x[bad], data.y[bad], "r.", ms=3, label="violating")
    xs = np.linspace(min(data.x.min(), data.x_intercept) - 0.5, max(data.x.max(), 0.0) + 0.5, 2)
    if data.vertical:
        ax.axvline(data.x_intercept, color="k", ls="--", label="x = -gamma/2")
    else:
        ax.plot(xs, (xs - data.x_intercept) / data.theta, "k--", label=f"slope 1/theta, theta={data.theta:.4g}")
    ax.set_xlabel("Re G(iw)")
    ax.set_ylabel("w Im G(iw)")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_gain(omega, gain, gamma, path):
    """``|G(iw)|`` over positive frequencies against the level ``gamma``."""
    omega = np.asarray(omega)
    gain = np.asarray(gain)
    keep = omega > 0
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.loglog(omega[keep], gain[keep], lw=1.2, label="|G(iw)|")
    ax.axhline(gamma, color="k", ls="--", label=f"gamma = {gamma:.4g}")
    ax.set_xlabel("w")
    ax.set_ylabel("gain")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3, which="both")
    return _save(fig, path)


def plot_trajectory(traj, fit, path):
    """Second-moment trajectory with the fitted envelope when one exists."""
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(traj.times, traj.vquad_expect, lw=1.2, label="<x^H x>(t)")
    if fit is not None and np.isfinite(fit.c1):
        ax.plot(traj.times, fit.bound(traj.times), "k--", label="envelope")
    ax.set_xlabel("t")
    ax.set_ylabel("second moment")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)
