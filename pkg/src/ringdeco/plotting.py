"""Report figures.  Rendered off-screen (Agg) as PNG to a path or binary file handle."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _figure(width=6.0, height=None, nrows=1):
    height = height or width * (math.sqrt(5) - 1) / 2 * (1 if nrows == 1 else 0.8 * nrows)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(nrows, 1, figsize=(width, height), squeeze=False, sharex=nrows > 1)
    return fig, axes[:, 0]


def _save(fig, path):
    with plt.rc_context(_STYLE):
        fig.tight_layout()
        fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    return path


def plot_curve(curve, path):
    """Mean odd-detector counts versus probe time."""
    fig, (ax,) = _figure()
    ax.plot(curve.t_p * 1e6, curve.mean_no, lw=1.0, color="C0", label="analytic")
    ax.set_xlabel(r"probe time $t_p$ [$\mu$s]")
    ax.set_ylabel(r"$N_o$ [photons]")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_timeseries(curve, path):
    fig, (ax,) = _figure()
    x = curve.t_p * 1e6
    if curve.empirical_mean is not None:
        err = np.sqrt(curve.empirical_var / max(curve.n_runs, 1))
        ax.errorbar(x, curve.empirical_mean, yerr=err, fmt=".", ms=2, lw=0.5, color="0.4", label=f"simulated, n = {curve.n_runs}")
    ax.plot(x, curve.mean_no, lw=1.0, color="C3", label="analytic")
    ax.set_xlabel(r"probe time $t_p$ [$\mu$s]")
    ax.set_ylabel(r"$N_o$ [photons]")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_spectrum(report, path):
    fig, (ax,) = _figure()
    ax.semilogy(report.omega[1:], np.maximum(report.power[1:], 1e-300), lw=0.8, color="C0")
    ax.axhline(report.noise_floor, ls="--", lw=0.8, color="0.5", label="median floor")
    ax.axvline(2.0, ls=":", lw=0.8, color="C3", label=r"$2\Omega$")
    ax.plot([report.peak_frequency], [max(report.peak_power, 1e-300)], "o", color="C3", ms=4)
    ax.set_xlabel(r"angular frequency [$\Omega$]")
    ax.set_ylabel("periodogram power")
    ax.set_title(f"S/N = {report.snr:.2f}  ({report.verdict})")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_oracle(report, path):
    """Closed-form vs number-basis moments and their differences."""
    rows = report["checkpoints"]
    th = np.array([r["theta"] for r in rows])
    fig, (a1, a2) = _figure(nrows=2)
    for key, c in (("X", "C0"), ("P", "C1"), ("C", "C2")):
        a1.plot(th, [r[key] for r in rows], "o-", ms=3, lw=0.8, color=c, label=key)
        a2.semilogy(th, [max(abs(r["d" + key]), 1e-17) for r in rows], "o-", ms=3, lw=0.8, color=c, label=f"|d{key}|")
    a2.semilogy(th, [max(abs(r["dsin2"]), 1e-17) for r in rows], "s-", ms=3, lw=0.8, color="C3", label=r"|d sin$^2$|")
    a1.set_ylabel("second moments")
    a2.set_ylabel("deviation")
    a2.set_xlabel(r"$\Omega t$")
    a1.legend(frameon=False, ncol=3)
    a2.legend(frameon=False, ncol=4)
    return _save(fig, path)
