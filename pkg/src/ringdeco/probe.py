"""Probe-pulse response and experiment-design formulas.

Counts refer to the odd-mode detector unless stated otherwise.  Times are
reduced (``theta = Omega t``); ``omega_tau`` is the pulse length in the same
units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gaussian
from .dynamics import PureDecoherence, Thermalization, covariance_curves


class VarianceError(ArithmeticError):
    """A count variance came out negative."""


def interaction_fractions(g, kappa):
    """Return (R, Rbar): interacting and non-interacting photon fractions."""
    d = (g * g + kappa * kappa) ** 2
    return g * g * kappa * kappa / d, kappa**4 / d


def odd_mode_envelope(g, kappa, t):
    """Time profile of the odd-mode amplitude per unit drive during a mesa pulse."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-kappa * t)
    out = (g - g * e * np.cos(g * t) - kappa * e * np.sin(g * t)) / (g * g + kappa * kappa)
    return float(out) if out.ndim == 0 else out


def integrated_envelope_rate(g, kappa, tau, panels: int | None = None) -> float:
    """Detected odd-photon fraction 2 kappa (kappa / 2 tau) int_0^tau f(t)^2 dt.

    Trapezoid rule with at least 10^4 panels (and >= 20 per cavity decay time).
    Tends to ``R`` when kappa * tau >> 1.
    """
    if tau <= 0:
        return 0.0
    if panels is None:
        panels = max(10_000, int(math.ceil(20 * kappa * tau)))
    t = np.linspace(0.0, tau, panels + 1)
    f = odd_mode_envelope(g, kappa, t)
    return float(2 * kappa * (kappa / (2 * tau)) * np.trapezoid(f * f, t))


def mean_counts(R, Rbar, n_in, sin2):
    """Mean odd and even counts (N_o, N_e) for a given <sin^2(2kx)>."""
    n_o = R * n_in * sin2
    n_e = Rbar * n_in + R * n_in * (1.0 - sin2)
    return n_o, n_e


def counts_variance(R, n_in, sin2, sin4, model: str = "paper"):
    """Variance of the odd count.

    ``paper``: coherent probe pulse, R^2 (N(N+1)<sin^4> - N^2 <sin^2>^2).
    ``poisson``: conditional-Poisson detection (an alternative to the coherent-pulse model),
    R^2 N^2 (<sin^4> - <sin^2>^2) + R N <sin^2>.
    """
    if model == "paper":
        var = R * R * (n_in * (n_in + 1) * sin4 - n_in * n_in * sin2 * sin2)
    elif model == "poisson":
        var = R * R * n_in * n_in * (sin4 - sin2 * sin2) + R * n_in * sin2
    else:
        raise ValueError(f"unknown variance model {model!r}")
    # cancellation can leave -1e-16 relative noise at the node
    scale = R * R * n_in * (n_in + 1) * np.maximum(sin4, 1e-300)
    if np.any(var < -1e-12 * scale):
        raise VarianceError(f"negative count variance {var}")
    return np.maximum(var, 0.0)


def lamb_dicke_variance(R, n_in, eps, X):
    return R * R * (4 * eps * X) ** 2 * (2 * n_in * n_in + 3 * n_in)


def anti_lamb_dicke_variance(R, n_in):
    return R * R * (n_in * n_in / 8 + 3 * n_in / 8)


def oscillation_amplitude(n_in, R, eps, gamma):
    """Peak-to-peak breathing ripple 8 N_in R eps gamma (Lamb-Dicke result)."""
    return 8.0 * n_in * R * eps * gamma


def contrast(gamma, nbar0, theta_p):
    """C_osc = 2 gamma / (nbar0 + gamma theta_p)."""
    return 2.0 * gamma / (nbar0 + gamma * np.asarray(theta_p, dtype=float))


def snr_single(c_osc, n_in):
    """Single-shot S/N and repetitions for a 3-sigma detection at one probe time.

    ``n_ex_point`` is ``inf`` when the contrast vanishes.
    """
    snr = c_osc / math.sqrt(2.0 + 3.0 / n_in)
    n_ex = math.inf if snr == 0 else 10.0 / snr**2
    return snr, n_ex


def spectral_snr(gamma, nbar0, omega_tau, T, n_in=math.inf):
    """(T/tau)^(1/2) S/N(t_p = T/2) as a function of the record length T (reduced)."""
    T = np.asarray(T, dtype=float)
    shot = 2.0 + 3.0 / n_in
    return np.sqrt(T / omega_tau) / math.sqrt(shot) * 2 * gamma / (nbar0 + gamma * T / 2)


@dataclass(frozen=True)
class SpectralDesign:
    snr_2omega: float  # at the requested record length
    t_opt: float  # reduced time nbar0 / gamma
    max_snr: float
    n_ex_total: float
    T: float


def snr_spectral(gamma, nbar0, omega_tau, T=None, n_in=math.inf) -> SpectralDesign:
    """Spectral S/N of the 2 Omega line and the observation-time design numbers.

    ``T_opt = nbar0 / gamma`` and ``max S/N = (gamma / (nbar0 omega_tau))^(1/2)``
    are the closed-form design values.  ``T`` defaults to ``T_opt``.
    """
    t_opt = nbar0 / gamma
    max_snr = math.sqrt(gamma / (nbar0 * omega_tau))
    n_ex = 10.0 / max_snr**2 * t_opt / omega_tau
    T = t_opt if T is None else T
    return SpectralDesign(float(spectral_snr(gamma, nbar0, omega_tau, T, n_in)), t_opt, max_snr, n_ex, T)


@dataclass(frozen=True)
class MassiveLimits:
    max_snr: float
    t_opt: float
    n_ex: float


def massive_limits(gamma, nbar0, omega_tau) -> MassiveLimits:
    """High-temperature expansions of the design numbers (tanh y ~ y).

    ``y = hbar Omega / 2 k_B T0`` is recovered from ``nbar0 = coth(y)``.
    """
    if nbar0 < 5:
        warnings.warn(f"massive-object limits assume nbar0 >> 1, got {nbar0:.3g}", stacklevel=2)
    y = math.atanh(1.0 / nbar0) if nbar0 > 1 else math.inf
    return MassiveLimits(
        max_snr=math.sqrt(gamma * y / omega_tau),
        t_opt=1.0 / (y * gamma),
        n_ex=10.0 / (y * gamma) ** 2,
    )


@dataclass(frozen=True)
class ProbeResponse:
    R: float
    Rbar: float
    n_odd: float
    n_even: float
    var_odd: float
    regime: str


def probe_response(X, eps, g_over_kappa, n_in, variance_model="paper") -> ProbeResponse:
    R, Rbar = interaction_fractions(g_over_kappa, 1.0)
    s2, s4 = gaussian.expect_sin2(X, eps), gaussian.expect_sin4(X, eps)
    n_o, n_e = mean_counts(R, Rbar, n_in, s2)
    var = counts_variance(R, n_in, s2, s4, variance_model)
    return ProbeResponse(R, Rbar, float(n_o), float(n_e), float(var), gaussian.regime(X, eps))


@dataclass(frozen=True)
class DesignSummary:
    oscillation_amplitude: float
    contrast: float
    snr_single: float
    n_ex_point: float
    snr_spectral: float
    t_opt: float  # reduced
    max_snr: float
    n_ex_total: float

    def to_dict(self, omega: float | None = None) -> dict:
        d = dict(self.__dict__)
        if omega is not None:
            d["t_opt_seconds"] = self.t_opt / omega
        return d


def design_summary(p, theta_p: float = 0.0) -> DesignSummary:
    """Full design chain for a decoherence scenario ``p`` (DimensionlessParams)."""
    gamma = p.heating_rate()
    R, _ = interaction_fractions(p.g_over_kappa, 1.0)
    c = float(contrast(gamma, p.nbar0, theta_p))
    s1, nx1 = snr_single(c, p.n_in)
    sd = snr_spectral(gamma, p.nbar0, p.omega_tau, n_in=p.n_in)
    return DesignSummary(
        oscillation_amplitude=oscillation_amplitude(p.n_in, R, p.eps, gamma),
        contrast=c,
        snr_single=s1,
        n_ex_point=nx1,
        snr_spectral=sd.snr_2omega,
        t_opt=sd.t_opt,
        max_snr=sd.max_snr,
        n_ex_total=sd.n_ex_total,
    )


@dataclass
class SignalCurve:
    """Odd-detector signal versus probe time.

    Analytic columns are always present; ``empirical_*`` are filled by the
    Monte Carlo generator.
    """

    theta: np.ndarray
    t_p: np.ndarray
    mean_no: np.ndarray
    var_no: np.ndarray
    mean_ne: np.ndarray
    regime: list
    empirical_mean: np.ndarray | None = None
    empirical_var: np.ndarray | None = None
    n_runs: int = 0
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.theta.size > 1 and np.any(np.diff(self.theta) <= 0):
            raise ValueError("probe times must be strictly increasing")

    def __len__(self):
        return self.theta.size


def analytic_signal_curve(p, thetas, env=None, variance_model: str = "paper") -> SignalCurve:
    """Mean and variance of the counts at each probe time, starting from the thermal state.

    Uses the exact exponential expressions, so the curve saturates at R N_in / 2.
    """
    env = p.environment() if env is None else env
    th = np.asarray(thetas, dtype=float)
    X, _, _ = covariance_curves(p.nbar0, env, th)
    R, Rbar = interaction_fractions(p.g_over_kappa, 1.0)
    s2 = gaussian.expect_sin2(X, p.eps)
    s4 = gaussian.expect_sin4(X, p.eps)
    n_o, n_e = mean_counts(R, Rbar, p.n_in, s2)
    var = counts_variance(R, p.n_in, s2, s4, variance_model)
    kind = "decoherence" if isinstance(env, PureDecoherence) else "thermalization"
    assert isinstance(env, (PureDecoherence, Thermalization))
    return SignalCurve(
        theta=th,
        t_p=th / p.omega,
        mean_no=np.atleast_1d(n_o),
        var_no=np.atleast_1d(var),
        mean_ne=np.atleast_1d(n_e),
        regime=[gaussian.regime(x, p.eps) for x in np.atleast_1d(X)],
        metadata={"environment": kind, "variance_model": variance_model},
    )
