"""Monte Carlo of repeated probe measurements and the 2 Omega spectral test.

Every probe time is an independent run from the initial thermal state.  The
random stream for repeat ``r`` at grid index ``i`` comes from a Philox
generator keyed by ``(seed, i, r // BLOCK)``, so results do not depend on how
the work is chunked or parallelized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gaussian, probe
from .dynamics import PureDecoherence, Thermalization, covariance_curves
from .probe import SignalCurve

BLOCK = 1 << 14
DETECTION_THRESHOLD = 3.0
SENSITIVITY_MARGIN = 1.5


def _rng(seed: int, index: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index, block))))


def sample_count(state, eps, R, n_in, rng, size=None, model: str = "paper"):
    """Draw odd-detector counts for ``state`` (a CovarianceState or its X).

    Position is drawn from the Gaussian marginal (``k x`` has variance eps X);
    given the position the count is Normal(R N sin^2, R^2 N sin^4) rounded to
    the nearest non-negative integer (``paper``), or Poisson(R N sin^2).
    """
    X = getattr(state, "X", state)
    if n_in == 0:
        return np.zeros(size if size is not None else (), dtype=np.int64)
    u = rng.normal(0.0, math.sqrt(eps * X), size)
    s2 = np.sin(2.0 * u) ** 2
    mu = R * n_in * s2
    if model == "paper":
        counts = mu + R * math.sqrt(n_in) * s2 * rng.standard_normal(np.shape(mu))
        return np.rint(np.maximum(counts, 0.0)).astype(np.int64)
    if model == "poisson":
        return rng.poisson(mu).astype(np.int64)
    raise ValueError(f"unknown variance model {model!r}")


def matched_thermalization(p, bath_occupancy: float = 100.0):
    """Thermalizing environment with the same initial heating rate as ``p``'s decoherence."""
    if bath_occupancy <= p.nbar0:
        raise ValueError("bath must be hotter than the initial state to heat it")
    gamma = p.heating_rate()
    return p.replace(env_kind="thermalization", gamma=0.0, gamma_th=gamma / (bath_occupancy - p.nbar0), nbar_e=bath_occupancy)


def matched_decoherence(p):
    """Pure decoherence with the same initial heating rate as ``p``'s thermalization."""
    return p.replace(env_kind="decoherence", gamma=p.heating_rate(), gamma_th=0.0, nbar_e=1.0)


def default_grid(p, points_per_period: int = 16, periods: int | None = None) -> np.ndarray:
    """Probe times at ``points_per_period`` per breathing period (pi), up to about T_opt."""
    if periods is None:
        rate = p.heating_rate()
        t_opt = p.nbar0 / rate if rate > 0 else 4 * math.pi
        periods = max(4, int(math.ceil(t_opt / math.pi)))
    return np.arange(points_per_period * periods) * (math.pi / points_per_period)


def generate_timeseries(
    p, env, thetas, n_repeats: int, seed: int, variance_model: str = "paper"
) -> SignalCurve:
    """Average ``n_repeats`` simulated runs at each probe time and attach the analytic moments."""
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size > 1 and np.min(np.diff(thetas)) < p.omega_tau * (1 - 1e-9):
        raise ValueError("probe times closer than one pulse length")
    if n_repeats < 1:
        raise ValueError("n_repeats must be >= 1")
    env = p.environment() if env is None else env
    curve = probe.analytic_signal_curve(p, thetas, env, variance_model)
    X, _, _ = covariance_curves(p.nbar0, env, thetas)
    R, _ = probe.interaction_fractions(p.g_over_kappa, 1.0)
    mean = np.empty(thetas.size)
    var = np.empty(thetas.size)
    for i, x in enumerate(X):
        s = s2 = 0.0
        for b in range(math.ceil(n_repeats / BLOCK)):
            size = min(BLOCK, n_repeats - b * BLOCK)
            c = sample_count(x, p.eps, R, p.n_in, _rng(seed, i, b), size, variance_model).astype(float)
            s += c.sum()
            s2 += (c * c).sum()
        mean[i] = s / n_repeats
        var[i] = (s2 - n_repeats * mean[i] ** 2) / (n_repeats - 1) if n_repeats > 1 else 0.0
    curve.empirical_mean = mean
    curve.empirical_var = np.maximum(var, 0.0)
    curve.n_runs = n_repeats
    curve.metadata.update({"seed": seed, "n_repeats": n_repeats})
    return curve


@dataclass
class SpectrumReport:
    omega: np.ndarray  # angular frequency in units of Omega
    power: np.ndarray
    peak_index: int
    peak_power: float
    noise_floor: float
    snr: float
    threshold: float
    verdict: str
    n_used: int
    reference_pp: float | None = None
    reference_snr: float | None = None

    @property
    def peak_frequency(self) -> float:
        return float(self.omega[self.peak_index])

    def to_dict(self, include_spectrum: bool = True) -> dict:
        d = {
            "peak_frequency_over_omega": self.peak_frequency,
            "peak_power": self.peak_power,
            "noise_floor": self.noise_floor,
            "empirical_snr": self.snr,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "n_used": self.n_used,
            "reference_peak_to_peak": self.reference_pp,
            "reference_snr": self.reference_snr,
        }
        if include_spectrum:
            d["frequency_over_omega"] = self.omega.tolist()
            d["power"] = self.power.tolist()
        return d


def moving_average_one_period(y, dtheta):
    """Centered boxcar of length pi (one breathing period); returns (trend, offset).

    ``trend[j]`` belongs to ``y[offset + j]``.  An even number m of samples per
    period uses m + 1 taps with half-weight ends, so a sampled 2 Omega sinusoid
    averages to exactly zero.
    """
    m = int(round(math.pi / dtheta))
    if m < 3:
        raise ValueError("need at least three samples per breathing period")
    if m % 2:
        kernel = np.full(m, 1.0 / m)
    else:
        kernel = np.ones(m + 1) / m
        kernel[0] = kernel[-1] = 0.5 / m
    trend = np.convolve(y, kernel, mode="valid")
    return trend, (kernel.size - 1) // 2, m


def detrend_and_periodogram(
    curve,
    threshold: float = DETECTION_THRESHOLD,
    reference_pp: float | None = None,
    margin: float = SENSITIVITY_MARGIN,
) -> SpectrumReport:
    """Detrend the count series and test for a spectral line at 2 Omega.

    Conventions: one-period moving-average detrend, residual trimmed to whole
    breathing periods, periodogram ``|rfft|^2 / n``, noise floor = median of
    the non-DC bins outside the 2 Omega bin +-2, ``snr = sqrt(peak / floor)``.
    A 2-omega line of peak-to-peak amplitude a in white noise sigma scores about ``0.93 (a / sigma) sqrt(n / 8)``.

    Verdict: ``decoherence-like`` if snr >= threshold.  Otherwise
    ``thermalization-like`` unless ``reference_pp`` (the ripple a decoherence
    environment with the observed heating would produce) is given and would not
    have been detected with an expected snr of at least ``margin * threshold``,
    in which case the run is ``inconclusive``.
    """
    if isinstance(curve, SignalCurve):
        theta = curve.theta
        y = curve.empirical_mean if curve.empirical_mean is not None else curve.mean_no
    else:
        theta, y = (np.asarray(a, dtype=float) for a in curve)
    y = np.asarray(y, dtype=float)
    if theta.size < 64:
        raise ValueError(f"need at least 64 probe times, got {theta.size}")
    d = np.diff(theta)
    dtheta = float(d.mean())
    if np.max(np.abs(d - dtheta)) > 1e-6 * dtheta:
        raise ValueError("probe times must be uniformly spaced")
    if theta[-1] - theta[0] + dtheta < 4 * math.pi * (1 - 1e-9):
        raise ValueError("record must span at least four breathing periods")

    trend, offset, m = moving_average_one_period(y, dtheta)
    resid = y[offset : offset + trend.size] - trend
    n = (resid.size // m) * m
    resid = resid[:n]
    spec = np.fft.rfft(resid)
    power = np.abs(spec) ** 2 / n
    omega = 2 * math.pi * np.arange(power.size) / (n * dtheta)
    k2 = int(np.argmin(np.abs(omega - 2.0)))
    mask = np.ones(power.size, dtype=bool)
    mask[0] = False
    mask[max(k2 - 2, 0) : k2 + 3] = False
    floor = float(np.median(power[mask]))
    peak = float(power[k2])
    if floor > 0:
        snr = math.sqrt(peak / floor)
    else:
        snr = math.inf if peak > 0 else 0.0

    ref_snr = None
    if reference_pp is not None:
        ref_snr = math.inf if floor == 0 else math.sqrt((reference_pp / 2) ** 2 * n / 4 / floor + 1 / math.log(2))
    if snr >= threshold:
        verdict = "decoherence-like"
    elif ref_snr is None or ref_snr >= margin * threshold:
        verdict = "thermalization-like"
    else:
        verdict = "inconclusive"
    return SpectrumReport(omega, power, k2, peak, floor, snr, threshold, verdict, n, reference_pp, ref_snr)


def reference_ripple(curve: SignalCurve, p) -> float:
    """Mean ripple (peak-to-peak) that pure decoherence with the observed heating would give.

    The smoothed counts are inverted to a position variance, the heating rate
    is the least-squares slope of that variance, and the first-order ripple
    8 R N eps gamma exp(-8 eps X) is averaged over the record.
    """
    y = curve.empirical_mean if curve.empirical_mean is not None else curve.mean_no
    dtheta = float(np.mean(np.diff(curve.theta)))
    trend, offset, _ = moving_average_one_period(y, dtheta)
    th = curve.theta[offset : offset + trend.size]
    R, _ = probe.interaction_fractions(p.g_over_kappa, 1.0)
    frac = np.clip(2 * trend / (R * p.n_in), 0.0, 1.0 - 1e-12)
    X = -np.log1p(-frac) / (8 * p.eps)
    slope = np.polyfit(th, X, 1)[0]
    gamma_eq = max(slope / 2.0, 0.0)
    return float(np.mean(probe.oscillation_amplitude(p.n_in, R, p.eps, gamma_eq) * gaussian.debye_waller(X, p.eps)))


@dataclass(frozen=True)
class Budget:
    n_repeats: int
    thetas: np.ndarray


@dataclass
class DiscriminationResult:
    verdict: str
    empirical_snr: float
    predicted_snr: float
    ratio: float
    spectrum: SpectrumReport
    curve: SignalCurve = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "empirical_snr": self.empirical_snr,
            "predicted_snr": self.predicted_snr,
            "ratio": self.ratio,
            "spectrum": self.spectrum.to_dict(include_spectrum=False),
        }


def predicted_snr(p, n_points: int, span: float, n_repeats: int) -> float:
    """Design-formula S/N for ``n_points`` probe times over ``span``, each repeated ``n_repeats`` times.

    The design formula counts one sample per pulse length over the record; here
    the record holds ``n_points * n_repeats`` samples, so it is rescaled by the
    square root of the sample-count ratio.
    """
    d = probe.snr_spectral(p.heating_rate(), p.nbar0, p.omega_tau, T=span, n_in=p.n_in)
    return d.snr_2omega * math.sqrt(n_points * n_repeats * p.omega_tau / span)


def discriminate(p, env_true, budget: Budget, seed: int = 0, variance_model: str = "paper", threshold: float = DETECTION_THRESHOLD) -> DiscriminationResult:
    """Simulate the measurement campaign for ``env_true`` and classify it."""
    env = env_true if isinstance(env_true, (PureDecoherence, Thermalization)) else env_true.environment()
    curve = generate_timeseries(p, env, budget.thetas, budget.n_repeats, seed, variance_model)
    ref = reference_ripple(curve, p)
    spec = detrend_and_periodogram(curve, threshold=threshold, reference_pp=ref)
    span = float(budget.thetas[-1] - budget.thetas[0])
    pred = predicted_snr(p, budget.thetas.size, span, budget.n_repeats)
    return DiscriminationResult(spec.verdict, spec.snr, pred, spec.snr / pred if pred else math.inf, spec, curve)
