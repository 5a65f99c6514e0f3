"""Gaussian Wigner function of the oscillator and the probe expectation values.

The probe observables depend on position only, through the phase ``2 k x``.
In reduced units ``k x`` is normal with variance ``eps * X`` (``eps`` being the
Lamb-Dicke parameter), so everything reduces to Gaussian averages of
trigonometric functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .dynamics import CovarianceState, StateError

# beyond this exponent exp(-8 eps X) is below 1e-304 and is treated as zero
_SATURATION_EXPONENT = 700.0

LAMB_DICKE_LIMIT = 0.2
ANTI_LAMB_DICKE_LIMIT = 5.0


@dataclass(frozen=True)
class WignerGaussian:
    """W(x, p) = N exp(-G(x, p)) in reduced coordinates x/sigma0, p/p0.

    ``G = (a_xx x^2 + 2 a_xp x p + a_pp p^2) / 2`` with the inverse covariance
    matrix entries; the phase-space measure is ``dx dp / (4 pi)``.
    """

    X: float
    P: float
    C: float
    norm: float
    a_xx: float
    a_pp: float
    a_xp: float

    def __call__(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        G = 0.5 * (self.a_xx * x * x + 2 * self.a_xp * x * p + self.a_pp * p * p)
        return self.norm * np.exp(-G)

    def position_marginal(self, x):
        """Normalized density of x/sigma0 (integrates to 1 with plain dx)."""
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x / self.X) / math.sqrt(2 * math.pi * self.X)


def wigner_from_covariances(state: CovarianceState) -> WignerGaussian:
    det = state.X * state.P - state.C**2
    if det < 1.0 - 1e-9:
        raise StateError(f"uncertainty violated: X*P - C^2 = {det:.6g} < 1")
    norm = min(2.0 / math.sqrt(det), 2.0)
    return WignerGaussian(
        X=state.X,
        P=state.P,
        C=state.C,
        norm=norm,
        a_xx=state.P / det,
        a_pp=state.X / det,
        a_xp=-state.C / det,
    )


def _decay(X, eps, factor):
    arg = factor * eps * np.asarray(X, dtype=float)
    return np.where(arg > _SATURATION_EXPONENT, 0.0, np.exp(-np.minimum(arg, _SATURATION_EXPONENT)))


def _growth(X, eps):
    # 1 - exp(-8 eps X) without cancellation for small arguments
    arg = 8.0 * eps * np.asarray(X, dtype=float)
    return np.where(arg > _SATURATION_EXPONENT, 1.0, -np.expm1(-np.minimum(arg, _SATURATION_EXPONENT)))


def expect_sin2(X, eps):
    """<sin^2(2kx)> = (1 - exp(-8 eps X)) / 2."""
    out = 0.5 * _growth(X, eps)
    return float(out) if np.ndim(out) == 0 else out


def expect_sin4(X, eps):
    """<sin^4(2kx)> = (3 - 4 exp(-8 eps X) + exp(-32 eps X)) / 8.

    Evaluated as d^2 (6 - 4d + d^2) / 8 with d = 1 - exp(-8 eps X), which is
    the same polynomial but keeps full relative precision deep in the
    Lamb-Dicke regime.
    """
    d = _growth(X, eps)
    out = d * d * (6.0 - 4.0 * d + d * d) / 8.0
    return float(out) if np.ndim(out) == 0 else out


def expect_sin4_lamb_dicke(X, eps):
    """Long-wavelength form 3 (4 eps X)^2 of <sin^4(2kx)>."""
    return 3.0 * (4.0 * eps * np.asarray(X, dtype=float)) ** 2


def debye_waller(X0, eps):
    """exp(-8 eps X0): probability that probe scattering leaves the ground state."""
    out = _decay(X0, eps, 8.0)
    return float(out) if np.ndim(out) == 0 else out


def regime(X, eps) -> str:
    a = 8.0 * eps * X
    if a <= LAMB_DICKE_LIMIT:
        return "lamb-dicke"
    if a >= ANTI_LAMB_DICKE_LIMIT:
        return "anti-lamb-dicke"
    return "intermediate"


@lru_cache(maxsize=8)
def _nodes(order: int):
    z, w = hermegauss(order)
    return z, w / math.sqrt(2 * math.pi)


def quadrature_expectation(f, state, eps: float, order: int = 64, wide_limit: float = 10.0) -> float:
    """Average of ``f(k x)`` over the Gaussian position marginal.

    ``f`` receives the dimensionless product ``u = k x``, normal with variance
    ``eps * X``; ``state`` is a CovarianceState or the variance X.  Gauss-Hermite
    of the given order is used while ``8 eps X <= wide_limit``.  Wider
    marginals oscillate too fast for a fixed-order rule, so there a uniform
    trapezoid over +-12 standard deviations (4097 nodes) is used instead; it
    converges spectrally for smooth integrands with frequency content well
    below the node spacing (the probe observables have |frequency| <= 8 in u).
    """
    X = state.X if isinstance(state, CovarianceState) else float(state)
    s = math.sqrt(eps * X)
    if 8.0 * eps * X <= wide_limit:
        z, w = _nodes(order)
    else:
        z = np.linspace(-12.0, 12.0, 4097)
        w = np.exp(-0.5 * z * z) * (z[1] - z[0]) / math.sqrt(2 * math.pi)
    vals = np.asarray(f(s * z), dtype=float)
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand returned non-finite values")
    return float(np.dot(w, vals))
