"""Second-moment dynamics of the trapped oscillator.

Reduced variables at time ``theta = Omega t``::

    X = <x^2> / sigma0^2,  P = <p^2> / (m hbar Omega / 2),  C = <xp + px> / hbar

so that the ground state is (1, 1, 0) and X*P - C^2 >= 1.  With these
conventions the harmonic part of the motion reads dX = 2C, dP = -2C,
dC = P - X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNCERTAINTY_SLACK = 1e-9


class StateError(ValueError):
    """Second moments outside the physical domain."""


@dataclass(frozen=True)
class PureDecoherence:
    gamma: float  # Gamma / Omega

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")

    kind = "decoherence"


@dataclass(frozen=True)
class Thermalization:
    gamma_th: float  # Gamma_th / Omega
    nbar_e: float  # coth(hbar Omega / 2 k_B T_e)

    def __post_init__(self):
        if not self.gamma_th >= 0:
            raise ValueError(f"gamma_th must be >= 0, got {self.gamma_th}")
        if not self.nbar_e >= 1:
            raise ValueError(f"nbar_e must be >= 1, got {self.nbar_e}")

    kind = "thermalization"


@dataclass(frozen=True)
class CovarianceState:
    theta: float
    X: float
    P: float
    C: float

    def __post_init__(self):
        if not (self.X > 0 and self.P > 0):
            raise StateError(f"variances must be positive, got X={self.X}, P={self.P}")
        if self.X * self.P - self.C**2 < 1.0 - UNCERTAINTY_SLACK:
            raise StateError(f"uncertainty violated: X*P - C^2 = {self.X * self.P - self.C ** 2:.6g} < 1")

    @property
    def uncertainty(self) -> float:
        return self.X * self.P - self.C**2

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.P, self.C])


def thermal_initial_state(nbar0: float) -> CovarianceState:
    if not nbar0 >= 1:
        raise StateError(f"thermal occupancy coth(...) must be >= 1, got {nbar0}")
    return CovarianceState(0.0, nbar0, nbar0, 0.0)


def covariance_curves(X0: float, env, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form (X, P, C) at elapsed times ``theta`` from an equipartition state X0 = P0, C0 = 0.

    Thermalization uses the relaxation form X0 -> nbar_e at rate 2 gamma_th, which
    is what the Lindblad thermalization functional produces (checked against the
    Fock-space integrator in the test-suite).
    """
    th = np.asarray(theta, dtype=float)
    if isinstance(env, PureDecoherence):
        g = env.gamma
        s, c = np.sin(2 * th), np.cos(2 * th)
        return X0 + g * (2 * th - s), X0 + g * (2 * th + s), g * (1 - c)
    if isinstance(env, Thermalization):
        decay = np.exp(-2 * env.gamma_th * th)
        X = env.nbar_e + (X0 - env.nbar_e) * decay
        return X, X.copy(), np.zeros_like(th)
    raise TypeError(f"unknown environment {env!r}")


def printed_thermalization_x(X0: float, nbar_e: float, gamma_th: float, theta):
    """The additive thermalization form X0 + nbar_e (1 - exp(-2 gamma_th theta)).

    Kept for comparison only: it is not stationary for X0 = nbar_e and
    disagrees with the master equation (see ``covariance_curves``).
    """
    return X0 + nbar_e * (1 - np.exp(-2 * gamma_th * np.asarray(theta, dtype=float)))


def evolve_covariances(state0: CovarianceState, env, theta: float) -> CovarianceState:
    """Exact second moments at time ``theta`` for an equipartition initial state."""
    if state0.C != 0.0 or not math.isclose(state0.X, state0.P, rel_tol=1e-12):
        raise StateError("closed forms need an equipartition initial state (X0 = P0, C0 = 0)")
    elapsed = theta - state0.theta
    if elapsed < 0:
        raise ValueError(f"theta {theta} precedes the initial state at {state0.theta}")
    X, P, C = covariance_curves(state0.X, env, elapsed)
    return CovarianceState(float(theta), float(X), float(P), float(C))


def covariance_rhs(state, env) -> np.ndarray:
    """Time derivatives (dX, dP, dC)/dtheta; ``state`` is a CovarianceState or an (X, P, C) array."""
    X, P, C = state.as_array() if isinstance(state, CovarianceState) else state
    if isinstance(env, PureDecoherence):
        return np.array([2 * C, -2 * C + 4 * env.gamma, P - X])
    if isinstance(env, Thermalization):
        r = 2 * env.gamma_th
        return np.array([2 * C - r * (X - env.nbar_e), -2 * C - r * (P - env.nbar_e), P - X - r * C])
    raise TypeError(f"unknown environment {env!r}")


def integrate_covariances(state0: CovarianceState, env, theta_grid, max_step: float = 0.01) -> list[CovarianceState]:
    """Classical fixed-step RK4 over ``theta_grid`` (which must start at state0.theta).

    Each grid interval is split into equal steps no longer than
    ``min(max_step, interval)``.
    """
    grid = np.asarray(theta_grid, dtype=float)
    if grid.size == 0:
        return [state0]
    if not math.isclose(grid[0], state0.theta, abs_tol=1e-12):
        raise ValueError("theta_grid must start at the initial state's theta")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("theta_grid must be strictly increasing")

    def f(y):
        return covariance_rhs(y, env)

    y = state0.as_array()
    out = [state0]
    for a, b in zip(grid[:-1], grid[1:]):
        n = max(1, math.ceil((b - a) / max_step - 1e-9))
        h = (b - a) / n
        for _ in range(n):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        try:
            out.append(CovarianceState(float(b), *map(float, y)))
        except StateError as exc:
            raise StateError(f"RK4 left the physical domain at theta={b}: {exc}") from None
    return out
