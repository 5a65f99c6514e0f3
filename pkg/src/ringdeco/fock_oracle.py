"""Brute-force master-equation integrator in a truncated number basis.

Independent check of the Gaussian closed forms.  Reduced units throughout:
``q = b + b^dagger`` is x / sigma0, ``pi = i (b^dagger - b)`` is p / p0, time is
``Omega t``.  The dissipators are

* decoherence: ``-(gamma / 2) [q, [q, rho]]``,
* thermalization: ``g_dn D[b] + g_up D[b^dagger]`` with ``g_dn = gamma_th (nbar_e + 1)``
  and ``g_up = gamma_th (nbar_e - 1)``, i.e. ``g_dn - g_up = 2 gamma_th`` and
  ``g_dn / g_up = exp(hbar Omega / k_B T_e)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import PureDecoherence, Thermalization, covariance_curves
from .gaussian import expect_sin2

TOP_POPULATION_TOL = 1e-10
TRACE_DRIFT_TOL = 1e-6


class TruncationError(RuntimeError):
    """The number basis is too small for the requested state or trajectory."""


class ClickError(ValueError):
    """A detector click has zero probability for the given state."""


@dataclass(frozen=True)
class OperatorSet:
    d: int
    eps: float
    b: np.ndarray
    q: np.ndarray
    pi: np.ndarray
    number: np.ndarray
    parity: np.ndarray
    sin2kx: np.ndarray
    cos2kx: np.ndarray
    sin2_2kx: np.ndarray


@dataclass
class FockDensityMatrix:
    rho: np.ndarray
    theta: float = 0.0

    @property
    def d(self) -> int:
        return self.rho.shape[0]

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))[0])

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho.conj().T, self.rho)))


def build_operators(d: int, eps: float) -> OperatorSet:
    if d < 2:
        raise ValueError("need at least two levels")
    n = np.arange(d)
    b = np.diag(np.sqrt(n[1:].astype(float)), k=1).astype(complex)
    bd = b.conj().T
    q = b + bd
    pi = 1j * (bd - b)
    vals, vecs = np.linalg.eigh(q)
    phase = 2.0 * math.sqrt(eps) * vals  # 2 k x = 2 sqrt(eps) q

    def fn(values):
        return (vecs * values) @ vecs.conj().T

    s = fn(np.sin(phase))
    return OperatorSet(
        d=d,
        eps=eps,
        b=b,
        q=q,
        pi=pi,
        number=np.diag(n.astype(complex)),
        parity=np.diag((-1.0) ** n).astype(complex),
        sin2kx=s,
        cos2kx=fn(np.cos(phase)),
        sin2_2kx=fn(np.sin(phase) ** 2),
    )


def thermal_density_matrix(nbar0: float, d: int) -> FockDensityMatrix:
    """Gibbs state with <q^2> = nbar0 (mean excitation (nbar0 - 1) / 2), truncated to d levels."""
    if nbar0 < 1:
        raise ValueError("nbar0 must be >= 1")
    if nbar0 == 1:
        w = np.zeros(d)
        w[0] = 1.0
    else:
        ratio = (nbar0 - 1) / (nbar0 + 1)  # exp(-hbar Omega / k_B T)
        w = (1 - ratio) * ratio ** np.arange(d)
        if w[-1] >= TOP_POPULATION_TOL:
            raise TruncationError(f"d = {d} too small for nbar0 = {nbar0}: top population {w[-1]:.2e}")
        w = w / w.sum()
    return FockDensityMatrix(np.diag(w).astype(complex))


def _rates(env):
    if isinstance(env, Thermalization):
        return env.gamma_th * (env.nbar_e + 1), env.gamma_th * (env.nbar_e - 1)
    return 0.0, 0.0


def lindblad_rhs(rho: np.ndarray, ops: OperatorSet, env) -> np.ndarray:
    """d rho / d theta including the oscillator Hamiltonian -i [b^dagger b, rho]."""
    n = np.arange(ops.d)
    out = -1j * (n[:, None] - n[None, :]) * rho
    if isinstance(env, PureDecoherence):
        if env.gamma:
            q = ops.q
            qr = q @ rho
            rq = rho @ q
            out += -0.5 * env.gamma * (q @ qr - 2 * qr @ q + rq @ q)
    elif isinstance(env, Thermalization):
        g_dn, g_up = _rates(env)
        b = ops.b
        bd = b.conj().T
        if g_dn:
            nn = n.astype(float)
            out += g_dn * (b @ rho @ bd - 0.5 * (nn[:, None] + nn[None, :]) * rho)
        if g_up:
            # truncated b b^dagger = diag(1, 2, ..., d-1, 0)
            bbd = np.real(np.diag(b @ bd))
            out += g_up * (bd @ rho @ b - 0.5 * (bbd[:, None] + bbd[None, :]) * rho)
    else:
        raise TypeError(f"unknown environment {env!r}")
    return out


def default_step(d: int) -> float:
    # RK4 is stable for |lambda h| < 2.8 on the imaginary axis; coherences rotate at up to d - 1
    return min(2 * math.pi * 1e-3, 2.0 / d)


def integrate_master(rho0: FockDensityMatrix, ops: OperatorSet, env, theta_grid, step: float | None = None):
    """Fixed-step RK4 from rho0.theta through ``theta_grid``; returns one state per grid point.

    The trace is monitored, never renormalized.  Raises TruncationError when the
    top-two populations exceed 1e-10 or the trace drifts by more than 1e-6.
    """
    grid = np.asarray(theta_grid, dtype=float)
    if grid.size == 0:
        return []
    if grid[0] < rho0.theta - 1e-12 or np.any(np.diff(grid) < 0):
        raise ValueError("theta_grid must be non-decreasing and start at or after rho0.theta")
    h_max = default_step(ops.d) if step is None else step
    rho = rho0.rho.copy()
    t = rho0.theta
    out = []
    for target in grid:
        span = target - t
        nsteps = int(math.ceil(span / h_max - 1e-9)) if span > 0 else 0
        h = span / nsteps if nsteps else 0.0
        for _ in range(nsteps):
            k1 = lindblad_rhs(rho, ops, env)
            k2 = lindblad_rhs(rho + 0.5 * h * k1, ops, env)
            k3 = lindblad_rhs(rho + 0.5 * h * k2, ops, env)
            k4 = lindblad_rhs(rho + h * k3, ops, env)
            rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            top = rho[-1, -1].real + rho[-2, -2].real
            if top > TOP_POPULATION_TOL:
                raise TruncationError(f"top-level population {top:.2e} at d = {ops.d}")
        t = target
        drift = abs(np.trace(rho).real - 1.0)
        if drift > TRACE_DRIFT_TOL:
            raise TruncationError(f"trace drift {drift:.2e} at theta = {t}")
        out.append(FockDensityMatrix(rho.copy(), float(t)))
    return out


def rho_expectations(state: FockDensityMatrix, ops: OperatorSet) -> dict:
    if state.d != ops.d:
        raise ValueError(f"dimension mismatch: rho is {state.d}, operators are {ops.d}")
    rho = state.rho

    def ev(A):
        return np.trace(A @ rho)

    vals = {
        "X": ev(ops.q @ ops.q),
        "P": ev(ops.pi @ ops.pi),
        "C": 0.5 * ev(ops.q @ ops.pi + ops.pi @ ops.q),
        "sin2": ev(ops.sin2_2kx),
        "parity": ev(ops.parity),
        "mean_x": ev(ops.q),
        "mean_p": ev(ops.pi),
    }
    for k, v in vals.items():
        if abs(v.imag) > 1e-10 * max(1.0, abs(v.real)):
            raise ValueError(f"expectation {k} has imaginary part {v.imag:.3e}")
    return {k: float(v.real) for k, v in vals.items()}


def click_update(state: FockDensityMatrix, ops: OperatorSet, which: str) -> FockDensityMatrix:
    """Post-click state K A rho A with A = sin(2kx) (odd click) or cos(2kx) (even click).

    Click probabilities below 1e-15 are treated as zero: that is the rounding
    floor of the eigendecomposition-built operators, while an odd click on the
    ground state has probability ~4 eps, i.e. ~1e-11 even for eps = 3e-12.
    """
    if which == "odd":
        A = ops.sin2kx
    elif which == "even":
        A = ops.cos2kx
    else:
        raise ValueError("which must be 'odd' or 'even'")
    new = A @ state.rho @ A.conj().T
    p = np.trace(new).real
    if p <= 1e-15:
        raise ClickError(f"{which} click has zero probability for this state")
    return FockDensityMatrix(new / p, state.theta)


def auto_dimension(nbar0: float, env, theta_max: float, eps: float = 0.05, d_max: int = 1024) -> int:
    """Smallest d = max(30, ceil(10 nbar0)) * 2^k whose trajectory to theta_max stays truncation-safe."""
    d = max(30, int(math.ceil(10 * nbar0)))
    while d <= d_max:
        try:
            rho0 = thermal_density_matrix(nbar0, d)
            integrate_master(rho0, build_operators(d, eps), env, [theta_max])
            return d
        except TruncationError:
            d *= 2
    raise TruncationError(f"no dimension up to {d_max} is sufficient")


def compare_with_gaussian(nbar0: float, eps: float, env, thetas, d: int | None = None) -> dict:
    """Integrate from the thermal state and compare moments with the closed forms.

    Returns a report with per-checkpoint values and the maximum deviations.
    """
    thetas = np.asarray(thetas, dtype=float)
    fixed = d is not None
    d = d if fixed else max(30, int(math.ceil(10 * nbar0)))
    while True:
        try:
            ops = build_operators(d, eps)
            traj = integrate_master(thermal_density_matrix(nbar0, d), ops, env, thetas)
            break
        except TruncationError:
            if fixed or d >= 1024:
                raise
            d *= 2
    Xa, Pa, Ca = covariance_curves(nbar0, env, thetas)
    rows = []
    for i, st in enumerate(traj):
        e = rho_expectations(st, ops)
        rows.append(
            {
                "theta": float(thetas[i]),
                "X": e["X"],
                "P": e["P"],
                "C": e["C"],
                "sin2": e["sin2"],
                "trace": st.trace(),
                "min_eigenvalue": st.min_eigenvalue(),
                "dX": e["X"] - float(Xa[i]),
                "dP": e["P"] - float(Pa[i]),
                "dC": e["C"] - float(Ca[i]),
                "dsin2": e["sin2"] - float(expect_sin2(Xa[i], eps)),
                "mean_x": e["mean_x"],
                "mean_p": e["mean_p"],
            }
        )
    worst = {k: max(abs(r[k]) for r in rows) for k in ("dX", "dP", "dC", "dsin2")}
    return {
        "dimension": d,
        "nbar0": nbar0,
        "eps": eps,
        "environment": env.__class__.__name__,
        "checkpoints": rows,
        "max_abs": worst,
    }
