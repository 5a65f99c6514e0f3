"""Order-of-magnitude estimates of the cavity coupling constant g.

``nu`` is the free spectral range in Hz and enters the formulas as is, next
to angular rates; this mirrors how the estimates are usually quoted and is
not converted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass


@dataclass(frozen=True)
class AtomCouplingInput:
    omega_c: float  # probe angular frequency
    omega_a: float  # atomic resonance
    gamma_a: float  # radiative linewidth, rad/s
    nu: float
    wavelength_a: float
    area: float

    def __post_init__(self):
        for name in ("omega_c", "omega_a", "gamma_a", "nu", "wavelength_a", "area"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class NanoCouplingInput:
    nu: float
    wavelength: float
    area: float
    mass: float
    density: float
    mu: float | None = None
    permittivity: complex | None = None

    def __post_init__(self):
        for name in ("nu", "wavelength", "area", "density"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.mass < 0:
            raise ValueError("mass must be non-negative")
        if (self.mu is None) == (self.permittivity is None):
            raise ValueError("give exactly one of mu or permittivity")


def atom_coupling(inp: AtomCouplingInput) -> tuple[float, list[str]]:
    """Two-level estimate of g; the sign follows the detuning omega_a - omega_c."""
    detuning = inp.omega_a - inp.omega_c
    if detuning == 0:
        raise ZeroDivisionError("zero detuning: the dispersive estimate diverges")
    notes = []
    if abs(detuning) / inp.omega_a > 0.1:
        notes.append(f"detuning |omega_a - omega_c|/omega_a = {abs(detuning) / inp.omega_a:.3g} is not small")
        warnings.warn(notes[-1], stacklevel=2)
    g = (
        3 * inp.omega_c / (8 * math.pi * inp.omega_a)
        * inp.nu
        * inp.gamma_a / detuning
        * inp.wavelength_a**2 / inp.area
    )
    return g, notes


def clausius_mossotti(permittivity) -> complex | float:
    """mu = (eps - 1) / (eps + 2)."""
    if permittivity == -2:
        raise ZeroDivisionError("permittivity -2 is the plasmon pole")
    if permittivity in (math.inf, -math.inf):
        return 1.0
    return (permittivity - 1) / (permittivity + 2)


def critical_mass(density, wavelength):
    return density * wavelength**3


def nanoparticle_coupling(inp: NanoCouplingInput) -> tuple[float, float, list[str]]:
    """Return (g, m_cr, notes) for a sub-wavelength dielectric particle."""
    mu = inp.mu if inp.mu is not None else clausius_mossotti(inp.permittivity)
    m_cr = critical_mass(inp.density, inp.wavelength)
    notes = []
    if inp.mass > m_cr * (1 + 1e-12):
        notes.append(f"mass {inp.mass:.3g} kg exceeds the critical mass {m_cr:.3g} kg")
        warnings.warn(notes[-1], stacklevel=2)
    g = (2 * math.pi) ** 2 * mu * inp.nu * inp.wavelength**2 / inp.area * inp.mass / m_cr
    return g, m_cr, notes
