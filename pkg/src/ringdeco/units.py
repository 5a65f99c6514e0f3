"""Physical constants and parsing of quantities written with unit suffixes.

Config values are strings such as ``"50 kHz"``, ``"86.909 u"`` or ``"795 nm"``;
bare numbers are read as SI.  Cyclic-frequency suffixes (Hz, kHz, ...) given
for an *angular* quantity are multiplied by 2*pi, so ``omega = "50 kHz"`` means
Omega/2pi = 50 kHz.
"""

from __future__ import annotations

import math
import re

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K
ATOMIC_MASS = 1.66053906660e-27  # kg

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*(.*?)\s*$")

_HZ = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}
_PER_SECOND = {"rad/s": 1.0, "/s": 1.0, "1/s": 1.0, "s^-1": 1.0, "s-1": 1.0}

_TABLES: dict[str, dict[str, float]] = {
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6, "u": ATOMIC_MASS, "amu": ATOMIC_MASS},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "temperature": {"k": 1.0, "mk": 1e-3, "uk": 1e-6, "µk": 1e-6, "μk": 1e-6, "nk": 1e-9},
    "count": {},
    "dimensionless": {},
    "diffusion": {"kg2m2/s3": 1.0, "kg^2m^2/s^3": 1.0, "kg^2m^2s^-3": 1.0},
    "density": {"kg/m3": 1.0, "kg/m^3": 1.0, "g/cm3": 1e3, "g/cm^3": 1e3},
    "area": {"m2": 1.0, "m^2": 1.0, "um2": 1e-12, "um^2": 1e-12, "μm^2": 1e-12},
}


class UnitError(ValueError):
    """A quantity string could not be converted."""


def parse_quantity(text, kind: str) -> float:
    """Convert ``text`` to an SI float for the quantity ``kind``.

    ``kind`` is one of ``angular`` (rad/s), ``frequency`` (Hz, cyclic),
    ``mass``, ``length``, ``time``, ``temperature``, ``count``,
    ``dimensionless``, ``diffusion``, ``density`` or ``area``.
    """
    if isinstance(text, bool):
        raise UnitError(f"boolean is not a quantity: {text!r}")
    if isinstance(text, (int, float)):
        return float(text)
    m = _QUANTITY.match(str(text))
    if not m:
        raise UnitError(f"cannot read a number from {text!r}")
    value = float(m.group(1))
    suffix = m.group(2).replace(" ", "")
    if not suffix:
        return value
    low = suffix.lower()
    if kind in ("angular", "frequency"):
        if low in _HZ:
            scale = _HZ[low]
            return value * scale * (2 * math.pi if kind == "angular" else 1.0)
        if low in _PER_SECOND:
            return value
        raise UnitError(f"unknown frequency unit {suffix!r} in {text!r}")
    table = _TABLES.get(kind)
    if table is None:
        raise UnitError(f"unknown quantity kind {kind!r}")
    # mass/length suffixes are case-sensitive enough in practice; compare lowercase
    lookup = {k.lower(): v for k, v in table.items()}
    if low not in lookup:
        raise UnitError(f"unknown {kind} unit {suffix!r} in {text!r}")
    return value * lookup[low]


def coth_occupancy(hbar_omega_over_2kT: float) -> float:
    """coth(x) with the zero-temperature limit x = inf mapped to 1."""
    if math.isinf(hbar_omega_over_2kT):
        return 1.0
    if hbar_omega_over_2kT > 20.0:
        return 1.0 + 2.0 * math.exp(-2.0 * hbar_omega_over_2kT)
    return 1.0 / math.tanh(hbar_omega_over_2kT)


def occupancy_from_temperature(omega: float, temperature: float) -> float:
    """Energy in units of hbar*Omega/2 at thermal equilibrium: coth(hbar Omega / 2 k_B T)."""
    if temperature == 0.0:
        return 1.0
    return coth_occupancy(HBAR * omega / (2.0 * K_B * temperature))
