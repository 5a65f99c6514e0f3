"""Scenario configuration, reduction to dimensionless parameters, validity gate.

All downstream physics works in reduced units: lengths in the ground-state
width ``sigma0 = sqrt(hbar / 2 m Omega)``, times in ``1/Omega``.  SI values only
appear here and in the report writers.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import units
from .dynamics import PureDecoherence, Thermalization
from .units import HBAR, K_B

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Malformed or physically inadmissible scenario configuration."""


DEFAULT_THRESHOLDS = {
    "sudden_pulse": 0.2,
    "sudden_cavity": 0.1,
    "bad_cavity": 0.2,
    "pulse_vs_fsr": 0.1,
    "cavity_below_fsr": 1.0,
    "weak_coupling": 0.1,
    "lamb_dicke": 1.0,
}

PRESETS = ("rb-atom", "nanoparticle", "rb-atom-thermal")

# (section, key) -> (field name, quantity kind, mandatory)
_SCHEMA = {
    "oscillator": {
        "mass": ("mass", "mass", True),
        "omega": ("omega", "angular", True),
        "temperature": ("temperature", "temperature", True),
    },
    "cavity": {
        "kappa": ("kappa", "angular", True),
        "fsr": ("fsr", "frequency", True),
        "coupling": ("coupling", "angular", True),
        "wavelength": ("wavelength", "length", True),
    },
    "probe": {
        "pulse_length": ("pulse_length", "time", True),
        "photons": ("photons", "count", True),
        "grid": ("grid", None, False),
    },
}
_ENV_SCHEMA = {
    "decoherence": {"rate": ("decoherence_rate", "angular"), "diffusion": ("diffusion", "diffusion")},
    "thermalization": {"rate": ("thermal_rate", "angular"), "temperature": ("bath_temperature", "temperature")},
}
_RUN_KEYS = {"seed", "repeats", "variance_model", "matched_bath_occupancy", "thresholds"}


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical parameters of one experiment, in SI units.

    ``omega``, ``kappa``, ``coupling`` and the environment rates are angular
    (rad/s); ``fsr`` is the cyclic free spectral range in Hz.
    """

    mass: float
    omega: float
    temperature: float
    env_kind: str
    kappa: float
    fsr: float
    coupling: float
    wavelength: float
    pulse_length: float
    photons: float
    decoherence_rate: float | None = None
    diffusion: float | None = None
    thermal_rate: float | None = None
    bath_temperature: float | None = None
    grid: tuple[float, float, int] | None = None
    seed: int = 0
    repeats: int = 1000
    variance_model: str = "paper"
    matched_bath_occupancy: float = 100.0
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        positive = ("mass", "omega", "kappa", "fsr", "coupling", "wavelength", "pulse_length")
        for name in positive:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"non-positive physical value: {name} = {v!r}")
        if not (math.isfinite(self.temperature) and self.temperature >= 0):
            raise ConfigError(f"non-positive physical value: temperature = {self.temperature!r}")
        if not self.photons >= 1:
            raise ConfigError(f"non-positive physical value: photons = {self.photons!r} (need >= 1)")
        if self.env_kind == "decoherence":
            g = self.decoherence_rate
            if g is None or not (math.isfinite(g) and g > 0):
                raise ConfigError(f"non-positive physical value: decoherence rate = {g!r}")
        elif self.env_kind == "thermalization":
            if self.thermal_rate is None or not (self.thermal_rate > 0):
                raise ConfigError(f"non-positive physical value: thermalization rate = {self.thermal_rate!r}")
            if self.bath_temperature is None or not (self.bath_temperature >= 0):
                raise ConfigError(f"non-positive physical value: bath temperature = {self.bath_temperature!r}")
        else:
            raise ConfigError(f"unknown environment kind {self.env_kind!r}")
        if self.variance_model not in ("paper", "poisson"):
            raise ConfigError(f"variance_model must be 'paper' or 'poisson', got {self.variance_model!r}")
        unknown = set(self.thresholds) - set(DEFAULT_THRESHOLDS)
        if unknown:
            raise ConfigError(f"unknown key(s) in [run.thresholds]: {sorted(unknown)}")

    def digest(self) -> str:
        """Platform-independent SHA-256 of the canonical parameter set."""
        payload = json.dumps(dataclasses.asdict(self), sort_keys=True, default=repr, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def parse_grid(text) -> tuple[float, float, int]:
    """Read ``"start:stop:points"`` (times may carry units) into seconds."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be 'start:stop:points', got {text!r}")
    try:
        start = units.parse_quantity(parts[0], "time")
        stop = units.parse_quantity(parts[1], "time")
        points = int(float(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"malformed grid {text!r}: {exc}") from None
    if points < 1 or stop < start or start < 0:
        raise ConfigError(f"grid needs 0 <= start <= stop and points >= 1, got {text!r}")
    return start, stop, points


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse config text (TOML with unit-suffixed strings) into a ScenarioConfig."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed syntax: {exc}") from None

    allowed = set(_SCHEMA) | {"environment", "run"}
    extra = set(data) - allowed
    if extra:
        raise ConfigError(f"unknown section(s): {sorted(extra)}")

    values: dict = {}
    for section, keys in _SCHEMA.items():
        body = data.get(section, {})
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        unknown = set(body) - set(keys)
        if unknown:
            raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
        for key, (name, kind, mandatory) in keys.items():
            if key not in body:
                if mandatory:
                    raise ConfigError(f"missing mandatory field: [{section}] {key}")
                continue
            try:
                values[name] = parse_grid(body[key]) if key == "grid" else units.parse_quantity(body[key], kind)
            except units.UnitError as exc:
                raise ConfigError(f"malformed syntax in [{section}] {key}: {exc}") from None

    env = data.get("environment")
    if not isinstance(env, dict):
        raise ConfigError("missing mandatory field: [environment]")
    kinds = [k for k in env if k in _ENV_SCHEMA]
    if set(env) - set(_ENV_SCHEMA):
        raise ConfigError(f"unknown key(s) in [environment]: {sorted(set(env) - set(_ENV_SCHEMA))}")
    if len(kinds) != 1:
        raise ConfigError("exactly one of [environment.decoherence] / [environment.thermalization] is required")
    kind = kinds[0]
    body = env[kind]
    unknown = set(body) - set(_ENV_SCHEMA[kind])
    if unknown:
        raise ConfigError(f"unknown key(s) in [environment.{kind}]: {sorted(unknown)}")
    for key, (name, qkind) in _ENV_SCHEMA[kind].items():
        if key in body:
            try:
                values[name] = units.parse_quantity(body[key], qkind)
            except units.UnitError as exc:
                raise ConfigError(f"malformed syntax in [environment.{kind}] {key}: {exc}") from None
    values["env_kind"] = kind

    if kind == "decoherence":
        rate, diff = values.get("decoherence_rate"), values.get("diffusion")
        if rate is None and diff is None:
            raise ConfigError("missing mandatory field: [environment.decoherence] rate or diffusion")
        if diff is not None:
            if not diff > 0:
                raise ConfigError(f"non-positive physical value: diffusion = {diff!r}")
            from_diff = diff / (HBAR * values["omega"] * values["mass"])
            if rate is not None and abs(rate - from_diff) > 1e-6 * abs(rate):
                raise ConfigError(f"decoherence rate {rate:g} and diffusion-derived rate {from_diff:g} disagree")
            values.setdefault("decoherence_rate", from_diff)
    else:
        for key in ("rate", "temperature"):
            if key not in body:
                raise ConfigError(f"missing mandatory field: [environment.thermalization] {key}")

    run = data.get("run", {})
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in [run]: {sorted(unknown)}")
    if "seed" in run:
        values["seed"] = int(run["seed"])
    if "repeats" in run:
        values["repeats"] = int(run["repeats"])
    if "variance_model" in run:
        values["variance_model"] = str(run["variance_model"])
    if "matched_bath_occupancy" in run:
        values["matched_bath_occupancy"] = float(run["matched_bath_occupancy"])
    if "thresholds" in run:
        values["thresholds"] = {k: float(v) for k, v in run["thresholds"].items()}
    return ScenarioConfig(**values)


def load_scenario(source) -> ScenarioConfig:
    """Load a scenario from a file path or a bundled preset name."""
    name = str(source)
    if name in PRESETS:
        text = resources.files("ringdeco").joinpath("presets").joinpath(f"{name}.toml").read_text(encoding="utf-8")
        return parse_scenario(text)
    return parse_scenario(Path(source).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class DimensionlessParams:
    """Reduced parameter set: lengths in sigma0, times in 1/Omega."""

    eps: float
    gamma: float
    gamma_th: float
    nbar0: float
    nbar_e: float
    g_over_kappa: float
    kappa_tau: float
    omega_tau: float
    omega_over_kappa: float
    omega_over_fsr: float  # Omega / (2 pi nu)
    n_in: float
    env_kind: str
    omega: float  # SI scale, rad/s
    sigma0: float  # SI scale, m

    def environment(self):
        if self.env_kind == "decoherence":
            return PureDecoherence(self.gamma)
        return Thermalization(self.gamma_th, self.nbar_e)

    def heating_rate(self) -> float:
        """Initial dX/dtheta / 2: gamma for decoherence, gamma_th (nbar_e - nbar0) otherwise."""
        if self.env_kind == "decoherence":
            return self.gamma
        return self.gamma_th * (self.nbar_e - self.nbar0)

    def theta_to_seconds(self, theta):
        return theta / self.omega

    def seconds_to_theta(self, t):
        return t * self.omega

    def replace(self, **changes) -> "DimensionlessParams":
        return dataclasses.replace(self, **changes)


def derive_dimensionless(cfg: ScenarioConfig) -> DimensionlessParams:
    k = 2.0 * math.pi / cfg.wavelength
    sigma0 = math.sqrt(HBAR / (2.0 * cfg.mass * cfg.omega))
    eps = HBAR * k * k / (2.0 * cfg.mass * cfg.omega)
    nbar0 = units.occupancy_from_temperature(cfg.omega, cfg.temperature)
    if cfg.env_kind == "decoherence":
        gamma, gamma_th, nbar_e = cfg.decoherence_rate / cfg.omega, 0.0, 1.0
    else:
        gamma = 0.0
        gamma_th = cfg.thermal_rate / cfg.omega
        nbar_e = units.occupancy_from_temperature(cfg.omega, cfg.bath_temperature)
    p = DimensionlessParams(
        eps=eps,
        gamma=gamma,
        gamma_th=gamma_th,
        nbar0=nbar0,
        nbar_e=nbar_e,
        g_over_kappa=cfg.coupling / cfg.kappa,
        kappa_tau=cfg.kappa * cfg.pulse_length,
        omega_tau=cfg.omega * cfg.pulse_length,
        omega_over_kappa=cfg.omega / cfg.kappa,
        omega_over_fsr=cfg.omega / (2.0 * math.pi * cfg.fsr),
        n_in=cfg.photons,
        env_kind=cfg.env_kind,
        omega=cfg.omega,
        sigma0=sigma0,
    )
    for f in dataclasses.fields(p):
        v = getattr(p, f.name)
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"pathological input: derived {f.name} = {v!r}")
    if not p.eps > 0:
        raise ConfigError(f"pathological input: Lamb-Dicke parameter underflowed to {p.eps!r}")
    return p


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    ratio: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple[ValidityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "checks": [
                {"name": c.name, "ratio": c.ratio, "threshold": c.threshold, "pass": c.passed} for c in self.checks
            ],
            "pass": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def check_validity(p: DimensionlessParams, thresholds: dict | None = None) -> ValidityReport:
    """Evaluate the approximations the analytic model rests on.

    A check passes when ``ratio <= threshold`` (with a 1e-9 relative slack, so
    that e.g. Gamma = 0.1 Omega written in kHz still sits on the boundary).
    """
    th = dict(DEFAULT_THRESHOLDS)
    th.update(thresholds or {})
    weak = p.gamma if p.env_kind == "decoherence" else p.gamma_th
    ratios = {
        "sudden_pulse": p.omega_tau,
        "sudden_cavity": p.omega_over_kappa,
        "bad_cavity": 1.0 / p.kappa_tau,
        # 1/(tau nu) and 2 kappa / (2 pi nu), written through the stored ratios
        "pulse_vs_fsr": 2.0 * math.pi * p.omega_over_fsr / p.omega_tau,
        "cavity_below_fsr": 2.0 * p.omega_over_fsr / p.omega_over_kappa,
        "weak_coupling": weak,
        "lamb_dicke": 8.0 * p.eps * p.nbar0,
    }
    checks = tuple(
        ValidityCheck(name, float(r), float(th[name]), bool(r <= th[name] * (1.0 + 1e-9))) for name, r in ratios.items()
    )
    return ValidityReport(checks)
