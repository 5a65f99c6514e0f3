"""Command-line front end.

Exit codes: 0 success, 1 domain failure (validity gate, failed checks,
numerical errors), 2 usage, configuration or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, coupling, dynamics, experiment, probe
from .dynamics import PureDecoherence, StateError
from .fock_oracle import TruncationError, compare_with_gaussian
from .model import ConfigError, check_validity, derive_dimensionless, load_scenario, parse_grid
from .units import UnitError, parse_quantity

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class UsageError(Exception):
    pass


class GateError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".12g")


def _json_safe(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


class Outputs:
    """Collects files written atomically into the output directory."""

    def __init__(self, directory: Path):
        self.dir = directory
        self.files: list[str] = []

    def _atomic(self, name: str, writer, binary=False):
        self.dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "wb" if binary else "w", **({} if binary else {"encoding": "utf-8", "newline": ""})) as fh:
                writer(fh)
            os.replace(tmp, self.dir / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.files.append(name)
        return self.dir / name

    def text(self, name, text):
        return self._atomic(name, lambda fh: fh.write(text))

    def json(self, name, obj):
        return self.text(name, json.dumps(_json_safe(obj), indent=2, sort_keys=False, allow_nan=False) + "\n")

    def csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        return self.text(name, buf.getvalue())

    def figure(self, name, plot, *args):
        return self._atomic(name, lambda fh: plot(*args, fh), binary=True)


# --- scenario helpers -------------------------------------------------------


def _load(args):
    if not args.config:
        raise UsageError("--config is required (a file path or a preset name)")
    try:
        cfg = load_scenario(args.config)
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "repeats", None) is not None:
        cfg = cfg.replace(repeats=args.repeats)
    if getattr(args, "variance_model", None):
        cfg = cfg.replace(variance_model=args.variance_model)
    if getattr(args, "grid", None):
        cfg = cfg.replace(grid=parse_grid(args.grid))
    return cfg


def _params(cfg, args):
    p = derive_dimensionless(cfg)
    want = getattr(args, "env", None)
    if want and want != p.env_kind:
        if want == "thermalization":
            p = experiment.matched_thermalization(p, cfg.matched_bath_occupancy)
        else:
            p = experiment.matched_decoherence(p)
    return p


def _gate(p, cfg, args, manifest):
    report = check_validity(p, cfg.thresholds)
    manifest["validity"] = report.to_dict()
    if not report.passed:
        if not args.force:
            raise GateError(f"validity gate failed: {', '.join(report.failing())} (use --force to override)")
        manifest["forced"] = True
        print(f"warning: validity gate overridden for {', '.join(report.failing())}", file=sys.stderr)
    return report


def _thetas(p, cfg):
    if cfg.grid is None:
        return experiment.default_grid(p)
    start, stop, n = cfg.grid
    return np.linspace(start, stop, n) * p.omega


# --- commands ---------------------------------------------------------------


def cmd_validate(args, out, manifest):
    cfg = _load(args)
    p = _params(cfg, args)
    manifest["config_hash"] = cfg.digest()
    report = check_validity(p, cfg.thresholds)
    print(report.to_json())
    if args.out:
        out.json("validity.json", report.to_dict())
    if not report.passed:
        print(f"failing: {', '.join(report.failing())}", file=sys.stderr)
        return 1
    return 0


def _curve_rows(curve):
    return zip(curve.t_p, curve.theta, curve.mean_no, curve.var_no, curve.mean_ne, curve.regime)


def cmd_curve(args, out, manifest):
    cfg = _load(args)
    p = _params(cfg, args)
    manifest["config_hash"] = cfg.digest()
    _gate(p, cfg, args, manifest)
    curve = probe.analytic_signal_curve(p, _thetas(p, cfg), variance_model=cfg.variance_model)
    out.csv("curve.csv", ["t_p_seconds", "theta", "mean_No", "var_No", "mean_Ne", "regime"], _curve_rows(curve))
    X, P, C = dynamics.covariance_curves(p.nbar0, p.environment(), curve.theta)
    out.csv("trajectory.csv", ["theta", "X", "P", "C"], zip(curve.theta, X, P, C))
    if not args.no_figures:
        from . import plotting

        out.figure("curve.png", plotting.plot_curve, curve)
    return 0


def _simulate(args, out, manifest):
    cfg = _load(args)
    p = _params(cfg, args)
    manifest["config_hash"] = cfg.digest()
    manifest["seed"] = cfg.seed
    manifest["repeats"] = cfg.repeats
    manifest["environment"] = p.env_kind
    _gate(p, cfg, args, manifest)
    curve = experiment.generate_timeseries(p, None, _thetas(p, cfg), cfg.repeats, cfg.seed, cfg.variance_model)
    curve.metadata.update({"scenario_hash": cfg.digest(), "environment": p.env_kind})
    out.csv(
        "timeseries.csv",
        ["t_p_seconds", "theta", "empirical_mean", "empirical_var", "analytic_mean", "analytic_var"],
        zip(curve.t_p, curve.theta, curve.empirical_mean, curve.empirical_var, curve.mean_no, curve.var_no),
    )
    if not args.no_figures:
        from . import plotting

        out.figure("timeseries.png", plotting.plot_timeseries, curve)
    return cfg, p, curve


def cmd_simulate(args, out, manifest):
    _simulate(args, out, manifest)
    return 0


def cmd_spectrum(args, out, manifest):
    cfg, p, curve = _simulate(args, out, manifest)
    ref = experiment.reference_ripple(curve, p)
    report = experiment.detrend_and_periodogram(curve, threshold=args.threshold, reference_pp=ref)
    span = float(curve.theta[-1] - curve.theta[0])
    pred = experiment.predicted_snr(p, curve.theta.size, span, cfg.repeats)
    body = report.to_dict()
    body.update(
        {
            "environment": p.env_kind,
            "predicted_snr": pred,
            "empirical_over_predicted": report.snr / pred if pred else None,
            "seed": cfg.seed,
            "n_repeats": cfg.repeats,
        }
    )
    out.json("spectrum.json", body)
    if not args.no_figures:
        from . import plotting

        out.figure("spectrum.png", plotting.plot_spectrum, report)
    print(f"verdict: {report.verdict} (S/N = {report.snr:.3g}, threshold {report.threshold:g})")
    return 0


def cmd_design(args, out, manifest):
    cfg = _load(args)
    p = _params(cfg, args)
    manifest["config_hash"] = cfg.digest()
    _gate(p, cfg, args, manifest)
    notes = []
    if p.env_kind != "decoherence":
        notes.append("breathing-signal formulas assume pure decoherence; evaluated at the equivalent initial heating rate")
    summary = probe.design_summary(p)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lim = probe.massive_limits(p.heating_rate(), p.nbar0, p.omega_tau)
    notes += [str(w.message) for w in caught]
    if p.nbar0 == 1.0:
        notes.append("initial temperature is zero: massive-object limits degenerate (reported as null)")
    R, _ = probe.interaction_fractions(p.g_over_kappa, 1.0)
    body = {
        "max_snr": summary.max_snr,
        "t_opt_seconds": summary.t_opt / p.omega,
        "n_ex_total": summary.n_ex_total,
        "design": summary.to_dict(p.omega),
        "massive_limits": {
            "max_snr": lim.max_snr,
            "t_opt": lim.t_opt,
            "t_opt_seconds": lim.t_opt / p.omega,
            "n_ex": lim.n_ex,
        },
        "inputs": {
            "eps": p.eps,
            "sigma0_m": p.sigma0,
            "gamma": p.heating_rate(),
            "nbar0": p.nbar0,
            "omega_tau": p.omega_tau,
            "g_over_kappa": p.g_over_kappa,
            "R": R,
            "n_in": p.n_in,
            "environment": p.env_kind,
        },
        "notes": notes,
    }
    out.json("design.json", body)
    print(f"max S/N = {summary.max_snr:.4g}, T_opt = {summary.t_opt / p.omega:.4g} s, n_ex = {summary.n_ex_total:.4g}")
    return 0


ORACLE_DEFAULT = {"gamma": 0.02, "nbar0": 1.0, "eps": 0.073, "theta_max": 4 * math.pi, "checkpoints": 9}


def cmd_oracle(args, out, manifest):
    if args.config:
        cfg = _load(args)
        p = _params(cfg, args)
        manifest["config_hash"] = cfg.digest()
        env, nbar0, eps = p.environment(), p.nbar0, p.eps
    else:
        d = ORACLE_DEFAULT
        env, nbar0, eps = PureDecoherence(d["gamma"]), d["nbar0"], d["eps"]
    thetas = np.linspace(0.0, args.theta_max, args.checkpoints)
    report = compare_with_gaussian(nbar0, eps, env, thetas, d=args.dimension)
    report["environment_parameters"] = dict(env.__dict__)
    out.json("oracle.json", report)
    if not args.no_figures:
        from . import plotting

        out.figure("oracle.png", plotting.plot_oracle, report)
    worst = report["max_abs"]
    print("max |dX| = {dX:.2e}, |dP| = {dP:.2e}, |dC| = {dC:.2e}, |dsin2| = {dsin2:.2e}".format(**worst))
    return 0


_ATOM_KEYS = {
    "omega_c": "angular",
    "omega_a": "angular",
    "gamma_a": "angular",
    "nu": "frequency",
    "wavelength_a": "length",
    "area": "area",
}
_NANO_KEYS = {
    "nu": "frequency",
    "wavelength": "length",
    "area": "area",
    "mass": "mass",
    "density": "density",
    "mu": "dimensionless",
    "permittivity": "dimensionless",
}


def _read_section(body, keys, section):
    unknown = set(body) - set(keys)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {sorted(unknown)}")
    try:
        return {k: parse_quantity(v, keys[k]) for k, v in body.items()}
    except UnitError as exc:
        raise ConfigError(f"malformed syntax in [{section}]: {exc}") from None


def cmd_couple(args, out, manifest):
    if not args.config:
        raise UsageError("--config is required")
    try:
        data = tomllib.loads(Path(args.config).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed syntax: {exc}") from None
    if set(data) - {"atom", "nanoparticle"} or len(data) != 1:
        raise ConfigError("expected exactly one of [atom] or [nanoparticle]")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if "atom" in data:
                kw = _read_section(data["atom"], _ATOM_KEYS, "atom")
                missing = set(_ATOM_KEYS) - set(kw)
                if missing:
                    raise ConfigError(f"missing mandatory field(s) in [atom]: {sorted(missing)}")
                g, _ = coupling.atom_coupling(coupling.AtomCouplingInput(**kw))
                body = {"kind": "atom", "g": g, "m_cr": None}
            else:
                kw = _read_section(data["nanoparticle"], _NANO_KEYS, "nanoparticle")
                g, m_cr, _ = coupling.nanoparticle_coupling(coupling.NanoCouplingInput(**kw))
                body = {"kind": "nanoparticle", "g": g, "m_cr": m_cr}
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None
    body["warnings"] = [str(w.message) for w in caught]
    out.json("couple.json", body)
    print(f"g = {g:.6g} rad/s")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringdeco", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, gate=True, sim=False):
        sp.add_argument("--config", help="scenario file or preset name (rb-atom, nanoparticle, rb-atom-thermal)")
        sp.add_argument("--out", default=None, help="output directory (default: current directory)")
        sp.add_argument("--no-figures", action="store_true", help="skip PNG figures")
        if gate:
            sp.add_argument("--env", choices=("decoherence", "thermalization"), help="environment (a mismatch uses the matched counterpart)")
            sp.add_argument("--force", action="store_true", help="run even if the validity gate fails")
            sp.add_argument("--grid", help='probe times "start:stop:points" (units allowed, bare numbers in seconds)')
            sp.add_argument("--variance-model", choices=("paper", "poisson"))
        if sim:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--repeats", type=int)

    common(sub.add_parser("validate", help="check the model's validity conditions"))
    common(sub.add_parser("curve", help="analytic signal curve (CSV)"))
    common(sub.add_parser("simulate", help="Monte Carlo time series (CSV)"), sim=True)
    sp = sub.add_parser("spectrum", help="simulate and test for the 2 Omega line (JSON)")
    common(sp, sim=True)
    sp.add_argument("--threshold", type=float, default=experiment.DETECTION_THRESHOLD)
    common(sub.add_parser("design", help="design numbers: max S/N, T_opt, n_ex (JSON)"))
    sp = sub.add_parser("oracle", help="compare closed forms with the number-basis master equation")
    common(sp, gate=False)
    sp.add_argument("--env", choices=("decoherence", "thermalization"))
    sp.add_argument("--theta-max", type=float, default=ORACLE_DEFAULT["theta_max"])
    sp.add_argument("--checkpoints", type=int, default=ORACLE_DEFAULT["checkpoints"])
    sp.add_argument("--dimension", type=int, default=None, help="number-basis size (default: automatic)")
    common(sub.add_parser("couple", help="coupling constant estimates from an [atom] or [nanoparticle] file"), gate=False)
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "design": cmd_design,
    "oracle": cmd_oracle,
    "couple": cmd_couple,
}


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = Outputs(Path(args.out) if args.out else Path.cwd())
    manifest = {
        "command": args.command,
        "arguments": {k: v for k, v in vars(args).items() if k != "command"},
        "version": __version__,
        "config_hash": None,
        "seed": getattr(args, "seed", None),
        "forced": False,
        "started": _now(),
    }
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, out, manifest)
    except GateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (UsageError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, StateError, TruncationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if out.files:
        manifest["finished"] = _now()
        manifest["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
        manifest["outputs"] = list(out.files)
        try:
            out.json("manifest.json", manifest)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
