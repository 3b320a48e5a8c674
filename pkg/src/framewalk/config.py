"""Line-oriented `key = value` run configuration.

Comments start with `#`, lists are comma-separated, unknown keys are
rejected, and every parse error carries its line number.  Defaults are
documented in DEFAULTS below; the domain box defaults to the natural domain
of the chosen initial profile and must be given explicitly for
expression-defined profiles.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .elastic import ElasticCoefficients
from .frames import (EulerAngles, PROFILE_NAMES, frame_from_euler,
                     initial_profile, profile_domain)
from .grid import SpectralGrid
from .integrator import AdaptiveSettings, SolverSettings


class ConfigError(ValueError):
    """Raised on malformed, unknown, or missing configuration entries."""


@dataclass
class SimConfig:
    counts: tuple = None
    K: tuple = None
    profile: str = None
    t_end: float = None
    origin: tuple = None
    extents: tuple = None
    chi: tuple = (2.0, 2.0, 2.0)
    theta: str = None
    phi: str = None
    psi: str = None
    stepping: str = "adaptive"
    tau: float = None
    tau_max: float = 2e-3
    tau_min: float = 1e-5
    alpha: float = 1e-3
    newton_tol: float = 1e-8
    max_newton: int = 50
    gmres_tol: float = 1e-3
    gmres_restart: int = 30
    precondition: bool = False
    gradient: str = "biaxial"
    dealias: bool = False
    output_dir: str = "out"
    snapshot_every: int = 0
    energy_log_scale: bool = False
    sweep_n: int = 24
    sweep_tau: float = 1e-3
    sweep_taus: tuple = (0.1, 0.05, 0.025, 0.0125, 0.00625)
    sweep_ns: tuple = (6, 10, 14, 18, 22)
    sweep_t_end: float = 0.2


REQUIRED_KEYS = ("N", "K", "profile", "t_end")


def _floats(text, count=None):
    vals = tuple(float(v.strip()) for v in text.split(","))
    if count is not None and len(vals) != count:
        raise ValueError(f"expected {count} comma-separated values, got {len(vals)}")
    return vals


def _ints(text, count=None):
    vals = tuple(int(v.strip()) for v in text.split(","))
    if count is not None and len(vals) != count:
        raise ValueError(f"expected {count} comma-separated values, got {len(vals)}")
    return vals


def _bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _choice(*options):
    def convert(text):
        t = text.strip()
        if t not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return t
    return convert


# key -> (config attribute, converter)
SCHEMA = {
    "N": ("counts", lambda s: _ints(s, 3)),
    "K": ("K", lambda s: _floats(s, 12)),
    "chi": ("chi", lambda s: _floats(s, 3)),
    "profile": ("profile", _choice(*PROFILE_NAMES, "euler")),
    "theta": ("theta", str.strip),
    "phi": ("phi", str.strip),
    "psi": ("psi", str.strip),
    "origin": ("origin", lambda s: _floats(s, 3)),
    "extents": ("extents", lambda s: _floats(s, 3)),
    "t_end": ("t_end", float),
    "stepping": ("stepping", _choice("adaptive", "fixed")),
    "tau": ("tau", float),
    "tau_max": ("tau_max", float),
    "tau_min": ("tau_min", float),
    "alpha": ("alpha", float),
    "newton_tol": ("newton_tol", float),
    "max_newton": ("max_newton", int),
    "gmres_tol": ("gmres_tol", float),
    "gmres_restart": ("gmres_restart", int),
    "precondition": ("precondition", _bool),
    "gradient": ("gradient", _choice("biaxial", "gonzalez")),
    "dealias": ("dealias", _bool),
    "output_dir": ("output_dir", str.strip),
    "snapshot_every": ("snapshot_every", int),
    "energy_log_scale": ("energy_log_scale", _bool),
    "sweep_n": ("sweep_n", int),
    "sweep_tau": ("sweep_tau", float),
    "sweep_taus": ("sweep_taus", _floats),
    "sweep_ns": ("sweep_ns", _ints),
    "sweep_t_end": ("sweep_t_end", float),
}

DEFAULTS = {f.name: f.default for f in fields(SimConfig)}


def parse_config_text(text: str, source: str = "<config>") -> SimConfig:
    cfg = SimConfig()
    errors = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected `key = value`, got {raw!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in seen:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        seen.add(key)
        attr, convert = SCHEMA[key]
        try:
            setattr(cfg, attr, convert(value))
        except (ValueError, TypeError) as exc:
            errors.append(f"line {lineno}: bad value for {key!r}: {exc}")

    missing = [k for k in REQUIRED_KEYS if SCHEMA[k][0] not in
               {SCHEMA[s][0] for s in seen}]
    if missing:
        errors.append(f"missing required keys: {', '.join(missing)}")
    if not errors:
        errors.extend(_validate(cfg))
    if errors:
        raise ConfigError(f"{source}: " + "; ".join(errors))
    return cfg


def _validate(cfg: SimConfig):
    errors = []
    if cfg.counts is not None and any(n < 1 for n in cfg.counts):
        errors.append(f"resolution counts must be >= 1, got {cfg.counts}")
    if cfg.t_end is not None and cfg.t_end <= 0:
        errors.append(f"t_end must be positive, got {cfg.t_end}")
    if cfg.K is not None and any(v < 0 for v in cfg.K):
        errors.append(f"elastic constants must be non-negative, got {cfg.K}")
    if any(c <= 0 for c in cfg.chi):
        errors.append(f"chi must be positive, got {cfg.chi}")
    if cfg.stepping == "fixed" and cfg.tau is None:
        errors.append("stepping = fixed requires a tau key")
    if cfg.profile == "euler":
        if not all((cfg.theta, cfg.phi, cfg.psi)):
            errors.append("profile = euler requires theta, phi and psi "
                          "expressions")
        if cfg.origin is None or cfg.extents is None:
            errors.append("profile = euler requires explicit origin and "
                          "extents")
    if not (0 < cfg.tau_min <= cfg.tau_max):
        errors.append(f"need 0 < tau_min <= tau_max, got "
                      f"({cfg.tau_min}, {cfg.tau_max})")
    return errors


def parse_config(path) -> SimConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), source=str(path))


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: SimConfig) -> str:
    """Canonical text form; parse_config_text(serialize_config(c)) == c."""
    lines = []
    for key, (attr, _) in SCHEMA.items():
        value = getattr(cfg, attr)
        if value is None:
            continue
        if key not in REQUIRED_KEYS and value == DEFAULTS.get(attr):
            continue
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "arcsin", "arccos", "arctan", "arctan2",
                "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")}
_EXPR_NAMES["pi"] = np.pi


def _eval_angle(expr: str, grid: SpectralGrid):
    X1, X2, X3 = grid.coords()
    names = dict(_EXPR_NAMES, x1=X1, x2=X2, x3=X3)
    try:
        value = eval(expr, {"__builtins__": {}}, names)  # noqa: S307
    except Exception as exc:
        raise ConfigError(f"cannot evaluate angle expression {expr!r}: {exc}")
    return np.broadcast_to(np.asarray(value, dtype=float), grid.counts)


def materialize(cfg: SimConfig):
    """Instantiate (grid, initial frame, coefficients, solver, adaptive, tau)."""
    origin, extents = cfg.origin, cfg.extents
    if origin is None or extents is None:
        d_origin, d_extents = profile_domain(cfg.profile)
        origin = origin or d_origin
        extents = extents or d_extents
    grid = SpectralGrid(cfg.counts, extents, origin, dealias=cfg.dealias)
    if cfg.profile == "euler":
        angles = EulerAngles(*(_eval_angle(e, grid)
                               for e in (cfg.theta, cfg.phi, cfg.psi)))
        p0 = frame_from_euler(angles, grid)
    else:
        p0 = initial_profile(cfg.profile, grid)
    coeffs = ElasticCoefficients(cfg.K, cfg.chi)
    solver = SolverSettings(newton_tol=cfg.newton_tol,
                            max_newton=cfg.max_newton,
                            gmres_tol=cfg.gmres_tol,
                            gmres_restart=cfg.gmres_restart,
                            precondition=cfg.precondition)
    if cfg.stepping == "adaptive":
        adaptive = AdaptiveSettings(tau_max=cfg.tau_max, tau_min=cfg.tau_min,
                                    alpha=cfg.alpha)
        tau = None
    else:
        adaptive = None
        tau = cfg.tau
    return grid, p0, coeffs, solver, adaptive, tau
