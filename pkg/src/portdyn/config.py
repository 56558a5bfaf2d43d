"""JSON run configuration with table defaults.

A configuration document is a nested JSON object with sections for
each pipeline stage (beam, cube, truss, spacecraft, control,
performance, codesign, sweep) plus a schema version.  Every key has a
default equal to the published mechanical data of the study case, so an
empty document (or no file at all) reproduces the reference setup;
unknown keys are rejected rather than ignored, catching typos at load
time.  The loaded dictionary converts into the typed objects of the
library through the small builder functions below, which also apply the
command-line preset and thread/seed overrides.
"""

from __future__ import annotations

import copy
import json
from dataclasses import replace

import numpy as np

from portdyn.codesign import CodesignConfig
from portdyn.control import ControlSpec, PerformanceSpec
from portdyn.spacecraft import SpacecraftConfig, UncertainSample

__all__ = [
    "SCHEMA_VERSION",
    "ConfigError",
    "default_config",
    "load_config",
    "spacecraft_config",
    "uncertain_sample",
    "control_spec",
    "performance_spec",
    "codesign_config",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Malformed or out-of-range run configuration."""


_DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "beam": {
        "n_elem": 5,
    },
    "cube": {
        "h": 0.03,
        "side": 1.0,
    },
    "truss": {
        "h": 0.03,
    },
    "spacecraft": {
        "hub_mass": 800.0,
        "hub_inertia_diag": [1000.0, 1000.0, 200.0],
        "panel_mass": 80.0,
        "panel_omega": [2.51, 3.77, 9.42],
        "panel_xi": 0.003,
        "k_joint": 500.0,
        "f_joint": 1.0,
        "antenna_mass": 20.0,
        "n_elem": 5,
        "uncertainty": {
            "delta_mass": 0.0,
            "delta_inertia_yy": 0.0,
            "delta_panel_freq": 0.0,
            "tau": 0.0,
        },
    },
    "control": {
        "omega_acs": 0.1,
        "xi_acs": 0.7,
        "omega_pma": 0.5,
        "xi_pma": 0.7,
    },
    "performance": {
        "eps_max": 50e-6,
        "t_delta": 3e-3,
        "p_max": 0.3820,
        "u_max": 15.0,
        "gamma_u": 1.0,
    },
    "codesign": {
        "n_particles": 24,
        "n_iter": 20,
        "h_min": 0.015,
        "h_max": 0.03,
        "inner_budget": 2000,
        "penalty": 100.0,
        "seed": 0,
        "nominal_only": False,
        "fixed_h": None,
    },
    "sweep": {
        "n_tau": 50,
        "polish_evals": 20,
    },
}


def _merge(default, user, path):
    if not isinstance(user, dict):
        raise ConfigError(f"{path or 'document'}: expected an object")
    out = {}
    for key, dval in default.items():
        here = f"{path}.{key}" if path else key
        if key not in user:
            out[key] = copy.deepcopy(dval)
        elif isinstance(dval, dict):
            out[key] = _merge(dval, user[key], here)
        else:
            uval = user[key]
            ok = (
                dval is None
                or isinstance(uval, type(dval))
                or (isinstance(dval, float) and isinstance(uval, int)
                    and not isinstance(uval, bool))
            )
            if isinstance(dval, bool) != isinstance(uval, bool) and dval is not None:
                ok = False
            if key == "fixed_h":
                ok = uval is None or (
                    isinstance(uval, (int, float)) and not isinstance(uval, bool)
                )
            if not ok:
                raise ConfigError(f"{here}: expected {type(dval).__name__}")
            out[key] = uval
    unknown = set(user) - set(default)
    if unknown:
        name = sorted(unknown)[0]
        here = f"{path}.{name}" if path else name
        raise ConfigError(f"{here}: unknown key")
    return out


def default_config() -> dict:
    return copy.deepcopy(_DEFAULTS)


def load_config(path: str | None = None) -> dict:
    """Parse and validate a JSON configuration file.

    ``None`` returns the defaults.  Raises ConfigError with the
    offending line/column for syntax errors and the dotted key path for
    schema violations.
    """
    if path is None:
        return default_config()
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}"
        ) from exc
    cfg = _merge(_DEFAULTS, raw, "")
    if cfg["schema"] != SCHEMA_VERSION:
        raise ConfigError(
            f"schema: version {cfg['schema']} unsupported (have {SCHEMA_VERSION})"
        )
    return cfg


def _wrap(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def spacecraft_config(cfg: dict, n_elem: int | None = None) -> SpacecraftConfig:
    sc = cfg["spacecraft"]
    base = SpacecraftConfig()
    panel = replace(
        base.panel,
        mass=float(sc["panel_mass"]),
        omega=np.asarray(sc["panel_omega"], dtype=float),
        xi=float(sc["panel_xi"]),
    )
    return _wrap(
        "spacecraft",
        replace,
        base,
        hub_mass=float(sc["hub_mass"]),
        hub_inertia=np.diag(np.asarray(sc["hub_inertia_diag"], dtype=float)),
        panel=panel,
        k_joint=float(sc["k_joint"]),
        f_joint=float(sc["f_joint"]),
        antenna_mass=float(sc["antenna_mass"]),
        n_elem=int(n_elem if n_elem is not None else sc["n_elem"]),
    )


def uncertain_sample(cfg: dict) -> UncertainSample:
    u = cfg["spacecraft"]["uncertainty"]
    return _wrap(
        "spacecraft.uncertainty",
        UncertainSample,
        float(u["delta_mass"]),
        float(u["delta_inertia_yy"]),
        float(u["delta_panel_freq"]),
        float(u["tau"]),
    )


def control_spec(cfg: dict, k_pma=None) -> ControlSpec:
    c = cfg["control"]
    kwargs = dict(
        omega_acs=float(c["omega_acs"]),
        xi_acs=float(c["xi_acs"]),
        omega_pma=float(c["omega_pma"]),
        xi_pma=float(c["xi_pma"]),
    )
    if k_pma is not None:
        kwargs["k_pma"] = np.asarray(k_pma, dtype=float)
    return _wrap("control", ControlSpec, **kwargs)


def performance_spec(cfg: dict) -> PerformanceSpec:
    p = cfg["performance"]
    return _wrap(
        "performance",
        PerformanceSpec,
        eps_max=float(p["eps_max"]),
        t_delta=float(p["t_delta"]),
        p_max=float(p["p_max"]),
        u_max=float(p["u_max"]),
        gamma_u=float(p["gamma_u"]),
    )


_PRESETS = {
    "desk": dict(n_particles=8, n_iter=5, inner_budget=500, nominal_only=True),
    "paper": dict(n_particles=24, n_iter=20, inner_budget=2000,
                  nominal_only=False),
}


def codesign_config(
    cfg: dict,
    threads: int = 1,
    seed: int | None = None,
    preset: str | None = None,
    n_elem: int | None = None,
) -> CodesignConfig:
    c = dict(cfg["codesign"])
    if preset is not None:
        if preset not in _PRESETS:
            raise ConfigError(f"preset: unknown preset {preset!r}")
        c.update(_PRESETS[preset])
    fixed = c["fixed_h"]
    return _wrap(
        "codesign",
        CodesignConfig,
        n_particles=int(c["n_particles"]),
        n_iter=int(c["n_iter"]),
        h_bounds=(float(c["h_min"]), float(c["h_max"])),
        inner_budget=int(c["inner_budget"]),
        penalty=float(c["penalty"]),
        threads=int(threads),
        seed=int(seed if seed is not None else c["seed"]),
        nominal_only=bool(c["nominal_only"]),
        fixed_h=None if fixed is None else float(fixed),
        spacecraft=spacecraft_config(cfg, n_elem=n_elem),
        perf=performance_spec(cfg),
    )
