"""Run configuration: documented schema, validation, and builders.

The config is a JSON document with the sections below; unknown keys are
rejected with the offending dotted key named, as are invariant violations.
Schema version 1.

    mode            FULL | AXISYM | SLAB_TEST | REDUCED | SWEEP | ORACLE
    grid            Cartesian box (FULL / REDUCED / SLAB_TEST depth+ny)
    axisym_grid     (r, y) grid for AXISYM mode
    obstacle        plateau obstacle parameters
    penalty         reaction family parameters
    solve           solver method and schedule knobs
    slab            SLAB_TEST plane value and eps
    oracle          ORACLE mode plane value and eps list
    verify          check tolerances (see verify.VerifyParams)
    reduce          reduced-comparison threshold override
    sweep           parameter lists for SWEEP mode

Defaults are the desk-scale N = 1 configuration; omega defaults to 1.95
(near-optimal SOR for the desk grids, configurable).
"""

from __future__ import annotations

import copy
import json

from .errors import ConfigError
from .grid import AxisymGridSpec, GridSpec, build_axisym_grid, build_grid
from .obstacle import load_radial_csv, make_obstacle
from .penalty import load_table_csv, make_penalty
from .solver import SolveParams
from .verify import VerifyParams

CONFIG_SCHEMA_VERSION = 1

MODES = ("FULL", "AXISYM", "SLAB_TEST", "REDUCED", "SWEEP", "ORACLE")

DEFAULT_CONFIG = {
    "schema_version": CONFIG_SCHEMA_VERSION,
    "mode": "FULL",
    "out_dir": "out",
    "grid": {"plane_dim": 1, "half_width": 6.0, "depth": 4.0,
             "nx": 513, "ny": 257},
    "axisym_grid": {"plane_dim": 2, "radius": 4.0, "depth": 1.5,
                    "nr": 513, "ny": 257},
    "obstacle": {"rho0": 0.25, "profile": "PARABOLIC_SKIRT",
                 "center": [0.0], "radial_csv": None},
    "penalty": {"shape": "RATIONAL_CUBE", "mass": 0.5, "table_csv": None},
    "solve": {"method": "PSOR", "omega": 1.95, "tol": 1e-8,
              "max_iters": None, "eps0": 0.4, "eps_factor": 0.5,
              "eps_schedule": None, "newton_inner": 3, "dt_safety": 0.9,
              "cross_check": False},
    "slab": {"value": 1.0, "eps": 0.1},
    "oracle": {"M": 1.0, "eps_list": [0.4, 0.2, 0.1, 0.05]},
    "verify": {"level_factor": 1.0, "coincidence_tol_factor": 10.0,
               "collar_factor": 2.0, "theta0": 0.2, "slack_factor": 10.0,
               "n_cone_dirs": 5, "band_factors": [2.0, 4.0, 8.0, 16.0],
               "band_tol": 0.05, "exponent_range": [1.8, 2.2],
               "coeff_rtol": 0.15, "quad_dmax_frac": 0.8,
               "holder_r2_min": 0.9, "holder_lambda": 0.25,
               "support_threshold_factor": 10.0, "uy_noise_factor": 10.0,
               "min_fit_samples": 6},
    "reduce": {"threshold": None},
    "sweep": {"rho0": [0.15, 0.25, 0.4], "eps0": [0.4], "grid_level": [0]},
}

_NUMBER = (int, float)

# key -> (expected types, one-line requirement used in error messages)
_LEAF_RULES = {
    "schema_version": (int, "must equal 1"),
    "mode": (str, f"one of {MODES}"),
    "out_dir": (str, "output directory path"),
    "grid.plane_dim": (int, "1 or 2"),
    "grid.half_width": (_NUMBER, "> 0"),
    "grid.depth": (_NUMBER, "> 0"),
    "grid.nx": (int, "odd, >= 3"),
    "grid.ny": (int, ">= 3"),
    "axisym_grid.plane_dim": (int, "1 or 2"),
    "axisym_grid.radius": (_NUMBER, "> 0"),
    "axisym_grid.depth": (_NUMBER, "> 0"),
    "axisym_grid.nr": (int, ">= 3"),
    "axisym_grid.ny": (int, ">= 3"),
    "obstacle.rho0": (_NUMBER, "> 0"),
    "obstacle.profile": (str, "PARABOLIC_SKIRT or CUSTOM_RADIAL"),
    "obstacle.center": (list, "list of plane coordinates"),
    "obstacle.radial_csv": ((str, type(None)), "path or null"),
    "penalty.shape": (str, "RATIONAL_CUBE or CUSTOM_TABLE"),
    "penalty.mass": (_NUMBER, "> 0"),
    "penalty.table_csv": ((str, type(None)), "path or null"),
    "solve.method": (str, "PSOR or PARABOLIC"),
    "solve.omega": (_NUMBER, "in (0, 2)"),
    "solve.tol": (_NUMBER, "> 0"),
    "solve.max_iters": ((int, type(None)), "positive or null"),
    "solve.eps0": (_NUMBER, "> 0"),
    "solve.eps_factor": (_NUMBER, "in (0, 1)"),
    "solve.eps_schedule": ((list, type(None)), "decreasing list or null"),
    "solve.newton_inner": (int, ">= 1"),
    "solve.dt_safety": (_NUMBER, "in (0, 1]"),
    "solve.cross_check": (bool, "bool"),
    "slab.value": (_NUMBER, "> 0"),
    "slab.eps": (_NUMBER, "> 0"),
    "oracle.M": (_NUMBER, "> 0"),
    "oracle.eps_list": (list, "list of eps > 0"),
    "verify.level_factor": (_NUMBER, "> 0"),
    "verify.coincidence_tol_factor": (_NUMBER, "> 0"),
    "verify.collar_factor": (_NUMBER, "> 0"),
    "verify.theta0": (_NUMBER, ">= 0"),
    "verify.slack_factor": (_NUMBER, "> 0"),
    "verify.n_cone_dirs": (int, ">= 1"),
    "verify.band_factors": (list, "increasing positive list"),
    "verify.band_tol": (_NUMBER, "> 0"),
    "verify.exponent_range": (list, "[lo, hi]"),
    "verify.coeff_rtol": (_NUMBER, "> 0"),
    "verify.quad_dmax_frac": (_NUMBER, "in (0, 1]"),
    "verify.holder_r2_min": (_NUMBER, "in (0, 1]"),
    "verify.holder_lambda": (_NUMBER, "in (0, 1)"),
    "verify.support_threshold_factor": (_NUMBER, "> 0"),
    "verify.uy_noise_factor": (_NUMBER, "> 0"),
    "verify.min_fit_samples": (int, ">= 3"),
    "reduce.threshold": ((_NUMBER[0], _NUMBER[1], type(None)),
                         "number or null"),
    "sweep.rho0": (list, "list of rho0 > 0"),
    "sweep.eps0": (list, "list of eps0 > 0"),
    "sweep.grid_level": (list, "list of integers >= 0"),
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"not valid JSON: {exc}") from exc
    return validate_config(user)


def validate_config(user: dict) -> dict:
    """Merge onto defaults, reject unknown keys, enforce invariants."""
    if not isinstance(user, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    cfg = default_config()
    _merge(cfg, user, prefix="")
    _check_values(cfg)
    return cfg


def _merge(base: dict, user: dict, prefix: str):
    for key, val in user.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(path, "unknown key")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(path, "expected an object")
            _merge(base[key], val, prefix=path + ".")
        else:
            rule = _LEAF_RULES.get(path)
            if rule is not None and val is not None:
                types = rule[0] if isinstance(rule[0], tuple) else (rule[0],)
                if isinstance(val, bool) and bool not in types:
                    raise ConfigError(path, rule[1])
                if not isinstance(val, types):
                    raise ConfigError(path, rule[1])
            base[key] = copy.deepcopy(val)


def _fail(key, requirement):
    raise ConfigError(key, requirement)


def _check_values(cfg: dict):
    if cfg["schema_version"] != CONFIG_SCHEMA_VERSION:
        _fail("schema_version", f"must equal {CONFIG_SCHEMA_VERSION}")
    if cfg["mode"] not in MODES:
        _fail("mode", f"one of {MODES}")
    g = cfg["grid"]
    try:
        GridSpec(g["plane_dim"], g["half_width"], g["depth"], g["nx"], g["ny"])
    except Exception as exc:
        _fail("grid", str(exc))
    a = cfg["axisym_grid"]
    try:
        AxisymGridSpec(a["plane_dim"], a["radius"], a["depth"], a["nr"],
                       a["ny"])
    except Exception as exc:
        _fail("axisym_grid", str(exc))
    ob = cfg["obstacle"]
    if not ob["rho0"] > 0:
        _fail("obstacle.rho0", "> 0")
    support = 1.0 + ob["rho0"]
    if cfg["mode"] in ("FULL", "REDUCED") and g["half_width"] < 2.0 * support:
        _fail("grid.half_width",
              f"must be >= 2 * (1 + rho0) = {2 * support} so the obstacle "
              "support sits inside the half-radius ball")
    if cfg["mode"] == "AXISYM" and a["radius"] < 2.0 * support:
        _fail("axisym_grid.radius", f"must be >= 2 * (1 + rho0) = {2 * support}")
    s = cfg["solve"]
    try:
        SolveParams(method=s["method"], omega=s["omega"], tol=s["tol"],
                    max_iters=s["max_iters"], eps0=s["eps0"],
                    eps_factor=s["eps_factor"],
                    eps_schedule=tuple(s["eps_schedule"])
                    if s["eps_schedule"] else None,
                    newton_inner=s["newton_inner"],
                    dt_safety=s["dt_safety"])
    except Exception as exc:
        _fail("solve", str(exc))
    if not 0.0 < s["eps_factor"] < 1.0:
        _fail("solve.eps_factor", "in (0, 1)")
    v = cfg["verify"]
    lo, hi = v["exponent_range"]
    if not (0 < lo < hi):
        _fail("verify.exponent_range", "[lo, hi] with 0 < lo < hi")
    bf = v["band_factors"]
    if len(bf) < 2 or any(b <= a for a, b in zip(bf, bf[1:])):
        _fail("verify.band_factors", "increasing positive list, length >= 2")
    for key in ("rho0", "eps0", "grid_level"):
        vals = cfg["sweep"][key]
        if not isinstance(vals, list) or not vals:
            _fail(f"sweep.{key}", "nonempty list")
    if any(lv < 0 or not isinstance(lv, int) for lv in cfg["sweep"]["grid_level"]):
        _fail("sweep.grid_level", "list of integers >= 0")
    if any(e <= 0 for e in cfg["oracle"]["eps_list"]):
        _fail("oracle.eps_list", "list of eps > 0")


# ----------------------------------------------------------------------
# builders
# ----------------------------------------------------------------------


def grid_from_config(cfg: dict):
    g = cfg["grid"]
    return build_grid(GridSpec(g["plane_dim"], g["half_width"], g["depth"],
                               g["nx"], g["ny"]))


def axisym_grid_from_config(cfg: dict):
    a = cfg["axisym_grid"]
    return build_axisym_grid(AxisymGridSpec(a["plane_dim"], a["radius"],
                                            a["depth"], a["nr"], a["ny"]))


def obstacle_from_config(cfg: dict):
    ob = cfg["obstacle"]
    table = None
    if ob["profile"] == "CUSTOM_RADIAL":
        if not ob["radial_csv"]:
            raise ConfigError("obstacle.radial_csv",
                              "required for CUSTOM_RADIAL")
        table = load_radial_csv(ob["radial_csv"])
    try:
        return make_obstacle(rho0=ob["rho0"], profile=ob["profile"],
                             center=tuple(ob["center"]), radial_table=table)
    except ValueError as exc:
        raise ConfigError("obstacle", str(exc)) from exc


def penalty_from_config(cfg: dict):
    p = cfg["penalty"]
    table = None
    if p["shape"] == "CUSTOM_TABLE":
        if not p["table_csv"]:
            raise ConfigError("penalty.table_csv", "required for CUSTOM_TABLE")
        table = load_table_csv(p["table_csv"])
    try:
        return make_penalty(shape=p["shape"], mass=p["mass"], table=table)
    except ValueError as exc:
        raise ConfigError("penalty", str(exc)) from exc


def params_from_config(cfg: dict) -> SolveParams:
    s = cfg["solve"]
    return SolveParams(
        method=s["method"], omega=s["omega"], tol=s["tol"],
        max_iters=s["max_iters"], eps0=s["eps0"], eps_factor=s["eps_factor"],
        eps_schedule=tuple(s["eps_schedule"]) if s["eps_schedule"] else None,
        newton_inner=s["newton_inner"], dt_safety=s["dt_safety"])


def verify_params_from_config(cfg: dict) -> VerifyParams:
    v = cfg["verify"]
    return VerifyParams(
        level_factor=v["level_factor"],
        coincidence_tol_factor=v["coincidence_tol_factor"],
        collar_factor=v["collar_factor"], theta0=v["theta0"],
        slack_factor=v["slack_factor"], n_cone_dirs=v["n_cone_dirs"],
        band_factors=tuple(v["band_factors"]), band_tol=v["band_tol"],
        exponent_range=tuple(v["exponent_range"]),
        coeff_rtol=v["coeff_rtol"], quad_dmax_frac=v["quad_dmax_frac"],
        holder_r2_min=v["holder_r2_min"], holder_lambda=v["holder_lambda"],
        support_threshold_factor=v["support_threshold_factor"],
        uy_noise_factor=v["uy_noise_factor"],
        min_fit_samples=v["min_fit_samples"])
