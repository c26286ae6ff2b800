"""
Scenario configuration: TOML files, environment overrides, manifests.

A scenario file only needs the keys it wants to change; everything else comes
from the defaults below (a 3236-satellite three-shell constellation, a 35 deg
mask, two-minute passes, 16x16 arrays, and the default link budget).  Any
scalar key can also be overridden from the environment as

    FDXTRACK_<SECTION>__<KEY>=value        e.g. FDXTRACK_CAMPAIGN__TRIALS=20

with the value parsed as JSON when possible (numbers, booleans, arrays) and
as a plain string otherwise.  Nested shell tables are file-only.

`load_scenario` also accepts a manifest JSON written by a previous run; the
manifest embeds the fully resolved config, so re-running from it reproduces
the original outputs byte for byte.

The terminal's array gains are configured as totals (the dBi a matched-filter
beam achieves at its steered direction); the per-element gain the channel
model needs is derived by subtracting 10*log10(elements).
"""
from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass

import numpy as np

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .channel import SI_MODELS, LinkBudget
from .errors import ConfigError
from .orbits import GroundSite, ShellSpec, TimeHorizon
from .upa import QuantizerSpec, UpaGeometry

ENV_PREFIX = "FDXTRACK_"

DEFAULTS: dict = {
    "site": {
        "latitude_deg": 34.0722,
        "longitude_deg": -118.4441,
        "altitude_m": 0.0,
    },
    "constellation": {
        "seed": 1,
        "shells": [
            {"altitude_km": 590.0, "inclination_deg": 33.0, "plane_count": 28, "sats_per_plane": 28, "phasing": 0},
            {"altitude_km": 610.0, "inclination_deg": 42.0, "plane_count": 36, "sats_per_plane": 36, "phasing": 0},
            {"altitude_km": 630.0, "inclination_deg": 51.9, "plane_count": 34, "sats_per_plane": 34, "phasing": 0},
        ],
    },
    "pass": {
        "mask_el_deg": 35.0,
        "duration_s": 120.0,
        "step_s": 1.0,
        "scan_increment_s": 60.0,
        "scan_limit_s": 86400.0,
    },
    "arrays": {
        "tx_rows": 16,
        "tx_cols": 16,
        "rx_rows": 16,
        "rx_cols": 16,
        "element_spacing_wavelengths": 0.5,
        "phase_bits": 0,
    },
    "budget": {
        "sat_tx_power_dbm": 15.5,
        "sat_tx_gain_dbi": 30.5,
        "sat_rx_gain_dbi": 30.5,
        "sat_noise_dbm": -93.1,
        "ut_tx_power_dbm": 36.0,
        "ut_noise_dbm": -95.64,
        "carrier_hz": 20.0e9,
        "ut_tx_array_gain_dbi": 29.0,
        "ut_rx_array_gain_dbi": 39.7,
    },
    "tracker": {
        "neighborhoods": [[1, 1], [2, 2], [3, 3]],
        "bias_step_deg": 0.001,
        "resolution_deg": 1.0,
    },
    "si": {
        "model": "iid-rayleigh",
        "seed": 7,
        "target_median_inr_db": 15.0,
        "calibration_pairs": 500,
        "redraw_per_trial": True,
    },
    "campaign": {
        "trials": 136,
        "master_seed": 42,
        "workers": 0,  # 0 = choose from CPU count
    },
}


@dataclass(frozen=True)
class TerminalArrays:
    geom_tx: UpaGeometry
    geom_rx: UpaGeometry
    quant: QuantizerSpec


@dataclass(frozen=True)
class Scenario:
    site: GroundSite
    shells: tuple[ShellSpec, ...]
    constellation_seed: int
    horizon: TimeHorizon
    mask_el_deg: float
    scan_increment_s: float
    scan_limit_s: float
    arrays: TerminalArrays
    budget: LinkBudget
    # As configured; LinkBudget holds the derived per-element gains.
    ut_tx_array_gain_dbi: float
    ut_rx_array_gain_dbi: float
    neighborhoods: tuple[tuple[int, int], ...]
    bias_step_deg: float
    resolution_deg: float
    si_model: str
    si_seed: int
    si_target_median_inr_db: float
    si_calibration_pairs: int
    si_redraw_per_trial: bool
    trials: int
    master_seed: int
    workers: int


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _parse_env_value(raw: str):
    try:
        return json.loads(raw)
    except (json.JSONDecodeError, ValueError):
        return raw


def apply_env_overrides(cfg: dict, environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = copy.deepcopy(cfg)
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):]
        if "__" not in rest:
            raise ConfigError(f"override {name} must look like {ENV_PREFIX}SECTION__KEY")
        section, key = rest.split("__", 1)
        section, key = section.lower(), key.lower()
        out.setdefault(section, {})
        if not isinstance(out[section], dict):
            raise ConfigError(f"override {name} targets non-table section {section!r}")
        out[section][key] = _parse_env_value(raw)
    return out


def _read_config_file(path: str) -> dict:
    try:
        if str(path).endswith(".json"):
            with open(path) as fh:
                obj = json.load(fh)
            return obj.get("scenario", obj)
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def build_scenario(cfg: dict) -> Scenario:
    """Validate a resolved config dict and construct the Scenario."""
    try:
        site = GroundSite(
            latitude_deg=float(cfg["site"]["latitude_deg"]),
            longitude_deg=float(cfg["site"]["longitude_deg"]),
            altitude_m=float(cfg["site"].get("altitude_m", 0.0)),
        )
        shells = tuple(
            ShellSpec(
                altitude_km=float(sh["altitude_km"]),
                inclination_deg=float(sh["inclination_deg"]),
                plane_count=int(sh["plane_count"]),
                sats_per_plane=int(sh["sats_per_plane"]),
                phasing=int(sh.get("phasing", 0)),
            )
            for sh in cfg["constellation"]["shells"]
        )
        if not shells:
            raise ConfigError("constellation.shells must not be empty")
        pas = cfg["pass"]
        horizon = TimeHorizon(0.0, float(pas["duration_s"]), float(pas["step_s"]))
        arr = cfg["arrays"]
        arrays = TerminalArrays(
            geom_tx=UpaGeometry(int(arr["tx_rows"]), int(arr["tx_cols"]), float(arr["element_spacing_wavelengths"])),
            geom_rx=UpaGeometry(int(arr["rx_rows"]), int(arr["rx_cols"]), float(arr["element_spacing_wavelengths"])),
            quant=QuantizerSpec(phase_bits=int(arr["phase_bits"])),
        )
        bud = cfg["budget"]
        n_tx = arrays.geom_tx.n_elements
        n_rx = arrays.geom_rx.n_elements
        budget = LinkBudget(
            sat_tx_power_dbm=float(bud["sat_tx_power_dbm"]),
            sat_tx_gain_dbi=float(bud["sat_tx_gain_dbi"]),
            sat_rx_gain_dbi=float(bud["sat_rx_gain_dbi"]),
            sat_noise_dbm=float(bud["sat_noise_dbm"]),
            ut_tx_power_dbm=float(bud["ut_tx_power_dbm"]),
            ut_noise_dbm=float(bud["ut_noise_dbm"]),
            carrier_hz=float(bud["carrier_hz"]),
            ut_tx_elem_gain_dbi=float(bud["ut_tx_array_gain_dbi"]) - 10.0 * np.log10(n_tx),
            ut_rx_elem_gain_dbi=float(bud["ut_rx_array_gain_dbi"]) - 10.0 * np.log10(n_rx),
        )
        trk = cfg["tracker"]
        neighborhoods = tuple((int(d[0]), int(d[1])) for d in trk["neighborhoods"])
        if not neighborhoods:
            raise ConfigError("tracker.neighborhoods must not be empty")
        si = cfg["si"]
        camp = cfg["campaign"]
        scenario = Scenario(
            site=site,
            shells=shells,
            constellation_seed=int(cfg["constellation"]["seed"]),
            horizon=horizon,
            mask_el_deg=float(pas["mask_el_deg"]),
            scan_increment_s=float(pas["scan_increment_s"]),
            scan_limit_s=float(pas["scan_limit_s"]),
            arrays=arrays,
            budget=budget,
            ut_tx_array_gain_dbi=float(bud["ut_tx_array_gain_dbi"]),
            ut_rx_array_gain_dbi=float(bud["ut_rx_array_gain_dbi"]),
            neighborhoods=neighborhoods,
            bias_step_deg=float(trk["bias_step_deg"]),
            resolution_deg=float(trk["resolution_deg"]),
            si_model=str(si["model"]),
            si_seed=int(si["seed"]),
            si_target_median_inr_db=float(si["target_median_inr_db"]),
            si_calibration_pairs=int(si["calibration_pairs"]),
            si_redraw_per_trial=bool(si["redraw_per_trial"]),
            trials=int(camp["trials"]),
            master_seed=int(camp["master_seed"]),
            workers=int(camp["workers"]),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key: {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    if not 0.0 < scenario.mask_el_deg < 90.0:
        raise ConfigError(f"pass.mask_el_deg {scenario.mask_el_deg} outside (0, 90)")
    if scenario.si_model not in SI_MODELS:
        raise ConfigError(f"si.model {scenario.si_model!r} unknown; known: {SI_MODELS}")
    if scenario.trials < 1:
        raise ConfigError("campaign.trials must be >= 1")
    if scenario.si_calibration_pairs < 1:
        raise ConfigError("si.calibration_pairs must be >= 1")
    if scenario.bias_step_deg <= 0:
        raise ConfigError("tracker.bias_step_deg must be positive")
    if scenario.workers < 0:
        raise ConfigError("campaign.workers must be >= 0")
    for daz, del_ in scenario.neighborhoods:
        if daz < 0 or del_ < 0:
            raise ConfigError(f"neighborhood ({daz}, {del_}) has a negative delta")
    return scenario


def load_scenario(path: str, environ=None) -> Scenario:
    """Read a scenario from TOML (or a manifest JSON) with env overrides."""
    cfg = _deep_merge(DEFAULTS, _read_config_file(path))
    cfg = apply_env_overrides(cfg, environ)
    return build_scenario(cfg)


def scenario_to_dict(sc: Scenario) -> dict:
    """The fully resolved config; feeding it back reproduces the scenario."""
    return {
        "site": {
            "latitude_deg": sc.site.latitude_deg,
            "longitude_deg": sc.site.longitude_deg,
            "altitude_m": sc.site.altitude_m,
        },
        "constellation": {
            "seed": sc.constellation_seed,
            "shells": [
                {
                    "altitude_km": sh.altitude_km,
                    "inclination_deg": sh.inclination_deg,
                    "plane_count": sh.plane_count,
                    "sats_per_plane": sh.sats_per_plane,
                    "phasing": sh.phasing,
                }
                for sh in sc.shells
            ],
        },
        "pass": {
            "mask_el_deg": sc.mask_el_deg,
            "duration_s": sc.horizon.t_end_s - sc.horizon.t_start_s,
            "step_s": sc.horizon.step_s,
            "scan_increment_s": sc.scan_increment_s,
            "scan_limit_s": sc.scan_limit_s,
        },
        "arrays": {
            "tx_rows": sc.arrays.geom_tx.rows,
            "tx_cols": sc.arrays.geom_tx.cols,
            "rx_rows": sc.arrays.geom_rx.rows,
            "rx_cols": sc.arrays.geom_rx.cols,
            "element_spacing_wavelengths": sc.arrays.geom_tx.element_spacing_wavelengths,
            "phase_bits": sc.arrays.quant.phase_bits,
        },
        "budget": {
            "sat_tx_power_dbm": sc.budget.sat_tx_power_dbm,
            "sat_tx_gain_dbi": sc.budget.sat_tx_gain_dbi,
            "sat_rx_gain_dbi": sc.budget.sat_rx_gain_dbi,
            "sat_noise_dbm": sc.budget.sat_noise_dbm,
            "ut_tx_power_dbm": sc.budget.ut_tx_power_dbm,
            "ut_noise_dbm": sc.budget.ut_noise_dbm,
            "carrier_hz": sc.budget.carrier_hz,
            "ut_tx_array_gain_dbi": sc.ut_tx_array_gain_dbi,
            "ut_rx_array_gain_dbi": sc.ut_rx_array_gain_dbi,
        },
        "tracker": {
            "neighborhoods": [[d[0], d[1]] for d in sc.neighborhoods],
            "bias_step_deg": sc.bias_step_deg,
            "resolution_deg": sc.resolution_deg,
        },
        "si": {
            "model": sc.si_model,
            "seed": sc.si_seed,
            "target_median_inr_db": sc.si_target_median_inr_db,
            "calibration_pairs": sc.si_calibration_pairs,
            "redraw_per_trial": sc.si_redraw_per_trial,
        },
        "campaign": {
            "trials": sc.trials,
            "master_seed": sc.master_seed,
            "workers": sc.workers,
        },
    }
