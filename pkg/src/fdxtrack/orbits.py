"""
Walker-shell constellation, circular two-body propagation, and ground-site
look angles.

Scope is deliberately small: minutes-long azimuth/elevation tracks of two
satellites above an elevation mask.  Spherical Earth (R = 6371 km), circular
orbits, uniform Earth rotation; no J2, drag, or SGP4.  The inertial and
Earth-fixed frames coincide at t = 0.

Angle conventions.  look_angles reports compass azimuth (from north, positive
toward east) and elevation above the horizon.  The rest of the simulator works
in elevation *from broadside* (the array points at zenith), which is simply
90 deg minus the horizon elevation; Trajectory exposes both.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, NoVisiblePairError
from .upa import wrap_azimuth_deg

EARTH_RADIUS_KM = 6371.0
EARTH_MU_KM3_S2 = 398600.4418
EARTH_ROT_RAD_S = 7.2921159e-5


@dataclass(frozen=True)
class GroundSite:
    latitude_deg: float
    longitude_deg: float
    altitude_m: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ConfigError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg < 180.0:
            raise ConfigError(f"longitude {self.longitude_deg} outside [-180, 180)")

    def ecef_km(self) -> np.ndarray:
        lat = np.radians(self.latitude_deg)
        lon = np.radians(self.longitude_deg)
        r = EARTH_RADIUS_KM + self.altitude_m / 1e3
        return r * np.array([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])


@dataclass(frozen=True)
class ShellSpec:
    altitude_km: float
    inclination_deg: float
    plane_count: int
    sats_per_plane: int
    phasing: int = 0  # Walker-delta inter-plane phasing parameter F

    def __post_init__(self):
        if self.altitude_km <= 0:
            raise ConfigError(f"shell altitude must be positive, got {self.altitude_km}")
        if not 0.0 <= self.inclination_deg <= 180.0:
            raise ConfigError(f"inclination {self.inclination_deg} outside [0, 180]")
        if self.plane_count < 1 or self.sats_per_plane < 1:
            raise ConfigError("plane_count and sats_per_plane must be positive")


@dataclass(frozen=True)
class SatState:
    sat_id: str
    position_ecef_km: np.ndarray
    epoch_s: float


@dataclass(frozen=True)
class TimeHorizon:
    t_start_s: float
    t_end_s: float
    step_s: float

    def __post_init__(self):
        if self.t_end_s <= self.t_start_s:
            raise ConfigError("horizon end must be after start")
        if self.step_s <= 0:
            raise ConfigError("horizon step must be positive")
        n = (self.t_end_s - self.t_start_s) / self.step_s
        if abs(n - round(n)) > 1e-9:
            raise ConfigError(f"horizon span {self.t_end_s - self.t_start_s} not divisible by step {self.step_s}")

    @property
    def n_samples(self) -> int:
        return int(round((self.t_end_s - self.t_start_s) / self.step_s)) + 1

    def times(self) -> np.ndarray:
        return self.t_start_s + self.step_s * np.arange(self.n_samples)


@dataclass(frozen=True)
class TrajectorySample:
    """The direction 4-tuple at one timestep, broadside-referenced angles."""

    t: float
    ul_az_deg: float
    ul_el_deg: float  # from broadside
    dl_az_deg: float
    dl_el_deg: float  # from broadside


@dataclass(frozen=True)
class Constellation:
    """Circular-orbit elements for every satellite, structure-of-arrays."""

    a_km: np.ndarray
    inclination_rad: np.ndarray
    raan_rad: np.ndarray
    anomaly0_rad: np.ndarray
    sat_ids: tuple[str, ...]

    @property
    def n_sats(self) -> int:
        return self.a_km.size

    def subset(self, idx) -> "Constellation":
        ids = tuple(self.sat_ids[i] for i in np.atleast_1d(idx))
        return Constellation(
            a_km=self.a_km[idx],
            inclination_rad=self.inclination_rad[idx],
            raan_rad=self.raan_rad[idx],
            anomaly0_rad=self.anomaly0_rad[idx],
            sat_ids=ids,
        )


def generate_constellation(shells: Sequence[ShellSpec], seed: int) -> Constellation:
    """Walker-delta layout for each shell, with seeded per-shell rotations.

    Within a shell of P planes and S satellites per plane: RAAN spacing
    360/P deg, in-plane anomaly spacing 360/S deg, and the phasing parameter F
    advances anomaly by F*360/(P*S) deg per plane.  The seed only rotates each
    shell as a whole (random RAAN / anomaly offsets); spacing is untouched.
    """
    if len(shells) == 0:
        raise ConfigError("constellation needs at least one shell")
    rng = np.random.default_rng(seed)
    a_parts, inc_parts, raan_parts, anom_parts, ids = [], [], [], [], []
    for si, shell in enumerate(shells):
        raan_off = rng.uniform(0.0, 2.0 * np.pi)
        anom_off = rng.uniform(0.0, 2.0 * np.pi)
        p = np.arange(shell.plane_count)
        s = np.arange(shell.sats_per_plane)
        raan = raan_off + 2.0 * np.pi * p[:, None] / shell.plane_count + 0.0 * s[None, :]
        anom = (
            anom_off
            + 2.0 * np.pi * s[None, :] / shell.sats_per_plane
            + 2.0 * np.pi * shell.phasing * p[:, None] / (shell.plane_count * shell.sats_per_plane)
        )
        count = shell.plane_count * shell.sats_per_plane
        a_parts.append(np.full(count, EARTH_RADIUS_KM + shell.altitude_km))
        inc_parts.append(np.full(count, np.radians(shell.inclination_deg)))
        raan_parts.append(raan.ravel())
        anom_parts.append(anom.ravel())
        ids.extend(
            f"s{si}-p{pi}-{vi}" for pi in range(shell.plane_count) for vi in range(shell.sats_per_plane)
        )
    return Constellation(
        a_km=np.concatenate(a_parts),
        inclination_rad=np.concatenate(inc_parts),
        raan_rad=np.concatenate(raan_parts) % (2.0 * np.pi),
        anomaly0_rad=np.concatenate(anom_parts) % (2.0 * np.pi),
        sat_ids=tuple(ids),
    )


def propagate_eci(con: Constellation, t) -> np.ndarray:
    """Inertial positions in km; (n_sats, 3) for scalar t, (T, n_sats, 3) for arrays."""
    t = np.asarray(t, dtype=float)[..., None]
    n = np.sqrt(EARTH_MU_KM3_S2 / con.a_km**3)  # mean motion, rad/s
    nu = con.anomaly0_rad + n * t
    cos_nu, sin_nu = np.cos(nu), np.sin(nu)
    cos_O, sin_O = np.cos(con.raan_rad), np.sin(con.raan_rad)
    cos_i, sin_i = np.cos(con.inclination_rad), np.sin(con.inclination_rad)
    x = con.a_km * (cos_O * cos_nu - sin_O * sin_nu * cos_i)
    y = con.a_km * (sin_O * cos_nu + cos_O * sin_nu * cos_i)
    z = con.a_km * (sin_nu * sin_i)
    return np.stack([x, y, z], axis=-1)


def propagate(con: Constellation, t) -> np.ndarray:
    """Earth-fixed positions in km; same shape behavior as propagate_eci."""
    eci = propagate_eci(con, t)
    theta = np.asarray(t, dtype=float)[..., None] * EARTH_ROT_RAD_S
    c, s = np.cos(theta), np.sin(theta)
    x = c * eci[..., 0] + s * eci[..., 1]
    y = -s * eci[..., 0] + c * eci[..., 1]
    return np.stack([x, y, eci[..., 2]], axis=-1)


def sat_state(con: Constellation, index: int, t: float) -> SatState:
    pos = propagate(con.subset(np.array([index])), t)[0]
    return SatState(sat_id=con.sat_ids[index], position_ecef_km=pos, epoch_s=t)


def look_angles(site: GroundSite, positions_ecef_km: np.ndarray):
    """Topocentric azimuth / elevation-above-horizon / range for ECEF points.

    Accepts a single 3-vector or an (..., 3) stack.  Azimuth is compass
    convention (0 = north, 90 = east), wrapped to [-180, 180).
    """
    pos = np.asarray(positions_ecef_km, dtype=float)
    lat = np.radians(site.latitude_deg)
    lon = np.radians(site.longitude_deg)
    east = np.array([-np.sin(lon), np.cos(lon), 0.0])
    north = np.array([-np.sin(lat) * np.cos(lon), -np.sin(lat) * np.sin(lon), np.cos(lat)])
    up = np.array([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
    rho = pos - site.ecef_km()
    e = rho @ east
    n = rho @ north
    u = rho @ up
    rng_km = np.sqrt(e * e + n * n + u * u)
    el = np.degrees(np.arcsin(np.clip(u / rng_km, -1.0, 1.0)))
    az = wrap_azimuth_deg(np.degrees(np.arctan2(e, n)))
    return az, el, rng_km


@dataclass(frozen=True)
class Trajectory:
    """One satellite's track over the horizon, as seen from the site."""

    sat_id: str
    t_s: np.ndarray
    az_deg: np.ndarray
    el_horizon_deg: np.ndarray  # elevation above horizon
    range_km: np.ndarray
    epoch_offset_s: float = 0.0  # scenario time of horizon t = 0

    @property
    def el_broadside_deg(self) -> np.ndarray:
        return 90.0 - self.el_horizon_deg


def _track(con: Constellation, index: int, site: GroundSite, times: np.ndarray, epoch: float) -> Trajectory:
    sub = con.subset(np.array([index]))
    pos = propagate(sub, epoch + times)[:, 0, :]
    az, el, rng_km = look_angles(site, pos)
    return Trajectory(
        sat_id=con.sat_ids[index],
        t_s=times.copy(),
        az_deg=az,
        el_horizon_deg=el,
        range_km=rng_km,
        epoch_offset_s=epoch,
    )


def select_pair(
    con: Constellation,
    site: GroundSite,
    mask_el_deg: float,
    min_duration_s: float,
    seed: int,
    step_s: float = 1.0,
    scan_increment_s: float = 60.0,
    scan_limit_s: float = 86400.0,
) -> tuple[Trajectory, Trajectory, TimeHorizon]:
    """Pick an uplink/downlink satellite pair visible for a whole window.

    Scans scenario time in scan_increment steps; at the first epoch where at
    least two satellites stay above the mask for the full window, draws two of
    them (and the uplink/downlink role split) uniformly at random.  Returned
    trajectories use horizon-local time starting at zero.
    """
    if not 0.0 < mask_el_deg < 90.0:
        raise ConfigError(f"elevation mask {mask_el_deg} outside (0, 90)")
    if min_duration_s <= 0:
        raise ConfigError("min_duration must be positive")
    horizon = TimeHorizon(0.0, min_duration_s, step_s)
    offsets = horizon.times()
    rng = np.random.default_rng(seed)
    epoch = 0.0
    while epoch <= scan_limit_s:
        # Cheap prefilter: above the mask at window start, middle, and end.
        probes = epoch + np.array([0.0, min_duration_s / 2.0, min_duration_s])
        _, el, _ = look_angles(site, propagate(con, probes))
        candidates = np.flatnonzero(np.all(el >= mask_el_deg, axis=0))
        qualifying = []
        if candidates.size:
            sub = con.subset(candidates)
            _, el_full, _ = look_angles(site, propagate(sub, epoch + offsets))
            keep = np.all(el_full >= mask_el_deg, axis=0)
            qualifying = [int(i) for i in candidates[keep]]
        if len(qualifying) >= 2:
            pick = rng.choice(len(qualifying), size=2, replace=False)
            first, second = qualifying[pick[0]], qualifying[pick[1]]
            if rng.integers(2) == 1:
                first, second = second, first
            ul = _track(con, first, site, offsets, epoch)
            dl = _track(con, second, site, offsets, epoch)
            return ul, dl, horizon
        epoch += scan_increment_s
    raise NoVisiblePairError(
        f"no two satellites stayed above {mask_el_deg} deg for {min_duration_s} s "
        f"anywhere in the scanned window [0, {scan_limit_s}] s"
    )


def direction_tuples(ul: Trajectory, dl: Trajectory) -> list[TrajectorySample]:
    """Zip the two tracks into per-timestep direction tuples (broadside el)."""
    if ul.t_s.shape != dl.t_s.shape or not np.allclose(ul.t_s, dl.t_s):
        raise ValueError("uplink and downlink tracks sample different time grids")
    return [
        TrajectorySample(
            t=float(t),
            ul_az_deg=float(ua),
            ul_el_deg=float(ue),
            dl_az_deg=float(da),
            dl_el_deg=float(de),
        )
        for t, ua, ue, da, de in zip(
            ul.t_s, ul.az_deg, ul.el_broadside_deg, dl.az_deg, dl.el_broadside_deg
        )
    ]


def export_trajectory_csv(path, ul: Trajectory, dl: Trajectory) -> None:
    """Write the pair's track to CSV (broadside elevations, 6 decimals)."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "ul_az", "ul_el", "dl_az", "dl_el", "ul_range_km", "dl_range_km"])
        for i, t in enumerate(ul.t_s):
            writer.writerow(
                [
                    f"{t:.6f}",
                    f"{ul.az_deg[i]:.6f}",
                    f"{ul.el_broadside_deg[i]:.6f}",
                    f"{dl.az_deg[i]:.6f}",
                    f"{dl.el_broadside_deg[i]:.6f}",
                    f"{ul.range_km[i]:.6f}",
                    f"{dl.range_km[i]:.6f}",
                ]
            )
