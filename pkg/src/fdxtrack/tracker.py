"""
Beam tracking: bias-fit grid, neighborhoods, candidate measurement, and
exhaustive sum-rate selection, plus the direct-steering baseline.

The proposed scheme quantizes the pass trajectory onto a best-fit 1 deg
lattice (a per-axis bias beta in [-0.5, 0.5] minimizes the quantization
residual), dilates the grid with a small neighborhood of integer-degree
shifts, measures the self-interference of every resulting candidate beam pair
once, and then picks, at every timestep, the candidate maximizing the sum
spectral efficiency.

Candidates live on an integer lattice: a point is stored as four integers k
with direction value k * resolution - bias per axis.  That makes
deduplication exact (no float set algebra), azimuth wraparound a modulo on
integers, and the candidate order canonical: lexicographic in
(ul_az, ul_el, dl_az, dl_el) lattice coordinates.  Ties in the per-timestep
argmax resolve to the first candidate in that order.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .channel import LinkBudget, SiChannel, from_db, to_db
from .errors import ConfigError
from .orbits import TrajectorySample
from .upa import QuantizerSpec, UpaGeometry, beam_matrix, wrap_azimuth_deg

log = logging.getLogger(__name__)

# Axis order used for every 4-tuple in this module.
AXES = ("ul_az", "ul_el", "dl_az", "dl_el")
_AZ_AXES = (0, 2)
_EL_AXES = (1, 3)


@dataclass(frozen=True)
class BiasVector:
    ul_az: float
    ul_el: float
    dl_az: float
    dl_el: float

    def __post_init__(self):
        for name in AXES:
            v = getattr(self, name)
            if not -0.5 <= v <= 0.5:
                raise ValueError(f"bias component {name}={v} outside [-0.5, 0.5]")

    def as_array(self) -> np.ndarray:
        return np.array([self.ul_az, self.ul_el, self.dl_az, self.dl_el])


@dataclass(frozen=True)
class DirectionGrid:
    """Deduplicated trajectory quantization; integer lattice + shared bias."""

    lattice: np.ndarray  # (n, 4) int64, lexicographically sorted
    bias: BiasVector
    resolution_deg: float = 1.0

    @property
    def n_points(self) -> int:
        return self.lattice.shape[0]

    def points_deg(self) -> np.ndarray:
        return _lattice_to_deg(self.lattice, self.bias, self.resolution_deg)


@dataclass(frozen=True)
class Neighborhood:
    delta_az: int
    delta_el: int
    offsets: np.ndarray  # (m, 4) int64

    @property
    def size(self) -> int:
        return self.offsets.shape[0]


@dataclass(frozen=True)
class CandidateSet:
    """The deduplicated candidate directions, with measured INR once filled."""

    lattice: np.ndarray  # (n, 4) int64, lexicographically sorted
    bias: BiasVector
    resolution_deg: float
    inr_db: np.ndarray | None = None  # aligned with lattice rows
    n_clipped: int = 0

    @property
    def n_candidates(self) -> int:
        return self.lattice.shape[0]

    def directions_deg(self) -> np.ndarray:
        return _lattice_to_deg(self.lattice, self.bias, self.resolution_deg)


@dataclass(frozen=True)
class PassChannels:
    """Per-timestep LOS channels plus the static SI channel for one pass."""

    h_ul: np.ndarray  # (T, N_t) complex
    h_dl: np.ndarray  # (T, N_r) complex
    si: SiChannel
    geom_tx: UpaGeometry
    geom_rx: UpaGeometry
    quant: QuantizerSpec


@dataclass(frozen=True)
class BeamSchedule:
    """Chosen directions, beams, and metrics for every timestep of a pass."""

    scheme: str
    t_s: np.ndarray
    directions_deg: np.ndarray  # (T, 4)
    f: np.ndarray  # (T, N_t) complex transmit beams
    w: np.ndarray  # (T, N_r) complex receive beams
    snr_ul_db: np.ndarray
    snr_dl_db: np.ndarray
    inr_db: np.ndarray
    sinr_dl_db: np.ndarray
    sum_se: np.ndarray


def _lattice_to_deg(lattice: np.ndarray, bias: BiasVector, resolution: float) -> np.ndarray:
    vals = lattice.astype(float) * resolution - bias.as_array()
    for ax in _AZ_AXES:
        vals[:, ax] = wrap_azimuth_deg(vals[:, ax])
    return vals


def _wrap_az_lattice(lattice: np.ndarray, resolution: float) -> np.ndarray:
    """Wrap the two azimuth axes modulo 360 deg worth of lattice steps."""
    period = 360.0 / resolution
    if abs(period - round(period)) > 1e-9:
        raise ConfigError(f"resolution {resolution} does not divide 360 deg")
    period = int(round(period))
    half = period // 2
    out = lattice.copy()
    for ax in _AZ_AXES:
        out[:, ax] = (out[:, ax] + half) % period - half
    return out


def fit_bias_1d(angles_deg: Sequence[float], search_step_deg: float = 0.001) -> float:
    """Scan beta in [-0.5, 0.5] minimizing the squared rounding residual.

    Ties go to the smallest beta.  Rounding is numpy's round-half-to-even;
    half-integer inputs are a measure-zero corner and any consistent
    convention gives the same objective value.
    """
    angles = np.asarray(angles_deg, dtype=float)
    if angles.size == 0:
        raise ValueError("need at least one angle to fit a bias")
    if search_step_deg <= 0:
        raise ValueError("search step must be positive")
    n_steps = int(round(1.0 / search_step_deg))
    betas = np.linspace(-0.5, 0.5, n_steps + 1)
    shifted = angles[None, :] + betas[:, None]
    resid = shifted - np.round(shifted)
    objective = np.sum(resid * resid, axis=1)
    return float(betas[int(np.argmin(objective))])


def fit_bias(samples: Sequence[TrajectorySample], search_step_deg: float = 0.001) -> BiasVector:
    """Fit the four per-axis biases independently over the pass."""
    if len(samples) == 0:
        raise ValueError("empty trajectory")
    streams = {
        "ul_az": [s.ul_az_deg for s in samples],
        "ul_el": [s.ul_el_deg for s in samples],
        "dl_az": [s.dl_az_deg for s in samples],
        "dl_el": [s.dl_el_deg for s in samples],
    }
    return BiasVector(**{k: fit_bias_1d(v, search_step_deg) for k, v in streams.items()})


def bias_objective(angles_deg, beta: float) -> float:
    """The residual sum the bias search minimizes; exposed for checks."""
    x = np.asarray(angles_deg, dtype=float) + beta
    r = x - np.round(x)
    return float(np.sum(r * r))


def build_grid(
    samples: Sequence[TrajectorySample],
    bias: BiasVector,
    resolution_deg: float = 1.0,
) -> DirectionGrid:
    """Quantize every sample with round(angle + bias) - bias, then dedup."""
    if len(samples) == 0:
        raise ValueError("empty trajectory")
    omega = np.array(
        [[s.ul_az_deg, s.ul_el_deg, s.dl_az_deg, s.dl_el_deg] for s in samples]
    )
    b = bias.as_array()
    lattice = np.round((omega + b) / resolution_deg).astype(np.int64)
    lattice = _wrap_az_lattice(lattice, resolution_deg)
    lattice = np.unique(lattice, axis=0)
    return DirectionGrid(lattice=lattice, bias=bias, resolution_deg=resolution_deg)


def build_neighborhood(delta_az: int, delta_el: int) -> Neighborhood:
    """All integer shift 4-tuples within +-delta_az / +-delta_el per axis."""
    if int(delta_az) != delta_az or int(delta_el) != delta_el:
        raise ConfigError("neighborhood deltas must be integers")
    if delta_az < 0 or delta_el < 0:
        raise ConfigError("neighborhood deltas must be non-negative")
    az_range = np.arange(-int(delta_az), int(delta_az) + 1)
    el_range = np.arange(-int(delta_el), int(delta_el) + 1)
    grids = np.meshgrid(az_range, el_range, az_range, el_range, indexing="ij")
    offsets = np.stack([g.ravel() for g in grids], axis=-1).astype(np.int64)
    return Neighborhood(delta_az=int(delta_az), delta_el=int(delta_el), offsets=offsets)


def build_candidates(grid: DirectionGrid, nbr: Neighborhood) -> CandidateSet:
    """Minkowski sum grid + neighborhood on the lattice, dedup, clip horizon.

    Shifted points whose elevation value leaves [0, 90] deg have no
    broadside-referenced beam and are dropped (counted in n_clipped).
    """
    if grid.n_points == 0:
        raise ValueError("cannot build candidates from an empty grid")
    summed = (grid.lattice[:, None, :] + nbr.offsets[None, :, :]).reshape(-1, 4)
    summed = _wrap_az_lattice(summed, grid.resolution_deg)
    before = np.unique(summed, axis=0)
    b = grid.bias.as_array()
    el_vals = before[:, _EL_AXES].astype(float) * grid.resolution_deg - b[list(_EL_AXES)]
    keep = np.all((el_vals >= -1e-9) & (el_vals <= 90.0 + 1e-9), axis=1)
    n_clipped = int(before.shape[0] - np.count_nonzero(keep))
    if n_clipped:
        log.debug("clipped %d candidate(s) with elevation outside [0, 90] deg", n_clipped)
    return CandidateSet(
        lattice=before[keep],
        bias=grid.bias,
        resolution_deg=grid.resolution_deg,
        inr_db=None,
        n_clipped=n_clipped,
    )


def _unique_dir_beams(cands: CandidateSet, geom_tx, geom_rx, quant):
    """Beams for the UNIQUE uplink/downlink directions among the candidates.

    Candidates are pairs drawn from far fewer distinct one-sided directions,
    so beams (and anything bilinear in them) are computed per unique direction
    and gathered through index arrays.  Returns (f_unique, w_unique, ul_index,
    dl_index) with candidate i using f_unique[ul_index[i]], w_unique[dl_index[i]].
    """
    dirs = cands.directions_deg()
    ul_dirs, ul_idx = np.unique(dirs[:, :2], axis=0, return_inverse=True)
    dl_dirs, dl_idx = np.unique(dirs[:, 2:], axis=0, return_inverse=True)
    f_unique = beam_matrix(geom_tx, ul_dirs[:, 0], np.clip(ul_dirs[:, 1], 0.0, 90.0), quant)
    w_unique = beam_matrix(geom_rx, dl_dirs[:, 0], np.clip(dl_dirs[:, 1], 0.0, 90.0), quant)
    return f_unique, w_unique, ul_idx, dl_idx


def measure_candidates(
    cands: CandidateSet,
    si: SiChannel,
    budget: LinkBudget,
    geom_tx: UpaGeometry,
    geom_rx: UpaGeometry,
    quant: QuantizerSpec = QuantizerSpec(),
) -> CandidateSet:
    """Tabulate INR for every candidate, one measurement per tuple.

    The table is keyed by row order of the candidate lattice and reused at
    every timestep (the SI channel is static over a pass).
    """
    f_u, w_u, ul_idx, dl_idx = _unique_dir_beams(cands, geom_tx, geom_rx, quant)
    coupling_all = w_u.conj() @ (si.matrix @ f_u.T)  # (n_dl_unique, n_ul_unique)
    coupling = np.abs(coupling_all[dl_idx, ul_idx]) ** 2
    inr_lin = from_db(budget.ut_tx_power_dbm) * coupling / from_db(budget.ut_noise_dbm)
    return replace(cands, inr_db=np.asarray(to_db(inr_lin)))


def _snr_factors(budget: LinkBudget) -> tuple[float, float]:
    ul = from_db(budget.ut_tx_power_dbm) * from_db(budget.sat_rx_gain_dbi) / from_db(budget.sat_noise_dbm)
    dl = from_db(budget.sat_tx_power_dbm) * from_db(budget.sat_tx_gain_dbi) / from_db(budget.ut_noise_dbm)
    return ul, dl


def select_beams(
    samples: Sequence[TrajectorySample],
    cands: CandidateSet,
    budget: LinkBudget,
    channels: PassChannels,
    scheme: str = "proposed",
) -> BeamSchedule:
    """Per-timestep exhaustive argmax of the sum spectral efficiency over Psi.

    Scans candidates in their canonical lexicographic order with
    strict-improvement updates, so equal-rate ties keep the earliest
    candidate.
    """
    if cands.inr_db is None:
        raise ValueError("candidate set has no INR table; run measure_candidates first")
    t_count = len(samples)
    if channels.h_ul.shape[0] != t_count or channels.h_dl.shape[0] != t_count:
        raise ValueError("channel rows do not match trajectory length")
    f_u, w_u, ul_idx, dl_idx = _unique_dir_beams(cands, channels.geom_tx, channels.geom_rx, channels.quant)
    k_ul, k_dl = _snr_factors(budget)
    inr_lin = from_db(cands.inr_db)
    dirs = cands.directions_deg()

    # (T, n_unique) coupled powers; the t loop gathers per-candidate values
    # so the full (T, n_candidates) rate matrix is never materialized.
    snr_ul_lin_u = k_ul * np.abs(channels.h_ul @ f_u.conj().T) ** 2
    snr_dl_lin_u = k_dl * np.abs(channels.h_dl @ w_u.conj().T) ** 2
    log_ul_u = np.log2(1.0 + snr_ul_lin_u)

    best = np.empty(t_count, dtype=np.int64)
    sel_snr_ul = np.empty(t_count)
    sel_snr_dl = np.empty(t_count)
    sel_sinr = np.empty(t_count)
    for t in range(t_count):
        sinr_lin = snr_dl_lin_u[t, dl_idx] / (1.0 + inr_lin)
        rate = log_ul_u[t, ul_idx] + np.log2(1.0 + sinr_lin)
        b = int(np.argmax(rate))  # first max = lexicographically first
        best[t] = b
        sel_snr_ul[t] = snr_ul_lin_u[t, ul_idx[b]]
        sel_snr_dl[t] = snr_dl_lin_u[t, dl_idx[b]]
        sel_sinr[t] = sinr_lin[b]
    return BeamSchedule(
        scheme=scheme,
        t_s=np.array([s.t for s in samples]),
        directions_deg=dirs[best],
        f=f_u[ul_idx[best]],
        w=w_u[dl_idx[best]],
        snr_ul_db=np.asarray(to_db(sel_snr_ul)),
        snr_dl_db=np.asarray(to_db(sel_snr_dl)),
        inr_db=cands.inr_db[best],
        sinr_dl_db=np.asarray(to_db(sel_sinr)),
        sum_se=np.log2(1.0 + sel_snr_ul) + np.log2(1.0 + sel_sinr),
    )


def track_conventional(
    samples: Sequence[TrajectorySample],
    budget: LinkBudget,
    channels: PassChannels,
    scheme: str = "conventional",
) -> BeamSchedule:
    """Direct steering: matched-filter beams exactly at the trajectory tuple."""
    omega = np.array(
        [[s.ul_az_deg, s.ul_el_deg, s.dl_az_deg, s.dl_el_deg] for s in samples]
    )
    f_rows = beam_matrix(channels.geom_tx, omega[:, 0], omega[:, 1], channels.quant)
    w_rows = beam_matrix(channels.geom_rx, omega[:, 2], omega[:, 3], channels.quant)
    k_ul, k_dl = _snr_factors(budget)
    g_ul = np.abs(np.einsum("ij,ij->i", channels.h_ul, f_rows.conj())) ** 2
    g_dl = np.abs(np.einsum("ij,ij->i", channels.h_dl, w_rows.conj())) ** 2
    hf = channels.si.matrix @ f_rows.T  # (N_r, T)
    si_coupling = np.abs(np.einsum("ij,ji->i", w_rows.conj(), hf)) ** 2
    snr_ul_lin = k_ul * g_ul
    snr_dl_lin = k_dl * g_dl
    inr_lin = from_db(budget.ut_tx_power_dbm) * si_coupling / from_db(budget.ut_noise_dbm)
    sinr_lin = snr_dl_lin / (1.0 + inr_lin)
    return BeamSchedule(
        scheme=scheme,
        t_s=np.array([s.t for s in samples]),
        directions_deg=omega,
        f=f_rows,
        w=w_rows,
        snr_ul_db=np.asarray(to_db(snr_ul_lin)),
        snr_dl_db=np.asarray(to_db(snr_dl_lin)),
        inr_db=np.asarray(to_db(inr_lin)),
        sinr_dl_db=np.asarray(to_db(sinr_lin)),
        sum_se=np.log2(1.0 + snr_ul_lin) + np.log2(1.0 + sinr_lin),
    )


def export_candidates_json(cands: CandidateSet, path) -> None:
    """Dump the candidate set and its INR table for offline inspection."""
    if cands.inr_db is None:
        raise ValueError("candidate set has no INR table to export")
    dirs = cands.directions_deg()
    records = [
        {
            "ul_az": round(float(dirs[i, 0]), 6),
            "ul_el": round(float(dirs[i, 1]), 6),
            "dl_az": round(float(dirs[i, 2]), 6),
            "dl_el": round(float(dirs[i, 3]), 6),
            "inr_db": round(float(cands.inr_db[i]), 6),
        }
        for i in range(cands.n_candidates)
    ]
    with open(path, "w") as fh:
        json.dump(records, fh, indent=2)
        fh.write("\n")
